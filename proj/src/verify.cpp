#include "asynag/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "asynag/augmented.hpp"
#include "asynag/errors.hpp"
#include "asynag/pcpa.hpp"
#include "asynag/sync_reference.hpp"

namespace asynag {

bool VerifyReport::passed() const {
  return std::none_of(checks.begin(), checks.end(),
                      [](const CheckResult& c) { return c.status == CheckResult::Status::fail; });
}

const CheckResult* VerifyReport::find(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

std::string VerifyReport::to_text() const {
  std::ostringstream os;
  for (const auto& c : checks) {
    const char* tag = c.status == CheckResult::Status::pass ? "PASS" : c.status == CheckResult::Status::fail ? "FAIL"
                                                                                                             : "SKIP";
    os << tag << "  " << c.name << ": " << c.detail << '\n';
  }
  os << (passed() ? "all checks passed" : "verification FAILED") << '\n';
  return os.str();
}

namespace {

std::string fmt(const char* format, double a, double b = 0.0) {
  char buf[200];
  std::snprintf(buf, sizeof buf, format, a, b);
  return buf;
}

CheckResult make(std::string name, bool ok, std::string detail) {
  return {std::move(name), ok ? CheckResult::Status::pass : CheckResult::Status::fail, std::move(detail)};
}

bool is_updated(const EventRecord& e, std::size_t i) {
  return std::find(e.skipped.begin(), e.skipped.end(), i) == e.skipped.end();
}

// Sender state (v, y) behind a message sent at event k.
std::span<const double> sent_v(const EventTrace& t, long k, std::size_t i) {
  const Vec& v = k < 0 ? t.x0 : t.events[static_cast<std::size_t>(k)].v;
  return {v.data() + i * t.p, t.p};
}

double sent_y(const EventTrace& t, long k, std::size_t i) {
  return k < 0 ? 1.0 : t.events[static_cast<std::size_t>(k)].y[i];
}

void conservation_checks(const EventTrace& t, const VerifyOptions& opt, VerifyReport& report) {
  const std::size_t n = t.n, p = t.p, K = t.events.size();
  std::vector<std::vector<std::size_t>> sent_at(K + 1), consumed_at(K);
  for (std::size_t m = 0; m < t.messages.size(); ++m) {
    const MessageRecord& msg = t.messages[m];
    sent_at[static_cast<std::size_t>(msg.send_event + 1)].push_back(m);
    if (msg.consume_event >= 0) consumed_at[static_cast<std::size_t>(msg.consume_event)].push_back(m);
  }
  const auto payload_scale = [&](std::size_t sender) {
    return 1.0 / static_cast<double>(t.graph.out_degree(sender));
  };

  std::vector<long double> mass(p, 0.0L);
  long double weight = 0.0L;
  const auto add = [&](std::size_t m, long double sign) {
    const MessageRecord& msg = t.messages[m];
    const double s = payload_scale(msg.sender);
    const auto v = sent_v(t, msg.send_event, msg.sender);
    for (std::size_t c = 0; c < p; ++c) mass[c] += sign * static_cast<long double>(s * v[c]);
    weight += sign * static_cast<long double>(s * sent_y(t, msg.send_event, msg.sender));
  };
  for (std::size_t m : sent_at[0]) add(m, 1.0L);

  double worst_mass = 0.0, worst_weight = 0.0;
  long mass_event = -1, weight_event = -1;
  double worst_buffer = 0.0;
  long buffer_event = -1;
  Vec sum_v(p);
  for (std::size_t k = 0; k < K; ++k) {
    const EventRecord& e = t.events[k];
    const auto prev_v = k == 0 ? std::span<const double>(t.x0) : std::span<const double>(t.events[k - 1].v);
    const auto prev_x = t.x_before(static_cast<long>(k));
    // Per-activation accounting: consumed sums against the recorded state.
    for (std::size_t i = 0; i < n; ++i) {
      const bool active = std::find(e.activated.begin(), e.activated.end(), i) != e.activated.end();
      double dev = 0.0;
      if (active && is_updated(e, i)) {
        std::fill(sum_v.begin(), sum_v.end(), 0.0);
        double sum_y = 0.0;
        for (std::size_t m : consumed_at[k]) {
          const MessageRecord& msg = t.messages[m];
          if (msg.receiver != i) continue;
          const double s = payload_scale(msg.sender);
          const auto v = sent_v(t, msg.send_event, msg.sender);
          for (std::size_t c = 0; c < p; ++c) sum_v[c] += s * v[c];
          sum_y += s * sent_y(t, msg.send_event, msg.sender);
        }
        dev = std::abs(sum_y - e.y[i]) / std::max(1.0, std::abs(e.y[i]));
        for (std::size_t c = 0; c < p; ++c) {
          const double expect = sum_v[c] + (e.x[i * p + c] - prev_x[i * p + c]);
          dev = std::max(dev, std::abs(expect - e.v[i * p + c]) / std::max(1.0, std::abs(e.v[i * p + c])));
        }
      } else if (k > 0) {
        const EventRecord& before = t.events[k - 1];
        dev = std::abs(before.y[i] - e.y[i]);
        for (std::size_t c = 0; c < p; ++c) dev = std::max(dev, std::abs(prev_v[i * p + c] - e.v[i * p + c]));
      }
      if (dev > worst_buffer) worst_buffer = dev;
      if (dev > opt.mass_tolerance && buffer_event < 0) buffer_event = static_cast<long>(k);
    }

    for (std::size_t m : consumed_at[k]) add(m, -1.0L);
    for (std::size_t m : sent_at[k + 1]) add(m, 1.0L);
    double scale = 1.0, err = 0.0;
    for (std::size_t c = 0; c < p; ++c) {
      double total = 0.0;
      for (std::size_t i = 0; i < n; ++i) total += e.x[i * p + c];
      scale = std::max(scale, std::abs(total));
      err = std::max(err, static_cast<double>(std::abs(mass[c] - static_cast<long double>(total))));
    }
    const double rel = err / scale;
    if (rel > worst_mass) worst_mass = rel;
    if (rel > opt.mass_tolerance && mass_event < 0) mass_event = static_cast<long>(k);
    const double werr = static_cast<double>(std::abs(weight - static_cast<long double>(n)));
    if (werr > worst_weight) worst_weight = werr;
    if (werr > opt.weight_tolerance && weight_event < 0) weight_event = static_cast<long>(k);
  }
  std::string detail = fmt("max relative mass error %.3e, max weight error %.3e", worst_mass, worst_weight);
  if (mass_event >= 0) detail += "; mass off first at event " + std::to_string(mass_event);
  if (weight_event >= 0) detail += "; weight off first at event " + std::to_string(weight_event);
  report.checks.push_back(make("conservation", mass_event < 0 && weight_event < 0, detail));
  detail = fmt("max deviation %.3e", worst_buffer);
  if (buffer_event >= 0) detail += "; first mismatch at event " + std::to_string(buffer_event);
  report.checks.push_back(make("buffer-accounting", buffer_event < 0, detail));
}

}  // namespace

VerifyReport verify_trace(const StoredTrace& stored, const VerifyOptions& opt) {
  const EventTrace& t = stored.trace;
  VerifyReport report;
  const std::size_t n = t.n;
  const long K = static_cast<long>(t.events.size());

  conservation_checks(t, opt, report);

  DelayConstants bounds;
  bool have_bounds = true;
  try {
    bounds = delay_constants(n, static_cast<double>(t.tau_us), static_cast<double>(t.tau_lo_us),
                             static_cast<double>(t.tau_hi_us));
  } catch (const ConfigError& e) {
    have_bounds = false;
    report.checks.push_back({"delay-constants", CheckResult::Status::fail, e.what()});
  }

  {
    double smallest = std::numeric_limits<double>::infinity();
    for (const auto& e : t.events)
      for (double y : e.y) smallest = std::min(smallest, y);
    bool ok = smallest > 0.0;
    std::string detail = fmt("min y %.3e", smallest);
    if (ok && have_bounds && n <= 3) {
      const double floor_y = std::pow(static_cast<double>(n), -static_cast<double>(n) * static_cast<double>(bounds.b));
      ok = smallest >= floor_y;
      detail += fmt(", lower bound n^(-nb) = %.3e", floor_y);
    }
    report.checks.push_back(make("weight-positivity", ok, detail));
  }

  if (have_bounds) {
    // Activation windows.
    long worst_gap = 0;
    std::vector<long> last(n, -1);
    for (long k = 0; k < K; ++k)
      for (std::size_t i : t.events[static_cast<std::size_t>(k)].activated) {
        worst_gap = std::max(worst_gap, k - last[i]);
        last[i] = k;
      }
    for (std::size_t i = 0; i < n; ++i) worst_gap = std::max(worst_gap, K - last[i]);
    report.checks.push_back(make("activation-window", worst_gap <= bounds.b1,
                                 "longest activation gap " + std::to_string(worst_gap) +
                                     " events, b1 = " + std::to_string(bounds.b1)));

    long worst_delay = 0;
    std::size_t offender = 0;
    for (std::size_t m = 0; m < t.messages.size(); ++m) {
      const MessageRecord& msg = t.messages[m];
      const long waited = (msg.consume_event >= 0 ? msg.consume_event : K - 1) - msg.send_event;
      if (waited > worst_delay) {
        worst_delay = waited;
        offender = m;
      }
    }
    std::string detail = "max events between send and use " + std::to_string(worst_delay) + ", b = " +
                         std::to_string(bounds.b) + ", realized depth " +
                         std::to_string(compute_b_from_trace(t));
    if (worst_delay > bounds.b) detail += ", message " + std::to_string(offender);
    report.checks.push_back(make("consumption-delay", worst_delay <= bounds.b, detail));

    if (t.scheme == Scheme::nonadaptive) {
      report.checks.push_back({"counter-spread", CheckResult::Status::skip,
                               "counters of the nonadaptive scheme count own activations only"});
      report.checks.push_back({"schedule-bounds", CheckResult::Status::skip,
                               "counters of the nonadaptive scheme count own activations only"});
    } else {
      const long nb = static_cast<long>(n) * bounds.b;
      long spread = 0, growth = 0;
      std::vector<long> prev(n, 0);
      for (const auto& e : t.events) {
        const auto [lo, hi] = std::minmax_element(e.l.begin(), e.l.end());
        spread = std::max(spread, *hi - *lo);
        for (std::size_t i = 0; i < n; ++i) growth = std::max(growth, e.l[i] - prev[i]);
        prev = e.l;
      }
      report.checks.push_back(make("counter-spread", spread <= nb && growth <= nb + 1,
                                   "max spread " + std::to_string(spread) + ", max growth " +
                                       std::to_string(growth) + ", nb = " + std::to_string(nb)));
      const Schedule schedule = schedule_from_trace(t);
      if (schedule.size() == 0) {
        report.checks.push_back({"schedule-bounds", CheckResult::Status::skip, "no updates"});
      } else {
        const ScheduleReport sr = validate_schedule(schedule, schedule.size(), std::nullopt, nb + 1);
        const bool ok = sr.ok() && sr.sigma2 <= nb + 1;
        std::string d = "sigma1 " + std::to_string(sr.sigma1) + " (b1 = " + std::to_string(bounds.b1) +
                        "), sigma2 " + std::to_string(sr.sigma2) + " (nb + 1 = " + std::to_string(nb + 1) + ")";
        // Multi-player events stretch windows once serialized, so sigma1 is
        // compared only when activations are singletons.
        const bool singletons = std::all_of(t.events.begin(), t.events.end(),
                                            [](const EventRecord& e) { return e.activated.size() == 1; });
        const bool sigma1_ok = !singletons || sr.sigma1 <= bounds.b1;
        if (!sr.violations.empty()) d += "; " + sr.violations.front();
        report.checks.push_back(make("schedule-bounds", ok && sigma1_ok, d));
      }
    }
  }

  if (!stored.instance) {
    for (const char* name : {"column-stochastic", "augmented-replay", "sync-reference"})
      report.checks.push_back({name, CheckResult::Status::skip, "trace carries no game instance"});
    return report;
  }
  const CournotGame game(*stored.instance);
  if (game.players() != n || game.block_dim() != t.p) {
    report.checks.push_back({"augmented-replay", CheckResult::Status::fail, "embedded instance does not match trace"});
    return report;
  }
  try {
    const EquivalenceReport eq = check_equivalence(t, game, opt.replay_tolerance);
    report.checks.push_back(make("column-stochastic", eq.max_column_sum_error <= 1e-15 && eq.min_real_diagonal > 0.0,
                                 fmt("max column sum error %.3e, min real diagonal %.3e", eq.max_column_sum_error,
                                     eq.min_real_diagonal)));
    std::string d = fmt("b = %.0f, max deviation x %.3e", static_cast<double>(eq.b), eq.x.max) +
                    fmt(", z %.3e, y %.3e", eq.z.max, eq.y.max) + fmt(", mass %.3e", eq.mass.max);
    for (const auto& [name, dev] : {std::pair{"x", eq.x}, {"z", eq.z}, {"y", eq.y}})
      if (dev.first_event >= 0) d += std::string("; ") + name + " diverges at event " + std::to_string(dev.first_event);
    report.checks.push_back(
        make("augmented-replay", eq.x.max <= eq.tolerance && eq.z.max <= eq.tolerance && eq.y.max <= eq.tolerance &&
                                     eq.mass.max <= opt.mass_tolerance,
             d));
  } catch (const InvariantViolation& e) {
    report.checks.push_back({"augmented-replay", CheckResult::Status::fail, e.what()});
  }
  if (t.scheme == Scheme::synchronous) {
    const SyncComparison cmp = compare_with_sync_reference(t, game, opt.replay_tolerance);
    std::string d = fmt("max deviation x %.3e, z %.3e", cmp.x.max, cmp.z.max) + fmt(", y %.3e", cmp.y.max) +
                    (cmp.counters_match ? ", counters match" : ", counters differ");
    report.checks.push_back(make("sync-reference", cmp.passed(), d));
  } else {
    report.checks.push_back({"sync-reference", CheckResult::Status::skip, "trace is not synchronous"});
  }
  return report;
}

VerifyReport verify_run(const std::string& trace_path, const VerifyOptions& options) {
  return verify_trace(load_trace(trace_path), options);
}

}  // namespace asynag
