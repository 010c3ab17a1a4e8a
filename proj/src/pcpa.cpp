#include "asynag/pcpa.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "asynag/errors.hpp"

namespace asynag {

Schedule round_robin(std::size_t players, std::size_t iterations, long increment) {
  if (players == 0) throw ConfigError("round_robin: no players");
  if (increment < 1) throw ConfigError("round_robin: increment must be >= 1");
  Schedule s;
  s.players = players;
  s.order.resize(iterations);
  for (std::size_t k = 0; k < iterations; ++k) s.order[k] = k % players;
  if (increment != 1) s.increments.assign(iterations, increment);
  return s;
}

ScheduleReport validate_schedule(const Schedule& schedule, std::size_t horizon, std::optional<long> sigma1_bound,
                                 std::optional<long> sigma2_bound) {
  if (horizon == 0) throw ContractViolation("validate_schedule: horizon must be >= 1");
  if (!schedule.increments.empty() && schedule.increments.size() != schedule.order.size())
    throw ContractViolation("validate_schedule: increments and order differ in length");
  const std::size_t n = schedule.players;
  const std::size_t K = std::min(horizon, schedule.size());
  ScheduleReport report;
  constexpr std::size_t kMaxListed = 20;
  const auto violation = [&](std::string what) {
    if (report.violations.size() < kMaxListed) report.violations.push_back(std::move(what));
  };

  // Window analysis: a gap of g iterations without player i needs sigma1 > g.
  std::vector<long> last(n, -1);
  std::vector<long> longest(n, 0);
  std::vector<long> where(n, 0);  // start of the longest gap
  const auto close_gap = [&](std::size_t i, long upto) {
    const long gap = upto - last[i] - 1;
    if (gap > longest[i]) {
      longest[i] = gap;
      where[i] = last[i] + 1;
    }
  };
  std::vector<long> r(n, 0);
  for (std::size_t k = 0; k < K; ++k) {
    const std::size_t i = schedule.order[k];
    if (i >= n) throw ContractViolation("validate_schedule: player index out of range");
    close_gap(i, static_cast<long>(k));
    last[i] = static_cast<long>(k);
    const long dr = schedule.increment(k);
    if (dr < 1) violation("iteration " + std::to_string(k) + ": increment " + std::to_string(dr) + " < 1");
    r[i] += dr;
    const auto [lo, hi] = std::minmax_element(r.begin(), r.end());
    report.sigma2 = std::max({report.sigma2, *hi - *lo, dr});
    if (sigma2_bound && (*hi - *lo > *sigma2_bound || dr > *sigma2_bound))
      violation("iteration " + std::to_string(k) + ": counter spread " + std::to_string(*hi - *lo) +
                ", increment " + std::to_string(dr) + " exceed sigma2 = " + std::to_string(*sigma2_bound));
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (last[i] < 0) {
      violation("player " + std::to_string(i + 1) + " never updates");
      report.sigma1 = std::max(report.sigma1, static_cast<long>(K) + 1);
      continue;
    }
    close_gap(i, static_cast<long>(K));
    report.sigma1 = std::max(report.sigma1, longest[i] + 1);
    if (sigma1_bound && longest[i] >= *sigma1_bound)
      violation("player " + std::to_string(i + 1) + " idle for " + std::to_string(longest[i]) +
                " iterations from " + std::to_string(where[i]) + " (sigma1 = " + std::to_string(*sigma1_bound) +
                ")");
  }
  return report;
}

Perturbation Perturbation::none() {
  return {[](std::size_t, long, std::span<double> eps) { std::fill(eps.begin(), eps.end(), 0.0); }};
}

Perturbation Perturbation::harmonic(double c) {
  return {[c](std::size_t, long k, std::span<double> eps) {
    std::fill(eps.begin(), eps.end(), c / (1.0 + static_cast<double>(k)));
  }};
}

Perturbation Perturbation::constant(double c) {
  return {[c](std::size_t, long, std::span<double> eps) { std::fill(eps.begin(), eps.end(), c); }};
}

PcpaResult pcpa_run(const Game& game, const Schedule& schedule, const StepsizeSchedule& rho,
                    const Perturbation& perturb, std::size_t iterations, std::span<const double> x0,
                    const std::function<void(long, std::span<const double>)>& observe, std::size_t observe_every) {
  const std::size_t n = game.players(), p = game.block_dim();
  if (x0.size() != n * p) throw ContractViolation("pcpa_run: x0 has wrong dimension");
  if (!is_feasible(game, x0)) throw ContractViolation("pcpa_run: x0 is infeasible");
  if (schedule.players != n) throw ContractViolation("pcpa_run: schedule is for a different player count");
  if (schedule.size() < iterations) throw ContractViolation("pcpa_run: schedule shorter than the run");

  PcpaResult result;
  result.x.assign(x0.begin(), x0.end());
  result.perturbation_sum.assign(n, 0.0);
  result.perturbation_tail.assign(n, 0.0);
  Vec& x = result.x;
  Vec mean = aggregate(game, x);
  std::vector<long> r(n, 0);
  Vec grad(p), eps(p), trial(p);
  const std::size_t tail_start = iterations - iterations / 10;
  if (observe) observe(0, x);

  for (std::size_t k = 0; k < iterations; ++k) {
    const std::size_t i = schedule.order[k];
    const long next_r = r[i] + schedule.increment(k);
    double alpha = 0.0;
    for (long t = r[i]; t < next_r; ++t) alpha += rho(t);
    r[i] = next_r;

    const std::span<double> xi(x.data() + i * p, p);
    game.gradient(i, xi, mean, grad);
    perturb.fill(i, static_cast<long>(k), eps);
    double eps_norm = 0.0;
    for (std::size_t c = 0; c < p; ++c) {
      trial[c] = xi[c] - alpha * (grad[c] + eps[c]);
      eps_norm += eps[c] * eps[c];
    }
    const double weighted = rho(static_cast<long>(k)) * std::sqrt(eps_norm);
    result.perturbation_sum[i] += weighted;
    if (k >= tail_start) result.perturbation_tail[i] += weighted;

    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t c = 0; c < p; ++c) mean[c] -= inv_n * xi[c];
    game.action_set(i).project(trial, xi);
    for (std::size_t c = 0; c < p; ++c) mean[c] += inv_n * xi[c];
    // Refresh the running mean now and then so rounding cannot drift.
    if ((k + 1) % 4096 == 0) mean = aggregate(game, x);

    result.iterations = static_cast<long>(k + 1);
    if (observe && observe_every > 0 && (k + 1) % observe_every == 0) observe(static_cast<long>(k + 1), x);
  }
  return result;
}

Schedule schedule_from_trace(const EventTrace& trace) {
  Schedule s;
  s.players = trace.n;
  std::vector<long> l(trace.n, 0);
  for (const EventRecord& e : trace.events) {
    std::vector<std::size_t> updated;
    for (std::size_t i : e.activated)
      if (std::find(e.skipped.begin(), e.skipped.end(), i) == e.skipped.end()) updated.push_back(i);
    std::sort(updated.begin(), updated.end());
    for (std::size_t i : updated) {
      s.order.push_back(i);
      s.increments.push_back(e.l[i] - l[i]);
    }
    l = e.l;
  }
  return s;
}

Vec serialize_event(const EventTrace& trace, const Game& game, long k) {
  if (k < 0 || k >= static_cast<long>(trace.events.size()))
    throw ContractViolation("serialize_event: event index out of range");
  const std::size_t p = trace.p;
  const EventRecord& e = trace.events[static_cast<std::size_t>(k)];
  const std::span<const double> before = trace.x_before(k);
  Vec x(before.begin(), before.end());
  if (trace.frozen) return x;
  const Vec mean_k = aggregate(game, before);

  std::vector<std::size_t> order;
  for (std::size_t i : e.activated)
    if (std::find(e.skipped.begin(), e.skipped.end(), i) == e.skipped.end()) order.push_back(i);
  std::sort(order.begin(), order.end());

  Vec f_local(p), f_exact(p), f_partial(p), eps(p), trial(p);
  for (std::size_t i : order) {
    const std::span<const double> xi_k(before.data() + i * p, p);
    const std::span<const double> zi(e.z.data() + i * p, p);
    // eps_i(k) = F_i(x_i(k), z_i(k+1)) - F_i(x_i(k), x̄(k)), then shifted to
    // the partially updated mean.
    game.gradient(i, xi_k, zi, f_local);
    game.gradient(i, xi_k, mean_k, f_exact);
    const Vec mean_u = aggregate(game, x);
    const std::span<double> xi(x.data() + i * p, p);
    game.gradient(i, xi, mean_u, f_partial);
    for (std::size_t c = 0; c < p; ++c) {
      eps[c] = (f_local[c] - f_exact[c]) + (f_exact[c] - f_partial[c]);
      trial[c] = xi[c] - e.alpha[i] * (f_partial[c] + eps[c]);
    }
    game.action_set(i).project(trial, xi);
  }
  return x;
}

void write_trajectory(std::ostream& os, std::size_t n, std::size_t p,
                      const std::vector<std::pair<long, Vec>>& samples) {
  os << "pcpa-trajectory v1\nn " << n << "\np " << p << "\nsamples " << samples.size() << '\n';
  char buf[32];
  for (const auto& [k, x] : samples) {
    os << "X " << k;
    for (double v : x) {
      std::snprintf(buf, sizeof buf, " %.17g", v);
      os << buf;
    }
    os << '\n';
  }
  os << "end\n";
}

}  // namespace asynag
