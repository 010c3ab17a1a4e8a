#include "asynag/augmented.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "asynag/compensated.hpp"
#include "asynag/errors.hpp"

namespace asynag {

double ColumnStochasticMatrix::at(std::size_t row, std::size_t col) const {
  double value = 0.0;
  for (const auto& [r, v] : columns_[col])
    if (r == row) value += v;
  return value;
}

std::vector<double> ColumnStochasticMatrix::dense() const {
  const std::size_t d = dim();
  std::vector<double> out(d * d, 0.0);
  for (std::size_t c = 0; c < d; ++c)
    for (const auto& [r, v] : columns_[c]) out[r * d + c] += v;
  return out;
}

double ColumnStochasticMatrix::max_column_sum_error() const {
  double worst = 0.0;
  for (const auto& col : columns_) {
    double sum = 0.0;
    for (const auto& entry : col) sum += entry.second;
    worst = std::max(worst, std::abs(sum - 1.0));
  }
  return worst;
}

double ColumnStochasticMatrix::min_real_diagonal(std::size_t real) const {
  double smallest = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < real && i < dim(); ++i) smallest = std::min(smallest, at(i, i));
  return smallest;
}

namespace {

// Per-trace lookup tables shared by the builder and the replay.
struct TraceIndex {
  std::vector<long> depth;               // per message
  std::vector<std::size_t> first_msg;    // per send event + 1 (slot 0: initial broadcast)
  std::vector<std::vector<bool>> sent;   // [event + 1][player]: broadcast at that event

  explicit TraceIndex(const EventTrace& trace) : depth(message_depths(trace)) {
    const std::size_t K = trace.events.size();
    first_msg.assign(K + 2, trace.messages.size());
    sent.assign(K + 1, std::vector<bool>(trace.n, false));
    for (std::size_t m = trace.messages.size(); m-- > 0;) {
      const auto slot = static_cast<std::size_t>(trace.messages[m].send_event + 1);
      first_msg[slot] = m;
      sent[slot][trace.messages[m].sender] = true;
    }
    for (std::size_t s = K + 1; s-- > 0;) first_msg[s] = std::min(first_msg[s], first_msg[s + 1]);
  }
};

ColumnStochasticMatrix build_matrix(const EventTrace& trace, const TraceIndex& index, long k, long b) {
  const std::size_t n = trace.n;
  const auto depth_limit = static_cast<std::size_t>(b);
  ColumnStochasticMatrix A((depth_limit + 1) * n);
  const auto slot = static_cast<std::size_t>(k + 1);
  for (std::size_t j = 0; j < n; ++j)
    if (!index.sent[slot][j]) A.add(j, j, 1.0);
  for (std::size_t m = index.first_msg[slot]; m < index.first_msg[slot + 1]; ++m) {
    const MessageRecord& msg = trace.messages[m];
    const long u = index.depth[m];
    if (u > b) {
      std::ostringstream os;
      os << "message " << m << " from player " << msg.sender + 1 << " to player " << msg.receiver + 1
         << " sent at event " << msg.send_event << " needs depth " << u << " > b = " << b;
      throw InvariantViolation(os.str());
    }
    const double weight = 1.0 / static_cast<double>(trace.graph.out_degree(msg.sender));
    A.add(static_cast<std::size_t>(u) * n + msg.receiver, msg.sender, weight);
  }
  for (std::size_t u = 1; u <= depth_limit; ++u)
    for (std::size_t i = 0; i < n; ++i) A.add((u - 1) * n + i, u * n + i, 1.0);
  return A;
}

}  // namespace

std::vector<long> message_depths(const EventTrace& trace) {
  const long K = static_cast<long>(trace.events.size());
  std::vector<std::int64_t> times(trace.events.size());
  for (std::size_t k = 0; k < times.size(); ++k) times[k] = trace.events[k].t_us;
  std::vector<long> depth(trace.messages.size());
  for (std::size_t m = 0; m < trace.messages.size(); ++m) {
    const MessageRecord& msg = trace.messages[m];
    const auto begin = times.begin() + (msg.send_event + 1);
    const auto it = std::lower_bound(begin, times.end(), msg.deliver_us);
    const long consumed_at = static_cast<long>(it - times.begin());  // K if never delivered
    depth[m] = std::max<long>(0, (it == times.end() ? K : consumed_at) - msg.send_event - 1);
  }
  return depth;
}

long compute_b_from_trace(const EventTrace& trace) {
  long b = 1;
  for (long u : message_depths(trace)) b = std::max(b, u);
  return b;
}

ColumnStochasticMatrix build_augmented_matrix(const EventTrace& trace, long k, long b) {
  if (k < -1 || k >= static_cast<long>(trace.events.size()))
    throw ContractViolation("build_augmented_matrix: event index out of range");
  if (b < 0) throw ContractViolation("build_augmented_matrix: b must be nonnegative");
  const TraceIndex index(trace);
  return build_matrix(trace, index, k, b);
}

long replay(const EventTrace& trace, const Game& game, const std::function<void(const AugmentedState&)>& visit,
            long b) {
  const std::size_t n = trace.n, p = trace.p;
  if (game.players() != n || game.block_dim() != p) throw ContractViolation("replay: game does not match trace");
  const TraceIndex index(trace);
  if (b <= 0) b = compute_b_from_trace(trace);
  const std::size_t dim = (static_cast<std::size_t>(b) + 1) * n;

  // Node masses are carried as compensated sums, like the engine's buffers.
  std::vector<CompensatedSum> V(dim * p), W(dim * p), Y(dim), Y_next(dim);
  for (std::size_t c = 0; c < n * p; ++c) V[c] = CompensatedSum(trace.x0[c]);
  for (std::size_t i = 0; i < n; ++i) Y[i] = CompensatedSum(1.0);

  AugmentedState s;
  s.x = trace.x0;
  s.z = trace.x0;
  const auto publish = [&] {
    if (!visit) return;
    s.V.resize(dim * p);
    s.W.resize(dim * p);
    s.y.resize(dim);
    for (std::size_t c = 0; c < dim * p; ++c) {
      s.V[c] = V[c].value();
      s.W[c] = W[c].value();
    }
    for (std::size_t r = 0; r < dim; ++r) s.y[r] = Y[r].value();
    visit(s);
  };
  publish();

  Vec grad(p), trial(p), x_prev(p);
  for (long k = 0; k < static_cast<long>(trace.events.size()); ++k) {
    const EventRecord& ev = trace.events[static_cast<std::size_t>(k)];
    const ColumnStochasticMatrix A = build_matrix(trace, index, k - 1, b);

    for (auto& w : W) w.reset();
    for (auto& y : Y_next) y.reset();
    for (std::size_t c = 0; c < dim; ++c) {
      for (const auto& [r, a] : A.column(c)) {
        if (a == 1.0) {
          for (std::size_t q = 0; q < p; ++q) W[r * p + q].add(V[c * p + q]);
          Y_next[r].add(Y[c]);
        } else {
          for (std::size_t q = 0; q < p; ++q) W[r * p + q].add(a * V[c * p + q].value());
          Y_next[r].add(a * Y[c].value());
        }
      }
    }
    Y.swap(Y_next);
    V = W;

    for (std::size_t i : ev.activated) {
      if (std::find(ev.skipped.begin(), ev.skipped.end(), i) != ev.skipped.end()) continue;
      const double y = Y[i].value();
      if (!(y > 0.0))
        throw InvariantViolation("replay: nonpositive weight at player " + std::to_string(i + 1) +
                                 ", event " + std::to_string(k));
      const std::span<double> xi(s.x.data() + i * p, p);
      const std::span<double> zi(s.z.data() + i * p, p);
      x_prev.assign(xi.begin(), xi.end());
      for (std::size_t q = 0; q < p; ++q) zi[q] = W[i * p + q].value() / y;
      if (!trace.frozen) {
        game.gradient(i, xi, zi, grad);
        for (std::size_t q = 0; q < p; ++q) trial[q] = xi[q] - ev.alpha[i] * grad[q];
        game.action_set(i).project(trial, xi);
      }
      // The activated node broadcasts v = w + (x - x_prev) as a plain double.
      for (std::size_t q = 0; q < p; ++q)
        V[i * p + q] = CompensatedSum(W[i * p + q].value() + (xi[q] - x_prev[q]));
      Y[i] = CompensatedSum(y);
    }
    s.k = k;
    publish();
  }
  return b;
}

std::vector<AugmentedState> replay_states(const EventTrace& trace, const Game& game) {
  std::vector<AugmentedState> states;
  replay(trace, game, [&](const AugmentedState& s) { states.push_back(s); });
  return states;
}

double consensus_residual(const EventTrace& trace, long k) {
  if (k < 0 || k >= static_cast<long>(trace.events.size()))
    throw ContractViolation("consensus_residual: event index out of range");
  return consensus_gap(trace.x_before(k), trace.events[static_cast<std::size_t>(k)].z, trace.n, trace.p);
}

bool EquivalenceReport::passed() const {
  return x.max <= tolerance && z.max <= tolerance && y.max <= tolerance && mass.max <= 1e-9 &&
         max_column_sum_error <= 1e-15 && min_real_diagonal > 0.0;
}

std::string EquivalenceReport::to_text() const {
  std::ostringstream os;
  char buf[160];
  os << "augmented replay: b = " << b << ", events = " << events << ", tolerance = " << tolerance << '\n';
  const auto line = [&](const char* name, const Deviation& d) {
    std::snprintf(buf, sizeof buf, "  %-6s max deviation %.3e  first divergence %ld\n", name, d.max, d.first_event);
    os << buf;
  };
  line("x", x);
  line("z", z);
  line("y", y);
  line("mass", mass);
  std::snprintf(buf, sizeof buf, "  column sum error %.3e, min real diagonal %.3e\n", max_column_sum_error,
                min_real_diagonal);
  os << buf << "  result: " << (passed() ? "PASS" : "FAIL") << '\n';
  return os.str();
}

EquivalenceReport check_equivalence(const EventTrace& trace, const Game& game, double tolerance) {
  EquivalenceReport report;
  report.tolerance = tolerance;
  report.events = static_cast<long>(trace.events.size());
  const std::size_t n = trace.n, p = trace.p;
  const TraceIndex index(trace);
  report.b = compute_b_from_trace(trace);
  for (long k = -1; k < report.events; ++k) {
    const ColumnStochasticMatrix A = build_matrix(trace, index, k, report.b);
    report.max_column_sum_error = std::max(report.max_column_sum_error, A.max_column_sum_error());
    report.min_real_diagonal = std::min(report.min_real_diagonal, A.min_real_diagonal(n));
  }
  const auto note = [&](Deviation& d, double value, long k, double tol) {
    if (value > d.max) d.max = value;
    if (value > tol && d.first_event < 0) d.first_event = k;
  };
  replay(
      trace, game,
      [&](const AugmentedState& s) {
        if (s.k < 0) return;
        const EventRecord& ev = trace.events[static_cast<std::size_t>(s.k)];
        for (std::size_t c = 0; c < n * p; ++c) note(report.x, std::abs(s.x[c] - ev.x[c]), s.k, tolerance);
        for (std::size_t i : ev.activated) {
          if (std::find(ev.skipped.begin(), ev.skipped.end(), i) != ev.skipped.end()) continue;
          for (std::size_t q = 0; q < p; ++q)
            note(report.z, std::abs(s.z[i * p + q] - ev.z[i * p + q]), s.k, tolerance);
          note(report.y, std::abs(s.y[i] - ev.y[i]), s.k, tolerance);
        }
        Vec total(p, 0.0), actions(p, 0.0);
        for (std::size_t r = 0; r < s.y.size(); ++r)
          for (std::size_t q = 0; q < p; ++q) total[q] += s.V[r * p + q];
        double scale = 1.0;
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t q = 0; q < p; ++q) actions[q] += s.x[i * p + q];
        for (double a : actions) scale = std::max(scale, std::abs(a));
        double err = 0.0;
        for (std::size_t q = 0; q < p; ++q) err = std::max(err, std::abs(total[q] - actions[q]));
        note(report.mass, err / scale, s.k, 1e-9);
      },
      report.b);
  return report;
}

}  // namespace asynag
