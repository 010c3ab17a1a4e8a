#include "asynag/sync_reference.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "asynag/compensated.hpp"
#include "asynag/errors.hpp"

namespace asynag {

std::vector<SyncRound> run_sync_reference(const Game& game, const Digraph& graph, const StepsizeSchedule& rho,
                                          std::span<const double> x0, std::size_t rounds, bool frozen) {
  const std::size_t n = game.players(), p = game.block_dim();
  if (graph.size() != n || x0.size() != n * p) throw ContractViolation("run_sync_reference: dimension mismatch");
  Vec x(x0.begin(), x0.end()), v = x, z = x, y(n, 1.0);
  std::vector<long> l(n, 0);
  std::vector<CompensatedSum> w(n * p), y_in(n);
  Vec grad(p), trial(p), prev(p);
  std::vector<long> l_in(n);
  std::vector<SyncRound> out;
  out.reserve(rounds);
  for (std::size_t r = 0; r < rounds; ++r) {
    for (auto& acc : w) acc.reset();
    for (auto& acc : y_in) acc.reset();
    std::fill(l_in.begin(), l_in.end(), -1);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j : graph.in_neighbors(i)) {
        const double inv_d = 1.0 / static_cast<double>(graph.out_degree(j));
        for (std::size_t c = 0; c < p; ++c) w[i * p + c].add(inv_d * v[j * p + c]);
        y_in[i].add(inv_d * y[j]);
        l_in[i] = std::max(l_in[i], l[j]);
      }
    }
    SyncRound round;
    round.alpha.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = y_in[i].value();
      for (std::size_t c = 0; c < p; ++c) z[i * p + c] = w[i * p + c].value() / y[i];
      const double alpha = rho(l[i]);
      round.alpha[i] = alpha;
      const std::span<double> xi(x.data() + i * p, p);
      prev.assign(xi.begin(), xi.end());
      if (!frozen) {
        game.gradient(i, xi, std::span<const double>(z.data() + i * p, p), grad);
        for (std::size_t c = 0; c < p; ++c) trial[c] = xi[c] - alpha * grad[c];
        game.action_set(i).project(trial, xi);
      }
      for (std::size_t c = 0; c < p; ++c) v[i * p + c] = w[i * p + c].value() + (xi[c] - prev[c]);
      l[i] = std::max(l_in[i], l[i]) + 1;
    }
    round.x = x;
    round.v = v;
    round.z = z;
    round.y = y;
    round.l = l;
    out.push_back(std::move(round));
  }
  return out;
}

bool SyncComparison::passed() const {
  return counters_match && x.max <= tolerance && v.max <= tolerance && z.max <= tolerance &&
         y.max <= tolerance && alpha.max <= tolerance;
}

std::string SyncComparison::to_text() const {
  std::ostringstream os;
  char buf[160];
  os << "synchronous reference: rounds = " << rounds << ", tolerance = " << tolerance << '\n';
  const auto line = [&](const char* name, const Deviation& d) {
    std::snprintf(buf, sizeof buf, "  %-6s max deviation %.3e  first divergence %ld\n", name, d.max, d.first_event);
    os << buf;
  };
  line("x", x);
  line("v", v);
  line("z", z);
  line("y", y);
  line("alpha", alpha);
  os << "  counters " << (counters_match ? "match" : "differ") << "\n  result: " << (passed() ? "PASS" : "FAIL")
     << '\n';
  return os.str();
}

SyncComparison compare_with_sync_reference(const EventTrace& trace, const Game& game, double tolerance) {
  if (trace.scheme != Scheme::synchronous)
    throw ContractViolation("compare_with_sync_reference: trace is not synchronous");
  SyncComparison cmp;
  cmp.tolerance = tolerance;
  cmp.rounds = static_cast<long>(trace.events.size());
  const auto reference =
      run_sync_reference(game, trace.graph, trace.rho, trace.x0, trace.events.size(), trace.frozen);
  const auto note = [&](Deviation& d, const Vec& a, const Vec& b, long k) {
    for (std::size_t c = 0; c < a.size(); ++c) {
      const double dev = std::abs(a[c] - b[c]);
      d.max = std::max(d.max, dev);
      if (dev > tolerance && d.first_event < 0) d.first_event = k;
    }
  };
  for (std::size_t k = 0; k < reference.size(); ++k) {
    const EventRecord& e = trace.events[k];
    const SyncRound& r = reference[k];
    const long kk = static_cast<long>(k);
    if (e.activated.size() != trace.n) cmp.counters_match = false;
    note(cmp.x, e.x, r.x, kk);
    note(cmp.v, e.v, r.v, kk);
    note(cmp.z, e.z, r.z, kk);
    note(cmp.y, e.y, r.y, kk);
    note(cmp.alpha, e.alpha, r.alpha, kk);
    if (e.l != r.l) cmp.counters_match = false;
  }
  return cmp;
}

}  // namespace asynag
