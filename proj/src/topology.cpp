#include "asynag/topology.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "asynag/errors.hpp"

namespace asynag {

TopologyKind parse_topology_kind(std::string_view name) {
  if (name == "cycle") return TopologyKind::cycle;
  if (name == "star") return TopologyKind::star;
  if (name == "log") return TopologyKind::log;
  if (name == "complete") return TopologyKind::complete;
  throw ConfigError("unknown topology kind '" + std::string(name) + "'");
}

std::string to_string(TopologyKind kind) {
  switch (kind) {
    case TopologyKind::cycle: return "cycle";
    case TopologyKind::star: return "star";
    case TopologyKind::log: return "log";
    case TopologyKind::complete: return "complete";
  }
  return "?";
}

Digraph::Digraph(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges)
    : out_(n), in_(n) {
  for (std::size_t i = 0; i < n; ++i) {
    out_[i].push_back(i);
    in_[i].push_back(i);
  }
  for (auto [from, to] : edges) {
    if (from >= n || to >= n) throw ConfigError("digraph: edge endpoint out of range");
    if (from == to) continue;
    out_[from].push_back(to);
    in_[to].push_back(from);
  }
  for (auto* lists : {&out_, &in_}) {
    for (auto& list : *lists) {
      std::sort(list.begin(), list.end());
      list.erase(std::unique(list.begin(), list.end()), list.end());
    }
  }
}

bool Digraph::has_edge(std::size_t from, std::size_t to) const {
  return std::binary_search(out_[from].begin(), out_[from].end(), to);
}

std::vector<std::pair<std::size_t, std::size_t>> Digraph::edges() const {
  std::vector<std::pair<std::size_t, std::size_t>> result;
  for (std::size_t i = 0; i < out_.size(); ++i)
    for (std::size_t j : out_[i])
      if (j != i) result.emplace_back(i, j);
  return result;
}

Digraph make_topology(TopologyKind kind, std::size_t n) {
  if (n == 0) throw ConfigError("topology: n must be >= 1");
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  switch (kind) {
    case TopologyKind::cycle:
      for (std::size_t i = 0; i < n; ++i) edges.emplace_back(i, (i + 1) % n);
      break;
    case TopologyKind::star:
      for (std::size_t i = 1; i < n; ++i) {
        edges.emplace_back(0, i);
        edges.emplace_back(i, 0);
      }
      break;
    case TopologyKind::log:
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t hop = 1; hop < n; hop *= 2) edges.emplace_back(i, (i + hop) % n);
      break;
    case TopologyKind::complete:
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) edges.emplace_back(i, j);
      break;
  }
  return Digraph(n, edges);
}

namespace {

std::vector<bool> reachable(std::size_t n, std::size_t root,
                            const std::vector<std::size_t>& (Digraph::*next)(std::size_t) const,
                            const Digraph& g) {
  std::vector<bool> seen(n, false);
  std::vector<std::size_t> stack{root};
  seen[root] = true;
  while (!stack.empty()) {
    const std::size_t u = stack.back();
    stack.pop_back();
    for (std::size_t v : (g.*next)(u)) {
      if (!seen[v]) {
        seen[v] = true;
        stack.push_back(v);
      }
    }
  }
  return seen;
}

}  // namespace

bool is_strongly_connected(const Digraph& g) {
  const std::size_t n = g.size();
  if (n <= 1) return true;
  const auto fwd = reachable(n, 0, &Digraph::out_neighbors, g);
  const auto bwd = reachable(n, 0, &Digraph::in_neighbors, g);
  return std::all_of(fwd.begin(), fwd.end(), [](bool b) { return b; }) &&
         std::all_of(bwd.begin(), bwd.end(), [](bool b) { return b; });
}

DelayConstants delay_constants(std::size_t n, double tau, double tau_lo, double tau_hi) {
  if (n == 0) throw ConfigError("delay_constants: n must be >= 1");
  if (!(tau > 0.0) || !(tau_lo > 0.0) || !(tau_hi >= tau_lo) || !std::isfinite(tau_hi) || !std::isfinite(tau))
    throw ConfigError("delay_constants: require 0 < tau_lo <= tau_hi < inf and tau > 0");
  const auto nn = static_cast<long>(n);
  DelayConstants c;
  c.b1 = (nn - 1) * static_cast<long>(std::floor(tau_hi / tau_lo)) + 1;
  c.b2 = nn * static_cast<long>(std::floor(tau / tau_lo)) + 1;
  c.b = c.b1 + c.b2;
  return c;
}

void write_edge_list(std::ostream& os, const Digraph& g) {
  for (auto [from, to] : g.edges()) os << from + 1 << ' ' << to + 1 << '\n';
}

Digraph read_edge_list(std::istream& is, std::size_t n) {
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream in(line);
    long from = 0, to = 0;
    if (!(in >> from >> to) || from < 1 || to < 1 || static_cast<std::size_t>(from) > n ||
        static_cast<std::size_t>(to) > n)
      throw ParseError("expected 'i j' with 1 <= i, j <= " + std::to_string(n), lineno);
    edges.emplace_back(static_cast<std::size_t>(from - 1), static_cast<std::size_t>(to - 1));
  }
  return Digraph(n, edges);
}

}  // namespace asynag
