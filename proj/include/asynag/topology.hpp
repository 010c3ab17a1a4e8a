#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace asynag {

enum class TopologyKind { cycle, star, log, complete };

TopologyKind parse_topology_kind(std::string_view name);
std::string to_string(TopologyKind kind);

/// Directed communication graph over players 0..n-1. Neighbor lists always
/// contain the node itself, so out_degree(i) = |N_out^i| >= 1.
class Digraph {
 public:
  Digraph() = default;
  /// Builds from 0-based directed edges; self-loops and duplicates are merged.
  Digraph(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges);

  std::size_t size() const { return out_.size(); }
  const std::vector<std::size_t>& out_neighbors(std::size_t i) const { return out_[i]; }
  const std::vector<std::size_t>& in_neighbors(std::size_t i) const { return in_[i]; }
  std::size_t out_degree(std::size_t i) const { return out_[i].size(); }
  bool has_edge(std::size_t from, std::size_t to) const;

  /// Edges between distinct nodes, 0-based, sorted.
  std::vector<std::pair<std::size_t, std::size_t>> edges() const;

 private:
  std::vector<std::vector<std::size_t>> out_;
  std::vector<std::vector<std::size_t>> in_;
};

/// cycle: i -> i+1; star: hub 0 <-> every node; log: i -> i + 2^j (mod n)
/// for 0 <= j < log2(n); complete: all ordered pairs.
Digraph make_topology(TopologyKind kind, std::size_t n);

bool is_strongly_connected(const Digraph& g);

struct DelayConstants {
  long b1 = 0;  ///< every player activates within b1 global events
  long b2 = 0;  ///< every message is received within b2 global events
  long b = 0;   ///< b1 + b2: every message is used within b global events
};

/// b1 = (n-1) floor(tau_hi/tau_lo) + 1, b2 = n floor(tau/tau_lo) + 1.
DelayConstants delay_constants(std::size_t n, double tau, double tau_lo, double tau_hi);

/// One "i j" pair per line, 1-based, self-loops omitted.
void write_edge_list(std::ostream& os, const Digraph& g);
Digraph read_edge_list(std::istream& is, std::size_t n);

}  // namespace asynag
