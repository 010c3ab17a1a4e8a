#pragma once

// Direct synchronous push-sum Nash seeking: in every round each player sums
// v_j / d_j and y_j / d_j over its in-neighbors, updates, and the new masses
// are what the next round mixes. No queues or timestamps; used to cross-check
// the engine's synchronous scheme.

#include <span>
#include <string>
#include <vector>

#include "asynag/augmented.hpp"
#include "asynag/engine.hpp"
#include "asynag/game.hpp"
#include "asynag/stepsize.hpp"
#include "asynag/topology.hpp"

namespace asynag {

struct SyncRound {
  Vec x, v, z;  ///< n * p, after the round
  Vec y;
  std::vector<long> l;
  Vec alpha;
};

std::vector<SyncRound> run_sync_reference(const Game& game, const Digraph& graph, const StepsizeSchedule& rho,
                                          std::span<const double> x0, std::size_t rounds, bool frozen = false);

struct SyncComparison {
  long rounds = 0;
  Deviation x, v, z, y, alpha;
  bool counters_match = true;
  double tolerance = 1e-12;

  bool passed() const;
  std::string to_text() const;
};

/// Compares a synchronous-scheme trace with the direct implementation round
/// by round. Throws ContractViolation for other schemes.
SyncComparison compare_with_sync_reference(const EventTrace& trace, const Game& game, double tolerance = 1e-12);

}  // namespace asynag
