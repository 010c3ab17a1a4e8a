#pragma once

// Augmented-network view of a recorded run. Each player i gets b virtual
// nodes i^(1..b) holding mass that is still in flight; the asynchronous run
// then becomes a synchronous linear iteration
//
//   W(k+1) = A V(k),  y(k+1) = A y(k),  z_i = w_i / y_i,
//   x_i(k+1) = Pi[x_i(k) - alpha_i F_i(x_i(k), z_i)] for activated i,
//   V(k+1) = W(k+1) + dX(k),
//
// over (b+1)n nodes. Row/column index u*n + i addresses node i^(u), with
// i^(0) = i. The matrix built for event k routes the broadcasts made at event
// k, so it is the one applied to V(k+1) when forming the buffers consumed at
// event k+1.

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "asynag/engine.hpp"
#include "asynag/game.hpp"

namespace asynag {

/// Sparse storage of an augmented mixing matrix (each column has either one
/// unit entry or d_j entries equal to 1/d_j).
class ColumnStochasticMatrix {
 public:
  explicit ColumnStochasticMatrix(std::size_t dim = 0) : columns_(dim) {}

  std::size_t dim() const { return columns_.size(); }
  void add(std::size_t row, std::size_t col, double value) { columns_[col].emplace_back(row, value); }
  const std::vector<std::pair<std::size_t, double>>& column(std::size_t col) const { return columns_[col]; }

  double at(std::size_t row, std::size_t col) const;
  std::vector<double> dense() const;  ///< row-major dim x dim

  double max_column_sum_error() const;
  /// Smallest diagonal entry over the first `real` nodes.
  double min_real_diagonal(std::size_t real) const;

 private:
  std::vector<std::vector<std::pair<std::size_t, double>>> columns_;
};

/// Number of global events between event k (the send) and the last event
/// before delivery, i.e. the virtual depth the message needs. Messages still
/// undelivered when the trace ends get the smallest depth that keeps them off
/// the real node within the trace.
std::vector<long> message_depths(const EventTrace& trace);

/// Smallest b >= 1 such that every message fits in the virtual chain.
long compute_b_from_trace(const EventTrace& trace);

/// A(k) for the broadcasts at event k (k = -1: initial broadcast, where every
/// player sends). Throws InvariantViolation naming the message whose depth
/// exceeds b.
ColumnStochasticMatrix build_augmented_matrix(const EventTrace& trace, long k, long b);

struct AugmentedState {
  long k = -1;   ///< event just replayed (-1: initial state)
  Vec V, W;      ///< (b+1)n * p
  Vec y;         ///< (b+1)n
  Vec x;         ///< n * p
  Vec z;         ///< n * p, latest estimate per real player
};

/// Replays the augmented iteration over the trace, calling `visit` with the
/// state after each event. Returns the depth b used.
long replay(const EventTrace& trace, const Game& game, const std::function<void(const AugmentedState&)>& visit,
            long b = 0);

/// Collects all states; intended for short traces.
std::vector<AugmentedState> replay_states(const EventTrace& trace, const Game& game);

/// max_i ||z_i(k+1) - mean(x(k))|| with z_i(k+1) the latest estimate after
/// event k.
double consensus_residual(const EventTrace& trace, long k);

struct Deviation {
  double max = 0.0;
  long first_event = -1;  ///< first event whose deviation exceeds the tolerance
};

struct EquivalenceReport {
  long b = 0;
  long events = 0;
  Deviation x, z, y, mass;
  double max_column_sum_error = 0.0;
  double min_real_diagonal = 1.0;
  double tolerance = 1e-12;

  bool passed() const;
  std::string to_text() const;
};

/// Replays the trace and compares x (all players), z and y (activated
/// players) against the recorded values; also checks column stochasticity,
/// diagonal positivity and sum(V) = sum(x).
EquivalenceReport check_equivalence(const EventTrace& trace, const Game& game, double tolerance = 1e-12);

}  // namespace asynag
