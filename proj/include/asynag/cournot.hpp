#pragma once

// Networked Nash-Cournot game: n firms, L markets. Firm i's block is
// (g_i1, s_i1, ..., g_iL, s_iL) with production g and sales s.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "asynag/game.hpp"

namespace asynag {

struct CournotParams {
  std::size_t firms = 0;
  std::size_t markets = 0;
  std::uint64_t seed = 0;
  Vec linear_cost;     ///< a[i * L + l]
  Vec quadratic_cost;  ///< b[i * L + l], > 0
  Vec demand;          ///< d[l]
  Vec capacity;        ///< cap[i * L + l]

  std::size_t block_dim() const { return 2 * markets; }
  double a(std::size_t i, std::size_t l) const { return linear_cost[i * markets + l]; }
  double b(std::size_t i, std::size_t l) const { return quadratic_cost[i * markets + l]; }
  double cap(std::size_t i, std::size_t l) const { return capacity[i * markets + l]; }

  bool operator==(const CournotParams&) const = default;
};

/// a ~ U(2, 12), b ~ U(2, 3), d ~ U(90, 100), cap = 500; deterministic in seed.
CournotParams generate_instance(std::size_t firms, std::size_t markets, std::uint64_t seed);

/// f_i(x_i, z) = sum_l [a g + b g^2 - s_il (d_l - n z_{s,l})].
double cournot_cost(const CournotParams& params, std::size_t i, std::span<const double> xi,
                    std::span<const double> z);

/// F_i: g-coordinate a + 2 b g, s-coordinate -d + n z_s + s_il.
void cournot_gradient(const CournotParams& params, std::size_t i, std::span<const double> xi,
                      std::span<const double> z, std::span<double> out);

class CournotGame final : public Game {
 public:
  explicit CournotGame(CournotParams params);

  std::size_t players() const override { return params_.firms; }
  std::size_t block_dim() const override { return params_.block_dim(); }
  double cost(std::size_t i, std::span<const double> xi, std::span<const double> z) const override;
  void gradient(std::size_t i, std::span<const double> xi, std::span<const double> z,
                std::span<double> out) const override;
  const ActionSet& action_set(std::size_t i) const override { return sets_[i]; }

  const CournotParams& params() const { return params_; }

 private:
  CournotParams params_;
  std::vector<ActionSet> sets_;
};

struct NashSolution {
  Vec x;
  double residual = 0.0;  ///< vi_residual(x, kNashResidualStep)
  std::size_t iterations = 0;
  double step = 0.0;
};

inline constexpr double kNashResidualStep = 0.01;

/// Centralized projected pseudo-gradient iteration to vi_residual <= tol.
/// Starts from `x0` when given, else from the projection of the box midpoint.
/// Throws NonConvergence after `max_iterations`.
NashSolution solve_ne(const Game& game, double tol, std::span<const double> x0 = {},
                      std::size_t max_iterations = 1'000'000);

/// Versioned plain-text instance record; round-trips every double exactly.
void write_instance(std::ostream& os, const CournotParams& params);
/// `line_counter`, when given, holds the number of lines already consumed
/// from `is` and is advanced past the record.
CournotParams read_instance(std::istream& is, std::size_t* line_counter = nullptr);

}  // namespace asynag
