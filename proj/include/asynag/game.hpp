#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace asynag {

using Vec = std::vector<double>;

/// Per-player action set: a box, optionally intersected with one hyperplane
/// {u : a^T u = 0}. Construction rejects empty sets, so projection never fails.
class ActionSet {
 public:
  ActionSet(Vec lower, Vec upper);
  ActionSet(Vec lower, Vec upper, Vec normal);

  std::size_t dim() const { return lower_.size(); }
  bool has_hyperplane() const { return !normal_.empty(); }
  const Vec& lower() const { return lower_; }
  const Vec& upper() const { return upper_; }
  const Vec& normal() const { return normal_; }

  /// Euclidean projection of `v` into `out` (both of length dim()).
  void project(std::span<const double> v, std::span<double> out) const;
  Vec project(std::span<const double> v) const;

  bool contains(std::span<const double> u, double tol = 1e-9) const;

 private:
  double hyperplane_value(std::span<const double> v, double lambda) const;

  Vec lower_;
  Vec upper_;
  Vec normal_;
};

/// An aggregative game: player i minimizes f_i(x_i, z) over X_i, where z is
/// (an estimate of) the mean action. `gradient` returns the pseudo-gradient
/// block F_i = grad_{x_i} f_i + (1/n) grad_z f_i.
class Game {
 public:
  virtual ~Game() = default;

  virtual std::size_t players() const = 0;
  virtual std::size_t block_dim() const = 0;
  virtual double cost(std::size_t i, std::span<const double> xi, std::span<const double> z) const = 0;
  virtual void gradient(std::size_t i, std::span<const double> xi, std::span<const double> z,
                        std::span<double> out) const = 0;
  virtual const ActionSet& action_set(std::size_t i) const = 0;

  std::size_t profile_dim() const { return players() * block_dim(); }
};

/// Block mean x̄ = (1/n) sum_i x_i of a stacked profile.
Vec aggregate(const Game& game, std::span<const double> x);

/// phi(x) = [F_1(x_1, x̄); ...; F_n(x_n, x̄)].
Vec pseudo_gradient(const Game& game, std::span<const double> x);

/// Blockwise projection onto X = X_1 x ... x X_n.
Vec project_profile(const Game& game, std::span<const double> x);

bool is_feasible(const Game& game, std::span<const double> x, double tol = 1e-8);

/// ||x - Pi_X[x - step * phi(x)]||; zero exactly at solutions of the VI.
double vi_residual(const Game& game, std::span<const double> x, double step);

/// Feasible profile obtained by projecting a uniform draw from the bounding box.
template <class Stream>
Vec random_feasible(const Game& game, Stream& rng) {
  const std::size_t p = game.block_dim();
  Vec x(game.profile_dim());
  Vec raw(p);
  for (std::size_t i = 0; i < game.players(); ++i) {
    const ActionSet& set = game.action_set(i);
    for (std::size_t c = 0; c < p; ++c) raw[c] = rng.uniform(set.lower()[c], set.upper()[c]);
    set.project(raw, std::span<double>(x).subspan(i * p, p));
  }
  return x;
}

struct MonotonicityEstimate {
  double min_ratio = 0.0;  ///< min over pairs of (phi(x)-phi(x'))^T(x-x') / ||x-x'||^2
  bool violated = false;   ///< some ratio was <= 0
  std::size_t pairs = 0;
};

/// Samples feasible pairs and estimates the monotonicity modulus of phi.
MonotonicityEstimate monotonicity_probe(const Game& game, std::size_t samples, std::uint64_t seed);

}  // namespace asynag
