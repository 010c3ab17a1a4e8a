#include "asynag/game.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "asynag/errors.hpp"
#include "asynag/rng.hpp"

namespace asynag {

namespace {

constexpr double kMultiplierTol = 1e-12;
constexpr int kMaxBisections = 200;

void check_box(const Vec& lower, const Vec& upper) {
  if (lower.size() != upper.size() || lower.empty())
    throw ConfigError("action set: bound vectors must be nonempty and of equal length");
  for (std::size_t c = 0; c < lower.size(); ++c) {
    if (!std::isfinite(lower[c]) || !std::isfinite(upper[c]))
      throw ConfigError("action set: bounds must be finite (coordinate " + std::to_string(c) + ")");
    if (lower[c] > upper[c])
      throw ConfigError("action set: crossed bounds at coordinate " + std::to_string(c));
  }
}

}  // namespace

ActionSet::ActionSet(Vec lower, Vec upper) : lower_(std::move(lower)), upper_(std::move(upper)) {
  check_box(lower_, upper_);
}

ActionSet::ActionSet(Vec lower, Vec upper, Vec normal)
    : lower_(std::move(lower)), upper_(std::move(upper)), normal_(std::move(normal)) {
  check_box(lower_, upper_);
  if (normal_.size() != lower_.size())
    throw ConfigError("action set: hyperplane normal has wrong dimension");
  double lo = 0.0, hi = 0.0, norm2 = 0.0;
  for (std::size_t c = 0; c < normal_.size(); ++c) {
    const double a = normal_[c];
    lo += a > 0 ? a * lower_[c] : a * upper_[c];
    hi += a > 0 ? a * upper_[c] : a * lower_[c];
    norm2 += a * a;
  }
  if (norm2 == 0.0) throw ConfigError("action set: hyperplane normal is zero");
  if (lo > 0.0 || hi < 0.0) throw ConfigError("action set: hyperplane does not meet the box");
}

double ActionSet::hyperplane_value(std::span<const double> v, double lambda) const {
  double h = 0.0;
  for (std::size_t c = 0; c < normal_.size(); ++c)
    h += normal_[c] * std::clamp(v[c] - lambda * normal_[c], lower_[c], upper_[c]);
  return h;
}

void ActionSet::project(std::span<const double> v, std::span<double> out) const {
  const std::size_t n = dim();
  if (v.size() != n || out.size() != n) throw ContractViolation("project: dimension mismatch");
  if (!has_hyperplane()) {
    for (std::size_t c = 0; c < n; ++c) out[c] = std::clamp(v[c], lower_[c], upper_[c]);
    return;
  }

  // The KKT point is clamp(v - lambda a) for the multiplier lambda at which
  // h(lambda) = a^T clamp(v - lambda a) vanishes; h is nonincreasing.
  const auto fill = [&](double lambda) {
    for (std::size_t c = 0; c < n; ++c)
      out[c] = std::clamp(v[c] - lambda * normal_[c], lower_[c], upper_[c]);
  };
  double h0 = hyperplane_value(v, 0.0);
  if (h0 == 0.0) {
    fill(0.0);
    return;
  }
  double bound = 0.0;
  for (std::size_t c = 0; c < n; ++c) {
    if (normal_[c] == 0.0) continue;
    const double reach = std::abs(v[c]) + std::max(std::abs(lower_[c]), std::abs(upper_[c]));
    bound = std::max(bound, reach / std::abs(normal_[c]));
  }
  bound = 2.0 * bound + 1.0;
  double lo = h0 > 0.0 ? 0.0 : -bound;  // h(lo) >= 0
  double hi = h0 > 0.0 ? bound : 0.0;   // h(hi) <= 0
  for (int it = 0; it < kMaxBisections; ++it) {
    if (hi - lo <= kMultiplierTol * std::max(1.0, std::abs(lo) + std::abs(hi))) break;
    const double mid = 0.5 * (lo + hi);
    const double h = hyperplane_value(v, mid);
    if (h == 0.0) {
      lo = hi = mid;
      break;
    }
    (h > 0.0 ? lo : hi) = mid;
  }

  // h is piecewise linear; solve exactly on the piece containing the bracket.
  double lambda = 0.5 * (lo + hi);
  double free_norm2 = 0.0, numer = 0.0;
  for (std::size_t c = 0; c < n; ++c) {
    const double a = normal_[c];
    const double t = v[c] - lambda * a;
    if (t > lower_[c] && t < upper_[c]) {
      free_norm2 += a * a;
      numer += a * v[c];
    } else {
      numer += a * std::clamp(t, lower_[c], upper_[c]);
    }
  }
  if (free_norm2 > 0.0) {
    const double exact = numer / free_norm2;
    if (std::abs(hyperplane_value(v, exact)) <= std::abs(hyperplane_value(v, lambda))) lambda = exact;
  }
  fill(lambda);
}

Vec ActionSet::project(std::span<const double> v) const {
  Vec out(dim());
  project(v, out);
  return out;
}

bool ActionSet::contains(std::span<const double> u, double tol) const {
  if (u.size() != dim()) return false;
  double h = 0.0, scale = 0.0;
  for (std::size_t c = 0; c < dim(); ++c) {
    if (u[c] < lower_[c] - tol || u[c] > upper_[c] + tol) return false;
    if (has_hyperplane()) {
      h += normal_[c] * u[c];
      scale += std::abs(normal_[c] * u[c]);
    }
  }
  return std::abs(h) <= tol * std::max(1.0, scale);
}

Vec aggregate(const Game& game, std::span<const double> x) {
  const std::size_t n = game.players(), p = game.block_dim();
  if (x.size() != n * p) throw ContractViolation("aggregate: profile dimension mismatch");
  Vec mean(p, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < p; ++c) mean[c] += x[i * p + c];
  for (double& m : mean) m /= static_cast<double>(n);
  return mean;
}

Vec pseudo_gradient(const Game& game, std::span<const double> x) {
  const std::size_t n = game.players(), p = game.block_dim();
  const Vec mean = aggregate(game, x);
  Vec phi(n * p);
  std::span<double> out(phi);
  for (std::size_t i = 0; i < n; ++i) game.gradient(i, x.subspan(i * p, p), mean, out.subspan(i * p, p));
  return phi;
}

Vec project_profile(const Game& game, std::span<const double> x) {
  const std::size_t n = game.players(), p = game.block_dim();
  if (x.size() != n * p) throw ContractViolation("project_profile: dimension mismatch");
  Vec out(n * p);
  for (std::size_t i = 0; i < n; ++i)
    game.action_set(i).project(x.subspan(i * p, p), std::span<double>(out).subspan(i * p, p));
  return out;
}

bool is_feasible(const Game& game, std::span<const double> x, double tol) {
  const std::size_t n = game.players(), p = game.block_dim();
  if (x.size() != n * p) return false;
  for (std::size_t i = 0; i < n; ++i)
    if (!game.action_set(i).contains(x.subspan(i * p, p), tol)) return false;
  return true;
}

double vi_residual(const Game& game, std::span<const double> x, double step) {
  const Vec phi = pseudo_gradient(game, x);
  Vec trial(x.size());
  for (std::size_t c = 0; c < x.size(); ++c) trial[c] = x[c] - step * phi[c];
  const Vec projected = project_profile(game, trial);
  double sq = 0.0;
  for (std::size_t c = 0; c < x.size(); ++c) sq += (x[c] - projected[c]) * (x[c] - projected[c]);
  return std::sqrt(sq);
}

MonotonicityEstimate monotonicity_probe(const Game& game, std::size_t samples, std::uint64_t seed) {
  RandomStream rng(derive_seed(seed, 0x6d6f6e6f));
  MonotonicityEstimate est;
  est.min_ratio = std::numeric_limits<double>::infinity();
  while (est.pairs < samples) {
    const Vec x = random_feasible(game, rng);
    const Vec y = random_feasible(game, rng);
    double dist2 = 0.0;
    for (std::size_t c = 0; c < x.size(); ++c) dist2 += (x[c] - y[c]) * (x[c] - y[c]);
    if (dist2 == 0.0) continue;
    const Vec gx = pseudo_gradient(game, x);
    const Vec gy = pseudo_gradient(game, y);
    double inner = 0.0;
    for (std::size_t c = 0; c < x.size(); ++c) inner += (gx[c] - gy[c]) * (x[c] - y[c]);
    const double ratio = inner / dist2;
    est.min_ratio = std::min(est.min_ratio, ratio);
    if (ratio <= 0.0) est.violated = true;
    ++est.pairs;
  }
  return est;
}

}  // namespace asynag
