#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "asynag/cournot.hpp"
#include "asynag/errors.hpp"
#include "asynag/rng.hpp"
#include "test_support.hpp"

using namespace asynag;

namespace {

CournotParams single_market(double a, double b, double d, std::size_t n = 1) {
  CournotParams p;
  p.firms = n;
  p.markets = 1;
  p.linear_cost.assign(n, a);
  p.quadratic_cost.assign(n, b);
  p.demand = {d};
  p.capacity.assign(n, 500.0);
  return p;
}

}  // namespace

TEST(CournotInstance, DeterministicInSeed) {
  EXPECT_EQ(generate_instance(20, 10, 7), generate_instance(20, 10, 7));
  EXPECT_NE(generate_instance(20, 10, 7).linear_cost, generate_instance(20, 10, 8).linear_cost);
}

TEST(CournotInstance, ParameterRanges) {
  const CournotParams p = generate_instance(30, 10, 3);
  for (double a : p.linear_cost) EXPECT_TRUE(a >= 2.0 && a <= 12.0);
  for (double b : p.quadratic_cost) EXPECT_TRUE(b >= 2.0 && b <= 3.0);
  for (double d : p.demand) EXPECT_TRUE(d >= 90.0 && d <= 100.0);
  for (double c : p.capacity) EXPECT_EQ(c, 500.0);
  EXPECT_EQ(p.block_dim(), 20u);
}

TEST(CournotInstance, SmallestInstanceAccepted) {
  CournotGame game(generate_instance(1, 1, 0));
  EXPECT_EQ(game.players(), 1u);
  EXPECT_EQ(game.block_dim(), 2u);
  EXPECT_TRUE(game.action_set(0).has_hyperplane());
}

TEST(CournotInstance, RejectsEmptyDimensions) {
  EXPECT_THROW(generate_instance(0, 3, 1), ConfigError);
  EXPECT_THROW(generate_instance(3, 0, 1), ConfigError);
}

TEST(CournotCost, ZeroActionCostsNothing) {
  const CournotParams p = generate_instance(4, 3, 5);
  const Vec zero(6, 0.0), z{1, 2, 3, 4, 5, 6};
  EXPECT_EQ(cournot_cost(p, 2, zero, z), 0.0);
}

TEST(CournotCost, HandEvaluation) {
  const CournotParams p = single_market(2.0, 2.0, 90.0);
  const Vec x{1.0, 1.0};
  EXPECT_DOUBLE_EQ(cournot_cost(p, 0, x, x), -85.0);
}

TEST(CournotGradient, AtOrigin) {
  const CournotParams p = generate_instance(3, 4, 2);
  const Vec zero(8, 0.0);
  Vec g(8);
  cournot_gradient(p, 1, zero, zero, g);
  for (std::size_t l = 0; l < 4; ++l) {
    EXPECT_DOUBLE_EQ(g[2 * l], p.a(1, l));
    EXPECT_DOUBLE_EQ(g[2 * l + 1], -p.demand[l]);
  }
}

TEST(CournotGradient, ClassicalMarginalAtTrueMean) {
  const CournotParams p = generate_instance(6, 3, 4);
  CournotGame game(p);
  RandomStream rng(3);
  const Vec x = random_feasible(game, rng);
  const Vec xbar = aggregate(game, x);
  for (std::size_t i = 0; i < 6; ++i) {
    Vec g(6);
    cournot_gradient(p, i, std::span<const double>(x).subspan(i * 6, 6), xbar, g);
    for (std::size_t l = 0; l < 3; ++l) {
      double total = 0.0;
      for (std::size_t j = 0; j < 6; ++j) total += x[j * 6 + 2 * l + 1];
      const double s_il = x[i * 6 + 2 * l + 1];
      EXPECT_NEAR(g[2 * l + 1], -(p.demand[l] - total) + s_il, 1e-9);
    }
  }
}

TEST(CournotGradient, LipschitzEstimateStable) {
  CournotGame game(generate_instance(5, 10, 1));
  RandomStream rng(41);
  auto estimate = [&](int pairs) {
    double worst = 0.0;
    for (int s = 0; s < pairs; ++s) {
      const Vec x = random_feasible(game, rng), y = random_feasible(game, rng);
      const Vec fx = pseudo_gradient(game, x), fy = pseudo_gradient(game, y);
      worst = std::max(worst, support::distance(fx, fy) / support::distance(x, y));
    }
    return worst;
  };
  const double first = estimate(1000), second = estimate(1000);
  EXPECT_TRUE(std::isfinite(first));
  // For this affine mapping the Lipschitz constant is at most the largest
  // row sum: 2 max b in the g block, n + 1 in the s block.
  EXPECT_LE(first, 6.0 + 1e-9);
  EXPECT_NEAR(first, second, 0.1 * first);
}

TEST(CournotGradient, CostFiniteDifferencesAtBoxCorners) {
  const CournotParams p = generate_instance(3, 2, 6);
  CournotGame game(p);
  const Vec xi{500, 0, 0, 500}, z{250, 250, 100, 400};
  Vec g(4);
  game.gradient(0, xi, z, g);
  for (std::size_t c = 0; c < 4; ++c) {
    const double h = 1e-4;
    Vec xp = xi, xm = xi, zp = z, zm = z;
    xp[c] += h, xm[c] -= h, zp[c] += h, zm[c] -= h;
    const double fd = (game.cost(0, xp, z) - game.cost(0, xm, z)) / (2 * h) +
                      (game.cost(0, xi, zp) - game.cost(0, xi, zm)) / (2 * h) / 3.0;
    EXPECT_NEAR(fd, g[c], 1e-6 * std::max(1.0, std::abs(g[c])));
  }
}

TEST(SolveNe, MonopolyMatchesGridSearch) {
  // With g = s the cost is a g + b g^2 - g (d - g); scan g over [0, 500].
  const CournotParams p = generate_instance(1, 1, 0);
  const double a = p.a(0, 0), b = p.b(0, 0), d = p.demand[0];
  auto cost = [&](double g) { return a * g + b * g * g - g * (d - g); };
  double best_g = 0.0, best = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= 500000; ++k) {
    const double g = k * 1e-3;
    if (cost(g) < best) best = cost(g), best_g = g;
  }
  const NashSolution ne = solve_ne(CournotGame(p), 1e-10);
  EXPECT_NEAR(ne.x[0], best_g, 1e-3);
  EXPECT_NEAR(ne.x[1], best_g, 1e-3);
}

TEST(SolveNe, UniqueAcrossRestarts) {
  CournotGame game(generate_instance(5, 10, 1));
  const NashSolution reference = solve_ne(game, 1e-10);
  EXPECT_LE(reference.residual, 1e-10);
  EXPECT_LE(vi_residual(game, reference.x, kNashResidualStep), 1e-10);
  RandomStream rng(12);
  for (int restart = 0; restart < 5; ++restart) {
    const Vec x0 = random_feasible(game, rng);
    const NashSolution other = solve_ne(game, 1e-10, x0);
    EXPECT_LE(support::max_abs_diff(other.x, reference.x), 1e-6);
  }
}

TEST(SolveNe, IterationCapReportsResidual) {
  CournotGame game(generate_instance(5, 10, 1));
  try {
    solve_ne(game, 1e-14, {}, 3);
    FAIL() << "expected NonConvergence";
  } catch (const NonConvergence& e) {
    EXPECT_GT(e.last_residual(), 0.0);
  }
}

TEST(InstanceIo, RoundTripsExactly) {
  const CournotParams p = generate_instance(4, 3, 77);
  std::stringstream ss;
  write_instance(ss, p);
  EXPECT_EQ(read_instance(ss), p);
}

TEST(InstanceIo, BadHeaderReportsLine) {
  std::stringstream ss("\nnot-an-instance v1\n");
  try {
    read_instance(ss);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}
