#include "asynag/cournot.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

#include "asynag/errors.hpp"
#include "asynag/rng.hpp"

namespace asynag {

CournotParams generate_instance(std::size_t firms, std::size_t markets, std::uint64_t seed) {
  if (firms == 0 || markets == 0) throw ConfigError("cournot: firms and markets must be >= 1");
  CournotParams params;
  params.firms = firms;
  params.markets = markets;
  params.seed = seed;
  RandomStream rng(derive_seed(seed, 0x636f75726e6f74));
  const std::size_t cells = firms * markets;
  params.linear_cost.resize(cells);
  params.quadratic_cost.resize(cells);
  params.capacity.assign(cells, 500.0);
  params.demand.resize(markets);
  for (double& a : params.linear_cost) a = rng.uniform(2.0, 12.0);
  for (double& b : params.quadratic_cost) b = rng.uniform(2.0, 3.0);
  for (double& d : params.demand) d = rng.uniform(90.0, 100.0);
  return params;
}

double cournot_cost(const CournotParams& params, std::size_t i, std::span<const double> xi,
                    std::span<const double> z) {
  const double n = static_cast<double>(params.firms);
  double f = 0.0;
  for (std::size_t l = 0; l < params.markets; ++l) {
    const double g = xi[2 * l], s = xi[2 * l + 1];
    const double total_sales = n * z[2 * l + 1];
    f += params.a(i, l) * g + params.b(i, l) * g * g - s * (params.demand[l] - total_sales);
  }
  return f;
}

void cournot_gradient(const CournotParams& params, std::size_t i, std::span<const double> xi,
                      std::span<const double> z, std::span<double> out) {
  // d/ds_il of f is -(d_l - n z_s); d/dz_s is n s_il, scaled by 1/n in F_i.
  const double n = static_cast<double>(params.firms);
  for (std::size_t l = 0; l < params.markets; ++l) {
    out[2 * l] = params.a(i, l) + 2.0 * params.b(i, l) * xi[2 * l];
    out[2 * l + 1] = -params.demand[l] + n * z[2 * l + 1] + xi[2 * l + 1];
  }
}

CournotGame::CournotGame(CournotParams params) : params_(std::move(params)) {
  const std::size_t n = params_.firms, L = params_.markets;
  if (n == 0 || L == 0) throw ConfigError("cournot: empty instance");
  if (params_.linear_cost.size() != n * L || params_.quadratic_cost.size() != n * L ||
      params_.capacity.size() != n * L || params_.demand.size() != L)
    throw ConfigError("cournot: parameter arrays have inconsistent sizes");
  sets_.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Vec lower(2 * L, 0.0), upper(2 * L), normal(2 * L);
    double total_cap = 0.0;
    for (std::size_t l = 0; l < L; ++l) total_cap += params_.cap(i, l);
    for (std::size_t l = 0; l < L; ++l) {
      if (params_.b(i, l) <= 0.0) throw ConfigError("cournot: quadratic cost must be positive");
      upper[2 * l] = params_.cap(i, l);
      // Sales are bounded by total production through the balance constraint.
      upper[2 * l + 1] = total_cap;
      normal[2 * l] = 1.0;
      normal[2 * l + 1] = -1.0;
    }
    sets_.emplace_back(std::move(lower), std::move(upper), std::move(normal));
  }
}

double CournotGame::cost(std::size_t i, std::span<const double> xi, std::span<const double> z) const {
  return cournot_cost(params_, i, xi, z);
}

void CournotGame::gradient(std::size_t i, std::span<const double> xi, std::span<const double> z,
                           std::span<double> out) const {
  cournot_gradient(params_, i, xi, z, out);
}

namespace {

struct StepOutcome {
  Vec next;
  double residual;  // residual of the current point
};

StepOutcome projected_step(const Game& game, const Vec& x, double step) {
  const Vec phi = pseudo_gradient(game, x);
  Vec trial(x.size()), check(x.size());
  for (std::size_t c = 0; c < x.size(); ++c) {
    trial[c] = x[c] - step * phi[c];
    check[c] = x[c] - kNashResidualStep * phi[c];
  }
  const Vec probe = project_profile(game, check);
  double sq = 0.0;
  for (std::size_t c = 0; c < x.size(); ++c) sq += (x[c] - probe[c]) * (x[c] - probe[c]);
  return {project_profile(game, trial), std::sqrt(sq)};
}

}  // namespace

NashSolution solve_ne(const Game& game, double tol, std::span<const double> x0,
                      std::size_t max_iterations) {
  if (!(tol > 0.0)) throw ContractViolation("solve_ne: tolerance must be positive");
  Vec start;
  if (x0.empty()) {
    start.resize(game.profile_dim());
    const std::size_t p = game.block_dim();
    for (std::size_t i = 0; i < game.players(); ++i) {
      const ActionSet& set = game.action_set(i);
      Vec mid(p);
      for (std::size_t c = 0; c < p; ++c) mid[c] = 0.5 * (set.lower()[c] + set.upper()[c]);
      set.project(mid, std::span<double>(start).subspan(i * p, p));
    }
  } else {
    start = project_profile(game, x0);
  }

  constexpr std::size_t kWindow = 50;
  double step = 0.1;
  std::size_t iterations = 0;

  // Accept a stepsize once the residual decreases monotonically over a window.
  Vec x = start;
  for (;;) {
    Vec trial = start;
    double previous = std::numeric_limits<double>::infinity();
    bool monotone = true;
    for (std::size_t t = 0; t < kWindow; ++t) {
      StepOutcome out = projected_step(game, trial, step);
      ++iterations;
      if (out.residual <= tol) {
        return {trial, out.residual, iterations, step};
      }
      if (out.residual > previous) {
        monotone = false;
        break;
      }
      previous = out.residual;
      trial = std::move(out.next);
    }
    if (monotone) {
      x = std::move(trial);
      break;
    }
    step *= 0.5;
    if (step < 1e-12) throw NonConvergence("solve_ne: no stepsize gives monotone decrease", previous);
  }

  double last = std::numeric_limits<double>::infinity();
  while (iterations < max_iterations) {
    StepOutcome out = projected_step(game, x, step);
    ++iterations;
    last = out.residual;
    if (out.residual <= tol) return {x, out.residual, iterations, step};
    x = std::move(out.next);
  }
  throw NonConvergence("solve_ne: iteration cap reached with residual " + std::to_string(last), last);
}

namespace {

void write_array(std::ostream& os, const char* key, const Vec& values) {
  os << key;
  char buf[32];
  for (double v : values) {
    std::snprintf(buf, sizeof buf, " %.17g", v);
    os << buf;
  }
  os << '\n';
}

}  // namespace

void write_instance(std::ostream& os, const CournotParams& params) {
  os << "cournot-instance v1\n";
  os << "firms " << params.firms << '\n';
  os << "markets " << params.markets << '\n';
  os << "seed " << params.seed << '\n';
  write_array(os, "demand", params.demand);
  write_array(os, "linear_cost", params.linear_cost);
  write_array(os, "quadratic_cost", params.quadratic_cost);
  write_array(os, "capacity", params.capacity);
  os << "end\n";
}

CournotParams read_instance(std::istream& is, std::size_t* line_counter) {
  CournotParams params;
  std::string line;
  std::size_t lineno = line_counter ? *line_counter : 0;
  bool header = false, done = false;
  const auto read_array = [&](std::istringstream& in, Vec& out, std::size_t expected) {
    out.clear();
    double v;
    while (in >> v) out.push_back(v);
    if (out.size() != expected) throw ParseError("instance array has wrong length", lineno);
  };
  while (!done && std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream in(line);
    std::string key;
    in >> key;
    if (!header) {
      std::string version;
      in >> version;
      if (key != "cournot-instance" || version != "v1")
        throw ParseError("expected 'cournot-instance v1' header", lineno);
      header = true;
      continue;
    }
    if (key == "firms") {
      in >> params.firms;
    } else if (key == "markets") {
      in >> params.markets;
    } else if (key == "seed") {
      in >> params.seed;
    } else if (key == "demand") {
      read_array(in, params.demand, params.markets);
    } else if (key == "linear_cost") {
      read_array(in, params.linear_cost, params.firms * params.markets);
    } else if (key == "quadratic_cost") {
      read_array(in, params.quadratic_cost, params.firms * params.markets);
    } else if (key == "capacity") {
      read_array(in, params.capacity, params.firms * params.markets);
    } else if (key == "end") {
      done = true;
    } else {
      throw ParseError("unknown instance key '" + key + "'", lineno);
    }
    if (!in.eof() && in.fail()) throw ParseError("malformed value for '" + key + "'", lineno);
  }
  if (!done) throw ParseError("instance record not terminated by 'end'", lineno);
  if (line_counter) *line_counter = lineno;
  return params;
}

}  // namespace asynag
