#include "asynag/campaign.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <ostream>
#include <thread>

#include "asynag/engine.hpp"
#include "asynag/errors.hpp"
#include "asynag/rng.hpp"
#include "asynag/trace_io.hpp"

namespace asynag {

double gap_metric(std::span<const double> x, std::span<const double> x_star) {
  if (x.size() != x_star.size()) throw ContractViolation("gap_metric: dimension mismatch");
  double scale = 0.0, diff = 0.0;
  for (std::size_t c = 0; c < x.size(); ++c) {
    scale = std::max(scale, std::abs(x_star[c]));
    diff = std::max(diff, std::abs(x[c] - x_star[c]));
  }
  if (!(scale > 0.0)) throw ContractViolation("gap_metric: undefined for x* = 0");
  return diff / scale;
}

std::uint64_t run_seed(std::uint64_t base_seed, std::size_t run) { return derive_seed(base_seed, 0x72756e, run); }

CournotParams campaign_instance(const ExperimentConfig& config) {
  CournotParams params = generate_instance(config.firms, config.markets, config.instance_seed);
  std::fill(params.capacity.begin(), params.capacity.end(), config.capacity);
  return params;
}

double interpolate(const std::vector<GapSample>& samples, std::int64_t t, double GapSample::*field) {
  if (samples.empty()) return std::nan("");
  if (t <= samples.front().t_us) return samples.front().*field;
  if (t >= samples.back().t_us) return samples.back().*field;
  const auto hi = std::lower_bound(samples.begin(), samples.end(), t,
                                   [](const GapSample& s, std::int64_t v) { return s.t_us < v; });
  if (hi->t_us == t) return (*hi).*field;
  const auto lo = hi - 1;
  const double w = static_cast<double>(t - lo->t_us) / static_cast<double>(hi->t_us - lo->t_us);
  return (*lo).*field + w * ((*hi).*field - (*lo).*field);
}

std::optional<double> crossing_time(std::span<const std::int64_t> grid, std::span<const double> values,
                                    double threshold) {
  for (std::size_t i = 0; i < grid.size() && i < values.size(); ++i) {
    if (values[i] < threshold) {
      if (i == 0) return static_cast<double>(grid[0]);
      const double v0 = values[i - 1], v1 = values[i];
      const double w = (v0 - threshold) / (v0 - v1);
      return static_cast<double>(grid[i - 1]) + w * static_cast<double>(grid[i] - grid[i - 1]);
    }
  }
  return std::nullopt;
}

std::optional<double> CampaignResult::crossing_time(double threshold) const {
  return asynag::crossing_time(grid, mean_gap, threshold);
}

namespace {

std::string num12(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string run_file(const std::string& dir, const char* stem, std::size_t run, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%03zu.%s", stem, run, ext);
  return (std::filesystem::path(dir) / buf).string();
}

RunOutcome simulate_run(const ExperimentConfig& config, const CournotGame& game, const Digraph& graph,
                        const Vec& x_star, std::size_t run, bool write_files) {
  RunOutcome out;
  out.run_id = run;
  out.seed = run_seed(config.base_seed, run);
  SimConfig sim;
  sim.scheme = config.scheme;
  sim.rho = config.stepsize();
  sim.timing = config.timing;
  sim.horizon_us = config.horizon_us;
  sim.seed = out.seed;
  sim.record_trace = write_files && config.save_traces;
  sim.sample_interval_us = config.sample_interval_us;
  const std::size_t n = game.players(), p = game.block_dim();
  sim.on_sample = [&](const SimView& v) {
    out.samples.push_back({v.t_us, v.k, gap_metric(v.x, x_star), consensus_gap(v.x, v.z, n, p)});
  };
  try {
    SimResult result = run_simulation(game, graph, sim);
    out.events = result.events;
    out.ok = true;
    if (sim.record_trace)
      save_trace(run_file(config.output_dir, "trace", run, "txt"), result.trace, &game.params());
  } catch (const InvariantViolation& e) {
    out.error = e.what();
  } catch (const NonConvergence& e) {
    out.error = e.what();
  }
  if (write_files) {
    std::ofstream os(run_file(config.output_dir, "run", run, "csv"));
    os << "run_id,sim_time_us,k,gap,consensus_residual\n";
    for (const GapSample& s : out.samples)
      os << run << ',' << s.t_us << ',' << s.k << ',' << num12(s.gap) << ',' << num12(s.consensus) << '\n';
    if (!out.ok) os << "# failed: " << out.error << '\n';
  }
  return out;
}

}  // namespace

CampaignResult run_campaign(const ExperimentConfig& config, const CampaignOptions& options) {
  config.validate();
  CampaignResult result;
  result.instance = campaign_instance(config);
  const CournotGame game(result.instance);
  const Digraph graph = make_topology(config.topology, config.firms);
  result.equilibrium = solve_ne(game, config.ne_tolerance);  // NonConvergence aborts the campaign
  if (options.log)
    *options.log << "equilibrium residual " << result.equilibrium.residual << " after "
                 << result.equilibrium.iterations << " iterations\n";

  if (options.write_files) {
    std::filesystem::create_directories(config.output_dir);
    std::ofstream(std::filesystem::path(config.output_dir) / "config.txt") << to_text(config);
  }

  std::vector<std::size_t> order = options.launch_order;
  if (order.empty()) {
    order.resize(config.runs);
    for (std::size_t r = 0; r < config.runs; ++r) order[r] = r;
  }
  {
    std::vector<std::size_t> sorted = order;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t r = 0; r < sorted.size(); ++r)
      if (sorted[r] != r || sorted.size() != config.runs)
        throw ContractViolation("run_campaign: launch order is not a permutation of the run ids");
  }

  result.runs.resize(config.runs);
  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;
  const auto worker = [&] {
    for (;;) {
      const std::size_t slot = next.fetch_add(1);
      if (slot >= order.size()) return;
      const std::size_t run = order[slot];
      result.runs[run] = simulate_run(config, game, graph, result.equilibrium.x, run, options.write_files);
      if (options.log) {
        std::lock_guard lock(log_mutex);
        const RunOutcome& o = result.runs[run];
        *options.log << "run " << run << (o.ok ? " done, " : " FAILED, ") << o.events << " events";
        if (!o.ok) *options.log << ": " << o.error;
        *options.log << '\n';
      }
    }
  };
  const std::size_t workers = std::min(config.workers, config.runs);
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  // Aggregate in run-id order over the successful runs.
  for (std::int64_t t = 0; t <= config.horizon_us; t += config.sample_interval_us) result.grid.push_back(t);
  result.mean_gap.assign(result.grid.size(), 0.0);
  result.mean_consensus.assign(result.grid.size(), 0.0);
  std::size_t ok = 0;
  for (const RunOutcome& run : result.runs) {
    if (!run.ok) {
      ++result.failed;
      continue;
    }
    ++ok;
    for (std::size_t g = 0; g < result.grid.size(); ++g) {
      result.mean_gap[g] += interpolate(run.samples, result.grid[g], &GapSample::gap);
      result.mean_consensus[g] += interpolate(run.samples, result.grid[g], &GapSample::consensus);
    }
  }
  for (std::size_t g = 0; g < result.grid.size(); ++g) {
    result.mean_gap[g] = ok ? result.mean_gap[g] / static_cast<double>(ok) : std::nan("");
    result.mean_consensus[g] = ok ? result.mean_consensus[g] / static_cast<double>(ok) : std::nan("");
  }

  if (options.write_files) {
    const std::filesystem::path dir(config.output_dir);
    std::ofstream agg(dir / "aggregate.csv");
    agg << "sim_time_us,mean_gap,mean_consensus_residual,runs\n";
    for (std::size_t g = 0; g < result.grid.size(); ++g)
      agg << result.grid[g] << ',' << num12(result.mean_gap[g]) << ',' << num12(result.mean_consensus[g]) << ','
          << ok << '\n';
    std::ofstream summary(dir / "summary.txt");
    summary << "equilibrium_residual " << num12(result.equilibrium.residual) << '\n'
            << "runs " << config.runs << "\nfailed " << result.failed << '\n';
    for (const RunOutcome& run : result.runs)
      if (!run.ok) summary << "failed_run " << run.run_id << ' ' << run.error << '\n';
    for (double threshold : {1e-1, 1e-2, 1e-3}) {
      const auto t = result.crossing_time(threshold);
      summary << "crossing_time_us " << num12(threshold) << ' ' << (t ? num12(*t) : std::string("none")) << '\n';
    }
  }
  return result;
}

}  // namespace asynag
