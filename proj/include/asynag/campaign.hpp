#pragma once

// Monte-Carlo campaigns over one Cournot instance: the reference equilibrium
// is computed once, then independent runs with derived seeds are simulated
// and their gap curves averaged on a common simulated-time grid.
//
// Files written to the output directory:
//   config.txt      effective configuration
//   run_NNN.csv     run_id,sim_time_us,k,gap,consensus_residual
//   aggregate.csv   sim_time_us,mean_gap,mean_consensus_residual,runs
//   summary.txt     equilibrium residual, failed runs, crossing times
//   trace_NNN.txt   full trace per run, with save_traces
// Numbers in CSV files carry 12 significant digits.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "asynag/config.hpp"
#include "asynag/cournot.hpp"

namespace asynag {

/// ||x - x*||_inf / ||x*||_inf. Throws ContractViolation if x* = 0.
double gap_metric(std::span<const double> x, std::span<const double> x_star);

struct GapSample {
  std::int64_t t_us = 0;
  long k = -1;  ///< last event at or before t_us
  double gap = 0.0;
  double consensus = 0.0;
};

struct RunOutcome {
  std::size_t run_id = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  std::vector<GapSample> samples;
  long events = 0;
};

struct CampaignResult {
  CournotParams instance;
  NashSolution equilibrium;
  std::vector<RunOutcome> runs;  ///< indexed by run id
  std::vector<std::int64_t> grid;
  Vec mean_gap;
  Vec mean_consensus;
  std::size_t failed = 0;

  /// First grid time where the mean gap falls below `threshold`, linearly
  /// interpolated between grid points.
  std::optional<double> crossing_time(double threshold) const;
};

struct CampaignOptions {
  bool write_files = true;
  /// Order in which runs are started; empty means by run id.
  std::vector<std::size_t> launch_order;
  /// Progress messages go here when set.
  std::ostream* log = nullptr;
};

/// Seed of run r.
std::uint64_t run_seed(std::uint64_t base_seed, std::size_t run);

/// The game instance a configuration describes.
CournotParams campaign_instance(const ExperimentConfig& config);

CampaignResult run_campaign(const ExperimentConfig& config, const CampaignOptions& options = {});

/// Linear interpolation of (t, value) samples at time t; holds the end
/// values outside the sampled range.
double interpolate(const std::vector<GapSample>& samples, std::int64_t t, double GapSample::*field);

/// First time the curve (grid[i], values[i]) drops below `threshold`.
std::optional<double> crossing_time(std::span<const std::int64_t> grid, std::span<const double> values,
                                   double threshold);

}  // namespace asynag
