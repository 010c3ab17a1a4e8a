#pragma once

// Experiment configuration: a plain-text file of "key = value" lines.
// Blank lines and text after '#' are ignored; unknown keys are errors.
//
//   firms              number of players n                       (20)
//   markets            number of markets L                       (10)
//   capacity           production capacity per firm and market   (500)
//   instance_seed      seed of the Cournot instance              (1)
//   topology           cycle | star | log | complete             (log)
//   scheme             aggressive | nonadaptive | synchronous    (aggressive)
//   rho                constant | power                          (constant)
//   rho0               stepsize scale                            (0.005)
//   rho_gamma          decay exponent of the power schedule      (0.6)
//   compute_base_ms    computation mean is base + |N(0, spread^2)| ms (1)
//   compute_spread_ms                                            (5)
//   delay_mean_ms      mean message delay                        (5)
//   compute_min_us, compute_max_us   computation window         (100, 100000)
//   delay_min_us, delay_max_us       delay window               (100, 100000)
//   truncate           clamp durations into their windows       (true)
//   horizon_us         simulated time per run                   (5000000)
//   sample_interval_us spacing of the recorded gap curve         (10000)
//   runs               Monte-Carlo runs                          (50)
//   base_seed          seed from which run seeds are derived     (1)
//   ne_tolerance       residual target of the reference solver   (1e-10)
//   workers            concurrent runs                           (1)
//   save_traces        also write a full trace file per run      (false)
//   output_dir         where CSV files go                        (out)

#include <cstdint>
#include <iosfwd>
#include <string>

#include "asynag/engine.hpp"
#include "asynag/stepsize.hpp"
#include "asynag/timing.hpp"
#include "asynag/topology.hpp"

namespace asynag {

struct ExperimentConfig {
  std::size_t firms = 20;
  std::size_t markets = 10;
  double capacity = 500.0;
  std::uint64_t instance_seed = 1;
  TopologyKind topology = TopologyKind::log;
  Scheme scheme = Scheme::aggressive;
  StepsizeSchedule::Kind rho_kind = StepsizeSchedule::Kind::constant;
  double rho0 = 0.005;
  double rho_gamma = 0.6;
  TimingModel timing;
  std::int64_t horizon_us = 5'000'000;
  std::int64_t sample_interval_us = 10'000;
  std::size_t runs = 50;
  std::uint64_t base_seed = 1;
  double ne_tolerance = 1e-10;
  std::size_t workers = 1;
  bool save_traces = false;
  std::string output_dir = "out";

  StepsizeSchedule stepsize() const;
  /// Throws ConfigError on inconsistent values.
  void validate() const;
};

/// Sets one key; throws ConfigError for unknown keys or malformed values.
void set_config_value(ExperimentConfig& config, const std::string& key, const std::string& value);
/// Applies "KEY=VALUE".
void apply_override(ExperimentConfig& config, const std::string& assignment);

/// Parses a config file on top of the defaults. Errors carry line numbers.
ExperimentConfig parse_config(std::istream& is);
ExperimentConfig load_config(const std::string& path);

/// Every key with its effective value, in the documented order; parsing the
/// output reproduces the configuration.
std::string to_text(const ExperimentConfig& config);

}  // namespace asynag
