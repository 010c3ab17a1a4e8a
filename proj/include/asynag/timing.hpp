#pragma once

#include <cstdint>
#include <vector>

#include "asynag/rng.hpp"

namespace asynag {

/// Heterogeneous computation times and message delays. Player i computes for
/// exp(mean mu_i) ms with mu_i = base + |nu_i|, nu_i ~ N(0, spread^2) drawn
/// once per run; each message is delayed exp(mean delay_mean) ms. Durations
/// are rounded to integer microseconds and clamped into their windows.
struct TimingModel {
  double compute_base_ms = 1.0;
  double compute_spread_ms = 5.0;
  double delay_mean_ms = 5.0;
  std::int64_t compute_min_us = 100;
  std::int64_t compute_max_us = 100'000;
  std::int64_t delay_min_us = 100;
  std::int64_t delay_max_us = 100'000;
  bool truncate = true;

  void validate() const;
};

/// Per-run sampler. Each player owns an independent computation stream and an
/// independent stream for the delays of the messages it sends.
class TimingSampler {
 public:
  TimingSampler(const TimingModel& model, std::size_t players, std::uint64_t seed);

  double mean_compute_ms(std::size_t player) const { return mean_compute_ms_[player]; }
  std::int64_t compute_us(std::size_t player);
  std::int64_t delay_us(std::size_t sender);

 private:
  std::int64_t quantize(double ms, std::int64_t lo, std::int64_t hi) const;

  TimingModel model_;
  std::vector<double> mean_compute_ms_;
  std::vector<RandomStream> compute_streams_;
  std::vector<RandomStream> delay_streams_;
};

}  // namespace asynag
