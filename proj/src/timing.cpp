#include "asynag/timing.hpp"

#include <algorithm>
#include <cmath>

#include "asynag/errors.hpp"

namespace asynag {

void TimingModel::validate() const {
  if (!(compute_base_ms > 0.0) || !(compute_spread_ms >= 0.0) || !(delay_mean_ms >= 0.0))
    throw ConfigError("timing: means must be positive");
  if (compute_min_us <= 0 || compute_max_us < compute_min_us)
    throw ConfigError("timing: computation window must satisfy 0 < min <= max");
  if (delay_min_us < 0 || delay_max_us < delay_min_us)
    throw ConfigError("timing: delay window must satisfy 0 <= min <= max");
}

TimingSampler::TimingSampler(const TimingModel& model, std::size_t players, std::uint64_t seed)
    : model_(model) {
  model_.validate();
  RandomStream speed(derive_seed(seed, 0x7370656564));
  mean_compute_ms_.reserve(players);
  compute_streams_.reserve(players);
  delay_streams_.reserve(players);
  for (std::size_t i = 0; i < players; ++i) {
    mean_compute_ms_.push_back(model_.compute_base_ms + std::abs(speed.normal(0.0, model_.compute_spread_ms)));
    compute_streams_.emplace_back(derive_seed(seed, 0x636f6d70, i));
    delay_streams_.emplace_back(derive_seed(seed, 0x64656c6179, i));
  }
}

std::int64_t TimingSampler::quantize(double ms, std::int64_t lo, std::int64_t hi) const {
  const auto us = static_cast<std::int64_t>(std::llround(ms * 1000.0));
  return model_.truncate ? std::clamp(us, lo, hi) : us;
}

std::int64_t TimingSampler::compute_us(std::size_t player) {
  const double ms = compute_streams_[player].exponential(mean_compute_ms_[player]);
  return std::max<std::int64_t>(1, quantize(ms, model_.compute_min_us, model_.compute_max_us));
}

std::int64_t TimingSampler::delay_us(std::size_t sender) {
  const double ms = delay_streams_[sender].exponential(model_.delay_mean_ms);
  return quantize(ms, model_.delay_min_us, model_.delay_max_us);
}

}  // namespace asynag
