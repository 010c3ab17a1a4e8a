#pragma once

// Perturbed coordinate pseudo-gradient algorithm: one player s(k) updates per
// iteration against the exact mean action, with stepsize
// alpha = sum_{t=r_i(k)}^{r_i(k+1)-1} rho(t) and a perturbed gradient
// F_i(x_i, x̄) + eps_i(k).

#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "asynag/engine.hpp"
#include "asynag/game.hpp"
#include "asynag/stepsize.hpp"

namespace asynag {

/// Updating sequence s(k) with counter increments dr(k) for player s(k).
struct Schedule {
  std::size_t players = 0;
  std::vector<std::size_t> order;
  std::vector<long> increments;  ///< same length as order; empty means all 1

  std::size_t size() const { return order.size(); }
  long increment(std::size_t k) const { return increments.empty() ? 1 : increments[k]; }
};

Schedule round_robin(std::size_t players, std::size_t iterations, long increment = 1);

struct ScheduleReport {
  long sigma1 = 0;  ///< smallest window length containing every player, over the horizon
  long sigma2 = 0;  ///< max of counter spread and single increments
  std::vector<std::string> violations;

  bool ok() const { return violations.empty(); }
};

/// Scans the first `horizon` iterations. Windows that miss a player and
/// counter spreads beyond the supplied bounds are listed as violations, as
/// are players that never update and increments below 1.
ScheduleReport validate_schedule(const Schedule& schedule, std::size_t horizon,
                                 std::optional<long> sigma1_bound = std::nullopt,
                                 std::optional<long> sigma2_bound = std::nullopt);

/// eps_i(k) generator.
struct Perturbation {
  std::function<void(std::size_t i, long k, std::span<double> eps)> fill;

  static Perturbation none();
  /// Every coordinate equal to c / (1 + k).
  static Perturbation harmonic(double c);
  /// Every coordinate equal to c.
  static Perturbation constant(double c);
};

struct PcpaResult {
  Vec x;
  long iterations = 0;
  /// Per player, sum over its updates of rho(k) ||eps_i(k)||.
  Vec perturbation_sum;
  /// The part of perturbation_sum accrued over the last tenth of the run.
  Vec perturbation_tail;
};

/// Runs `iterations` steps of the schedule from feasible x0. `observe` is
/// called with (k, x(k)) for k = 0 and then every `observe_every` iterations.
PcpaResult pcpa_run(const Game& game, const Schedule& schedule, const StepsizeSchedule& rho,
                    const Perturbation& perturb, std::size_t iterations, std::span<const double> x0,
                    const std::function<void(long, std::span<const double>)>& observe = {},
                    std::size_t observe_every = 0);

/// Serializes a recorded run into single-player steps: the activated players
/// of each event in ascending order, with increments l_i(k+1) - l_i(k).
Schedule schedule_from_trace(const EventTrace& trace);

/// Replays event k of the trace as |A(k)| single-player PCPA steps whose
/// perturbations carry the difference between the player's local estimate and
/// the partially updated exact mean. Returns x after the last step; equals the
/// engine's x(k+1) up to rounding.
Vec serialize_event(const EventTrace& trace, const Game& game, long k);

/// Writes one "X k x(k)" line per observed iteration.
void write_trajectory(std::ostream& os, std::size_t n, std::size_t p,
                      const std::vector<std::pair<long, Vec>>& samples);

}  // namespace asynag
