#pragma once

// Deterministic discrete-event execution of the asynchronous push-sum
// Nash-seeking algorithm. Players activate at their own pace, consume every
// message buffered since their previous activation, take a projected
// pseudo-gradient step against their local aggregate estimate, and broadcast
// the rescaled push-sum mass, weight and update counter to their out-neighbors.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "asynag/game.hpp"
#include "asynag/stepsize.hpp"
#include "asynag/timing.hpp"
#include "asynag/topology.hpp"

namespace asynag {

enum class Scheme { aggressive, nonadaptive, synchronous };

Scheme parse_scheme(const std::string& name);
std::string to_string(Scheme scheme);

/// One global event: all players activated at simulated time t(k).
/// Per-player arrays hold the values after the event; idle players keep
/// their latest values.
struct EventRecord {
  long k = 0;
  std::int64_t t_us = 0;
  std::vector<std::size_t> activated;
  std::vector<std::size_t> skipped;  ///< activated with an empty buffer
  Vec x, v, z;                       ///< n * p
  Vec y;                             ///< n
  std::vector<long> l;               ///< n
  Vec alpha;                         ///< n; zero for idle players
};

struct MessageRecord {
  std::size_t sender = 0;
  std::size_t receiver = 0;
  long send_event = -1;  ///< -1 for the initial broadcast at t = 0
  std::int64_t send_us = 0;
  std::int64_t deliver_us = 0;
  long consume_event = -1;  ///< -1 while unconsumed at the end of the run
};

/// Totally ordered record of a run. Message payloads are not stored: they are
/// the sender's (v, y, l) at the send event divided by its out-degree.
struct EventTrace {
  std::size_t n = 0;
  std::size_t p = 0;
  Scheme scheme = Scheme::aggressive;
  bool frozen = false;
  StepsizeSchedule rho;
  std::uint64_t seed = 0;
  std::int64_t horizon_us = 0;
  /// Configured bounds: max delay, min and max gap between activations.
  std::int64_t tau_us = 0, tau_lo_us = 0, tau_hi_us = 0;
  Digraph graph;
  Vec x0;
  std::vector<EventRecord> events;
  std::vector<MessageRecord> messages;

  /// x before event k (x0 for k = 0).
  std::span<const double> x_before(long k) const {
    return k == 0 ? std::span<const double>(x0) : std::span<const double>(events[k - 1].x);
  }
};

/// Read-only view of the live state handed to observers.
struct SimView {
  std::size_t n = 0, p = 0;
  long k = -1;  ///< last processed event (-1 before the first)
  std::int64_t t_us = 0;
  std::span<const double> x, z, y;
  std::span<const long> l;
};

struct StopRule {
  bool enabled = false;
  double eps_x = 1e-6;
  double eps_z = 1e-6;
  long window = 50;  ///< consecutive quiet activations
};

struct SimConfig {
  Scheme scheme = Scheme::aggressive;
  StepsizeSchedule rho = StepsizeSchedule::constant(0.01);
  TimingModel timing;
  std::int64_t horizon_us = 1'000'000;
  std::uint64_t seed = 0;
  /// Initial actions; drawn by projecting a uniform box sample when empty.
  Vec initial_actions;
  /// Disables the optimization step (pure push-sum on fixed actions).
  bool freeze_actions = false;
  bool record_trace = false;
  /// Recompute mass and weight totals over buffers and in-flight messages
  /// after every event.
  bool check_invariants = false;
  StopRule stop;
  /// Calls on_sample(view) for every t = 0, dt, 2dt, ... <= horizon with the
  /// state in force at that time.
  std::int64_t sample_interval_us = 0;
  std::function<void(const SimView&)> on_sample;
  std::function<void(const SimView&)> on_event;
};

struct SimResult {
  EventTrace trace;  ///< events/messages populated only with record_trace
  Vec x, z;
  std::vector<long> l;
  long events = 0;
  std::int64_t end_us = 0;
  bool stopped_early = false;
  std::size_t skipped_activations = 0;
  double max_mass_error = 0.0;    ///< relative, when check_invariants
  double max_weight_error = 0.0;  ///< absolute, when check_invariants
  Vec mean_compute_ms;
};

/// Runs the algorithm until the horizon (or the stop rule). Pure function of
/// (game, graph, config). Throws ContractViolation if the graph is not
/// strongly connected and InvariantViolation if a push-sum weight underflows.
SimResult run_simulation(const Game& game, const Digraph& graph, const SimConfig& config);

/// max_i ||z_i - mean(x)||.
double consensus_gap(std::span<const double> x, std::span<const double> z, std::size_t n, std::size_t p);

}  // namespace asynag
