#include "asynag/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "asynag/compensated.hpp"
#include "asynag/errors.hpp"
#include "asynag/rng.hpp"

namespace asynag {

Scheme parse_scheme(const std::string& name) {
  if (name == "aggressive") return Scheme::aggressive;
  if (name == "nonadaptive") return Scheme::nonadaptive;
  if (name == "synchronous") return Scheme::synchronous;
  throw ConfigError("unknown scheme '" + name + "'");
}

std::string to_string(Scheme scheme) {
  switch (scheme) {
    case Scheme::aggressive: return "aggressive";
    case Scheme::nonadaptive: return "nonadaptive";
    case Scheme::synchronous: return "synchronous";
  }
  return "?";
}

double consensus_gap(std::span<const double> x, std::span<const double> z, std::size_t n, std::size_t p) {
  Vec mean(p, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < p; ++c) mean[c] += x[i * p + c];
  for (double& m : mean) m /= static_cast<double>(n);
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double sq = 0.0;
    for (std::size_t c = 0; c < p; ++c) sq += (z[i * p + c] - mean[c]) * (z[i * p + c] - mean[c]);
    worst = std::max(worst, std::sqrt(sq));
  }
  return worst;
}

namespace {

constexpr double kWeightFloor = 1e-300;

struct Broadcast {
  Vec v;
  double y = 0.0;
  long l = 0;
  std::size_t refs = 0;
};

struct Pending {
  std::int64_t deliver_us;
  long send_event;
  std::size_t broadcast;
  std::size_t message;  // index into the trace, when recording
};

// Running (sum, sum, max) accumulators of one player's buffers.
struct Buffer {
  std::vector<CompensatedSum> sum_v;
  CompensatedSum sum_y;
  long max_l = -1;
  bool nonempty = false;

  void reset() {
    for (auto& s : sum_v) s.reset();
    sum_y.reset();
    max_l = -1;
    nonempty = false;
  }
};

class Simulator {
 public:
  Simulator(const Game& game, const Digraph& graph, const SimConfig& config)
      : game_(game),
        graph_(graph),
        config_(config),
        n_(game.players()),
        p_(game.block_dim()),
        timing_(config.timing, game.players(), config.seed) {
    if (graph.size() != n_) throw ContractViolation("run_simulation: graph size differs from player count");
    if (!is_strongly_connected(graph)) throw ContractViolation("run_simulation: graph is not strongly connected");
    if (config.horizon_us <= 0) throw ContractViolation("run_simulation: horizon must be positive");

    if (config.initial_actions.empty()) {
      RandomStream rng(derive_seed(config.seed, 0x696e6974));
      x_ = random_feasible(game, rng);
    } else {
      if (config.initial_actions.size() != n_ * p_)
        throw ContractViolation("run_simulation: initial actions have wrong dimension");
      if (!is_feasible(game, config.initial_actions))
        throw ContractViolation("run_simulation: initial actions are infeasible");
      x_ = config.initial_actions;
    }
    v_ = x_;
    z_ = x_;
    y_.assign(n_, 1.0);
    l_.assign(n_, 0);
    alpha_.assign(n_, 0.0);
    inbox_.resize(n_);
    buffers_.resize(n_);
    for (auto& b : buffers_) b.sum_v.assign(p_, CompensatedSum());
    next_us_.assign(n_, 0);
    quiet_ = 0;

    EventTrace& trace = result_.trace;
    trace.n = n_;
    trace.p = p_;
    trace.scheme = config.scheme;
    trace.frozen = config.freeze_actions;
    trace.rho = config.rho;
    trace.seed = config.seed;
    trace.horizon_us = config.horizon_us;
    trace.graph = graph;
    trace.x0 = x_;
    const TimingModel& tm = config.timing;
    trace.tau_us = tm.delay_max_us;
    if (config.scheme == Scheme::synchronous) {
      trace.tau_lo_us = tm.compute_min_us + tm.delay_min_us;
      trace.tau_hi_us = tm.compute_max_us + tm.delay_max_us;
    } else {
      trace.tau_lo_us = tm.compute_min_us;
      trace.tau_hi_us = tm.compute_max_us;
    }
    for (std::size_t i = 0; i < n_; ++i) result_.mean_compute_ms.push_back(timing_.mean_compute_ms(i));
  }

  SimResult run() {
    // Initialization: every player broadcasts v = x, y = 1, l = 0 at t = 0.
    std::int64_t max_init_delay = 0;
    for (std::size_t i = 0; i < n_; ++i) max_init_delay = std::max(max_init_delay, broadcast(i, -1, 0));
    if (config_.scheme == Scheme::synchronous) {
      sync_tick_ = round_length(max_init_delay);
    } else {
      for (std::size_t i = 0; i < n_; ++i) next_us_[i] = timing_.compute_us(i);
    }
    next_sample_us_ = 0;

    std::vector<std::size_t> activated;
    long k = 0;
    for (;;) {
      const std::int64_t t = next_event_time();
      if (t > config_.horizon_us) break;
      emit_samples_before(t);

      activated.clear();
      if (config_.scheme == Scheme::synchronous) {
        for (std::size_t i = 0; i < n_; ++i) activated.push_back(i);
      } else {
        for (std::size_t i = 0; i < n_; ++i)
          if (next_us_[i] == t) activated.push_back(i);
      }

      std::vector<std::size_t> skipped;
      std::fill(alpha_.begin(), alpha_.end(), 0.0);
      bool all_quiet = true;
      for (std::size_t i : activated) {
        if (!activate(i, k, t, all_quiet)) skipped.push_back(i);
      }
      std::int64_t max_delay = 0;
      for (std::size_t i : activated) {
        if (std::find(skipped.begin(), skipped.end(), i) == skipped.end())
          max_delay = std::max(max_delay, broadcast(i, k, t));
      }
      if (config_.scheme == Scheme::synchronous) {
        sync_tick_ = t + round_length(max_delay);
      } else {
        for (std::size_t i : activated) next_us_[i] = t + timing_.compute_us(i);
      }
      result_.skipped_activations += skipped.size();
      now_ = t;
      last_k_ = k;

      if (config_.record_trace) record(k, t, activated, skipped);
      if (config_.check_invariants) check_conservation();
      if (config_.on_event) config_.on_event(view());
      ++k;

      if (config_.stop.enabled) {
        quiet_ = all_quiet ? quiet_ + static_cast<long>(activated.size()) : 0;
        if (quiet_ >= config_.stop.window) {
          result_.stopped_early = true;
          break;
        }
      }
    }
    if (!result_.stopped_early) emit_samples_before(config_.horizon_us + 1);

    result_.x = x_;
    result_.z = z_;
    result_.l = l_;
    result_.events = k;
    result_.end_us = now_;
    return std::move(result_);
  }

 private:
  std::int64_t next_event_time() const {
    if (config_.scheme == Scheme::synchronous) return sync_tick_;
    return *std::min_element(next_us_.begin(), next_us_.end());
  }

  // A synchronous round waits for the slowest computation and the slowest
  // message of the round.
  std::int64_t round_length(std::int64_t max_delay) {
    std::int64_t slowest = 0;
    for (std::size_t i = 0; i < n_; ++i) slowest = std::max(slowest, timing_.compute_us(i));
    return slowest + max_delay;
  }

  SimView view() const {
    SimView v;
    v.n = n_;
    v.p = p_;
    v.k = last_k_;
    v.t_us = now_;
    v.x = x_;
    v.z = z_;
    v.y = y_;
    v.l = l_;
    return v;
  }

  void emit_samples_before(std::int64_t t) {
    if (config_.sample_interval_us <= 0 || !config_.on_sample) return;
    while (next_sample_us_ < t && next_sample_us_ <= config_.horizon_us) {
      SimView v = view();
      v.t_us = next_sample_us_;
      config_.on_sample(v);
      next_sample_us_ += config_.sample_interval_us;
    }
  }

  // Broadcasts player i's current (v, y, l) divided by its out-degree; the
  // copy addressed to itself has zero delay. Returns the largest delay drawn.
  std::int64_t broadcast(std::size_t i, long k, std::int64_t t) {
    const std::size_t d = graph_.out_degree(i);
    const double inv_d = 1.0 / static_cast<double>(d);
    std::size_t slot;
    if (!free_.empty()) {
      slot = free_.back();
      free_.pop_back();
    } else {
      slot = pool_.size();
      pool_.emplace_back();
      pool_.back().v.resize(p_);
    }
    Broadcast& b = pool_[slot];
    for (std::size_t c = 0; c < p_; ++c) b.v[c] = inv_d * v_[i * p_ + c];
    b.y = inv_d * y_[i];
    b.l = l_[i];
    b.refs = d;
    std::int64_t max_delay = 0;
    for (std::size_t j : graph_.out_neighbors(i)) {
      const std::int64_t delay = (j == i) ? 0 : timing_.delay_us(i);
      max_delay = std::max(max_delay, delay);
      std::size_t message = 0;
      if (config_.record_trace) {
        message = result_.trace.messages.size();
        result_.trace.messages.push_back({i, j, k, t, t + delay, -1});
      }
      inbox_[j].push_back({t + delay, k, slot, message});
    }
    return max_delay;
  }

  void release(std::size_t slot) {
    if (--pool_[slot].refs == 0) free_.push_back(slot);
  }

  // Lines 1-6 of one activation. Returns false if the buffer was empty.
  bool activate(std::size_t i, long k, std::int64_t t, bool& all_quiet) {
    Buffer& buf = buffers_[i];
    auto& inbox = inbox_[i];
    auto keep = inbox.begin();
    for (auto it = inbox.begin(); it != inbox.end(); ++it) {
      if (it->deliver_us <= t && it->send_event < k) {
        const Broadcast& b = pool_[it->broadcast];
        for (std::size_t c = 0; c < p_; ++c) buf.sum_v[c].add(b.v[c]);
        buf.sum_y.add(b.y);
        buf.max_l = std::max(buf.max_l, b.l);
        buf.nonempty = true;
        if (config_.record_trace) result_.trace.messages[it->message].consume_event = k;
        release(it->broadcast);
      } else {
        *keep++ = *it;
      }
    }
    inbox.erase(keep, inbox.end());
    if (!buf.nonempty) return false;

    const std::span<double> xi(x_.data() + i * p_, p_);
    const std::span<double> vi(v_.data() + i * p_, p_);
    const std::span<double> zi(z_.data() + i * p_, p_);

    const double y = buf.sum_y.value();
    if (!(y >= kWeightFloor))
      throw InvariantViolation("push-sum weight of player " + std::to_string(i + 1) + " underflowed at event " +
                               std::to_string(k));
    y_[i] = y;
    double dz = 0.0;
    w_.resize(p_);
    for (std::size_t c = 0; c < p_; ++c) {
      w_[c] = buf.sum_v[c].value();
      const double z = w_[c] / y;
      dz = std::max(dz, std::abs(z - zi[c]));
      zi[c] = z;
    }

    const long l_own = l_[i];
    const long l_max = std::max(buf.max_l, l_own);
    double alpha = 0.0;
    switch (config_.scheme) {
      case Scheme::aggressive:
        alpha = aggressive_stepsize(l_own, l_max, config_.rho);
        l_[i] = l_max + 1;
        break;
      case Scheme::nonadaptive:
        alpha = config_.rho(l_own);
        l_[i] = l_own + 1;
        break;
      case Scheme::synchronous:
        alpha = config_.rho(l_own);
        l_[i] = l_max + 1;
        break;
    }
    alpha_[i] = alpha;

    x_prev_.assign(xi.begin(), xi.end());
    if (!config_.freeze_actions) {
      grad_.resize(p_);
      trial_.resize(p_);
      game_.gradient(i, xi, zi, grad_);
      for (std::size_t c = 0; c < p_; ++c) trial_[c] = xi[c] - alpha * grad_[c];
      game_.action_set(i).project(trial_, xi);
    }
    double dx = 0.0;
    for (std::size_t c = 0; c < p_; ++c) {
      vi[c] = w_[c] + (xi[c] - x_prev_[c]);
      dx = std::max(dx, std::abs(xi[c] - x_prev_[c]));
    }
    if (dx > config_.stop.eps_x || dz > config_.stop.eps_z) all_quiet = false;
    buf.reset();
    return true;
  }

  void record(long k, std::int64_t t, const std::vector<std::size_t>& activated,
              const std::vector<std::size_t>& skipped) {
    EventRecord rec;
    rec.k = k;
    rec.t_us = t;
    rec.activated = activated;
    rec.skipped = skipped;
    rec.x = x_;
    rec.v = v_;
    rec.z = z_;
    rec.y = y_;
    rec.l = l_;
    rec.alpha = alpha_;
    result_.trace.events.push_back(std::move(rec));
  }

  // Mass held in buffers plus in flight must equal sum_i x_i; weight must
  // equal n.
  void check_conservation() {
    Vec mass(p_, 0.0), actions(p_, 0.0);
    double weight = 0.0;
    for (std::size_t s = 0; s < pool_.size(); ++s) {
      const Broadcast& b = pool_[s];
      if (b.refs == 0) continue;
      const double r = static_cast<double>(b.refs);
      for (std::size_t c = 0; c < p_; ++c) mass[c] += r * b.v[c];
      weight += r * b.y;
    }
    double scale = 1.0;
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t c = 0; c < p_; ++c) actions[c] += x_[i * p_ + c];
    for (double a : actions) scale = std::max(scale, std::abs(a));
    double err = 0.0;
    for (std::size_t c = 0; c < p_; ++c) err = std::max(err, std::abs(mass[c] - actions[c]));
    result_.max_mass_error = std::max(result_.max_mass_error, err / scale);
    result_.max_weight_error = std::max(result_.max_weight_error, std::abs(weight - static_cast<double>(n_)));
  }

  const Game& game_;
  const Digraph& graph_;
  const SimConfig& config_;
  std::size_t n_, p_;
  TimingSampler timing_;

  Vec x_, v_, z_, y_, alpha_;
  std::vector<long> l_;
  std::vector<std::vector<Pending>> inbox_;
  std::vector<Buffer> buffers_;
  std::vector<Broadcast> pool_;
  std::vector<std::size_t> free_;
  std::vector<std::int64_t> next_us_;
  std::int64_t sync_tick_ = 0;
  std::int64_t next_sample_us_ = 0;
  std::int64_t now_ = 0;
  long last_k_ = -1;
  long quiet_ = 0;
  Vec x_prev_, grad_, trial_, w_;

  SimResult result_;
};

}  // namespace

SimResult run_simulation(const Game& game, const Digraph& graph, const SimConfig& config) {
  Simulator sim(game, graph, config);
  return sim.run();
}

}  // namespace asynag
