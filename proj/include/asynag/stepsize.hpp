#pragma once

#include <string>

namespace asynag {

/// rho(t): constant rho0, or rho0 / (1 + t)^gamma.
struct StepsizeSchedule {
  enum class Kind { constant, power };

  Kind kind = Kind::constant;
  double rho0 = 0.01;
  double gamma = 1.0;

  static StepsizeSchedule constant(double rho0);
  /// With `require_decay_conditions`, gamma must lie in (0.5, 1] so that
  /// rho is nonincreasing, non-summable and square-summable.
  static StepsizeSchedule power(double rho0, double gamma, bool require_decay_conditions = true);

  double operator()(long t) const;
};

double rho_value(const StepsizeSchedule& rho, long t);

/// sum_{t=l}^{l_max} rho(t), both ends inclusive; l_max < l is treated as l_max = l.
double aggressive_stepsize(long l, long l_max, const StepsizeSchedule& rho);

StepsizeSchedule::Kind parse_stepsize_kind(const std::string& name);
std::string to_string(StepsizeSchedule::Kind kind);

}  // namespace asynag
