#include "asynag/stepsize.hpp"

#include <algorithm>
#include <cmath>

#include "asynag/errors.hpp"

namespace asynag {

StepsizeSchedule StepsizeSchedule::constant(double rho0) {
  if (!(rho0 > 0.0)) throw ConfigError("stepsize: rho0 must be positive");
  return {Kind::constant, rho0, 0.0};
}

StepsizeSchedule StepsizeSchedule::power(double rho0, double gamma, bool require_decay_conditions) {
  if (!(rho0 > 0.0)) throw ConfigError("stepsize: rho0 must be positive");
  if (!(gamma >= 0.0)) throw ConfigError("stepsize: gamma must be nonnegative");
  if (require_decay_conditions && !(gamma > 0.5 && gamma <= 1.0))
    throw ConfigError("stepsize: power schedule needs gamma in (0.5, 1]");
  return {Kind::power, rho0, gamma};
}

double StepsizeSchedule::operator()(long t) const {
  if (kind == Kind::constant) return rho0;
  return rho0 / std::pow(1.0 + static_cast<double>(t), gamma);
}

double rho_value(const StepsizeSchedule& rho, long t) {
  if (t < 0) throw ContractViolation("rho_value: t must be nonnegative");
  return rho(t);
}

double aggressive_stepsize(long l, long l_max, const StepsizeSchedule& rho) {
  const long last = std::max(l, l_max);
  if (rho.kind == StepsizeSchedule::Kind::constant) return static_cast<double>(last - l + 1) * rho.rho0;
  double alpha = 0.0;
  for (long t = l; t <= last; ++t) alpha += rho(t);
  return alpha;
}

StepsizeSchedule::Kind parse_stepsize_kind(const std::string& name) {
  if (name == "constant") return StepsizeSchedule::Kind::constant;
  if (name == "power") return StepsizeSchedule::Kind::power;
  throw ConfigError("unknown stepsize kind '" + name + "'");
}

std::string to_string(StepsizeSchedule::Kind kind) {
  return kind == StepsizeSchedule::Kind::constant ? "constant" : "power";
}

}  // namespace asynag
