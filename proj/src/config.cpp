#include "asynag/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <sstream>

#include "asynag/errors.hpp"

namespace asynag {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
T parse_integer(const std::string& key, const std::string& value) {
  T out{};
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size())
    throw ConfigError("'" + key + "' expects an integer, got '" + value + "'");
  return out;
}

double parse_double(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != value.size()) throw ConfigError("'" + key + "' expects a number, got '" + value + "'");
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError("'" + key + "' expects true or false, got '" + value + "'");
}

std::string number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

StepsizeSchedule ExperimentConfig::stepsize() const {
  return rho_kind == StepsizeSchedule::Kind::constant ? StepsizeSchedule::constant(rho0)
                                                      : StepsizeSchedule::power(rho0, rho_gamma);
}

void ExperimentConfig::validate() const {
  if (firms == 0 || markets == 0) throw ConfigError("firms and markets must be >= 1");
  if (!(capacity > 0.0)) throw ConfigError("capacity must be positive");
  if (horizon_us <= 0) throw ConfigError("horizon_us must be positive");
  if (sample_interval_us <= 0) throw ConfigError("sample_interval_us must be positive");
  if (runs == 0) throw ConfigError("runs must be >= 1");
  if (workers == 0) throw ConfigError("workers must be >= 1");
  if (!(ne_tolerance > 0.0)) throw ConfigError("ne_tolerance must be positive");
  if (output_dir.empty()) throw ConfigError("output_dir must not be empty");
  timing.validate();
  stepsize();  // throws for invalid schedule parameters
}

void set_config_value(ExperimentConfig& c, const std::string& key, const std::string& value) {
  if (key == "firms") c.firms = parse_integer<std::size_t>(key, value);
  else if (key == "markets") c.markets = parse_integer<std::size_t>(key, value);
  else if (key == "capacity") c.capacity = parse_double(key, value);
  else if (key == "instance_seed") c.instance_seed = parse_integer<std::uint64_t>(key, value);
  else if (key == "topology") c.topology = parse_topology_kind(value);
  else if (key == "scheme") c.scheme = parse_scheme(value);
  else if (key == "rho") c.rho_kind = parse_stepsize_kind(value);
  else if (key == "rho0") c.rho0 = parse_double(key, value);
  else if (key == "rho_gamma") c.rho_gamma = parse_double(key, value);
  else if (key == "compute_base_ms") c.timing.compute_base_ms = parse_double(key, value);
  else if (key == "compute_spread_ms") c.timing.compute_spread_ms = parse_double(key, value);
  else if (key == "delay_mean_ms") c.timing.delay_mean_ms = parse_double(key, value);
  else if (key == "compute_min_us") c.timing.compute_min_us = parse_integer<std::int64_t>(key, value);
  else if (key == "compute_max_us") c.timing.compute_max_us = parse_integer<std::int64_t>(key, value);
  else if (key == "delay_min_us") c.timing.delay_min_us = parse_integer<std::int64_t>(key, value);
  else if (key == "delay_max_us") c.timing.delay_max_us = parse_integer<std::int64_t>(key, value);
  else if (key == "truncate") c.timing.truncate = parse_bool(key, value);
  else if (key == "horizon_us") c.horizon_us = parse_integer<std::int64_t>(key, value);
  else if (key == "sample_interval_us") c.sample_interval_us = parse_integer<std::int64_t>(key, value);
  else if (key == "runs") c.runs = parse_integer<std::size_t>(key, value);
  else if (key == "base_seed") c.base_seed = parse_integer<std::uint64_t>(key, value);
  else if (key == "ne_tolerance") c.ne_tolerance = parse_double(key, value);
  else if (key == "workers") c.workers = parse_integer<std::size_t>(key, value);
  else if (key == "save_traces") c.save_traces = parse_bool(key, value);
  else if (key == "output_dir") c.output_dir = value;
  else throw ConfigError("unknown config key '" + key + "'");
}

void apply_override(ExperimentConfig& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("override '" + assignment + "' is not KEY=VALUE");
  set_config_value(config, trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

ExperimentConfig parse_config(std::istream& is) {
  ExperimentConfig config;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("expected 'key = value'", lineno);
    try {
      set_config_value(config, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ParseError(e.what(), lineno);
    }
  }
  return config;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config '" + path + "'");
  return parse_config(is);
}

std::string to_text(const ExperimentConfig& c) {
  std::ostringstream os;
  const TimingModel& t = c.timing;
  os << "firms = " << c.firms << '\n'
     << "markets = " << c.markets << '\n'
     << "capacity = " << number(c.capacity) << '\n'
     << "instance_seed = " << c.instance_seed << '\n'
     << "topology = " << to_string(c.topology) << '\n'
     << "scheme = " << to_string(c.scheme) << '\n'
     << "rho = " << to_string(c.rho_kind) << '\n'
     << "rho0 = " << number(c.rho0) << '\n'
     << "rho_gamma = " << number(c.rho_gamma) << '\n'
     << "compute_base_ms = " << number(t.compute_base_ms) << '\n'
     << "compute_spread_ms = " << number(t.compute_spread_ms) << '\n'
     << "delay_mean_ms = " << number(t.delay_mean_ms) << '\n'
     << "compute_min_us = " << t.compute_min_us << '\n'
     << "compute_max_us = " << t.compute_max_us << '\n'
     << "delay_min_us = " << t.delay_min_us << '\n'
     << "delay_max_us = " << t.delay_max_us << '\n'
     << "truncate = " << (t.truncate ? "true" : "false") << '\n'
     << "horizon_us = " << c.horizon_us << '\n'
     << "sample_interval_us = " << c.sample_interval_us << '\n'
     << "runs = " << c.runs << '\n'
     << "base_seed = " << c.base_seed << '\n'
     << "ne_tolerance = " << number(c.ne_tolerance) << '\n'
     << "workers = " << c.workers << '\n'
     << "save_traces = " << (c.save_traces ? "true" : "false") << '\n'
     << "output_dir = " << c.output_dir << '\n';
  return os.str();
}

}  // namespace asynag
