#pragma once

// Invariant battery for recorded traces.

#include <string>
#include <vector>

#include "asynag/trace_io.hpp"

namespace asynag {

struct CheckResult {
  std::string name;
  enum class Status { pass, fail, skip } status = Status::pass;
  std::string detail;
};

struct VerifyReport {
  std::vector<CheckResult> checks;

  bool passed() const;
  const CheckResult* find(const std::string& name) const;
  std::string to_text() const;
};

struct VerifyOptions {
  double mass_tolerance = 1e-9;     ///< relative
  double weight_tolerance = 1e-12;  ///< absolute, total weight n
  double replay_tolerance = 1e-12;
};

/// Checks, by name:
///   conservation        in-flight mass equals sum x, in-flight weight equals n
///   buffer-accounting   recorded y, v of each activation equal the consumed sums
///   weight-positivity   y > 0 (and y >= n^(-nb) for n <= 3)
///   column-stochastic   every augmented matrix, plus positive real diagonals
///   augmented-replay    replayed x, z, y match the trace
///   activation-window   every player activates within b1 consecutive events
///   consumption-delay   every message is consumed within b events
///   counter-spread      |l_i - l_j| <= nb and l growth <= nb + 1 per event
///   schedule-bounds     serialized schedule satisfies sigma1 <= b1, sigma2 <= nb + 1
///   sync-reference      synchronous traces match the direct implementation
/// Game-dependent checks are skipped when the trace has no embedded instance.
VerifyReport verify_trace(const StoredTrace& stored, const VerifyOptions& options = {});
VerifyReport verify_run(const std::string& trace_path, const VerifyOptions& options = {});

}  // namespace asynag
