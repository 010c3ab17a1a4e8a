#pragma once

// Plain-text trace files. Layout:
//
//   asynag-trace v1
//   scheme S / frozen 0|1 / rho KIND RHO0 GAMMA / n N / p P / seed SEED
//   horizon_us H / tau_us T / tau_lo_us T / tau_hi_us T
//   edges COUNT, then COUNT lines "i j" (1-based, self-loops implicit)
//   an optional embedded "cournot-instance v1 ... end" record
//   x0 (n*p values)
//   events COUNT, then one line per global event:
//     E k t_us A a_1..a_A S s_1..s_S, then per player x(p) v(p) y l alpha z(p)
//   messages COUNT, then one line per message:
//     M sender receiver send_event send_us deliver_us consume_event
//   end
//
// Player ids are 1-based in the file. Doubles are written with 17
// significant digits, so a trace reads back bit-for-bit.

#include <iosfwd>
#include <optional>
#include <string>

#include "asynag/cournot.hpp"
#include "asynag/engine.hpp"

namespace asynag {

struct StoredTrace {
  EventTrace trace;
  std::optional<CournotParams> instance;
};

void write_trace(std::ostream& os, const EventTrace& trace, const CournotParams* instance = nullptr);
/// Throws ParseError with the offending line number.
StoredTrace read_trace(std::istream& is);

void save_trace(const std::string& path, const EventTrace& trace, const CournotParams* instance = nullptr);
StoredTrace load_trace(const std::string& path);

}  // namespace asynag
