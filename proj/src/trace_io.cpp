#include "asynag/trace_io.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "asynag/errors.hpp"

namespace asynag {

namespace {

void put(std::ostream& os, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, " %.17g", v);
  os << buf;
}

class LineReader {
 public:
  explicit LineReader(std::istream& is) : is_(is) {}

  std::istringstream next() {
    std::string line;
    while (std::getline(is_, line)) {
      ++line_;
      if (!line.empty()) return std::istringstream(line);
    }
    throw ParseError("unexpected end of trace", line_);
  }

  /// Next line, which must start with `key`.
  std::istringstream expect(const std::string& key) {
    std::istringstream in = next();
    std::string word;
    in >> word;
    if (word != key) fail("expected '" + key + "', found '" + word + "'");
    return in;
  }

  template <class T>
  T value(std::istringstream& in, const char* what) {
    T v{};
    if (!(in >> v)) fail(std::string("missing or malformed ") + what);
    return v;
  }

  void finish(std::istringstream& in) {
    std::string rest;
    if (in >> rest) fail("unexpected trailing field '" + rest + "'");
  }

  [[noreturn]] void fail(const std::string& what) const { throw ParseError(what, line_); }

  std::istream& stream() { return is_; }
  std::size_t& line() { return line_; }

 private:
  std::istream& is_;
  std::size_t line_ = 0;
};

std::size_t player_id(LineReader& r, std::istringstream& in, std::size_t n) {
  const auto id = r.value<std::size_t>(in, "player id");
  if (id < 1 || id > n) r.fail("player id " + std::to_string(id) + " out of range");
  return id - 1;
}

}  // namespace

void write_trace(std::ostream& os, const EventTrace& t, const CournotParams* instance) {
  const std::size_t n = t.n, p = t.p;
  os << "asynag-trace v1\n";
  os << "scheme " << to_string(t.scheme) << '\n';
  os << "frozen " << (t.frozen ? 1 : 0) << '\n';
  os << "rho " << to_string(t.rho.kind);
  put(os, t.rho.rho0);
  put(os, t.rho.gamma);
  os << '\n';
  os << "n " << n << "\np " << p << "\nseed " << t.seed << '\n';
  os << "horizon_us " << t.horizon_us << "\ntau_us " << t.tau_us << "\ntau_lo_us " << t.tau_lo_us
     << "\ntau_hi_us " << t.tau_hi_us << '\n';
  const auto edges = t.graph.edges();
  os << "edges " << edges.size() << '\n';
  for (const auto& [i, j] : edges) os << i + 1 << ' ' << j + 1 << '\n';
  if (instance) write_instance(os, *instance);
  os << "x0";
  for (double v : t.x0) put(os, v);
  os << '\n';

  os << "events " << t.events.size() << '\n';
  for (const EventRecord& e : t.events) {
    os << "E " << e.k << ' ' << e.t_us << ' ' << e.activated.size();
    for (std::size_t i : e.activated) os << ' ' << i + 1;
    os << ' ' << e.skipped.size();
    for (std::size_t i : e.skipped) os << ' ' << i + 1;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t c = 0; c < p; ++c) put(os, e.x[i * p + c]);
      for (std::size_t c = 0; c < p; ++c) put(os, e.v[i * p + c]);
      put(os, e.y[i]);
      os << ' ' << e.l[i];
      put(os, e.alpha[i]);
      for (std::size_t c = 0; c < p; ++c) put(os, e.z[i * p + c]);
    }
    os << '\n';
  }
  os << "messages " << t.messages.size() << '\n';
  for (const MessageRecord& m : t.messages)
    os << "M " << m.sender + 1 << ' ' << m.receiver + 1 << ' ' << m.send_event << ' ' << m.send_us << ' '
       << m.deliver_us << ' ' << m.consume_event << '\n';
  os << "end\n";
}

StoredTrace read_trace(std::istream& is) {
  LineReader r(is);
  StoredTrace out;
  EventTrace& t = out.trace;
  {
    auto in = r.next();
    std::string magic, version;
    in >> magic >> version;
    if (magic != "asynag-trace" || version != "v1") r.fail("expected 'asynag-trace v1' header");
  }
  try {
    auto in = r.expect("scheme");
    t.scheme = parse_scheme(r.value<std::string>(in, "scheme"));
  } catch (const ConfigError& e) {
    r.fail(e.what());
  }
  {
    auto in = r.expect("frozen");
    t.frozen = r.value<int>(in, "frozen flag") != 0;
  }
  try {
    auto in = r.expect("rho");
    t.rho.kind = parse_stepsize_kind(r.value<std::string>(in, "rho kind"));
    t.rho.rho0 = r.value<double>(in, "rho0");
    t.rho.gamma = r.value<double>(in, "gamma");
  } catch (const ConfigError& e) {
    r.fail(e.what());
  }
  const auto scalar = [&](const char* key, auto& field) {
    auto in = r.expect(key);
    field = r.value<std::remove_reference_t<decltype(field)>>(in, key);
    r.finish(in);
  };
  scalar("n", t.n);
  scalar("p", t.p);
  scalar("seed", t.seed);
  scalar("horizon_us", t.horizon_us);
  scalar("tau_us", t.tau_us);
  scalar("tau_lo_us", t.tau_lo_us);
  scalar("tau_hi_us", t.tau_hi_us);
  const std::size_t n = t.n, p = t.p;
  if (n == 0 || p == 0) r.fail("n and p must be positive");

  std::size_t edge_count = 0;
  scalar("edges", edge_count);
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t e = 0; e < edge_count; ++e) {
    auto in = r.next();
    const std::size_t i = player_id(r, in, n);
    const std::size_t j = player_id(r, in, n);
    r.finish(in);
    edges.emplace_back(i, j);
  }
  t.graph = Digraph(n, edges);

  auto in = r.next();
  std::string key;
  in >> key;
  if (key == "cournot-instance") {
    // Hand the header line back to the instance reader.
    std::string rest;
    std::getline(in, rest);
    std::stringstream record;
    record << key << rest << '\n';
    std::string line;
    while (std::getline(r.stream(), line)) {
      record << line << '\n';
      if (line == "end") break;
    }
    std::size_t counter = r.line() - 1;
    out.instance = read_instance(record, &counter);
    r.line() = counter;
    in = r.next();
    in >> key;
  }
  if (key != "x0") r.fail("expected 'x0', found '" + key + "'");
  t.x0.resize(n * p);
  for (double& v : t.x0) v = r.value<double>(in, "x0 value");
  r.finish(in);

  std::size_t event_count = 0;
  scalar("events", event_count);
  t.events.reserve(event_count);
  for (std::size_t k = 0; k < event_count; ++k) {
    auto line = r.expect("E");
    EventRecord e;
    e.k = r.value<long>(line, "event index");
    if (e.k != static_cast<long>(k)) r.fail("event index out of sequence");
    e.t_us = r.value<std::int64_t>(line, "event time");
    if (k > 0 && e.t_us <= t.events.back().t_us) r.fail("event times must strictly increase");
    e.activated.resize(r.value<std::size_t>(line, "activated count"));
    if (e.activated.empty()) r.fail("event without activated players");
    for (auto& i : e.activated) i = player_id(r, line, n);
    e.skipped.resize(r.value<std::size_t>(line, "skipped count"));
    for (auto& i : e.skipped) i = player_id(r, line, n);
    e.x.resize(n * p);
    e.v.resize(n * p);
    e.z.resize(n * p);
    e.y.resize(n);
    e.l.resize(n);
    e.alpha.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t c = 0; c < p; ++c) e.x[i * p + c] = r.value<double>(line, "x value");
      for (std::size_t c = 0; c < p; ++c) e.v[i * p + c] = r.value<double>(line, "v value");
      e.y[i] = r.value<double>(line, "y value");
      e.l[i] = r.value<long>(line, "counter");
      e.alpha[i] = r.value<double>(line, "stepsize");
      for (std::size_t c = 0; c < p; ++c) e.z[i * p + c] = r.value<double>(line, "z value");
    }
    r.finish(line);
    t.events.push_back(std::move(e));
  }

  std::size_t message_count = 0;
  scalar("messages", message_count);
  t.messages.reserve(message_count);
  for (std::size_t m = 0; m < message_count; ++m) {
    auto line = r.expect("M");
    MessageRecord msg;
    msg.sender = player_id(r, line, n);
    msg.receiver = player_id(r, line, n);
    msg.send_event = r.value<long>(line, "send event");
    msg.send_us = r.value<std::int64_t>(line, "send time");
    msg.deliver_us = r.value<std::int64_t>(line, "delivery time");
    msg.consume_event = r.value<long>(line, "consume event");
    r.finish(line);
    if (msg.send_event < -1 || msg.send_event >= static_cast<long>(event_count))
      r.fail("send event out of range");
    if (msg.deliver_us < msg.send_us) r.fail("message delivered before it was sent");
    if (!t.graph.has_edge(msg.sender, msg.receiver)) r.fail("message along a missing edge");
    if (!t.messages.empty() && msg.send_event < t.messages.back().send_event)
      r.fail("messages must be ordered by send event");
    t.messages.push_back(msg);
  }
  auto last = r.next();
  std::string word;
  last >> word;
  if (word != "end") r.fail("expected 'end'");
  return out;
}

void save_trace(const std::string& path, const EventTrace& trace, const CournotParams* instance) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_trace(os, trace, instance);
  if (!os) throw std::runtime_error("failed writing '" + path + "'");
}

StoredTrace load_trace(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open '" + path + "'");
  return read_trace(is);
}

}  // namespace asynag
