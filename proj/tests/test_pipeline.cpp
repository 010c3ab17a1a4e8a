#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "asynag/campaign.hpp"
#include "asynag/config.hpp"
#include "asynag/cournot.hpp"
#include "asynag/errors.hpp"
#include "asynag/topology.hpp"
#include "asynag/trace_io.hpp"
#include "asynag/verify.hpp"

using namespace asynag;
namespace fs = std::filesystem;

namespace {

StoredTrace fresh_trace(TopologyKind kind, Scheme scheme, std::uint64_t seed, std::size_t n = 4) {
  const CournotParams params = generate_instance(n, 2, 3);
  CournotGame game(params);
  SimConfig c;
  c.scheme = scheme;
  c.seed = seed;
  c.horizon_us = 150'000;
  c.rho = StepsizeSchedule::constant(0.005);
  c.record_trace = true;
  return {run_simulation(game, make_topology(kind, n), c).trace, params};
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("asynag_test_" + name);
  fs::remove_all(dir);
  return dir;
}

ExperimentConfig small_campaign(const fs::path& dir) {
  ExperimentConfig c;
  c.firms = 5;
  c.markets = 3;
  c.runs = 4;
  c.horizon_us = 200'000;
  c.sample_interval_us = 5'000;
  c.output_dir = dir.string();
  return c;
}

}  // namespace

TEST(TraceIo, RoundTripIsExact) {
  const StoredTrace st = fresh_trace(TopologyKind::log, Scheme::aggressive, 2);
  std::stringstream ss;
  write_trace(ss, st.trace, &*st.instance);
  const StoredTrace back = read_trace(ss);
  ASSERT_TRUE(back.instance.has_value());
  EXPECT_EQ(*back.instance, *st.instance);
  EXPECT_EQ(back.trace.x0, st.trace.x0);
  EXPECT_EQ(back.trace.graph.edges(), st.trace.graph.edges());
  ASSERT_EQ(back.trace.events.size(), st.trace.events.size());
  for (std::size_t k = 0; k < st.trace.events.size(); ++k) {
    const EventRecord &a = back.trace.events[k], &b = st.trace.events[k];
    ASSERT_EQ(a.activated, b.activated);
    ASSERT_EQ(a.x, b.x);
    ASSERT_EQ(a.v, b.v);
    ASSERT_EQ(a.z, b.z);
    ASSERT_EQ(a.y, b.y);
    ASSERT_EQ(a.l, b.l);
    ASSERT_EQ(a.alpha, b.alpha);
  }
  ASSERT_EQ(back.trace.messages.size(), st.trace.messages.size());
  std::stringstream again;
  write_trace(again, back.trace, &*back.instance);
  std::stringstream first;
  write_trace(first, st.trace, &*st.instance);
  EXPECT_EQ(again.str(), first.str());
}

TEST(TraceIo, ParseErrorCarriesLineNumber) {
  const StoredTrace st = fresh_trace(TopologyKind::cycle, Scheme::aggressive, 1, 3);
  std::stringstream ss;
  write_trace(ss, st.trace);
  std::vector<std::string> lines;
  for (std::string line; std::getline(ss, line);) lines.push_back(line);
  std::size_t target = 0;
  for (std::size_t i = 0; i < lines.size(); ++i)
    if (lines[i].rfind("E ", 0) == 0) {
      target = i;
      break;
    }
  ASSERT_GT(target, 0u);
  lines[target] = "E garbage";
  std::stringstream broken;
  for (const auto& l : lines) broken << l << '\n';
  try {
    read_trace(broken);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), target + 1);
  }
  std::stringstream bad_header("asynag-trace v9\n");
  EXPECT_THROW(read_trace(bad_header), ParseError);
}

TEST(Verify, FreshTracesPass) {
  for (TopologyKind kind : {TopologyKind::cycle, TopologyKind::star, TopologyKind::log, TopologyKind::complete})
    for (Scheme scheme : {Scheme::aggressive, Scheme::nonadaptive, Scheme::synchronous}) {
      const VerifyReport rep = verify_trace(fresh_trace(kind, scheme, 5));
      EXPECT_TRUE(rep.passed()) << to_string(kind) << " " << to_string(scheme) << "\n" << rep.to_text();
    }
}

TEST(Verify, SynchronousTraceRunsReferenceCheck) {
  const VerifyReport rep = verify_trace(fresh_trace(TopologyKind::log, Scheme::synchronous, 5));
  const CheckResult* sync = rep.find("sync-reference");
  ASSERT_NE(sync, nullptr);
  EXPECT_EQ(sync->status, CheckResult::Status::pass) << sync->detail;
}

TEST(Verify, CorruptedWeightFailsConservation) {
  StoredTrace st = fresh_trace(TopologyKind::log, Scheme::aggressive, 6);
  EventRecord& e = st.trace.events[st.trace.events.size() / 2];
  e.y[e.activated.front()] *= 1.5;
  const VerifyReport rep = verify_trace(st);
  EXPECT_FALSE(rep.passed());
  const CheckResult* c = rep.find("conservation");
  ASSERT_NE(c, nullptr);
  EXPECT_EQ(c->status, CheckResult::Status::fail) << c->detail;
  EXPECT_NE(rep.to_text().find("conservation"), std::string::npos);
}

TEST(Verify, CorruptedActionFailsReplay) {
  StoredTrace st = fresh_trace(TopologyKind::complete, Scheme::aggressive, 6);
  EventRecord& e = st.trace.events[st.trace.events.size() / 3];
  e.x[e.activated.front() * st.trace.p] += 1e-6;
  const VerifyReport rep = verify_trace(st);
  const CheckResult* c = rep.find("augmented-replay");
  ASSERT_NE(c, nullptr);
  EXPECT_EQ(c->status, CheckResult::Status::fail);
}

TEST(Verify, GameChecksSkippedWithoutInstance) {
  StoredTrace st = fresh_trace(TopologyKind::cycle, Scheme::aggressive, 6);
  st.instance.reset();
  const VerifyReport rep = verify_trace(st);
  EXPECT_TRUE(rep.passed()) << rep.to_text();
  EXPECT_EQ(rep.find("augmented-replay")->status, CheckResult::Status::skip);
}

TEST(Verify, ReadsTraceFiles) {
  const fs::path dir = scratch_dir("verify");
  fs::create_directories(dir);
  const StoredTrace st = fresh_trace(TopologyKind::star, Scheme::aggressive, 2);
  save_trace((dir / "t.txt").string(), st.trace, &*st.instance);
  EXPECT_TRUE(verify_run((dir / "t.txt").string()).passed());
  EXPECT_THROW(verify_run((dir / "missing.txt").string()), std::runtime_error);
  fs::remove_all(dir);
}

TEST(Config, ParsesDocumentedKeys) {
  std::stringstream ss(
      "# comment\nfirms = 7\ntopology = cycle   # trailing\nscheme=nonadaptive\nrho = power\nrho0 = 0.2\n"
      "rho_gamma = 0.75\ndelay_mean_ms = 4\nhorizon_us = 1000\nruns = 3\nsave_traces = true\n");
  const ExperimentConfig c = parse_config(ss);
  EXPECT_EQ(c.firms, 7u);
  EXPECT_EQ(c.topology, TopologyKind::cycle);
  EXPECT_EQ(c.scheme, Scheme::nonadaptive);
  EXPECT_EQ(c.rho_kind, StepsizeSchedule::Kind::power);
  EXPECT_DOUBLE_EQ(c.stepsize()(0), 0.2);
  EXPECT_DOUBLE_EQ(c.timing.delay_mean_ms, 4.0);
  EXPECT_TRUE(c.save_traces);
  std::stringstream round(to_text(c));
  EXPECT_EQ(to_text(parse_config(round)), to_text(c));
}

TEST(Config, DefaultsFollowExperimentSetup) {
  const ExperimentConfig c;
  EXPECT_EQ(c.markets, 10u);
  EXPECT_EQ(c.capacity, 500.0);
  EXPECT_EQ(c.runs, 50u);
  EXPECT_EQ(c.timing.delay_mean_ms, 5.0);
  EXPECT_EQ(c.timing.compute_base_ms, 1.0);
  EXPECT_EQ(c.timing.compute_spread_ms, 5.0);
}

TEST(Config, UnknownKeyReportsLine) {
  std::stringstream ss("firms = 3\n\nbogus = 1\n");
  try {
    parse_config(ss);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  ExperimentConfig c;
  EXPECT_THROW(apply_override(c, "nope=1"), ConfigError);
  EXPECT_THROW(apply_override(c, "firms"), ConfigError);
  EXPECT_THROW(apply_override(c, "firms=abc"), ConfigError);
}

TEST(GapMetric, Identities) {
  const Vec xs{1.0, -4.0, 2.0};
  EXPECT_EQ(gap_metric(xs, xs), 0.0);
  EXPECT_DOUBLE_EQ(gap_metric(Vec{2.0, -8.0, 4.0}, xs), 1.0);
  EXPECT_DOUBLE_EQ(gap_metric(Vec{5.0, -4.0, 2.0}, xs), 1.0);
  EXPECT_THROW(gap_metric(Vec{1.0}, Vec{0.0}), ContractViolation);
}

TEST(Campaign, CrossingTimeInterpolates) {
  const std::vector<std::int64_t> grid{0, 10, 20};
  const Vec values{1.0, 0.5, 0.0};
  EXPECT_DOUBLE_EQ(*crossing_time(grid, values, 0.25), 15.0);
  EXPECT_FALSE(crossing_time(grid, values, -1.0).has_value());
  const std::vector<GapSample> samples{{0, 0, 4.0, 0.0}, {10, 3, 2.0, 0.0}};
  EXPECT_DOUBLE_EQ(interpolate(samples, 5, &GapSample::gap), 3.0);
  EXPECT_DOUBLE_EQ(interpolate(samples, 50, &GapSample::gap), 2.0);
}

TEST(Campaign, DeterministicAndOrderFree) {
  const fs::path a = scratch_dir("campaign_a"), b = scratch_dir("campaign_b");
  ExperimentConfig ca = small_campaign(a), cb = small_campaign(b);
  ca.workers = 1;
  cb.workers = 3;
  CampaignOptions reversed;
  reversed.launch_order = {3, 1, 0, 2};
  const CampaignResult ra = run_campaign(ca);
  run_campaign(cb, reversed);
  EXPECT_EQ(slurp(a / "aggregate.csv"), slurp(b / "aggregate.csv"));
  EXPECT_EQ(slurp(a / "run_002.csv"), slurp(b / "run_002.csv"));
  EXPECT_EQ(ra.failed, 0u);
  const CampaignResult again = run_campaign(ca);
  EXPECT_EQ(again.mean_gap, ra.mean_gap);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Campaign, OutputSchema) {
  const fs::path dir = scratch_dir("campaign_schema");
  ExperimentConfig c = small_campaign(dir);
  c.runs = 2;
  c.save_traces = true;
  const CampaignResult r = run_campaign(c);
  std::ifstream agg(dir / "aggregate.csv");
  std::string header;
  std::getline(agg, header);
  EXPECT_EQ(header, "sim_time_us,mean_gap,mean_consensus_residual,runs");
  std::ifstream run(dir / "run_000.csv");
  std::getline(run, header);
  EXPECT_EQ(header, "run_id,sim_time_us,k,gap,consensus_residual");
  for (const RunOutcome& o : r.runs) {
    ASSERT_FALSE(o.samples.empty());
    EXPECT_TRUE(std::isfinite(o.samples.front().gap));
    for (const GapSample& s : o.samples) EXPECT_GE(s.gap, 0.0);
  }
  EXPECT_TRUE(fs::exists(dir / "config.txt"));
  EXPECT_TRUE(fs::exists(dir / "summary.txt"));
  ASSERT_TRUE(fs::exists(dir / "trace_001.txt"));
  EXPECT_TRUE(verify_run((dir / "trace_001.txt").string()).passed());
  fs::remove_all(dir);
}
