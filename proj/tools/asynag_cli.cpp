// asynag: run Monte-Carlo campaigns of the asynchronous Nash-Cournot
// simulator, or check a stored trace.
//
//   asynag --config campaign.cfg --override runs=10 --out results --workers 4
//   asynag --verify results/trace_000.txt
//
// Exit status: 0 success, 1 failed runs or failed checks, 2 bad input.

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "asynag/campaign.hpp"
#include "asynag/config.hpp"
#include "asynag/errors.hpp"
#include "asynag/verify.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Asynchronous push-sum Nash seeking on networked Cournot games"};
  std::string config_path, verify_path, out_dir;
  std::vector<std::string> overrides;
  std::size_t workers = 0;
  bool quiet = false, print_config = false;
  app.add_option("--config", config_path, "Experiment configuration file (key = value lines)");
  app.add_option("--override", overrides, "KEY=VALUE applied after the config file; repeatable")
      ->allow_extra_args(false);
  app.add_option("--verify", verify_path, "Run the invariant battery on a stored trace and exit");
  app.add_option("--out", out_dir, "Output directory (overrides output_dir)");
  app.add_option("--workers", workers, "Concurrent runs (overrides workers)")->check(CLI::PositiveNumber);
  app.add_flag("--print-config", print_config, "Print the effective configuration and exit");
  app.add_flag("-q,--quiet", quiet, "No progress output");
  CLI11_PARSE(app, argc, argv);

  try {
    if (!verify_path.empty()) {
      const asynag::VerifyReport report = asynag::verify_run(verify_path);
      std::cout << report.to_text();
      return report.passed() ? 0 : 1;
    }

    asynag::ExperimentConfig config = config_path.empty() ? asynag::ExperimentConfig{}
                                                          : asynag::load_config(config_path);
    for (const auto& o : overrides) asynag::apply_override(config, o);
    if (!out_dir.empty()) config.output_dir = out_dir;
    if (workers > 0) config.workers = workers;
    config.validate();
    if (print_config) {
      std::cout << asynag::to_text(config);
      return 0;
    }

    asynag::CampaignOptions options;
    options.log = quiet ? nullptr : &std::cerr;
    const asynag::CampaignResult result = asynag::run_campaign(config, options);
    if (!quiet) {
      for (double threshold : {1e-2, 1e-3}) {
        const auto t = result.crossing_time(threshold);
        std::cerr << "mean gap below " << threshold << ": ";
        if (t)
          std::cerr << *t / 1000.0 << " ms\n";
        else
          std::cerr << "not reached\n";
      }
      std::cerr << "wrote " << config.output_dir << "/aggregate.csv\n";
    }
    if (result.failed > 0) {
      std::cerr << result.failed << " of " << config.runs << " runs failed\n";
      return 1;
    }
    return 0;
  } catch (const asynag::ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return 2;
  } catch (const asynag::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const asynag::NonConvergence& e) {
    std::cerr << "reference equilibrium did not converge: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
