#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "ergodic/ergodic.hpp"

namespace {

int report_outcome(const ergodic::RunOutcome& out) {
  std::cout << "artifacts written to " << out.dir.string() << '\n';
  for (const auto& r : out.replicas) {
    if (r.fault) std::cerr << "numeric fault: " << *r.fault << '\n';
  }
  return out.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ergodic averages of decreasing-step SDE schemes"};
  app.require_subcommand(1);

  std::string run_path;
  std::string out_dir;
  auto* run = app.add_subcommand("run", "simulate a configuration and write trace.csv, report.txt, meta");
  run->add_option("config", run_path, "configuration file")->required()->check(CLI::ExistingFile);
  run->add_option("-o,--output", out_dir, "override output.dir");

  std::string check_path;
  auto* check = app.add_subcommand("check", "print the hypothesis report without simulating");
  check->add_option("config", check_path, "configuration file")->required()->check(CLI::ExistingFile);

  std::string meta_path;
  std::string replay_dir;
  auto* replay = app.add_subcommand("replay", "rerun from a meta file");
  replay->add_option("meta", meta_path, "meta file of an earlier run")->required()->check(CLI::ExistingFile);
  replay->add_option("-o,--output", replay_dir, "override output.dir");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      auto cfg = ergodic::Config::load(run_path);
      if (!out_dir.empty()) cfg.set("output.dir", out_dir);
      return report_outcome(ergodic::run_experiment(cfg));
    }
    if (*check) {
      const auto out = ergodic::check_only(ergodic::Config::load(check_path), std::cout);
      for (const auto& h : out.hypotheses) {
        if (!h.holds() && h.verdict() != "consistent") return 1;
      }
      return 0;
    }
    if (*replay) {
      auto cfg = ergodic::config_from_meta(ergodic::Config::load(meta_path));
      if (!replay_dir.empty()) cfg.set("output.dir", replay_dir);
      return report_outcome(ergodic::run_experiment(cfg));
    }
  } catch (const ergodic::InputError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
