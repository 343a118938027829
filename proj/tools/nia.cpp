// Command-line driver: generate | run | scan | verify.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "nia.hpp"

namespace {

struct CommonFlags {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config, "JSON experiment configuration");
  cmd->add_option("--out", f.out, "output directory (overrides output_dir)");
  cmd->add_option("--seed", f.seed, "single seed (overrides instance.seeds)");
  cmd->add_option("--threads", f.threads, "worker threads (default: NIA_THREADS, then parallel_replicates)")
      ->check(CLI::PositiveNumber);
}

nia::ExperimentConfig load(const CommonFlags& f) {
  nia::ExperimentConfig cfg = f.config.empty() ? nia::parse_config(nlohmann::json::object())
                                               : nia::load_config(f.config);
  if (f.seed) {
    cfg.instance.seeds = {*f.seed};
    cfg.verify.seed = *f.seed;
  }
  if (!f.out.empty()) cfg.output_dir = f.out;
  return cfg;
}

std::size_t threads_for(const CommonFlags& f, const nia::ExperimentConfig& cfg) {
  return nia::resolve_threads(f.threads, cfg.parallel_replicates);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Networked information aggregation simulator"};
  app.require_subcommand(1);

  CommonFlags gen_f, run_f, scan_f, verify_f;
  auto* gen = app.add_subcommand("generate", "write hard-instance datasets");
  auto* run = app.add_subcommand("run", "run the protocol per seed and report bounds");
  auto* scan = app.add_subcommand("scan", "excess loss over a depth/window grid");
  auto* verify = app.add_subcommand("verify", "lemma verification suites");
  add_common(gen, gen_f);
  add_common(run, run_f);
  add_common(scan, scan_f);
  add_common(verify, verify_f);

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      const auto cfg = load(gen_f);
      for (const auto& f : nia::cmd_generate(cfg, cfg.output_dir, threads_for(gen_f, cfg))) {
        std::cout << f.data.string() << " " << f.checksum << "\n";
      }
      return 0;
    }
    if (run->parsed()) {
      const auto cfg = load(run_f);
      for (const auto& r : nia::cmd_run(cfg, cfg.output_dir, threads_for(run_f, cfg))) {
        std::cout << "seed " << r.seed << ": excess " << r.excess << ", coverage "
                  << (r.covered ? "true" : "false");
        if (r.bound_satisfied) {
          std::cout << ", bound " << r.theory->rhs_convergence_bound
                    << (*r.bound_satisfied ? " (holds)" : " (VIOLATED)");
        }
        std::cout << "\n";
      }
      return 0;
    }
    if (scan->parsed()) {
      const auto cfg = load(scan_f);
      const auto rows = nia::cmd_scan(cfg, cfg.output_dir, threads_for(scan_f, cfg));
      for (const auto& s : nia::summarize_scan(rows)) {
        std::cout << "D=" << s.depth << " M=" << s.window << " mean_excess=" << s.mean_excess << " se="
                  << s.se_excess << " bound=" << s.mean_upper_bound << "\n";
      }
      return 0;
    }
    if (verify->parsed()) {
      const auto cfg = load(verify_f);
      const auto report = nia::cmd_verify(cfg, cfg.output_dir);
      for (const auto& s : report.suites) {
        std::cout << (s.passed ? "PASS " : "FAIL ") << s.name << " worst=" << s.worst
                  << " threshold=" << s.threshold << " (" << s.seconds << " s)\n";
      }
      return report.passed() ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
