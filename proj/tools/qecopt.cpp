// qecopt: run, summarize and verify error-correction design sweeps.
//
//   qecopt run --config configs/fig1.json --out fig1.csv [--trials N] [--threads N] [--timing]
//   qecopt summarize --in fig1.csv --baseline standard --out fig1_summary.csv
//   qecopt verify
//
// Exit codes: 0 success, 1 I/O or verification failure, 2 config error,
// 3 flagged solver failures (the remaining records are still written).

#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "qecopt/experiment.hpp"

namespace {

constexpr int kExitIo = 1;
constexpr int kExitConfig = 2;
constexpr int kExitFlagged = 3;

int cmd_run(const std::string& config_path, const std::string& out_path, int trials, int threads,
            bool timing) {
  qecopt::RunOptions opts;
  opts.threads = threads;
  opts.timing = timing;
  if (trials > 0) opts.trials = trials;
  const auto cfg = qecopt::load_config(config_path);
  const auto result = qecopt::run_experiment(cfg, opts);

  std::ofstream out(out_path, std::ios::binary);
  if (!out) {
    std::cerr << "cannot open '" << out_path << "' for writing\n";
    return kExitIo;
  }
  qecopt::write_records_csv(out, result.records);
  std::cerr << cfg.experiment_id << ": wrote " << result.records.size() << " records to "
            << out_path << "\n";
  for (const auto& f : result.failures) std::cerr << f << "\n";
  return result.failures.empty() ? 0 : kExitFlagged;
}

int cmd_summarize(const std::string& in_path, const std::string& baseline,
                  const std::string& out_path) {
  std::ifstream in(in_path, std::ios::binary);
  if (!in) {
    std::cerr << "cannot open '" << in_path << "'\n";
    return kExitIo;
  }
  const auto records = qecopt::read_records_csv(in);
  const auto rows = qecopt::summarize(records, baseline);
  std::ofstream out(out_path, std::ios::binary);
  if (!out) {
    std::cerr << "cannot open '" << out_path << "' for writing\n";
    return kExitIo;
  }
  qecopt::write_summary_csv(out, rows);
  return 0;
}

int cmd_verify() {
  int failed = 0;
  for (const auto& c : qecopt::verify_fixtures()) {
    std::cout << (c.passed ? "[PASS] " : "[FAIL] ") << c.name << " (" << c.detail << ")\n";
    failed += c.passed ? 0 : 1;
  }
  return failed ? kExitIo : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust quantum error-correction design by convex optimization"};
  app.require_subcommand(1);

  std::string config_path, out_path, in_path, baseline;
  int trials = 0, threads = 1;
  bool timing = false;

  auto* run = app.add_subcommand("run", "Run a configured parameter sweep and write records CSV");
  run->add_option("--config", config_path, "Experiment config (JSON)")->required();
  run->add_option("--out", out_path, "Records CSV path")->required();
  run->add_option("--trials", trials, "Override the config's trial count")->check(CLI::PositiveNumber);
  run->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
  run->add_flag("--timing", timing, "Record wall time per solve (output is then not reproducible)");

  auto* sum = app.add_subcommand("summarize", "Aggregate records into mean/std/gain per (p, method)");
  sum->add_option("--in", in_path, "Records CSV")->required();
  sum->add_option("--baseline", baseline, "Baseline method for the gain columns")->required();
  sum->add_option("--out", out_path, "Summary CSV path")->required();

  app.add_subcommand("verify", "Check solver invariants on built-in fixtures");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitConfig;
  }

  try {
    if (run->parsed()) return cmd_run(config_path, out_path, trials, threads, timing);
    if (sum->parsed()) return cmd_summarize(in_path, baseline, out_path);
    return cmd_verify();
  } catch (const qecopt::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
}
