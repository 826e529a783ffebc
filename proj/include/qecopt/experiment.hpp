#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qecopt/optimizer.hpp"

namespace qecopt {

// Malformed or inconsistent experiment configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class RobustKind { none, average_over_p_grid, average_over_samples };

enum class MethodKind {
  standard,
  decode,
  gamma_exact,
  gamma_approx,
  iterated_exact,
  iterated_approx,
};

// A method string is `[avg_]<base>[@w<k>]`: `avg_` designs against the robust
// pool, `@w<k>` designs against weight-k errors while evaluating on the
// configured weight.
struct MethodSpec {
  std::string name;
  MethodKind kind = MethodKind::standard;
  bool robust = false;
  std::optional<int> design_weight;

  static MethodSpec parse(const std::string& name);
};

struct ExperimentConfig {
  std::string experiment_id;
  std::string code = "513";  // 513 | dfs4 | random
  std::optional<std::uint64_t> code_seed;
  std::string family = "bitflip";  // bitflip | random_unitary
  int n_qubits = 5;
  std::vector<int> weights{2};
  UnitaryMode mode = UnitaryMode::independent;
  std::vector<double> p_grid;
  std::vector<MethodSpec> methods;
  RobustKind robust = RobustKind::none;
  int pool_samples = 1;
  int trials = 1;
  std::uint64_t base_seed = 0;
  std::string target = "identity";  // identity | x | z | h
  GammaOptions gamma;
  int max_rounds = 100;
  double rel_tol = 1e-5;  // bi-convex stop on relative f_avg change
};

ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);

struct SweepRecord {
  std::string experiment_id;
  std::string code;
  std::string family;
  int weight = 0;
  double p = 0.0;
  std::uint64_t seed = 0;
  std::string method;
  double f_avg = 0.0;
  double d_ind = 0.0;
  double fw_gap = 0.0;
  int iterations = 0;
  int rounds = 0;
  double wall_ms = 0.0;
};

struct RunOptions {
  int threads = 1;
  std::optional<int> trials;
  bool timing = false;  // record real wall time (makes output non-reproducible)
};

struct RunResult {
  std::vector<SweepRecord> records;
  std::vector<std::string> failures;  // one line per flagged (dropped) record
};

RunResult run_experiment(const ExperimentConfig& config, const RunOptions& opts = {});

// Per-trial seed: base ^ mix(p-index, trial).
std::uint64_t trial_seed(std::uint64_t base_seed, std::size_t p_index, std::size_t trial);
// Seed of the channel draw; shared by every p of a trial.
std::uint64_t channel_seed(std::uint64_t base_seed, std::size_t trial);

TargetGate make_target(const std::string& name);
Encoding make_code(const ExperimentConfig& config, std::size_t trial);
ErrorModel make_model(const ExperimentConfig& config, int weight, double p, std::uint64_t seed);

extern const char* const kRecordsHeader;
extern const char* const kSummaryHeader;

void write_records_csv(std::ostream& os, const std::vector<SweepRecord>& records);
std::vector<SweepRecord> read_records_csv(std::istream& is);

struct SummaryRow {
  std::string experiment_id;
  int weight = 0;
  double p = 0.0;
  std::string method;
  double mean_f = 0.0;
  double std_f = 0.0;
  double gain_ratio = 0.0;  // (1 - mean_baseline) / (1 - mean_f)
  double gain_diff = 0.0;   // mean_f - mean_baseline
  std::size_t count = 0;
};

// Groups by (experiment_id, weight, p, method). Throws ConfigError when the
// baseline method is missing from a group.
std::vector<SummaryRow> summarize(const std::vector<SweepRecord>& records,
                                  const std::string& baseline);
void write_summary_csv(std::ostream& os, const std::vector<SummaryRow>& rows);

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

// Invariant checks on built-in fixtures (used by `qecopt verify`).
std::vector<CheckResult> verify_fixtures();

}  // namespace qecopt
