#include "qecopt/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

namespace qecopt {

using json = nlohmann::json;

const char* const kRecordsHeader =
    "experiment_id,code,family,weight,p,seed,method,f_avg,d_ind,fw_gap,iterations,rounds,wall_ms";
const char* const kSummaryHeader = "experiment_id,p,method,mean_f,std_f,gain_ratio,gain_diff";

// ---------------------------------------------------------------------------
// Method names

MethodSpec MethodSpec::parse(const std::string& name) {
  static const std::map<std::string, MethodKind> kinds{
      {"standard", MethodKind::standard},
      {"decode", MethodKind::decode},
      {"gamma_exact", MethodKind::gamma_exact},
      {"gamma_approx", MethodKind::gamma_approx},
      {"iterated_exact", MethodKind::iterated_exact},
      {"iterated_approx", MethodKind::iterated_approx},
  };
  MethodSpec spec;
  spec.name = name;
  std::string base = name;
  const auto at = base.find('@');
  if (at != std::string::npos) {
    const std::string suffix = base.substr(at + 1);
    base = base.substr(0, at);
    if (suffix.size() < 2 || suffix[0] != 'w' ||
        !std::all_of(suffix.begin() + 1, suffix.end(), [](char c) { return c >= '0' && c <= '9'; }))
      throw ConfigError("method '" + name + "': design weight must look like @w<k>");
    spec.design_weight = std::stoi(suffix.substr(1));
  }
  if (base.rfind("avg_", 0) == 0) {
    spec.robust = true;
    base = base.substr(4);
  }
  const auto it = kinds.find(base);
  if (it == kinds.end()) throw ConfigError("unknown method '" + name + "'");
  spec.kind = it->second;
  if (spec.robust && (spec.kind == MethodKind::standard || spec.kind == MethodKind::decode))
    throw ConfigError("method '" + name + "': fixed recoveries have no average-case variant");
  if (spec.design_weight && (spec.kind == MethodKind::standard || spec.kind == MethodKind::decode))
    throw ConfigError("method '" + name + "': fixed recoveries take no design weight");
  return spec;
}

// ---------------------------------------------------------------------------
// Config parsing

namespace {

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be a JSON object");
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key())) throw ConfigError("unknown key '" + it.key() + "' in " + where);
}

template <typename T>
T get_required(const json& obj, const std::string& key, const std::string& where) {
  if (!obj.contains(key)) throw ConfigError("missing key '" + key + "' in " + where);
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("bad value for '" + key + "' in " + where + ": " + e.what());
  }
}

template <typename T>
T get_optional(const json& obj, const std::string& key, T fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  return get_required<T>(obj, key, where);
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
  reject_unknown(root,
                 {"experiment_id", "code", "error_model", "methods", "robust", "trials",
                  "base_seed", "target", "solver"},
                 "config");

  ExperimentConfig cfg;
  cfg.experiment_id = get_required<std::string>(root, "experiment_id", "config");
  if (cfg.experiment_id.empty() || cfg.experiment_id.find(',') != std::string::npos)
    throw ConfigError("experiment_id must be non-empty and contain no commas");

  const json& code = root.contains("code") ? root["code"] : json();
  if (code.is_string()) {
    cfg.code = code.get<std::string>();
  } else {
    reject_unknown(code, {"name", "seed"}, "code");
    cfg.code = get_required<std::string>(code, "name", "code");
    if (code.contains("seed")) cfg.code_seed = get_required<std::uint64_t>(code, "seed", "code");
  }
  if (cfg.code != "513" && cfg.code != "dfs4" && cfg.code != "random")
    throw ConfigError("unknown code '" + cfg.code + "'");

  if (!root.contains("error_model")) throw ConfigError("missing key 'error_model' in config");
  const json& em = root["error_model"];
  reject_unknown(em, {"family", "n_qubits", "weight", "mode", "p_grid"}, "error_model");
  cfg.family = get_required<std::string>(em, "family", "error_model");
  if (cfg.family != "bitflip" && cfg.family != "random_unitary")
    throw ConfigError("unknown error model family '" + cfg.family + "'");
  cfg.n_qubits = get_required<int>(em, "n_qubits", "error_model");
  if (cfg.n_qubits < 2 || cfg.n_qubits > 8) throw ConfigError("n_qubits must be in [2, 8]");
  if (!em.contains("weight")) throw ConfigError("missing key 'weight' in error_model");
  cfg.weights = em["weight"].is_array() ? get_required<std::vector<int>>(em, "weight", "error_model")
                                        : std::vector<int>{get_required<int>(em, "weight", "error_model")};
  if (cfg.weights.empty()) throw ConfigError("weight list is empty");
  for (int w : cfg.weights)
    if (w < 0 || w > cfg.n_qubits) throw ConfigError("weight out of range [0, n_qubits]");
  const std::string mode = get_optional<std::string>(em, "mode", "independent", "error_model");
  if (mode == "collective") cfg.mode = UnitaryMode::collective;
  else if (mode == "independent") cfg.mode = UnitaryMode::independent;
  else throw ConfigError("unknown mode '" + mode + "'");
  cfg.p_grid = get_required<std::vector<double>>(em, "p_grid", "error_model");
  if (cfg.p_grid.empty()) throw ConfigError("p_grid is empty");

  const auto method_names = get_required<std::vector<std::string>>(root, "methods", "config");
  if (method_names.empty()) throw ConfigError("methods is empty");
  std::set<std::string> seen;
  for (const auto& name : method_names) {
    if (!seen.insert(name).second) throw ConfigError("duplicate method '" + name + "'");
    cfg.methods.push_back(MethodSpec::parse(name));
  }

  if (root.contains("robust")) {
    const json& rb = root["robust"];
    if (rb.is_string()) {
      const auto s = rb.get<std::string>();
      if (s == "none") cfg.robust = RobustKind::none;
      else if (s == "average_over_p_grid") cfg.robust = RobustKind::average_over_p_grid;
      else throw ConfigError("unknown robust mode '" + s + "'");
    } else {
      reject_unknown(rb, {"average_over_samples"}, "robust");
      cfg.robust = RobustKind::average_over_samples;
      cfg.pool_samples = get_required<int>(rb, "average_over_samples", "robust");
      if (cfg.pool_samples < 1) throw ConfigError("average_over_samples must be >= 1");
    }
  }

  cfg.trials = get_optional<int>(root, "trials", 1, "config");
  if (cfg.trials < 1) throw ConfigError("trials must be >= 1");
  cfg.base_seed = get_optional<std::uint64_t>(root, "base_seed", 0, "config");
  cfg.target = get_optional<std::string>(root, "target", "identity", "config");

  if (root.contains("solver")) {
    const json& sv = root["solver"];
    reject_unknown(sv, {"gap_tol", "max_iters", "max_rounds", "rel_tol"}, "solver");
    cfg.gamma.gap_tol = get_optional<double>(sv, "gap_tol", cfg.gamma.gap_tol, "solver");
    cfg.gamma.max_iters = get_optional<int>(sv, "max_iters", cfg.gamma.max_iters, "solver");
    cfg.max_rounds = get_optional<int>(sv, "max_rounds", cfg.max_rounds, "solver");
    cfg.rel_tol = get_optional<double>(sv, "rel_tol", cfg.rel_tol, "solver");
    if (!(cfg.gamma.gap_tol > 0.0) || cfg.gamma.max_iters < 0 || cfg.max_rounds < 1 ||
        !(cfg.rel_tol >= 0.0))
      throw ConfigError("solver options out of range");
  }

  // Cross-field checks.
  if (cfg.code == "513" && cfg.n_qubits != 5) throw ConfigError("code 513 needs n_qubits = 5");
  if (cfg.code == "dfs4" && cfg.n_qubits != 4) throw ConfigError("code dfs4 needs n_qubits = 4");
  for (const auto& m : cfg.methods) {
    if (m.kind == MethodKind::standard && cfg.code != "513")
      throw ConfigError("method 'standard' is only defined for code 513");
    if (m.robust && cfg.robust == RobustKind::none)
      throw ConfigError("method '" + m.name + "' needs a robust mode other than none");
    if (m.design_weight && (*m.design_weight < 0 || *m.design_weight > cfg.n_qubits))
      throw ConfigError("method '" + m.name + "': design weight out of range");
  }
  for (double p : cfg.p_grid) {
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("p_grid entries must lie in [0, 1]");
    if (p == 1.0)
      for (int w : cfg.weights)
        if (w < cfg.n_qubits) throw ConfigError("p = 1 needs weight = n_qubits");
  }
  try {
    (void)make_target(cfg.target);
  } catch (const InputError& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

// ---------------------------------------------------------------------------
// Builders

std::uint64_t trial_seed(std::uint64_t base_seed, std::size_t p_index, std::size_t trial) {
  return linalg::mix_seed(base_seed, p_index, trial);
}

std::uint64_t channel_seed(std::uint64_t base_seed, std::size_t trial) {
  return linalg::mix_seed(base_seed, 0xC4A77E1ULL, trial);
}

TargetGate make_target(const std::string& name) {
  Matrix l(2, 2);
  if (name == "identity") l = Matrix::Identity(2, 2);
  else if (name == "x") l << 0, 1, 1, 0;
  else if (name == "z") l << 1, 0, 0, -1;
  else if (name == "h") l << M_SQRT1_2, M_SQRT1_2, M_SQRT1_2, -M_SQRT1_2;
  else throw InputError("unknown target gate '" + name + "'");
  return TargetGate{l};
}

Encoding make_code(const ExperimentConfig& config, std::size_t trial) {
  if (config.code == "513") return code_513();
  if (config.code == "dfs4") return code_dfs4();
  const std::uint64_t seed = linalg::mix_seed(config.code_seed.value_or(config.base_seed), 0, trial);
  return random_isometry(Index{1} << config.n_qubits, 2, seed);
}

ErrorModel make_model(const ExperimentConfig& config, int weight, double p, std::uint64_t seed) {
  if (config.family == "bitflip") return bitflip_model(config.n_qubits, weight, p);
  return random_unitary_model(config.n_qubits, weight, p, config.mode, seed);
}

// ---------------------------------------------------------------------------
// Runner

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  Recovery recovery;
  Encoding code;
  double fw_gap = 0.0;
  int iterations = 0;
  int rounds = 0;
  bool monotone = true;
  double wall_ms = 0.0;
};

Outcome design(const MethodSpec& m, const ErrorModel& model, const Encoding& code,
               const TargetGate& target, const ExperimentConfig& cfg) {
  const auto t0 = Clock::now();
  Outcome out;
  out.code = code;
  switch (m.kind) {
    case MethodKind::standard:
      out.recovery = standard_recovery_513();
      break;
    case MethodKind::decode:
      out.recovery = decode_recovery(code);
      break;
    case MethodKind::gamma_exact: {
      auto [g, rep] = optimal_gamma(model, code, target, cfg.gamma);
      out.recovery = recovery_from_gamma(model, code, g, target).recovery;
      out.fw_gap = rep.gap;
      out.iterations = rep.iterations;
      break;
    }
    case MethodKind::gamma_approx:
      out.recovery = recovery_from_gamma(model, code, gamma_approx(model), target).recovery;
      break;
    case MethodKind::iterated_exact:
    case MethodKind::iterated_approx: {
      BiconvexOptions bo;
      bo.step = m.kind == MethodKind::iterated_exact ? GammaStep::exact : GammaStep::approx;
      bo.gamma = cfg.gamma;
      bo.max_rounds = cfg.max_rounds;
      bo.rel_tol = cfg.rel_tol;
      BiconvexResult res = biconvex_iterate(model, code, target, bo);
      out.recovery = std::move(res.recovery);
      out.code = std::move(res.code);
      out.fw_gap = res.report.gap;
      out.iterations = res.report.iterations;
      out.rounds = res.report.rounds;
      out.monotone = res.report.monotone;
      break;
    }
  }
  out.wall_ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
  return out;
}

struct Keyed {
  std::size_t w, p, t, m;
  SweepRecord rec;
};

struct WorkResult {
  std::vector<Keyed> records;
  std::vector<std::string> failures;
};

WorkResult run_item(const ExperimentConfig& cfg, std::size_t wi, std::size_t trial,
                    bool timing) {
  WorkResult wr;
  const int weight = cfg.weights[wi];
  const TargetGate target = make_target(cfg.target);
  const Encoding code0 = make_code(cfg, trial);
  const std::uint64_t cseed = channel_seed(cfg.base_seed, trial);

  // Pool over the whole p-grid does not depend on p: design once per weight.
  std::map<int, ErrorModel> grid_pools;
  std::map<std::string, Outcome> grid_designs;
  auto grid_pool = [&](int w) -> const ErrorModel& {
    auto it = grid_pools.find(w);
    if (it != grid_pools.end()) return it->second;
    std::vector<ErrorModel> models;
    for (double p : cfg.p_grid) models.push_back(make_model(cfg, w, p, cseed));
    return grid_pools.emplace(w, compress_model(pool_average(models))).first->second;
  };

  for (std::size_t pi = 0; pi < cfg.p_grid.size(); ++pi) {
    const double p = cfg.p_grid[pi];
    const std::uint64_t tseed = trial_seed(cfg.base_seed, pi, trial);
    const ErrorModel eval = make_model(cfg, weight, p, cseed);

    for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi) {
      const MethodSpec& m = cfg.methods[mi];
      const int dw = m.design_weight.value_or(weight);
      Outcome oc;
      if (!m.robust) {
        const ErrorModel dmodel = dw == weight ? eval : make_model(cfg, dw, p, cseed);
        oc = design(m, dmodel, code0, target, cfg);
      } else if (cfg.robust == RobustKind::average_over_p_grid) {
        auto it = grid_designs.find(m.name);
        if (it == grid_designs.end())
          it = grid_designs.emplace(m.name, design(m, grid_pool(dw), code0, target, cfg)).first;
        oc = it->second;
      } else {
        std::vector<ErrorModel> models;
        for (int k = 0; k < cfg.pool_samples; ++k)
          models.push_back(make_model(cfg, dw, p, linalg::mix_seed(tseed, 0x9001, k)));
        oc = design(m, compress_model(pool_average(models)), code0, target, cfg);
      }

      SweepRecord r;
      r.experiment_id = cfg.experiment_id;
      r.code = cfg.code;
      r.family = cfg.family;
      r.weight = weight;
      r.p = p;
      r.seed = tseed;
      r.method = m.name;
      r.f_avg = average_fidelity(oc.recovery, eval, oc.code, target);
      r.d_ind = indirect_distance(oc.recovery, induced_alpha(oc.recovery, eval, oc.code, target),
                                  eval, oc.code, target);
      r.fw_gap = oc.fw_gap;
      r.iterations = oc.iterations;
      r.rounds = oc.rounds;
      r.wall_ms = timing ? oc.wall_ms : 0.0;

      std::string why;
      if (!std::isfinite(r.f_avg) || r.f_avg < -1e-9 || r.f_avg > 1.0 + 1e-9)
        why = "f_avg out of range";
      else if (!oc.monotone)
        why = "bi-convex d_ind history not monotone";
      if (!why.empty()) {
        char buf[256];
        std::snprintf(buf, sizeof buf, "flagged: weight=%d p=%.17g seed=%llu method=%s: ", weight, p,
                      static_cast<unsigned long long>(tseed), m.name.c_str());
        wr.failures.push_back(buf + why);
        continue;
      }
      wr.records.push_back({wi, pi, trial, mi, std::move(r)});
    }
  }
  return wr;
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& config, const RunOptions& opts) {
  ExperimentConfig cfg = config;
  if (opts.trials) {
    if (*opts.trials < 1) throw ConfigError("trials must be >= 1");
    cfg.trials = *opts.trials;
  }
  const std::size_t n_items = cfg.weights.size() * static_cast<std::size_t>(cfg.trials);
  std::vector<WorkResult> results(n_items);
  std::atomic<std::size_t> next{0};
  std::mutex err_mu;
  std::exception_ptr err;

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n_items) return;
      try {
        results[i] = run_item(cfg, i / cfg.trials, i % cfg.trials, opts.timing);
      } catch (...) {
        std::lock_guard lock(err_mu);
        if (!err) err = std::current_exception();
      }
    }
  };
  const int n_threads = std::max(1, std::min<int>(opts.threads, static_cast<int>(n_items)));
  std::vector<std::thread> pool;
  for (int k = 1; k < n_threads; ++k) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);

  std::vector<Keyed> all;
  RunResult out;
  for (auto& r : results) {
    for (auto& k : r.records) all.push_back(std::move(k));
    for (auto& f : r.failures) out.failures.push_back(std::move(f));
  }
  std::sort(all.begin(), all.end(), [](const Keyed& a, const Keyed& b) {
    return std::tie(a.w, a.p, a.t, a.m) < std::tie(b.w, b.p, b.t, b.m);
  });
  std::sort(out.failures.begin(), out.failures.end());
  for (auto& k : all) out.records.push_back(std::move(k.rec));
  return out;
}

// ---------------------------------------------------------------------------
// CSV

namespace {

// Shortest representation that round-trips exactly.
std::string fmt_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

void write_records_csv(std::ostream& os, const std::vector<SweepRecord>& records) {
  os << kRecordsHeader << '\n';
  for (const auto& r : records) {
    os << r.experiment_id << ',' << r.code << ',' << r.family << ',' << r.weight << ','
       << fmt_double(r.p) << ',' << r.seed << ',' << r.method << ',' << fmt_double(r.f_avg) << ','
       << fmt_double(r.d_ind) << ',' << fmt_double(r.fw_gap) << ',' << r.iterations << ',' << r.rounds
       << ',' << fmt_double(r.wall_ms) << '\n';
  }
}

std::vector<SweepRecord> read_records_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw ConfigError("records CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kRecordsHeader) throw ConfigError("records CSV has an unexpected header");
  std::vector<SweepRecord> out;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 13) throw ConfigError("records CSV line " + std::to_string(lineno) + ": expected 13 fields");
    try {
      SweepRecord r;
      r.experiment_id = f[0];
      r.code = f[1];
      r.family = f[2];
      r.weight = std::stoi(f[3]);
      r.p = std::stod(f[4]);
      r.seed = std::stoull(f[5]);
      r.method = f[6];
      r.f_avg = std::stod(f[7]);
      r.d_ind = std::stod(f[8]);
      r.fw_gap = std::stod(f[9]);
      r.iterations = std::stoi(f[10]);
      r.rounds = std::stoi(f[11]);
      r.wall_ms = std::stod(f[12]);
      out.push_back(std::move(r));
    } catch (const std::logic_error&) {
      throw ConfigError("records CSV line " + std::to_string(lineno) + ": malformed number");
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Summary

std::vector<SummaryRow> summarize(const std::vector<SweepRecord>& records,
                                  const std::string& baseline) {
  struct Acc {
    std::vector<double> f;
    std::size_t first_seen = 0;
  };
  using GroupKey = std::tuple<std::string, int, double>;
  std::map<GroupKey, std::map<std::string, Acc>> groups;
  std::map<std::string, std::size_t> method_order;
  for (const auto& r : records) {
    method_order.emplace(r.method, method_order.size());
    groups[{r.experiment_id, r.weight, r.p}][r.method].f.push_back(r.f_avg);
  }

  std::vector<SummaryRow> out;
  for (const auto& [key, methods] : groups) {
    auto base_it = methods.find(baseline);
    if (base_it == methods.end())
      throw ConfigError("baseline method '" + baseline + "' missing from a (p, weight) group");
    auto mean_of = [](const std::vector<double>& v) {
      double s = 0.0;
      for (double x : v) s += x;
      return s / static_cast<double>(v.size());
    };
    const double base_mean = mean_of(base_it->second.f);

    std::vector<std::pair<std::size_t, std::string>> ordered;
    for (const auto& [name, acc] : methods) ordered.emplace_back(method_order[name], name);
    std::sort(ordered.begin(), ordered.end());
    for (const auto& [ord, name] : ordered) {
      const auto& f = methods.at(name).f;
      SummaryRow row;
      row.experiment_id = std::get<0>(key);
      row.weight = std::get<1>(key);
      row.p = std::get<2>(key);
      row.method = name;
      row.count = f.size();
      row.mean_f = mean_of(f);
      double ss = 0.0;
      for (double x : f) ss += (x - row.mean_f) * (x - row.mean_f);
      row.std_f = f.size() > 1 ? std::sqrt(ss / static_cast<double>(f.size() - 1)) : 0.0;
      const double num = 1.0 - base_mean;
      const double den = 1.0 - row.mean_f;
      if (den > 0.0) row.gain_ratio = num / den;
      else row.gain_ratio = num > 0.0 ? std::numeric_limits<double>::infinity()
                                      : std::numeric_limits<double>::quiet_NaN();
      row.gain_diff = row.mean_f - base_mean;
      out.push_back(std::move(row));
    }
  }
  return out;
}

void write_summary_csv(std::ostream& os, const std::vector<SummaryRow>& rows) {
  std::map<std::string, std::set<int>> weights;
  for (const auto& r : rows) weights[r.experiment_id].insert(r.weight);
  os << kSummaryHeader << '\n';
  for (const auto& r : rows) {
    // Sweeps over several weights qualify the method with the evaluation weight.
    const std::string method = weights[r.experiment_id].size() > 1
                                   ? "w" + std::to_string(r.weight) + ":" + r.method
                                   : r.method;
    os << r.experiment_id << ',' << fmt_double(r.p) << ',' << method << ',' << fmt_double(r.mean_f) << ','
       << fmt_double(r.std_f) << ',' << fmt_double(r.gain_ratio) << ',' << fmt_double(r.gain_diff) << '\n';
  }
}

}  // namespace qecopt
