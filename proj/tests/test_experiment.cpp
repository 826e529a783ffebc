#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "test_util.hpp"

using namespace qecopt;
using nlohmann::json;

namespace {

json small_config() {
  return json{
      {"experiment_id", "small"},
      {"code", {{"name", "random"}, {"seed", 5}}},
      {"error_model",
       {{"family", "random_unitary"},
        {"n_qubits", 3},
        {"weight", 2},
        {"mode", "independent"},
        {"p_grid", {0.05, 0.2, 0.4}}}},
      {"methods", {"decode", "gamma_exact", "gamma_approx", "avg_gamma_approx", "iterated_approx"}},
      {"robust", "average_over_p_grid"},
      {"trials", 3},
      {"base_seed", 99},
      {"solver", {{"max_rounds", 20}}},
  };
}

std::string to_csv(const std::vector<SweepRecord>& recs) {
  std::ostringstream os;
  write_records_csv(os, recs);
  return os.str();
}

void expect_config_error(const json& j, const std::string& fragment) {
  try {
    parse_config(j.dump());
    ADD_FAILURE() << "expected ConfigError containing '" << fragment << "'";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find(fragment), std::string::npos) << e.what();
  }
}

}  // namespace

TEST(MethodSpec, Grammar) {
  const MethodSpec a = MethodSpec::parse("avg_gamma_exact@w2");
  EXPECT_EQ(a.kind, MethodKind::gamma_exact);
  EXPECT_TRUE(a.robust);
  ASSERT_TRUE(a.design_weight.has_value());
  EXPECT_EQ(*a.design_weight, 2);
  const MethodSpec b = MethodSpec::parse("iterated_approx");
  EXPECT_EQ(b.kind, MethodKind::iterated_approx);
  EXPECT_FALSE(b.robust);
  EXPECT_FALSE(b.design_weight.has_value());
  EXPECT_THROW(MethodSpec::parse("gamma"), ConfigError);
  EXPECT_THROW(MethodSpec::parse("gamma_exact@2"), ConfigError);
  EXPECT_THROW(MethodSpec::parse("gamma_exact@w"), ConfigError);
  EXPECT_THROW(MethodSpec::parse("avg_standard"), ConfigError);
  EXPECT_THROW(MethodSpec::parse("decode@w1"), ConfigError);
}

TEST(Config, ParsesShippedShape) {
  const ExperimentConfig c = parse_config(small_config().dump());
  EXPECT_EQ(c.experiment_id, "small");
  EXPECT_EQ(c.code, "random");
  EXPECT_EQ(c.code_seed.value(), 5u);
  EXPECT_EQ(c.weights, std::vector<int>{2});
  EXPECT_EQ(c.p_grid.size(), 3u);
  EXPECT_EQ(c.methods.size(), 5u);
  EXPECT_EQ(c.robust, RobustKind::average_over_p_grid);
  EXPECT_EQ(c.trials, 3);
  EXPECT_EQ(c.max_rounds, 20);
  EXPECT_DOUBLE_EQ(c.rel_tol, 1e-5);
  EXPECT_DOUBLE_EQ(c.gamma.gap_tol, 1e-7);

  json j = small_config();
  j["error_model"]["weight"] = {1, 2};
  j["robust"] = {{"average_over_samples", 4}};
  j["code"] = "random";
  EXPECT_EQ(parse_config(j.dump()).weights, (std::vector<int>{1, 2}));
  EXPECT_EQ(parse_config(j.dump()).pool_samples, 4);
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
  json j = small_config();
  j["extra"] = 1;
  expect_config_error(j, "unknown key 'extra'");
  j = small_config();
  j["error_model"]["sigma"] = 0.1;
  expect_config_error(j, "unknown key 'sigma'");
  j = small_config();
  j["solver"]["tolerance"] = 0.1;
  expect_config_error(j, "unknown key 'tolerance'");
  j = small_config();
  j["error_model"]["p_grid"] = {0.1, 1.5};
  expect_config_error(j, "p_grid");
  j = small_config();
  j["error_model"]["p_grid"] = {1.0};
  expect_config_error(j, "p = 1");
  j = small_config();
  j["error_model"]["weight"] = 4;
  expect_config_error(j, "weight");
  j = small_config();
  j["methods"] = {"decode", "decode"};
  expect_config_error(j, "duplicate");
  j = small_config();
  j["methods"] = {"standard"};
  expect_config_error(j, "only defined for code 513");
  j = small_config();
  j["robust"] = "none";
  expect_config_error(j, "robust mode");
  j = small_config();
  j["trials"] = 0;
  expect_config_error(j, "trials");
  j = small_config();
  j["target"] = "t";
  expect_config_error(j, "target");
  j = small_config();
  j["error_model"]["family"] = "amplitude_damping";
  expect_config_error(j, "family");
  j = small_config();
  j["error_model"]["n_qubits"] = "three";
  expect_config_error(j, "n_qubits");
  j = small_config();
  j["code"] = "513";
  expect_config_error(j, "n_qubits = 5");
  EXPECT_THROW(parse_config("{not json"), ConfigError);
  EXPECT_THROW(load_config("/nonexistent/config.json"), ConfigError);
}

TEST(Seeds, TrialAndChannelSeeds) {
  EXPECT_EQ(trial_seed(1, 0, 0), trial_seed(1, 0, 0));
  EXPECT_NE(trial_seed(1, 0, 0), trial_seed(1, 1, 0));
  EXPECT_NE(trial_seed(1, 0, 0), trial_seed(1, 0, 1));
  EXPECT_NE(trial_seed(1, 0, 0), trial_seed(2, 0, 0));
  EXPECT_NE(channel_seed(1, 0), channel_seed(1, 1));
}

TEST(Records, CsvRoundTripAndHeader) {
  EXPECT_STREQ(kRecordsHeader,
               "experiment_id,code,family,weight,p,seed,method,f_avg,d_ind,fw_gap,iterations,rounds,wall_ms");
  EXPECT_STREQ(kSummaryHeader, "experiment_id,p,method,mean_f,std_f,gain_ratio,gain_diff");
  SweepRecord r;
  r.experiment_id = "x";
  r.code = "513";
  r.family = "bitflip";
  r.weight = 3;
  r.p = 0.1;
  r.seed = 18446744073709551615ull;
  r.method = "avg_gamma_exact@w2";
  r.f_avg = 0.1 + 0.2;
  r.d_ind = 1.2345678901234567e-30;
  r.fw_gap = 9.9e-8;
  r.iterations = 7;
  r.rounds = 0;
  r.wall_ms = 0.0;
  const std::string text = to_csv({r, r});
  EXPECT_EQ(text.find('\r'), std::string::npos);
  std::istringstream in(text);
  const auto back = read_records_csv(in);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].seed, r.seed);
  EXPECT_EQ(back[0].f_avg, r.f_avg);
  EXPECT_EQ(back[0].d_ind, r.d_ind);
  EXPECT_EQ(back[0].p, r.p);
  EXPECT_EQ(back[0].method, r.method);
  EXPECT_EQ(to_csv(back), text);
  // Shortest round-trip formatting.
  EXPECT_NE(text.find(",0.1,"), std::string::npos);
}

TEST(Records, RejectsMalformedInput) {
  std::istringstream bad_header("a,b\n");
  EXPECT_THROW(read_records_csv(bad_header), ConfigError);
  std::istringstream short_line(std::string(kRecordsHeader) + "\nx,513,bitflip,2\n");
  EXPECT_THROW(read_records_csv(short_line), ConfigError);
  std::istringstream bad_number(std::string(kRecordsHeader) + "\nx,513,bitflip,2,zz,1,m,1,0,0,0,0,0\n");
  EXPECT_THROW(read_records_csv(bad_number), ConfigError);
  std::istringstream empty("");
  EXPECT_THROW(read_records_csv(empty), ConfigError);
}

TEST(Summary, MeanStdAndGain) {
  std::vector<SweepRecord> recs;
  auto add = [&](double p, const std::string& m, double f) {
    SweepRecord r;
    r.experiment_id = "e";
    r.weight = 2;
    r.p = p;
    r.method = m;
    r.f_avg = f;
    recs.push_back(r);
  };
  add(0.1, "standard", 0.90);
  add(0.1, "opt", 0.98);
  add(0.1, "standard", 0.80);
  add(0.1, "opt", 0.96);
  add(0.2, "standard", 0.7);
  add(0.2, "opt", 1.0);
  const auto rows = summarize(recs, "standard");
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0].method, "standard");
  EXPECT_NEAR(rows[0].mean_f, 0.85, 1e-15);
  EXPECT_NEAR(rows[0].std_f, std::sqrt(0.005), 1e-15);
  EXPECT_NEAR(rows[0].gain_ratio, 1.0, 1e-15);
  EXPECT_EQ(rows[1].method, "opt");
  EXPECT_NEAR(rows[1].mean_f, 0.97, 1e-15);
  EXPECT_NEAR(rows[1].gain_ratio, 0.15 / 0.03, 1e-12);
  EXPECT_NEAR(rows[1].gain_diff, 0.12, 1e-15);
  EXPECT_EQ(rows[1].count, 2u);
  EXPECT_TRUE(std::isinf(rows[3].gain_ratio));
  EXPECT_EQ(rows[3].std_f, 0.0);
  EXPECT_THROW(summarize(recs, "missing"), ConfigError);

  std::ostringstream os;
  write_summary_csv(os, rows);
  EXPECT_EQ(os.str().substr(0, os.str().find('\n')), kSummaryHeader);
  EXPECT_NE(os.str().find("e,0.1,opt,0.97,"), std::string::npos);
}

TEST(Summary, PrefixesWeightWhenSweepingSeveral) {
  std::vector<SweepRecord> recs(2);
  recs[0].experiment_id = recs[1].experiment_id = "e";
  recs[0].method = recs[1].method = "standard";
  recs[0].weight = 2;
  recs[1].weight = 3;
  recs[0].f_avg = recs[1].f_avg = 0.5;
  std::ostringstream os;
  write_summary_csv(os, summarize(recs, "standard"));
  EXPECT_NE(os.str().find(",w2:standard,"), std::string::npos);
  EXPECT_NE(os.str().find(",w3:standard,"), std::string::npos);
}

TEST(Run, DeterministicAcrossRepeatsAndThreadCounts) {
  const ExperimentConfig cfg = parse_config(small_config().dump());
  RunOptions one;
  const RunResult a = run_experiment(cfg, one);
  const RunResult b = run_experiment(cfg, one);
  RunOptions three;
  three.threads = 3;
  const RunResult c = run_experiment(cfg, three);
  EXPECT_TRUE(a.failures.empty());
  ASSERT_EQ(a.records.size(), 3u * 3u * 5u);
  EXPECT_EQ(to_csv(a.records), to_csv(b.records));
  EXPECT_EQ(to_csv(a.records), to_csv(c.records));
  for (const auto& r : a.records) {
    EXPECT_EQ(r.wall_ms, 0.0);
    EXPECT_GE(r.f_avg, 0.0);
    EXPECT_LE(r.f_avg, 1.0 + 1e-9);
  }
}

TEST(Run, RecordsAreOrderedAndSeeded) {
  ExperimentConfig cfg = parse_config(small_config().dump());
  RunOptions opts;
  opts.trials = 2;
  const RunResult res = run_experiment(cfg, opts);
  ASSERT_EQ(res.records.size(), 3u * 2u * 5u);
  // Order: p, then trial, then method as configured.
  EXPECT_EQ(res.records[0].method, "decode");
  EXPECT_EQ(res.records[4].method, "iterated_approx");
  EXPECT_EQ(res.records[0].p, 0.05);
  EXPECT_EQ(res.records[0].seed, trial_seed(99, 0, 0));
  EXPECT_EQ(res.records[5].seed, trial_seed(99, 0, 1));
  EXPECT_EQ(res.records[10].p, 0.2);
  EXPECT_EQ(make_model(cfg, 2, 0.2, channel_seed(99, 0)).size(), 7);
  for (const auto& r : res.records)
    if (r.method == "gamma_exact") EXPECT_LE(r.fw_gap, 1e-7);
}

TEST(Run, TimingFlagRecordsWallTime) {
  ExperimentConfig cfg = parse_config(small_config().dump());
  cfg.methods = {MethodSpec::parse("gamma_exact")};
  RunOptions opts;
  opts.trials = 1;
  opts.timing = true;
  const RunResult res = run_experiment(cfg, opts);
  double total = 0.0;
  for (const auto& r : res.records) total += r.wall_ms;
  EXPECT_GT(total, 0.0);
}

TEST(Builders, TargetsAndCodes) {
  EXPECT_NO_THROW(make_target("h").validate());
  EXPECT_THROW(make_target("t"), InputError);
  ExperimentConfig cfg = parse_config(small_config().dump());
  const Encoding c0 = make_code(cfg, 0), c1 = make_code(cfg, 1);
  EXPECT_EQ(c0.n_c(), 8);
  EXPECT_GT((c0.C - c1.C).norm(), 1e-6);
  EXPECT_TRUE(make_code(cfg, 0).C == c0.C);
}
