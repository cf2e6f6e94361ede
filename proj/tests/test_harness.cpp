#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"
#include "pcurl/checkpoint.hpp"
#include "pcurl/config.hpp"
#include "pcurl/curves.hpp"
#include "pcurl/error.hpp"
#include "pcurl/experiment.hpp"
#include "pcurl/metrics.hpp"

using namespace pcurl;
namespace fs = std::filesystem;

namespace {

// Desk preset, fewer prompts per step so a run takes a fraction of a second.
ExperimentConfig quick(std::uint64_t seed = 0) {
  auto cfg = ExperimentConfig::defaults(Scale::kDesk);
  cfg.seed = seed;
  cfg.data_size = 240;
  cfg.validation_size = 60;
  cfg.prompts_per_step = 16;
  cfg.group_size = 8;
  return cfg;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("pcurl_test_" + name);
  fs::remove_all(dir);
  return dir;
}

MetricsRecord sample_record(long step, bool with_val) {
  MetricsRecord r;
  r.step = step;
  r.stage = "hard";
  r.mean_reward = 0.1 * step + 1.0 / 3.0;
  r.mean_acc_reward = 0.25;
  r.mean_format_reward = 1.0;
  r.mean_len_reward = -0.123456789012345678;
  r.mean_response_length = 7.5;
  r.group_acc_histogram[3] = 5;
  if (with_val) r.validation_accuracy = 0.625;
  r.buckets = {{2, 16, 4.0, 0.5}, {0, 0, 0.0, 0.0}};
  return r;
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("config text round trip") {
  auto cfg = ExperimentConfig::defaults(Scale::kPaperRatio);
  cfg.seed = 77;
  cfg.preset = Preset::kOdswOnly;
  cfg.optim.kl = KlEstimator::kExact;
  cfg.length.mode = LengthMode::kFixed;
  CHECK(parse_config(serialize(cfg)) == cfg);
  CHECK(parse_config(serialize(ExperimentConfig{})) == ExperimentConfig{});

  auto explicit_stages = ExperimentConfig{};
  explicit_stages.stages = plan_default(Preset::kPcurl, Scale::kDesk).stages;
  explicit_stages.stages[1].step_budget = 3;
  CHECK(parse_config(serialize(explicit_stages)) == explicit_stages);
}

TEST_CASE("config errors") {
  CHECK_THROWS_AS(parse_config("no_such_key = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("seed = banana\n"), ConfigError);
  try {
    parse_config("# comment\nseed = 3\nthis line has no equals\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
}

TEST_CASE("environment overrides") {
  CHECK(env_var_name("optim.learning_rate") == "PCURL_OPTIM_LEARNING_RATE");
  std::map<std::string, const char*> env{{"PCURL_OPTIM_LEARNING_RATE", "0.125"},
                                         {"PCURL_SEED", "9"}};
  auto getenv_fn = [&](const char* name) -> const char* {
    const auto it = env.find(name);
    return it == env.end() ? nullptr : it->second;
  };
  const auto entries = apply_env_overrides(parse_entries(serialize(ExperimentConfig{})), getenv_fn);
  const auto cfg = from_entries(entries);
  CHECK(cfg.optim.learning_rate == 0.125);
  CHECK(cfg.seed == 9);
  env["PCURL_SEED"] = "x";
  CHECK_THROWS_AS(
      from_entries(apply_env_overrides(parse_entries(serialize(ExperimentConfig{})), getenv_fn)),
      ConfigError);
}

TEST_CASE("metrics round trip") {
  const std::vector<MetricsRecord> recs{sample_record(0, false), sample_record(1, true)};
  std::stringstream ss, bs;
  write_metrics(ss, recs);
  write_bucket_metrics(bs, recs);
  CHECK(ss.str().rfind(std::string(kMetricsHeader) + "\n", 0) == 0);
  auto back = read_metrics(ss);
  read_bucket_metrics(bs, back);
  // The histogram is a separate file and is not read back.
  auto want = recs;
  for (auto& r : want) r.group_acc_histogram = {};
  CHECK(back == want);
}

TEST_CASE("malformed metrics report the line") {
  std::stringstream ss(std::string(kMetricsHeader) + "\n0,easy,1,1,1,1,1,,\n1,easy,1,1\n");
  try {
    read_metrics(ss);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
}

TEST_CASE("checkpoint round trip") {
  CheckpointFile c;
  c.params = PolicyParams::zeros(EnvDims{});
  Rng rng(3);
  for (double& x : c.params.data()) x = rng.uniform() * 1e3 - 500.0 + 1.0 / 7.0;
  c.stage = 2;
  c.step = 99;
  c.seed = 12345678901234ULL;
  std::stringstream ss;
  write_checkpoint(ss, c);
  CHECK(read_checkpoint(ss) == c);

  std::stringstream bad("2 8 6 0 0 0\n1 2 3\n");
  CHECK_THROWS_AS(read_checkpoint(bad), ParseError);
}

TEST_CASE("curves from a synthetic log") {
  std::vector<MetricsRecord> recs;
  for (long s = 0; s < 100; ++s) {
    recs.push_back(sample_record(s, (s + 1) % 5 == 0 || s == 99));
    recs.back().stage = s < 50 ? "easy" : "hard";
  }
  const auto cs = build_curves(recs);
  REQUIRE(cs.find("mean_reward") != nullptr);
  CHECK(cs.find("mean_reward")->points.size() == 100);
  CHECK(cs.find("val_accuracy")->points.size() == 20);
  CHECK(cs.find("length_bucket0") != nullptr);
  CHECK(cs.find("length_bucket0")->points.front().second == 4.0);
  const auto hard = build_curves(recs, std::string("hard"));
  CHECK(hard.find("mean_reward")->points.size() == 50);
  CHECK(hard.find("mean_reward")->points.front().first == 50);
}

TEST_CASE("run_experiment writes a complete run") {
  const auto dir = scratch("run");
  auto cfg = quick(4);
  cfg.output_dir = dir.string();
  ExperimentResult res;
  REQUIRE(run_experiment(cfg, &res) == 0);

  for (const char* f : {"config.txt", "metrics.csv", "buckets.csv", "histogram.csv",
                        "filter_report.csv", "summary.json"}) {
    CHECK(fs::exists(dir / f));
  }
  CHECK(fs::exists(dir / "checkpoint_0_easy.txt"));
  CHECK(fs::exists(dir / "checkpoint_1_medium.txt"));
  CHECK(fs::exists(dir / "checkpoint_2_hard.txt"));
  CHECK(parse_config(slurp(dir / "config.txt")) == cfg);

  std::ifstream ms(dir / "metrics.csv");
  const auto recs = read_metrics(ms);
  REQUIRE(recs.size() == 100);
  int vals = 0;
  for (std::size_t i = 0; i < recs.size(); ++i) {
    CHECK(recs[i].step == static_cast<long>(i) + 1);
    CHECK(recs[i].stage == (i < 25 ? "easy" : i < 50 ? "medium" : "hard"));
    vals += recs[i].validation_accuracy ? 1 : 0;
    const auto& c = cfg.coef;
    CHECK(std::abs(recs[i].mean_reward - (c.alpha * recs[i].mean_acc_reward +
                                          c.beta * recs[i].mean_format_reward +
                                          c.gamma * recs[i].mean_len_reward)) < 1e-12);
    CHECK_FALSE(recs[i].wall_time_ms.has_value());
  }
  CHECK(vals == 20);

  const auto summary = nlohmann::json::parse(slurp(dir / "summary.json"));
  CHECK(summary["steps"] == 100);
  CHECK(summary["stages"].size() == 3);
  CHECK(summary["final_validation_accuracy"].get<double>() == res.final_validation_accuracy);
  CHECK(summary["aborted"] == false);

  std::ifstream cs(dir / "checkpoint_2_hard.txt");
  const auto ck = read_checkpoint(cs);
  CHECK(ck.params == res.stages[2].best_params);
  CHECK(ck.params == res.final_params);
  fs::remove_all(dir);
}

TEST_CASE("reruns are byte identical and workers do not matter") {
  const auto d1 = scratch("a"), d2 = scratch("b"), d3 = scratch("c");
  auto cfg = quick(21);
  cfg.output_dir = d1.string();
  run_experiment(cfg);
  cfg.output_dir = d2.string();
  run_experiment(cfg);
  cfg.output_dir = d3.string();
  cfg.workers = 4;
  run_experiment(cfg);
  for (const char* f : {"metrics.csv", "buckets.csv", "checkpoint_2_hard.txt", "summary.json"}) {
    CHECK(slurp(d1 / f) == slurp(d2 / f));
    CHECK(slurp(d1 / f) == slurp(d3 / f));
  }
  for (const auto& d : {d1, d2, d3}) fs::remove_all(d);
}

TEST_CASE("property: seed sub-streams are isolated") {
  // The defaults filter nothing out, so turning the filter off must not
  // perturb any other stream.
  auto cfg = quick(8);
  const auto with = train(cfg);
  REQUIRE(with.filter_report.has_value());
  REQUIRE(with.filter_report->overall.kept == with.filter_report->overall.total);
  cfg.filter = false;
  const auto without = train(cfg);
  CHECK(with.metrics == without.metrics);
  CHECK(with.final_params == without.final_params);

  // Different seeds give different runs.
  CHECK(train(quick(9)).metrics != with.metrics);
}

TEST_CASE("unwritable output directory is an io error") {
  const auto file = scratch("file");
  std::ofstream(file) << "x";
  auto cfg = quick();
  cfg.output_dir = (file / "sub").string();
  CHECK_THROWS_AS(run_experiment(cfg), IoError);
  fs::remove_all(file);
}

}  // TEST_SUITE
