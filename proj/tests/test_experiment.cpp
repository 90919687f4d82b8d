#include "doctest.h"

#include "clipadam/experiment.hpp"

#include <filesystem>
#include <fstream>
#include <random>
#include <string>

using namespace clipadam;

namespace {

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    std::random_device rd;
    path = std::filesystem::temp_directory_path() /
           ("clipadam_exp_test_" + std::to_string(rd()));
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string str() const { return path.string(); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("config parsing extracts every field") {
  const char* text = R"({
    "out_dir": "somewhere",
    "seed": 99,
    "jobs": 2,
    "runs": [
      {"name": "a", "objective": "quadratic:d=2,lam=1"},
      {"name": "b", "objective": "monomial:p=4", "policy": "adagrad",
       "clipping": "upper", "sigma": 0.25, "trials": 3, "max_iter": 77,
       "verify": true, "hp": {"base_rate": 0.05, "b": 0.2, "clip_floor": 1e-4},
       "x0": [2.5]}
    ]
  })";
  ExperimentSpec spec = parse_spec(text);
  CHECK(spec.out_dir == "somewhere");
  CHECK(spec.seed == 99);
  CHECK(spec.jobs == 2);
  REQUIRE(spec.runs.size() == 2);
  CHECK(spec.runs[0].name == "a");
  CHECK(spec.runs[0].policy == PolicyKind::rmsprop_adam);
  CHECK(spec.runs[0].clipping == ClipMode::full);
  CHECK(spec.runs[0].trials == 1);
  const RunSpec& b = spec.runs[1];
  CHECK(b.policy == PolicyKind::adagrad);
  CHECK(b.clipping == ClipMode::upper);
  CHECK(b.sigma == 0.25);
  CHECK(b.trials == 3);
  CHECK(b.max_iter == 77);
  CHECK(b.verify);
  CHECK(b.hp.base_rate == 0.05);
  CHECK(b.hp.b == 0.2);
  REQUIRE(b.hp.clip_floor.has_value());
  CHECK(*b.hp.clip_floor == 1e-4);
  REQUIRE(b.x0.has_value());
  CHECK((*b.x0)[0] == 2.5);
}

TEST_CASE("config validation reports every problem in one error") {
  const char* text = R"({
    "runs": [
      {"name": "bad name!", "objective": "nope:x=1", "trials": 5,
       "max_iter": 0, "hp": {"b": 7}},
      {"name": "dup", "objective": "quadratic:d=2,lam=1", "x0": [1, 2, 3]},
      {"name": "dup", "objective": "quadratic:d=2,lam=1",
       "sigma": 0.1, "stop_tol": 1e-3}
    ]
  })";
  try {
    parse_spec(text);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    std::string msg = e.what();
    CHECK(msg.find("runs[0].name") != std::string::npos);
    CHECK(msg.find("runs[0].objective") != std::string::npos);
    CHECK(msg.find("runs[0].trials") != std::string::npos);
    CHECK(msg.find("runs[0].max_iter") != std::string::npos);
    CHECK(msg.find("runs[0].hp") != std::string::npos);
    CHECK(msg.find("runs[1].x0") != std::string::npos);
    CHECK(msg.find("duplicate") != std::string::npos);
    CHECK(msg.find("runs[2].stop_tol") != std::string::npos);
  }

  CHECK_THROWS_AS(parse_spec("not json at all"), ConfigError);
  CHECK_THROWS_AS(parse_spec("[]"), ConfigError);
  CHECK_THROWS_AS(parse_spec(R"({"runs": []})"), ConfigError);
  CHECK_THROWS_AS(parse_spec(R"({"runs": [{"name": "a",
      "objective": "quadratic:d=2,lam=1", "turbo": true}]})"),
                  ConfigError);  // unknown key
  CHECK_THROWS_AS(parse_spec(R"({"jobs": -1, "runs": [{"name": "a",
      "objective": "quadratic:d=2,lam=1"}]})"),
                  ConfigError);
  CHECK_THROWS_AS(parse_spec_file("/nonexistent_dir_xyz/config.json"), IoError);

  // A clipped run whose safe bounds cannot validate is rejected up front.
  CHECK_THROWS_AS(parse_spec(R"({"runs": [{"name": "a",
      "objective": "quadratic:d=2,lam=1",
      "hp": {"alpha_override": 0.5}}]})"),
                  ConfigError);
}

TEST_CASE("trial seeds are deterministic and distinct per run") {
  ExperimentSpec spec;
  spec.seed = 10;
  CHECK(seed_for(spec, 0, 0) == 10);
  CHECK(seed_for(spec, 0, 1) == 11);
  CHECK(seed_for(spec, 1, 0) == 10 + 1000003);
  CHECK(seed_for(spec, 2, 5) == 10 + 2 * 1000003 + 5);
}

TEST_CASE("experiment execution writes artifacts and attaches checks") {
  TempDir dir;
  std::string text = R"({
    "seed": 3,
    "jobs": 2,
    "runs": [
      {"name": "det", "objective": "quadratic:d=2,lam=1", "verify": true,
       "max_iter": 300},
      {"name": "upper", "objective": "quadratic:d=2,lam=1", "verify": true,
       "clipping": "upper", "max_iter": 200},
      {"name": "noisy", "objective": "quadratic:d=2,lam=1", "sigma": 0.1,
       "trials": 5, "verify": true, "max_iter": 100},
      {"name": "plain", "objective": "monomial:p=4", "max_iter": 50}
    ]
  })";
  ExperimentSpec spec = parse_spec(text);
  spec.out_dir = dir.str();
  ExperimentResult res = execute(spec);

  REQUIRE(res.outcomes.size() == 4);
  for (const RunOutcome& o : res.outcomes) {
    CHECK(o.status == "ok");
    CHECK(o.checks_passed);
    CHECK(std::filesystem::exists(o.trace_path));
    CHECK(std::filesystem::exists(o.report_path));
  }
  CHECK_FALSE(res.any_check_failed);
  CHECK_FALSE(res.any_error);
  CHECK(std::filesystem::exists(res.summary_path));

  nlohmann::json det = nlohmann::json::parse(slurp(dir.file("det.report.json")));
  std::vector<std::string> det_checks;
  for (const auto& c : det.at("checks")) det_checks.push_back(c.at("check"));
  CHECK(det_checks == std::vector<std::string>{"h_monotone", "descent",
                                               "step_weighted_grad_sum",
                                               "min_grad_rate",
                                               "abstract_conditions"});

  nlohmann::json upper = nlohmann::json::parse(slurp(dir.file("upper.report.json")));
  std::vector<std::string> upper_checks;
  for (const auto& c : upper.at("checks")) upper_checks.push_back(c.at("check"));
  CHECK(upper_checks == std::vector<std::string>{"h_monotone", "descent",
                                                 "step_weighted_grad_sum"});

  nlohmann::json noisy = nlohmann::json::parse(slurp(dir.file("noisy.report.json")));
  REQUIRE(noisy.at("checks").size() == 1);
  CHECK(noisy.at("checks")[0].at("check") == "stochastic_rate");
  CHECK(noisy.at("trial_samples").size() == 5);

  nlohmann::json plain = nlohmann::json::parse(slurp(dir.file("plain.report.json")));
  CHECK(plain.at("checks").empty());

  nlohmann::json summary = nlohmann::json::parse(slurp(res.summary_path));
  CHECK(summary.at("runs").size() == 4);
}

TEST_CASE("executions with one seed are byte-identical") {
  std::string text = R"({
    "seed": 12,
    "runs": [{"name": "r", "objective": "rosenbrock:d=2", "sigma": 0.05,
              "max_iter": 120}]
  })";
  TempDir d1, d2;
  ExperimentSpec s1 = parse_spec(text);
  s1.out_dir = d1.str();
  execute(s1);
  ExperimentSpec s2 = parse_spec(text);
  s2.out_dir = d2.str();
  execute(s2);
  CHECK(slurp(d1.file("r.csv")) == slurp(d2.file("r.csv")));
}

TEST_CASE("a gradient-descent-shaped run gets the baseline rate check") {
  TempDir dir;
  std::string text = R"({
    "runs": [{"name": "gd", "objective": "quadratic:d=2,lam=1",
              "policy": "constant", "clipping": "off",
              "hp": {"base_rate": 0.5, "b": 1.0},
              "verify": true, "max_iter": 400}]
  })";
  ExperimentSpec spec = parse_spec(text);
  spec.out_dir = dir.str();
  ExperimentResult res = execute(spec);
  CHECK(res.outcomes[0].status == "ok");
  nlohmann::json rep = nlohmann::json::parse(slurp(dir.file("gd.report.json")));
  REQUIRE(rep.at("checks").size() == 1);
  CHECK(rep.at("checks")[0].at("check") == "gd_rate");
  CHECK(rep.at("checks")[0].at("passed").get<bool>());
}

TEST_CASE("diverging runs are reported, not fatal") {
  TempDir dir;
  std::string text = R"({
    "runs": [
      {"name": "boom", "objective": "quadratic:d=1,lam=1",
       "policy": "constant", "clipping": "off",
       "hp": {"base_rate": 3.0, "b": 1.0}, "max_iter": 3000},
      {"name": "fine", "objective": "quadratic:d=2,lam=1", "max_iter": 50}
    ]
  })";
  ExperimentSpec spec = parse_spec(text);
  spec.out_dir = dir.str();
  ExperimentResult res = execute(spec);
  CHECK(res.outcomes[0].status == "diverged");
  CHECK(res.outcomes[1].status == "ok");
  CHECK_FALSE(res.any_error);
  CHECK_FALSE(res.any_check_failed);
  CHECK(std::filesystem::exists(dir.file("boom.csv")));
  nlohmann::json rep = nlohmann::json::parse(slurp(dir.file("boom.report.json")));
  CHECK(rep.at("status") == "diverged");
  CHECK(rep.at("summary").at("stop_reason") == "diverged");
}

TEST_CASE("offline verification replays the stored checks") {
  TempDir dir;
  std::string text = R"({
    "seed": 5,
    "runs": [{"name": "det", "objective": "quadratic:d=2,lam=1",
              "verify": true, "max_iter": 400}]
  })";
  ExperimentSpec spec = parse_spec(text);
  spec.out_dir = dir.str();
  execute(spec);

  std::string log;
  CHECK(verify_artifacts(dir.file("det.csv"), dir.file("det.report.json"), log));
  CHECK(log.find("h_monotone: pass") != std::string::npos);
  CHECK(log.find("min_grad_rate: pass") != std::string::npos);
  CHECK(log.find("abstract_conditions: pass") != std::string::npos);
  CHECK(log.find("FAIL") == std::string::npos);

  // Tampering with the stored f values must be caught.
  std::vector<TraceRecord> recs = read_trace_csv(dir.file("det.csv"));
  recs[200].lyapunov_H = recs[199].lyapunov_H + 5.0;
  Trace shell;
  shell.records = recs;
  write_trace_csv(shell, dir.file("tampered.csv"));
  std::string log2;
  CHECK_FALSE(
      verify_artifacts(dir.file("tampered.csv"), dir.file("det.report.json"), log2));
  CHECK(log2.find("h_monotone: FAIL") != std::string::npos);

  CHECK_THROWS_AS(verify_artifacts(dir.file("absent.csv"),
                                   dir.file("det.report.json"), log),
                  IoError);
  CHECK_THROWS_AS(verify_artifacts(dir.file("det.csv"),
                                   dir.file("absent.json"), log),
                  IoError);
}
