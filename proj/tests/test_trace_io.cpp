#include "doctest.h"

#include "clipadam/trace_io.hpp"

#include <cmath>
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
           ("clipadam_io_test_" + std::to_string(rd()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

Trace sample_trace(int steps = 60, double sigma = 0.0) {
  RunConfig cfg;
  cfg.objective = rosenbrock(2);
  cfg.sigma = sigma;
  cfg.seed = 31;
  cfg.max_iter = steps;
  return run(cfg);
}

}  // namespace

TEST_CASE("trace CSV round-trips bit for bit") {
  TempDir dir;
  Trace t = sample_trace();
  std::string path = dir.file("trace.csv");
  write_trace_csv(t, path);

  std::vector<TraceRecord> back = read_trace_csv(path);
  REQUIRE(back.size() == t.records.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].n == t.records[i].n);
    CHECK(back[i].f_val == t.records[i].f_val);
    CHECK(back[i].grad_sq_norm == t.records[i].grad_sq_norm);
    CHECK(back[i].lyapunov_H == t.records[i].lyapunov_H);
    CHECK(back[i].step_min == t.records[i].step_min);
    CHECK(back[i].step_max == t.records[i].step_max);
    CHECK(back[i].p_sq_norm == t.records[i].p_sq_norm);
    CHECK(back[i].dx_norm == t.records[i].dx_norm);
    CHECK(back[i].inner_a_p_sq == 0.0);  // derived column is not stored
  }

  reconstruct_inner(back, t.meta.hp.b);
  for (std::size_t i = 0; i < back.size(); ++i) {
    double expect = t.records[i].inner_a_p_sq;
    CHECK(std::abs(back[i].inner_a_p_sq - expect) <=
          1e-12 * std::max(1.0, std::abs(expect)));
  }
}

TEST_CASE("trace CSV input validation") {
  TempDir dir;
  CHECK_THROWS_AS(read_trace_csv(dir.file("missing.csv")), IoError);

  std::string bad_header = dir.file("bad_header.csv");
  std::ofstream(bad_header) << "n,f,grad\n0,1,2\n";
  CHECK_THROWS_AS(read_trace_csv(bad_header), IoError);

  std::string short_row = dir.file("short_row.csv");
  std::ofstream(short_row)
      << "n,f,grad_sq_norm,H,step_min,step_max,p_sq_norm,dx_norm\n0,1,2\n";
  CHECK_THROWS_AS(read_trace_csv(short_row), IoError);

  std::string bad_number = dir.file("bad_number.csv");
  std::ofstream(bad_number)
      << "n,f,grad_sq_norm,H,step_min,step_max,p_sq_norm,dx_norm\n"
      << "0,1,2,3,4,5,6,seven\n";
  try {
    read_trace_csv(bad_number);
    FAIL("expected IoError");
  } catch (const IoError& e) {
    CHECK(std::string(e.what()).find(":2:") != std::string::npos);
  }

  CHECK_THROWS_AS(write_trace_csv(sample_trace(5), "/nonexistent_dir_xyz/t.csv"),
                  IoError);
}

TEST_CASE("gap CSV schema") {
  TempDir dir;
  Trace t = sample_trace(5);
  std::string path = dir.file("gaps.csv");
  write_gap_csv(t, 0.0, path);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line == "k,f,gap");
  std::getline(in, line);
  CHECK(line.rfind("0,", 0) == 0);
  int rows = 2;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == int(t.records.size()) + 1);
}

TEST_CASE("hyper-parameter JSON round-trip") {
  HyperParams hp;
  hp.base_rate = 0.17;
  hp.c = 0.02;
  nlohmann::json j = hp_to_json(hp);
  CHECK(j.at("clip_floor").is_null());
  CHECK(j.at("alpha_override").is_null());
  HyperParams back = hp_from_json(j);
  CHECK(back.base_rate == hp.base_rate);
  CHECK(back.b == hp.b);
  CHECK(back.c == hp.c);
  CHECK(back.eps_den == hp.eps_den);
  CHECK(back.eps == hp.eps);
  CHECK_FALSE(back.clip_floor.has_value());
  CHECK_FALSE(back.alpha_override.has_value());

  hp.clip_floor = 1e-4;
  hp.alpha_override = 0.93;
  HyperParams back2 = hp_from_json(hp_to_json(hp));
  REQUIRE(back2.clip_floor.has_value());
  CHECK(*back2.clip_floor == 1e-4);
  REQUIRE(back2.alpha_override.has_value());
  CHECK(*back2.alpha_override == 0.93);
}

TEST_CASE("metadata and bounds JSON round-trips preserve NaN as null") {
  Trace t = sample_trace(5);
  TraceMeta meta = meta_from_json(meta_to_json(t.meta));
  CHECK(meta.objective_id == t.meta.objective_id);
  CHECK(meta.lipschitz_L == t.meta.lipschitz_L);
  CHECK(meta.infimum == t.meta.infimum);
  CHECK(meta.policy == t.meta.policy);
  CHECK(meta.clipping == t.meta.clipping);
  CHECK(meta.sigma == t.meta.sigma);
  CHECK(meta.seed == t.meta.seed);
  CHECK(meta.alpha == t.meta.alpha);
  CHECK(meta.cap == t.meta.cap);
  CHECK(meta.delta == t.meta.delta);

  SafeBounds sb = bounds_from_json(bounds_to_json(t.bounds));
  CHECK(sb.alpha == t.bounds.alpha);
  CHECK(sb.a_sup == t.bounds.a_sup);
  CHECK(sb.bar_a_sup == t.bounds.bar_a_sup);
  CHECK(sb.valid == t.bounds.valid);
  CHECK(sb.diagnostics == t.bounds.diagnostics);

  // Clipping off stores no cap; the NaN must survive the JSON trip.
  RunConfig off;
  off.objective = quadratic(2, 1.0);
  off.clipping = ClipMode::off;
  off.max_iter = 3;
  Trace to = run(off);
  REQUIRE(std::isnan(to.meta.cap));
  nlohmann::json j = meta_to_json(to.meta);
  CHECK(j.at("cap").is_null());
  CHECK(std::isnan(meta_from_json(j).cap));
}

TEST_CASE("summary JSON carries the optional noisy fields only when present") {
  Trace det = sample_trace(5);
  nlohmann::json jd = summary_to_json(det.summary);
  CHECK_FALSE(jd.contains("tau"));

  Trace noisy = sample_trace(5, 0.1);
  nlohmann::json jn = summary_to_json(noisy.summary);
  REQUIRE(jn.contains("tau"));
  CHECK(jn.at("tau").get<std::int64_t>() == *noisy.summary.tau);
  CHECK(jn.at("grad_sq_at_tau").get<double>() == *noisy.summary.grad_sq_at_tau);
  CHECK(jn.at("stop_reason").get<std::string>() == "max_iter");
}

TEST_CASE("every report serializes with its check name and verdict") {
  Trace t = sample_trace(400);
  nlohmann::json j1 = report_to_json(check_H_monotone(t));
  CHECK(j1.at("check") == "h_monotone");
  CHECK(j1.at("passed").get<bool>());

  nlohmann::json j2 = report_to_json(check_descent_lemma(t, t.meta.hp.eps));
  CHECK(j2.at("check") == "descent");
  CHECK(j2.at("passed").get<bool>());

  nlohmann::json j3 = report_to_json(check_theorem1(t));
  CHECK(j3.at("check") == "min_grad_rate");
  CHECK(j3.at("passed").get<bool>());

  nlohmann::json j4 = report_to_json(check_prop_no_lower_bound(t));
  CHECK(j4.at("check") == "step_weighted_grad_sum");
  CHECK(j4.at("passed").get<bool>());

  nlohmann::json j7 = report_to_json(check_abstract_conditions(t));
  CHECK(j7.at("check") == "abstract_conditions");
  CHECK(j7.at("passed").get<bool>());

  Objective q = quadratic(2, 1.0);
  Trace gd = run_gradient_descent(q, 0.25, Vector::Ones(2), 100);
  nlohmann::json j6 = report_to_json(check_gd_bound(gd, 0.25));
  CHECK(j6.at("check") == "gd_rate");
  CHECK(j6.at("passed").get<bool>());

  std::vector<Trace> trials;
  for (int m = 0; m < 3; ++m) {
    RunConfig cfg;
    cfg.objective = quadratic(2, 1.0);
    cfg.sigma = 0.1;
    cfg.seed = std::uint64_t(m);
    cfg.max_iter = 50;
    trials.push_back(run(cfg));
  }
  nlohmann::json j5 = report_to_json(check_theorem2(trials));
  CHECK(j5.at("check") == "stochastic_rate");
  CHECK(j5.at("passed").get<bool>());

  // None of the scalar report payloads drags per-point arrays along.
  for (const nlohmann::json& j : {j1, j2, j3, j4, j5, j6, j7}) {
    for (auto it = j.begin(); it != j.end(); ++it) {
      CHECK_FALSE(it.value().is_array());
    }
  }

  Figure1Options opt;
  opt.p_values = {2.0};
  opt.algorithms = {"clipped_adam"};
  opt.max_iter = 4000;
  nlohmann::json jc = report_to_json(figure1_experiment(opt)[0].classification);
  CHECK(jc.at("regime") == "linear");
  CHECK(jc.contains("fit_quality"));
}
