#include "doctest.h"

#include "clipadam/engine.hpp"

#include <cmath>
#include <random>

using namespace clipadam;

namespace {

RunConfig default_clipped(const Objective& obj) {
  RunConfig cfg;
  cfg.objective = obj;
  return cfg;
}

}  // namespace

TEST_CASE("clip mode names") {
  CHECK(parse_clip_mode("off") == ClipMode::off);
  CHECK(parse_clip_mode("upper") == ClipMode::upper);
  CHECK(parse_clip_mode("full") == ClipMode::full);
  CHECK_THROWS_AS(parse_clip_mode("none"), UsageError);
  CHECK(std::string(clip_mode_name(ClipMode::full)) == "full");
}

TEST_CASE("single-step worked example") {
  RunConfig cfg;
  cfg.objective = quadratic(1, 1.0);
  cfg.policy = PolicyKind::constant;
  cfg.clipping = ClipMode::off;
  cfg.hp.base_rate = 0.1;
  cfg.hp.b = 0.5;
  Vector x0(1);
  x0 << 1.0;
  cfg.x0 = x0;
  cfg.max_iter = 1;
  Trace t = run(cfg);

  REQUIRE(t.records.size() == 2);
  REQUIRE(t.snaps.size() == 2);
  CHECK(t.snaps[1].p[0] == 0.5);    // p1 = (1-b) 0 + b g0, g0 = 1
  CHECK(t.snaps[1].x[0] == 0.95);   // x1 = 1 - 0.1 * 0.5
  CHECK(t.records[1].f_val == doctest::Approx(0.5 * 0.95 * 0.95).epsilon(1e-15));
  CHECK(t.records[0].dx_norm == 0.0);
  CHECK(t.records[1].dx_norm == doctest::Approx(0.05).epsilon(1e-15));
  CHECK(t.summary.stop_reason == "max_iter");
}

TEST_CASE("trace bookkeeping invariants") {
  RunConfig cfg = default_clipped(quadratic(2, 1.0));
  cfg.max_iter = 300;
  Trace t = run(cfg);

  REQUIRE(t.records.size() == 301);
  REQUIRE(t.snaps.size() == 301);
  CHECK(t.summary.steps == 300);
  CHECK(t.bounds.valid);
  CHECK(t.meta.cap == t.bounds.a_sup);
  CHECK(t.meta.delta == default_clip_floor(t.bounds.a_sup));
  CHECK(t.summary.floor_override_events == 0);
  CHECK_FALSE(t.summary.tau.has_value());

  // Initialization convention: the step vector starts at the cap.
  CHECK((t.snaps[0].a_eff == t.meta.cap).all());
  CHECK((t.snaps[0].p == 0.0).all());

  for (std::size_t n = 0; n < t.records.size(); ++n) {
    const TraceRecord& r = t.records[n];
    CHECK(r.n == std::int64_t(n));
    // Recorded H must satisfy its defining identity against the same row.
    double rhs = r.f_val + r.inner_a_p_sq / (2.0 * cfg.hp.b);
    CHECK(std::abs(r.lyapunov_H - rhs) <= 1e-14 * std::max(1.0, std::abs(rhs)));
    CHECK(r.step_min == t.snaps[n].a_eff.minCoeff());
    CHECK(r.step_max == t.snaps[n].a_eff.maxCoeff());
    CHECK(r.step_min >= t.meta.delta);
    CHECK(r.step_max <= t.meta.cap * (1 + 1e-15));
    CHECK(r.grad_sq_norm == sq_norm(cfg.objective.grad(t.snaps[n].x)));
    CHECK(r.p_sq_norm == sq_norm(t.snaps[n].p));
  }
  CHECK(t.summary.terminal_f == t.records.back().f_val);
  CHECK(t.summary.terminal_grad_sq == t.records.back().grad_sq_norm);
  CHECK(t.summary.min_grad_sq <= t.records.front().grad_sq_norm);
}

TEST_CASE("runs are bit-for-bit deterministic") {
  RunConfig cfg = default_clipped(rosenbrock(2));
  cfg.max_iter = 200;
  cfg.sigma = 0.05;
  cfg.seed = 42;
  Trace a = run(cfg);
  Trace b = run(cfg);
  REQUIRE(a.records.size() == b.records.size());
  for (std::size_t n = 0; n < a.records.size(); ++n) {
    CHECK(a.records[n].f_val == b.records[n].f_val);
    CHECK(a.records[n].lyapunov_H == b.records[n].lyapunov_H);
    CHECK((a.snaps[n].x == b.snaps[n].x).all());
    CHECK((a.snaps[n].grad == b.snaps[n].grad).all());
  }
  REQUIRE(a.summary.tau.has_value());
  CHECK(*a.summary.tau == *b.summary.tau);
  CHECK(*a.summary.grad_sq_at_tau == *b.summary.grad_sq_at_tau);

  cfg.seed = 43;
  Trace c = run(cfg);
  CHECK(c.records.back().f_val != a.records.back().f_val);
}

TEST_CASE("momentum-free configuration reproduces gradient descent exactly") {
  Objective obj = quadratic(2, 1.0);
  Vector x0(2);
  x0 << 3.0, -1.5;
  const double gamma = 0.3;
  const int steps = 1000;

  Trace t = run_gradient_descent(obj, gamma, x0, steps);
  CHECK(t.meta.policy == PolicyKind::constant);
  CHECK(t.meta.hp.b == 1.0);
  CHECK(t.meta.clipping == ClipMode::off);
  REQUIRE(t.snaps.size() == std::size_t(steps) + 1);

  Vector x = x0;
  for (int n = 0; n < steps; ++n) {
    CHECK((t.snaps[n].x == x).all());
    x = step_gradient_descent(x, gamma, obj.grad(x));
  }
  CHECK((t.snaps.back().x == x).all());
}

TEST_CASE("heavy-ball rewrite replays the clipped trajectory") {
  RunConfig cfg = default_clipped(quadratic(2, 1.0));
  cfg.max_iter = 100;
  Trace t = run(cfg);
  CHECK(replay_heavy_ball(cfg.objective, t) <= 1e-10);

  RunConfig ros = default_clipped(rosenbrock(2));
  ros.max_iter = 100;
  Trace tr = run(ros);
  CHECK(replay_heavy_ball(ros.objective, tr) <= 1e-10);

  cfg.record_vectors = false;
  Trace bare = run(cfg);
  CHECK(bare.snaps.empty());
  CHECK_THROWS_AS(replay_heavy_ball(cfg.objective, bare), UsageError);
}

TEST_CASE("heavy-ball step algebra") {
  Vector x(2), xp(2), g(2);
  x << 1.0, 2.0;
  xp << 0.5, 2.5;
  g << 0.2, -0.4;
  Vector next = step_heavy_ball(x, xp, 0.1, 0.5, g);
  CHECK(next[0] == doctest::Approx(1.0 - 0.02 + 0.25).epsilon(1e-15));
  CHECK(next[1] == doctest::Approx(2.0 + 0.04 - 0.25).epsilon(1e-15));
}

TEST_CASE("gradient tolerance stopping") {
  RunConfig cfg = default_clipped(quadratic(2, 1.0));
  cfg.stop_tol = 1e-6;
  cfg.max_iter = 100000;
  Trace t = run(cfg);
  CHECK(t.summary.stop_reason == "stop_tol");
  CHECK(t.summary.steps < 100000);
  CHECK(std::sqrt(t.summary.terminal_grad_sq) <= 1e-6);
}

TEST_CASE("divergence raises with the partial trace attached") {
  RunConfig cfg;
  cfg.objective = quadratic(1, 1.0);
  cfg.policy = PolicyKind::constant;
  cfg.clipping = ClipMode::off;
  cfg.hp.base_rate = 3.0;  // gamma L = 3 > 2: geometric blow-up
  cfg.hp.b = 1.0;
  cfg.max_iter = 5000;
  try {
    run(cfg);
    FAIL("expected DivergenceError");
  } catch (const DivergenceError& e) {
    CHECK(e.partial.summary.stop_reason == "diverged");
    CHECK(e.partial.records.size() >= 2);
    CHECK(e.partial.records.size() < 5001);
    for (const TraceRecord& r : e.partial.records) {
      CHECK(std::isfinite(r.f_val));
    }
    CHECK(e.partial.summary.terminal_f == e.partial.records.back().f_val);
  }
}

TEST_CASE("configuration contract errors") {
  RunConfig cfg = default_clipped(quadratic(2, 1.0));
  cfg.max_iter = 0;
  CHECK_THROWS_AS(run(cfg), UsageError);

  cfg = default_clipped(quadratic(2, 1.0));
  cfg.sigma = -0.1;
  CHECK_THROWS_AS(run(cfg), UsageError);

  cfg = default_clipped(quadratic(2, 1.0));
  cfg.sigma = 0.1;
  cfg.stop_tol = 1e-3;
  CHECK_THROWS_AS(run(cfg), UsageError);

  cfg = default_clipped(quadratic(2, 1.0));
  cfg.x0 = Vector::Ones(3);
  CHECK_THROWS_AS(run(cfg), UsageError);

  cfg = default_clipped(quadratic(2, 1.0));
  cfg.hp.eps = -1.0;
  CHECK_THROWS_AS(run(cfg), UsageError);

  // Clipping demands valid safe bounds; breaking the growth hypothesis
  // through the override makes the run unconfigurable.
  cfg = default_clipped(quadratic(2, 1.0));
  cfg.hp.alpha_override = 0.5;
  CHECK_THROWS_AS(run(cfg), UsageError);
  cfg.clipping = ClipMode::off;
  CHECK_NOTHROW(run(cfg));
}

TEST_CASE("noise model moments and reproducibility") {
  Objective obj = quadratic(4, 1.0);
  Vector x = Vector::Ones(4);
  Vector g = obj.grad(x);
  const double sigma = 0.2;

  std::mt19937_64 r1(100), r2(100);
  Vector s1 = stochastic_gradient(obj, x, sigma, r1);
  Vector s2 = stochastic_gradient(obj, x, sigma, r2);
  CHECK((s1 == s2).all());

  std::mt19937_64 rng(2024);
  const int N = 20000;
  Vector mean_noise = Vector::Zero(4);
  double mean_sq = 0.0;
  for (int i = 0; i < N; ++i) {
    Vector noise = stochastic_gradient(obj, x, sigma, rng) - g;
    mean_noise += noise;
    mean_sq += sq_norm(noise);
  }
  mean_noise /= double(N);
  mean_sq /= double(N);
  CHECK((mean_noise.abs() < 5.0 * sigma / 2.0 / std::sqrt(double(N))).all());
  CHECK(mean_sq == doctest::Approx(sigma * sigma).epsilon(0.05));
}

TEST_CASE("noisy traces keep exact gradients in the scalar records") {
  RunConfig cfg = default_clipped(quadratic(3, 1.0));
  cfg.sigma = 0.5;
  cfg.seed = 9;
  cfg.max_iter = 50;
  Trace t = run(cfg);

  REQUIRE(t.summary.tau.has_value());
  REQUIRE(t.summary.grad_sq_at_tau.has_value());
  CHECK(*t.summary.tau >= 0);
  CHECK(*t.summary.tau < t.summary.steps);
  CHECK(*t.summary.grad_sq_at_tau == t.records[std::size_t(*t.summary.tau)].grad_sq_norm);

  bool saw_noise = false;
  for (std::size_t n = 0; n + 1 < t.snaps.size(); ++n) {
    Vector exact = cfg.objective.grad(t.snaps[n].x);
    CHECK(t.records[n].grad_sq_norm == sq_norm(exact));
    if (!(t.snaps[n].grad == exact).all()) saw_noise = true;
  }
  CHECK(saw_noise);
  // The final snapshot stores the exact gradient: no step consumes it.
  Vector term = cfg.objective.grad(t.snaps.back().x);
  CHECK((t.snaps.back().grad == term).all());
}

TEST_CASE("upper clipping exposes no floor") {
  RunConfig cfg = default_clipped(quadratic(2, 1.0));
  cfg.clipping = ClipMode::upper;
  cfg.max_iter = 50;
  Trace t = run(cfg);
  CHECK(t.meta.delta == 0.0);
  CHECK(t.meta.cap == t.bounds.a_sup);

  cfg.clipping = ClipMode::off;
  Trace off = run(cfg);
  CHECK(std::isnan(off.meta.cap));
  CHECK((off.snaps[0].a_eff == cfg.hp.base_rate).all());
}
