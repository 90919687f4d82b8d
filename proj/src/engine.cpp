#include "clipadam/engine.hpp"

#include <chrono>
#include <cmath>
#include <utility>

namespace clipadam {

const char* clip_mode_name(ClipMode mode) {
  switch (mode) {
    case ClipMode::off: return "off";
    case ClipMode::upper: return "upper";
    case ClipMode::full: return "full";
  }
  return "?";
}

ClipMode parse_clip_mode(const std::string& name) {
  if (name == "off") return ClipMode::off;
  if (name == "upper") return ClipMode::upper;
  if (name == "full") return ClipMode::full;
  throw UsageError("unknown clip mode '" + name + "' (expected off | upper | full)");
}

Vector stochastic_gradient(const Objective& f, const Vector& x, double sigma,
                           std::mt19937_64& rng) {
  if (!(sigma >= 0.0)) throw UsageError("stochastic_gradient: sigma must be >= 0");
  Vector g = f.grad(x);
  if (sigma == 0.0) return g;
  std::normal_distribution<double> noise(0.0, sigma / std::sqrt(double(g.size())));
  for (Eigen::Index i = 0; i < g.size(); ++i) g[i] += noise(rng);
  return g;
}

namespace {

struct RecordedPoint {
  double f = 0.0;
  Vector g;  // exact gradient
};

void fill_terminal_stats(Trace& trace) {
  TraceSummary& s = trace.summary;
  s.steps = std::int64_t(trace.records.size()) - 1;
  if (trace.records.empty()) return;
  const TraceRecord& last = trace.records.back();
  s.terminal_f = last.f_val;
  s.terminal_grad_sq = last.grad_sq_norm;
  s.min_grad_sq = trace.records.front().grad_sq_norm;
  for (const TraceRecord& r : trace.records) {
    s.min_grad_sq = std::min(s.min_grad_sq, r.grad_sq_norm);
  }
}

// Evaluates f and its exact gradient, failing the run on any non-finite
// value so no non-finite number is ever recorded.
RecordedPoint evaluate_or_diverge(const Objective& obj, const Vector& x,
                                  Trace& trace) {
  auto diverge = [&trace](const char* what) {
    trace.summary.stop_reason = "diverged";
    fill_terminal_stats(trace);
    throw DivergenceError(std::string("divergence: ") + what +
                              " turned non-finite at iterate " +
                              std::to_string(trace.records.size()),
                          std::move(trace));
  };
  if (!all_finite(x)) diverge("the iterate");
  RecordedPoint pt;
  pt.f = obj.value(x);
  if (!std::isfinite(pt.f)) diverge("the function value");
  pt.g = obj.grad(x);
  if (!all_finite(pt.g)) diverge("the gradient");
  return pt;
}

void finalize_summary(Trace& trace, double wall_sec, std::mt19937_64& rng) {
  TraceSummary& s = trace.summary;
  fill_terminal_stats(trace);
  s.wall_time_sec = wall_sec;
  if (trace.meta.sigma > 0.0 && s.steps >= 1) {
    std::uniform_int_distribution<std::int64_t> pick(0, s.steps - 1);
    s.tau = pick(rng);
    s.grad_sq_at_tau = trace.records[std::size_t(*s.tau)].grad_sq_norm;
  }
}

}  // namespace

Trace run(const RunConfig& cfg) {
  const Objective& obj = cfg.objective;
  if (!obj.value || !obj.grad) throw UsageError("run: objective has no callables");
  cfg.hp.validate_or_throw();
  if (cfg.max_iter < 1) throw UsageError("run: max_iter must be >= 1");
  if (!(cfg.sigma >= 0.0 && std::isfinite(cfg.sigma))) {
    throw UsageError("run: sigma must be finite and >= 0");
  }
  if (!(cfg.stop_tol >= 0.0)) throw UsageError("run: stop_tol must be >= 0");
  if (cfg.sigma > 0.0 && cfg.stop_tol > 0.0) {
    throw UsageError(
        "run: stop_tol is a deterministic stopping rule; disable it (0) for "
        "noisy runs, whose guarantees are about a fixed horizon");
  }
  Vector x = cfg.x0.value_or(obj.default_x0);
  if (x.size() != obj.dim) {
    throw UsageError("run: x0 has length " + std::to_string(x.size()) +
                     " but the objective has dimension " + std::to_string(obj.dim));
  }
  require_finite(x, "run x0");

  const double alpha = resolved_alpha(cfg.policy, cfg.hp);
  const BoundMode bmode =
      cfg.sigma > 0.0 ? BoundMode::stochastic : BoundMode::deterministic;
  SafeBounds sb = validate(cfg.hp, obj.lipschitz_L, alpha, bmode);

  double cap = std::numeric_limits<double>::quiet_NaN();
  double delta = 0.0;
  if (cfg.clipping != ClipMode::off) {
    if (!sb.valid) {
      throw UsageError("run: clipping requested but the safe bounds are invalid: " +
                       sb.diagnostics);
    }
    cap = cfg.sigma > 0.0 ? sb.bar_a_sup : sb.a_sup;
    if (cfg.clipping == ClipMode::full) {
      delta = cfg.hp.clip_floor.value_or(default_clip_floor(cap));
    }
  }

  Trace trace;
  trace.meta.objective_id = obj.id;
  trace.meta.lipschitz_L = obj.lipschitz_L;
  trace.meta.infimum = obj.infimum;
  trace.meta.policy = cfg.policy;
  trace.meta.hp = cfg.hp;
  trace.meta.clipping = cfg.clipping;
  trace.meta.sigma = cfg.sigma;
  trace.meta.seed = cfg.seed;
  trace.meta.alpha = alpha;
  trace.meta.cap = cap;
  trace.meta.delta = delta;
  trace.bounds = sb;
  trace.records.reserve(std::size_t(cfg.max_iter) + 1);
  if (cfg.record_vectors) trace.snaps.reserve(std::size_t(cfg.max_iter) + 1);

  std::mt19937_64 rng(cfg.seed);
  const double b = cfg.hp.b;
  IterateState st;
  st.x = std::move(x);
  st.p = Vector::Zero(obj.dim);
  st.v = init_accumulator(cfg.policy, obj.dim);
  st.a_eff = Vector::Constant(
      obj.dim, cfg.clipping != ClipMode::off ? cap : cfg.hp.base_rate);

  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed = [&t0]() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
  };

  double dx_norm = 0.0;
  for (std::int64_t n = 0;; ++n) {
    RecordedPoint pt = evaluate_or_diverge(obj, st.x, trace);
    TraceRecord rec;
    rec.n = n;
    rec.f_val = pt.f;
    rec.grad_sq_norm = sq_norm(pt.g);
    rec.inner_a_p_sq = inner(st.a_eff, st.p.square());
    rec.lyapunov_H = pt.f + rec.inner_a_p_sq / (2.0 * b);
    rec.step_min = st.a_eff.minCoeff();
    rec.step_max = st.a_eff.maxCoeff();
    rec.p_sq_norm = sq_norm(st.p);
    rec.dx_norm = dx_norm;
    trace.records.push_back(rec);
    if (cfg.record_vectors) {
      trace.snaps.push_back(VecSnapshot{st.x, pt.g, st.p, st.a_eff});
    }

    if (cfg.stop_tol > 0.0 && std::sqrt(rec.grad_sq_norm) <= cfg.stop_tol) {
      trace.summary.stop_reason = "stop_tol";
      break;
    }
    if (n == cfg.max_iter) {
      trace.summary.stop_reason = "max_iter";
      break;
    }

    Vector g = pt.g;
    if (cfg.sigma > 0.0) {
      std::normal_distribution<double> noise(
          0.0, cfg.sigma / std::sqrt(double(obj.dim)));
      for (Eigen::Index i = 0; i < g.size(); ++i) g[i] += noise(rng);
      if (cfg.record_vectors) trace.snaps.back().grad = g;
    }

    st.p = (1.0 - b) * st.p + b * g;
    Vector raw = raw_step(cfg.policy, cfg.hp, st.v, g);
    Vector a_next;
    switch (cfg.clipping) {
      case ClipMode::off: a_next = std::move(raw); break;
      case ClipMode::upper: a_next = clip_step(raw, st.a_eff, cap, 0.0, alpha); break;
      case ClipMode::full: a_next = clip_step(raw, st.a_eff, cap, delta, alpha); break;
    }
    if (cfg.clipping == ClipMode::full &&
        (a_next > st.a_eff / alpha).any()) {
      ++trace.summary.floor_override_events;
    }
    Vector dx = a_next * st.p;
    st.x -= dx;
    dx_norm = std::sqrt(sq_norm(dx));
    st.a_eff = std::move(a_next);
  }

  finalize_summary(trace, elapsed(), rng);
  return trace;
}

Vector step_gradient_descent(const Vector& x, double gamma, const Vector& g) {
  require_same_size(x, g, "step_gradient_descent");
  Vector out = x - gamma * g;
  if (!all_finite(out)) {
    throw DivergenceError("step_gradient_descent produced a non-finite iterate",
                          Trace{});
  }
  return out;
}

Vector step_heavy_ball(const Vector& x, const Vector& x_prev, double alpha_n,
                       double beta_n, const Vector& g) {
  require_same_size(x, x_prev, "step_heavy_ball");
  require_same_size(x, g, "step_heavy_ball");
  Vector out = x - alpha_n * g + beta_n * (x - x_prev);
  if (!all_finite(out)) {
    throw DivergenceError("step_heavy_ball produced a non-finite iterate",
                          Trace{});
  }
  return out;
}

Trace run_gradient_descent(const Objective& obj, double gamma, const Vector& x0,
                           std::int64_t max_iter, double stop_tol) {
  if (!(std::isfinite(gamma) && gamma > 0.0)) {
    throw UsageError("run_gradient_descent: gamma must be positive and finite");
  }
  RunConfig cfg;
  cfg.objective = obj;
  cfg.policy = PolicyKind::constant;
  cfg.hp.base_rate = gamma;
  cfg.hp.b = 1.0;
  cfg.clipping = ClipMode::off;
  cfg.x0 = x0;
  cfg.max_iter = max_iter;
  cfg.stop_tol = stop_tol;
  return run(cfg);
}

double replay_heavy_ball(const Objective& obj, const Trace& trace) {
  if (trace.snaps.size() != trace.records.size() || trace.snaps.size() < 2) {
    throw UsageError("replay_heavy_ball: trace has no vector snapshots");
  }
  if (trace.meta.sigma > 0.0) {
    throw UsageError("replay_heavy_ball: deterministic traces only");
  }
  if (sq_norm(trace.snaps[0].p) != 0.0) {
    throw UsageError("replay_heavy_ball: the rewrite assumes p(0) = 0");
  }
  const double b = trace.meta.hp.b;
  Vector x_prev = trace.snaps[0].x;
  Vector x = x_prev - b * (trace.snaps[1].a_eff * obj.grad(x_prev));
  double dev = std::sqrt(sq_norm(x - trace.snaps[1].x));
  for (std::size_t n = 1; n + 1 < trace.snaps.size(); ++n) {
    const Vector& a_next = trace.snaps[n + 1].a_eff;
    const Vector& a_cur = trace.snaps[n].a_eff;
    Vector nxt = x - b * (a_next * obj.grad(x)) +
                 (1.0 - b) * (a_next / a_cur) * (x - x_prev);
    if (!all_finite(nxt)) {
      throw DivergenceError("replay_heavy_ball produced a non-finite iterate",
                            Trace{});
    }
    dev = std::max(dev, std::sqrt(sq_norm(nxt - trace.snaps[n + 1].x)));
    x_prev = std::move(x);
    x = std::move(nxt);
  }
  return dev;
}

}  // namespace clipadam
