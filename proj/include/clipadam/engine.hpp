#pragma once

// The optimization loops: the clipped adaptive-momentum iteration
//   p(n+1) = p(n) + b (g(n) - p(n)),   x(n+1) = x(n) - a(n+1) * p(n+1)
// in deterministic and noisy-gradient form, plus gradient-descent and
// heavy-ball baselines, all producing full traces.

#include "clipadam/bounds.hpp"
#include "clipadam/objectives.hpp"
#include "clipadam/stepsize.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace clipadam {

enum class ClipMode {
  off,    // raw policy steps, no constraint (may diverge)
  upper,  // a <= min(cap, prev/alpha); no floor
  full    // delta <= a <= min(cap, prev/alpha)
};

const char* clip_mode_name(ClipMode mode);
ClipMode parse_clip_mode(const std::string& name);  // "off"|"upper"|"full"

struct RunConfig {
  Objective objective;
  PolicyKind policy = PolicyKind::rmsprop_adam;
  HyperParams hp;
  ClipMode clipping = ClipMode::full;
  double sigma = 0.0;  // gradient noise level; 0 = deterministic
  std::uint64_t seed = 0;
  std::optional<Vector> x0;  // defaults to objective.default_x0
  std::int64_t max_iter = 10000;
  // Stops early when ||grad f(x_n)|| <= stop_tol (0 disables). Deterministic
  // runs only; combining it with sigma > 0 is a UsageError because the noisy
  // guarantees are about a horizon, not a stopping rule.
  double stop_tol = 0.0;
  bool record_vectors = true;  // keep per-iterate vector snapshots
};

// Vector state at iterate n. grad holds the gradient sample consumed by the
// step n -> n+1 (for the final iterate: the exact gradient, no step follows);
// in deterministic runs the sample is the exact gradient. p and a_eff are
// the momentum and effective step AT n (a_eff(0) is the initialization
// convention: the active cap, or base_rate with clipping off).
struct VecSnapshot {
  Vector x;
  Vector grad;
  Vector p;
  Vector a_eff;
};

// Everything needed to re-derive the run's constants offline.
struct TraceMeta {
  std::string objective_id;
  double lipschitz_L = 0.0;
  double infimum = 0.0;
  PolicyKind policy = PolicyKind::rmsprop_adam;
  HyperParams hp;
  ClipMode clipping = ClipMode::full;
  double sigma = 0.0;
  std::uint64_t seed = 0;
  double alpha = 1.0;  // resolved step-decay factor
  double cap = 0.0;    // active upper clip (NaN when clipping off)
  double delta = 0.0;  // resolved floor (0 unless clipping == full)
};

struct TraceSummary {
  std::int64_t steps = 0;  // records.size() - 1
  double terminal_f = 0.0;
  double terminal_grad_sq = 0.0;
  double min_grad_sq = 0.0;  // over all recorded iterates
  double wall_time_sec = 0.0;
  std::string stop_reason;  // "max_iter" | "stop_tol" | "diverged"
  // Steps at which the clip floor overrode the growth cap at some coordinate
  // (the resulting a(n+1) > a(n)/alpha there); nonzero values flag that the
  // admissible-step interval collapsed.
  std::int64_t floor_override_events = 0;
  // Noisy runs only: uniform index in {0, ..., steps-1} drawn at the end and
  // the exact squared gradient norm at that iterate.
  std::optional<std::int64_t> tau;
  std::optional<double> grad_sq_at_tau;
};

struct Trace {
  TraceMeta meta;
  SafeBounds bounds;  // as validated for the run (clipping modes only)
  std::vector<TraceRecord> records;  // one per iterate, n = 0 ... steps
  std::vector<VecSnapshot> snaps;    // parallel to records when recorded
  TraceSummary summary;
};

// Thrown when an iterate, gradient, or function value turns non-finite; the
// trace collected so far rides along (summary.stop_reason = "diverged").
struct DivergenceError : std::runtime_error {
  explicit DivergenceError(std::string msg, Trace partial_trace)
      : std::runtime_error(std::move(msg)), partial(std::move(partial_trace)) {}
  Trace partial;
};

// Exact gradient plus iid Gaussian noise with per-coordinate standard
// deviation sigma/sqrt(d), so E||noise||^2 = sigma^2 exactly.
Vector stochastic_gradient(const Objective& f, const Vector& x, double sigma,
                           std::mt19937_64& rng);

// Runs the iteration. Records one TraceRecord per iterate including n = 0;
// grad_sq_norm always holds the exact squared gradient norm (noise lives
// only in the snapshots). Throws UsageError on bad configuration (including
// invalid SafeBounds under clipping) and DivergenceError on blow-up.
Trace run(const RunConfig& cfg);

// x - gamma g. Throws DivergenceError (with an empty trace) on non-finite
// result.
Vector step_gradient_descent(const Vector& x, double gamma, const Vector& g);

// x - alpha_n g + beta_n (x - x_prev), scalar coefficients.
Vector step_heavy_ball(const Vector& x, const Vector& x_prev, double alpha_n,
                       double beta_n, const Vector& g);

// Gradient descent as a special case of run(): b = 1, constant policy at
// base_rate = gamma, clipping off. The trajectory is bit-identical to
// repeated step_gradient_descent.
Trace run_gradient_descent(const Objective& obj, double gamma, const Vector& x0,
                           std::int64_t max_iter, double stop_tol = 0.0);

// Replays the trace's effective-step schedule through the momentum-free
// rewrite x(n+1) = x(n) - b a(n+1) grad f(x(n)) + (1-b)(a(n+1)/a(n))(x(n) -
// x(n-1)) (coordinatewise step ratios), evaluating fresh gradients at the
// replayed points, and returns the maximum over n of ||x_replay(n) -
// x_trace(n)||. Requires snapshots and p(0) = 0. Agreement within rounding
// is the rewrite-equivalence check.
double replay_heavy_ball(const Objective& obj, const Trace& trace);

}  // namespace clipadam
