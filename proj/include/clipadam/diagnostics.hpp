#pragma once

// Numerical verification of the convergence theory along recorded traces:
// per-step descent of the Lyapunov sequence H(n) = f(x(n)) + <a(n), p(n)^2>
// / (2b), the min-gradient rate bounds (deterministic, noisy, and plain
// gradient descent), the step-weighted gradient-sum bound, and the abstract
// sufficient-decrease / relative-error conditions.
//
// All checkers are pure functions over completed traces. Inequalities are
// allowed an additive slack of 1e-10 * max(1, scale of the comparison):
// they are mathematically strict, but sums of 10^4 floating-point terms
// accumulate rounding.

#include "clipadam/engine.hpp"

#include <vector>

namespace clipadam {

// f_val + <a, p^2> / (2b). Requires b > 0 and a > 0 coordinatewise.
double lyapunov_H(double f_val, const Vector& a, const Vector& p, double b);

struct MonotonicityReport {
  bool nonincreasing = false;
  std::int64_t violations = 0;
  double worst_rise = 0.0;  // max over n of H(n+1) - H(n) (<= 0 when clean)
  std::int64_t steps_checked = 0;
};

// H(n+1) <= H(n) at every step, within the standard slack.
MonotonicityReport check_H_monotone(const Trace& trace);

struct DescentStep {
  std::int64_t n = 0;   // the transition n -> n+1
  double lhs = 0.0;     // H(n+1) - H(n)
  double rhs = 0.0;     // descent bound at the fixed u
  double rhs_eps = 0.0; // -eps <a(n+1), p(n+1)^2>
  double A_min = 0.0;   // smallest coordinate of A(n+1)
  bool lemma_ok = true;
  bool bound_ok = true;
};

struct DescentReport {
  double u = 0.0;    // mixing constant alpha b / (b - (1 - alpha))
  double B = 0.0;    // gradient-mismatch coefficient at that u (0 up to rounding)
  double eps = 0.0;  // quantified-decrease margin tested
  std::int64_t steps_checked = 0;
  std::int64_t lemma_violations = 0;
  std::int64_t bound_violations = 0;
  // The per-step inequality
  //   H(n+1) - H(n) <= -<a(n+1) p(n+1)^2, A(n+1)> - (b/2) B <a(n+1), (g-p)^2>
  // with A(n+1) = 1 - a(n+1) L/2 - |b-(1-alpha)|/(2u) - (1-alpha)/(2b).
  bool lemma_violated = false;
  // The quantified decrease H(n+1) - H(n) <= -eps <a(n+1), p(n+1)^2>, which
  // encodes A(n+1) >= eps and fails exactly when the step leaves (0, a_sup].
  bool bound_condition_violated = false;
  bool violated = false;  // either of the above
  double worst_lemma_margin = 0.0;  // max of lhs - rhs
  double worst_bound_margin = 0.0;  // max of lhs - rhs_eps
  std::vector<DescentStep> steps;
};

// Per-step descent check on a deterministic trace with vector snapshots.
// eps is the quantified-decrease margin (normally HyperParams::eps).
DescentReport check_descent_lemma(const Trace& trace, double eps);

struct RatePoint {
  std::int64_t n = 0;
  double lhs = 0.0;
  double bound = 0.0;
  bool holds = false;
};

struct Theorem1Report {
  bool holds_all = false;
  std::int64_t violations = 0;
  double worst_ratio = 0.0;  // max of lhs / bound, <= 1 when clean
  double sum_p_sq = 0.0;
  double sum_p_sq_bound = 0.0;  // (H0 - inf f) / (delta eps)
  bool sum_ok = false;
  std::vector<RatePoint> points;  // lhs = min-so-far squared gradient norm
};

// min over k < n of ||grad f(x_k)||^2 <= 4/(n b^2) ((H0 - inf f)/(delta eps)
// + ||p0||^2) at every n >= 1, plus the momentum-energy sum bound. Requires
// a deterministic fully clipped run with valid bounds.
Theorem1Report check_theorem1(const Trace& trace);

struct StepWeightedSumReport {
  bool holds_all = false;
  std::int64_t violations = 0;
  double total_lhs = 0.0;  // sum over k of <a(k+1), grad f(x_k)^2>
  double bound = 0.0;      // 2(1+alpha)/(b^2 alpha) ((H0 - inf f)/eps + <a0, p0^2>)
  double worst_ratio = 0.0;
  std::vector<RatePoint> points;  // lhs = running sum
};

// The upper-clip-only guarantee: the step-weighted squared-gradient sum
// stays below a horizon-independent constant. Valid for any deterministic
// run whose steps respect the cap (upper or full clipping).
StepWeightedSumReport check_prop_no_lower_bound(const Trace& trace);

struct Theorem2Report {
  std::int64_t trials = 0;
  std::int64_t horizon = 0;  // common step count n
  double mean_grad_sq_at_tau = 0.0;
  double std_error = 0.0;
  double bound_deterministic_part = 0.0;
  double bound_noise_part = 0.0;  // 4 bar_a_sup sigma^2 / (delta eps b^2)
  double bound = 0.0;
  bool holds = false;
};

// Noisy-run rate check over M >= 2 independent trials with a common
// configuration: mean of ||grad f(x_tau)||^2 against the two-term bound.
Theorem2Report check_theorem2(const std::vector<Trace>& traces);

struct GdBoundReport {
  bool holds_all = false;
  std::int64_t violations = 0;
  double worst_ratio = 0.0;
  std::vector<RatePoint> points;  // lhs = min-so-far squared gradient norm
};

// Gradient-descent baseline: min over k < n of ||grad f(x_k)||^2 <=
// (f(x0) - inf f) / (n gamma (1 - gamma L / 2)). UsageError when gamma >=
// 2/L (vacuous bound).
GdBoundReport check_gd_bound(const Trace& trace, double gamma);

struct AbstractCondReport {
  double rho1 = 0.0;  // eps / a_sup
  double rho2 = 0.0;  // sqrt(2(L^2 + 2/(b^2 delta^2))) + 1/(b sqrt(delta))
  std::int64_t steps_checked = 0;
  std::int64_t decrease_violations = 0;  // (i)
  std::int64_t gradient_violations = 0;  // (ii)
  bool holds = false;
  double worst_decrease_margin = 0.0;
  double worst_gradient_margin = 0.0;
};

// Sufficient decrease (i): H(k+1) - H(k) <= -rho1 ||x(k+1) - x(k)||^2, and
// relative error (ii): ||grad H(z(k+1))|| <= rho2 (||dx(k)|| + ||dx(k-1)||)
// with z = (x, sqrt(a) p) and grad H(z) = (grad f(x), y/b). Deterministic
// fully clipped runs only.
AbstractCondReport check_abstract_conditions(const Trace& trace);

}  // namespace clipadam
