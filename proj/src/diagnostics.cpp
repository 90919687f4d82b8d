#include "clipadam/diagnostics.hpp"

#include <cmath>
#include <limits>

namespace clipadam {

namespace {

double slack(double scale) { return 1e-10 * std::max(1.0, std::abs(scale)); }

void require_deterministic(const Trace& trace, const char* who) {
  if (trace.meta.sigma > 0.0) {
    throw UsageError(std::string(who) + ": deterministic traces only");
  }
}

void require_snaps(const Trace& trace, const char* who) {
  if (trace.snaps.size() != trace.records.size() || trace.snaps.empty()) {
    throw UsageError(std::string(who) + ": trace has no vector snapshots");
  }
}

void require_steps(const Trace& trace, const char* who) {
  if (trace.records.size() < 2) {
    throw UsageError(std::string(who) + ": trace has no steps");
  }
}

}  // namespace

double lyapunov_H(double f_val, const Vector& a, const Vector& p, double b) {
  if (!(b > 0.0)) throw UsageError("lyapunov_H: b must be > 0");
  if ((a <= 0.0).any()) throw UsageError("lyapunov_H: a must be positive");
  require_same_size(a, p, "lyapunov_H");
  return f_val + inner(a, p.square()) / (2.0 * b);
}

MonotonicityReport check_H_monotone(const Trace& trace) {
  require_steps(trace, "check_H_monotone");
  MonotonicityReport rep;
  rep.worst_rise = -std::numeric_limits<double>::infinity();
  for (std::size_t n = 0; n + 1 < trace.records.size(); ++n) {
    double rise = trace.records[n + 1].lyapunov_H - trace.records[n].lyapunov_H;
    rep.worst_rise = std::max(rep.worst_rise, rise);
    if (rise > slack(trace.records[n].lyapunov_H)) ++rep.violations;
    ++rep.steps_checked;
  }
  rep.nonincreasing = rep.violations == 0;
  return rep;
}

DescentReport check_descent_lemma(const Trace& trace, double eps) {
  require_deterministic(trace, "check_descent_lemma");
  require_snaps(trace, "check_descent_lemma");
  require_steps(trace, "check_descent_lemma");
  if (!(eps > 0.0)) throw UsageError("check_descent_lemma: eps must be > 0");

  const double b = trace.meta.hp.b;
  const double alpha = trace.meta.alpha;
  const double L = trace.meta.lipschitz_L;
  const double denom = b - (1.0 - alpha);
  if (denom < 0.0) {
    throw UsageError(
        "check_descent_lemma: needs 1 - alpha <= b (step-growth hypothesis)");
  }

  DescentReport rep;
  rep.eps = eps;
  double termA;  // the |b-(1-alpha)|/(2u) piece of A(n+1)
  if (denom == 0.0) {
    rep.u = std::numeric_limits<double>::infinity();
    termA = 0.0;
    rep.B = alpha;
  } else {
    rep.u = alpha * b / denom;
    termA = denom / (2.0 * rep.u);
    rep.B = 1.0 - denom * rep.u / b - (1.0 - alpha);
  }
  const double const_terms = termA + (1.0 - alpha) / (2.0 * b);

  rep.worst_lemma_margin = -std::numeric_limits<double>::infinity();
  rep.worst_bound_margin = rep.worst_lemma_margin;
  rep.steps.reserve(trace.records.size() - 1);
  for (std::size_t n = 0; n + 1 < trace.records.size(); ++n) {
    const VecSnapshot& cur = trace.snaps[n];
    const VecSnapshot& nxt = trace.snaps[n + 1];
    Vector A = 1.0 - nxt.a_eff * (L / 2.0) - const_terms;
    double mismatch = inner(nxt.a_eff, (cur.grad - cur.p).square());
    DescentStep step;
    step.n = std::int64_t(n);
    step.lhs = trace.records[n + 1].lyapunov_H - trace.records[n].lyapunov_H;
    step.rhs = -inner(nxt.a_eff * nxt.p.square(), A) - (b / 2.0) * rep.B * mismatch;
    step.rhs_eps = -eps * inner(nxt.a_eff, nxt.p.square());
    step.A_min = A.minCoeff();
    double tol = slack(trace.records[n].lyapunov_H);
    step.lemma_ok = step.lhs <= step.rhs + tol;
    step.bound_ok = step.lhs <= step.rhs_eps + tol;
    rep.worst_lemma_margin = std::max(rep.worst_lemma_margin, step.lhs - step.rhs);
    rep.worst_bound_margin =
        std::max(rep.worst_bound_margin, step.lhs - step.rhs_eps);
    if (!step.lemma_ok) ++rep.lemma_violations;
    if (!step.bound_ok) ++rep.bound_violations;
    rep.steps.push_back(step);
    ++rep.steps_checked;
  }
  rep.lemma_violated = rep.lemma_violations > 0;
  rep.bound_condition_violated = rep.bound_violations > 0;
  rep.violated = rep.lemma_violated || rep.bound_condition_violated;
  return rep;
}

Theorem1Report check_theorem1(const Trace& trace) {
  require_deterministic(trace, "check_theorem1");
  require_steps(trace, "check_theorem1");
  if (trace.meta.clipping != ClipMode::full || !(trace.meta.delta > 0.0)) {
    throw UsageError("check_theorem1: needs a fully clipped run (positive floor)");
  }
  if (!trace.bounds.valid) {
    throw UsageError("check_theorem1: run has invalid safe bounds");
  }
  const double b = trace.meta.hp.b;
  const double eps = trace.meta.hp.eps;
  const double delta = trace.meta.delta;
  const double H0 = trace.records[0].lyapunov_H;
  const double gap0 = H0 - trace.meta.infimum;
  const double p0_sq = trace.records[0].p_sq_norm;

  Theorem1Report rep;
  rep.points.reserve(trace.records.size() - 1);
  double min_grad_sq = std::numeric_limits<double>::infinity();
  rep.sum_p_sq_bound = gap0 / (delta * eps);
  for (std::size_t n = 1; n < trace.records.size(); ++n) {
    min_grad_sq = std::min(min_grad_sq, trace.records[n - 1].grad_sq_norm);
    rep.sum_p_sq += trace.records[n].p_sq_norm;
    RatePoint pt;
    pt.n = std::int64_t(n);
    pt.lhs = min_grad_sq;
    pt.bound = 4.0 / (double(n) * b * b) * (gap0 / (delta * eps) + p0_sq);
    pt.holds = pt.lhs <= pt.bound;
    if (!pt.holds) ++rep.violations;
    rep.worst_ratio = std::max(rep.worst_ratio, pt.lhs / pt.bound);
    rep.points.push_back(pt);
  }
  rep.holds_all = rep.violations == 0;
  rep.sum_ok = rep.sum_p_sq <= rep.sum_p_sq_bound + slack(rep.sum_p_sq_bound);
  return rep;
}

StepWeightedSumReport check_prop_no_lower_bound(const Trace& trace) {
  require_deterministic(trace, "check_prop_no_lower_bound");
  require_snaps(trace, "check_prop_no_lower_bound");
  require_steps(trace, "check_prop_no_lower_bound");
  if (trace.meta.clipping == ClipMode::off) {
    throw UsageError(
        "check_prop_no_lower_bound: needs an upper-clipped run (steps <= cap)");
  }
  if (!trace.bounds.valid) {
    throw UsageError("check_prop_no_lower_bound: run has invalid safe bounds");
  }
  const double b = trace.meta.hp.b;
  const double eps = trace.meta.hp.eps;
  const double alpha = trace.meta.alpha;
  const double H0 = trace.records[0].lyapunov_H;
  const double gap0 = H0 - trace.meta.infimum;

  StepWeightedSumReport rep;
  rep.bound = 2.0 * (1.0 + alpha) / (b * b * alpha) *
              (gap0 / eps + trace.records[0].inner_a_p_sq);
  rep.points.reserve(trace.records.size() - 1);
  double running = 0.0;
  for (std::size_t n = 1; n < trace.records.size(); ++n) {
    running += inner(trace.snaps[n].a_eff, trace.snaps[n - 1].grad.square());
    RatePoint pt;
    pt.n = std::int64_t(n);
    pt.lhs = running;
    pt.bound = rep.bound;
    pt.holds = pt.lhs <= pt.bound + slack(pt.bound);
    if (!pt.holds) ++rep.violations;
    rep.worst_ratio = std::max(rep.worst_ratio, pt.lhs / pt.bound);
    rep.points.push_back(pt);
  }
  rep.total_lhs = running;
  rep.holds_all = rep.violations == 0;
  return rep;
}

Theorem2Report check_theorem2(const std::vector<Trace>& traces) {
  if (traces.size() < 2) {
    throw UsageError("check_theorem2: needs at least 2 trials");
  }
  const Trace& first = traces.front();
  if (!(first.meta.sigma > 0.0)) {
    throw UsageError("check_theorem2: traces must be noisy runs (sigma > 0)");
  }
  if (first.meta.clipping != ClipMode::full || !(first.meta.delta > 0.0)) {
    throw UsageError("check_theorem2: needs fully clipped runs (positive floor)");
  }
  if (!first.bounds.valid) {
    throw UsageError("check_theorem2: runs have invalid safe bounds");
  }
  const std::int64_t n = first.summary.steps;
  if (n < 1) throw UsageError("check_theorem2: traces have no steps");

  Theorem2Report rep;
  rep.trials = std::int64_t(traces.size());
  rep.horizon = n;
  double sum = 0.0, sum_sq = 0.0;
  for (const Trace& t : traces) {
    if (t.summary.steps != n || t.meta.sigma != first.meta.sigma ||
        t.meta.delta != first.meta.delta || t.meta.hp.b != first.meta.hp.b) {
      throw UsageError("check_theorem2: trials disagree on configuration");
    }
    if (!t.summary.tau || !t.summary.grad_sq_at_tau) {
      throw UsageError("check_theorem2: a trial is missing its sampled iterate");
    }
    sum += *t.summary.grad_sq_at_tau;
    sum_sq += *t.summary.grad_sq_at_tau * *t.summary.grad_sq_at_tau;
  }
  const double M = double(traces.size());
  rep.mean_grad_sq_at_tau = sum / M;
  double var = std::max(0.0, sum_sq / M - rep.mean_grad_sq_at_tau * rep.mean_grad_sq_at_tau);
  rep.std_error = std::sqrt(var / M);

  const double b = first.meta.hp.b;
  const double eps = first.meta.hp.eps;
  const double delta = first.meta.delta;
  const double gap0 = first.records[0].lyapunov_H - first.meta.infimum;
  const double p0_sq = first.records[0].p_sq_norm;
  const double sigma = first.meta.sigma;
  rep.bound_deterministic_part =
      4.0 / (double(n) * b * b) * (gap0 / (delta * eps) + p0_sq);
  rep.bound_noise_part =
      4.0 * first.bounds.bar_a_sup * sigma * sigma / (delta * eps * b * b);
  rep.bound = rep.bound_deterministic_part + rep.bound_noise_part;
  rep.holds = rep.mean_grad_sq_at_tau <= rep.bound;
  return rep;
}

GdBoundReport check_gd_bound(const Trace& trace, double gamma) {
  require_deterministic(trace, "check_gd_bound");
  require_steps(trace, "check_gd_bound");
  const double L = trace.meta.lipschitz_L;
  if (!(gamma > 0.0)) throw UsageError("check_gd_bound: gamma must be > 0");
  if (gamma >= 2.0 / L) {
    throw UsageError("check_gd_bound: gamma >= 2/L makes the bound vacuous");
  }
  const double denom_coeff = gamma * (1.0 - gamma * L / 2.0);
  const double gap0 = trace.records[0].f_val - trace.meta.infimum;

  GdBoundReport rep;
  rep.points.reserve(trace.records.size() - 1);
  double min_grad_sq = std::numeric_limits<double>::infinity();
  for (std::size_t n = 1; n < trace.records.size(); ++n) {
    min_grad_sq = std::min(min_grad_sq, trace.records[n - 1].grad_sq_norm);
    RatePoint pt;
    pt.n = std::int64_t(n);
    pt.lhs = min_grad_sq;
    pt.bound = gap0 / (double(n) * denom_coeff);
    pt.holds = pt.lhs <= pt.bound + slack(pt.bound);
    if (!pt.holds) ++rep.violations;
    rep.worst_ratio = std::max(rep.worst_ratio, pt.bound > 0 ? pt.lhs / pt.bound : 0.0);
    rep.points.push_back(pt);
  }
  rep.holds_all = rep.violations == 0;
  return rep;
}

AbstractCondReport check_abstract_conditions(const Trace& trace) {
  require_deterministic(trace, "check_abstract_conditions");
  require_steps(trace, "check_abstract_conditions");
  if (trace.meta.clipping != ClipMode::full || !(trace.meta.delta > 0.0)) {
    throw UsageError(
        "check_abstract_conditions: needs a fully clipped run (positive floor)");
  }
  if (!trace.bounds.valid) {
    throw UsageError("check_abstract_conditions: run has invalid safe bounds");
  }
  const double b = trace.meta.hp.b;
  const double delta = trace.meta.delta;
  const double L = trace.meta.lipschitz_L;

  AbstractCondReport rep;
  rep.rho1 = trace.meta.hp.eps / trace.bounds.a_sup;
  rep.rho2 = std::sqrt(2.0 * (L * L + 2.0 / (b * b * delta * delta))) +
             1.0 / (b * std::sqrt(delta));
  rep.worst_decrease_margin = -std::numeric_limits<double>::infinity();
  rep.worst_gradient_margin = rep.worst_decrease_margin;

  for (std::size_t k = 0; k + 1 < trace.records.size(); ++k) {
    const TraceRecord& cur = trace.records[k];
    const TraceRecord& nxt = trace.records[k + 1];
    double lhs_i = nxt.lyapunov_H - cur.lyapunov_H;
    double rhs_i = -rep.rho1 * nxt.dx_norm * nxt.dx_norm;
    rep.worst_decrease_margin = std::max(rep.worst_decrease_margin, lhs_i - rhs_i);
    if (lhs_i > rhs_i + slack(cur.lyapunov_H)) ++rep.decrease_violations;

    if (k >= 1) {
      double grad_H =
          std::sqrt(nxt.grad_sq_norm + nxt.inner_a_p_sq / (b * b));
      double rhs_ii = rep.rho2 * (nxt.dx_norm + cur.dx_norm);
      rep.worst_gradient_margin =
          std::max(rep.worst_gradient_margin, grad_H - rhs_ii);
      if (grad_H > rhs_ii + slack(rhs_ii)) ++rep.gradient_violations;
    }
    ++rep.steps_checked;
  }
  rep.holds = rep.decrease_violations == 0 && rep.gradient_violations == 0;
  return rep;
}

}  // namespace clipadam
