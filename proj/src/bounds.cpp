#include "clipadam/bounds.hpp"

#include <cmath>
#include <vector>

namespace clipadam {

namespace {

// Shared hypothesis check for the two cap formulas.
void require_cap_inputs(double L, double b, double alpha, double eps,
                        const char* who) {
  std::string w(who);
  if (!(std::isfinite(L) && L > 0.0)) throw UsageError(w + ": L must be > 0");
  if (!(b > 0.0 && b <= 1.0)) throw UsageError(w + ": need 0 < b <= 1");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw UsageError(w + ": need 0 < alpha <= 1");
  if (!(1.0 - alpha < b)) throw UsageError(w + ": need 1 - alpha < b");
  if (!(std::isfinite(eps) && eps >= 0.0)) throw UsageError(w + ": eps must be >= 0");
}

double cap_formula(double lead, double L, double b, double alpha, double eps) {
  double m = b - (1.0 - alpha);
  return (2.0 / L) * (lead - m * m / (2.0 * b * alpha) - (1.0 - alpha) / (2.0 * b) - eps);
}

}  // namespace

double compute_a_sup(double L, double b, double alpha, double eps) {
  require_cap_inputs(L, b, alpha, eps, "compute_a_sup");
  return cap_formula(1.0, L, b, alpha, eps);
}

double compute_bar_a_sup(double L, double b, double alpha, double eps) {
  require_cap_inputs(L, b, alpha, eps, "compute_bar_a_sup");
  return cap_formula(0.75, L, b, alpha, eps);
}

SafeBounds validate(const HyperParams& hp, double L, double policy_alpha,
                    BoundMode mode) {
  SafeBounds sb;
  sb.alpha = policy_alpha;
  std::vector<std::string> problems;

  try {
    hp.validate_or_throw();
  } catch (const UsageError& e) {
    problems.emplace_back(e.what());
  }
  if (!(std::isfinite(L) && L > 0.0)) {
    problems.push_back("L must be positive and finite, got " + format_double(L));
  }
  if (!(std::isfinite(policy_alpha) && policy_alpha > 0.0 && policy_alpha <= 1.0)) {
    problems.push_back("alpha must lie in (0, 1], got " + format_double(policy_alpha));
  }

  bool hypothesis_ok = problems.empty();
  if (hypothesis_ok && !(1.0 - policy_alpha < hp.b)) {
    problems.push_back("step-growth hypothesis fails: need 1 - alpha < b, but 1 - alpha = " +
                       format_double(1.0 - policy_alpha) + " >= b = " + format_double(hp.b));
    hypothesis_ok = false;
  }

  if (hypothesis_ok) {
    sb.a_sup = compute_a_sup(L, hp.b, policy_alpha, hp.eps);
    sb.bar_a_sup = compute_bar_a_sup(L, hp.b, policy_alpha, hp.eps);
    double cap = mode == BoundMode::deterministic ? sb.a_sup : sb.bar_a_sup;
    const char* cap_name = mode == BoundMode::deterministic ? "a_sup" : "bar_a_sup";
    if (!(cap > 0.0)) {
      problems.push_back(std::string(cap_name) + " = " + format_double(cap) +
                         " is not positive: the margin eps leaves no admissible step");
    } else if (hp.clip_floor && *hp.clip_floor > cap) {
      problems.push_back("clip floor " + format_double(*hp.clip_floor) +
                         " exceeds the step cap " + std::string(cap_name) + " = " +
                         format_double(cap) + " (empty clip interval)");
    }
  }

  if (problems.empty()) {
    sb.valid = true;
    sb.diagnostics = "ok";
  } else {
    sb.valid = false;
    for (std::size_t i = 0; i < problems.size(); ++i) {
      if (i) sb.diagnostics += "; ";
      sb.diagnostics += problems[i];
    }
  }
  return sb;
}

double default_clip_floor(double cap) { return 1e-3 * cap; }

}  // namespace clipadam
