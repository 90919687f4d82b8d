#pragma once

// Closed-form safe step-size caps and hyperparameter validation. A step
// sequence confined to (0, a_sup] with the growth and floor constraints of
// clip_step keeps the Lyapunov sequence nonincreasing; bar_a_sup is the
// tighter cap used when gradients are noisy.

#include "clipadam/core.hpp"

#include <limits>
#include <string>

namespace clipadam {

struct SafeBounds {
  double alpha = 1.0;
  double a_sup = std::numeric_limits<double>::quiet_NaN();
  double bar_a_sup = std::numeric_limits<double>::quiet_NaN();
  bool valid = false;
  std::string diagnostics;  // every failed hypothesis, or "ok"
};

// (2/L) * (1 - (b-(1-alpha))^2/(2 b alpha) - (1-alpha)/(2b) - eps).
// Requires L > 0, 0 < b <= 1, 0 < alpha <= 1, 1 - alpha < b, eps >= 0;
// throws UsageError otherwise. A negative return value is legal — the
// caller decides whether that makes the configuration unusable.
double compute_a_sup(double L, double b, double alpha, double eps);

// Same with the leading 1 replaced by 3/4; equals a_sup - 1/(2L) exactly.
double compute_bar_a_sup(double L, double b, double alpha, double eps);

enum class BoundMode { deterministic, stochastic };

// Fills a SafeBounds for the given hyperparameters against gradient
// Lipschitz constant L and step-decay factor alpha. Never throws: every
// violated hypothesis (parameter ranges, 1 - alpha < b <= 1, negative cap,
// clip floor above the active cap) is listed in diagnostics instead.
SafeBounds validate(const HyperParams& hp, double L, double policy_alpha,
                    BoundMode mode);

// Resolved clip floor when HyperParams.clip_floor is unset.
double default_clip_floor(double cap);

}  // namespace clipadam
