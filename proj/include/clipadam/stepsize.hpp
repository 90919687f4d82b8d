#pragma once

// Effective-step-size policies and the clipping rule that keeps the step
// vector inside [delta, min(cap, prev/alpha)] coordinatewise.

#include "clipadam/core.hpp"

namespace clipadam {

enum class PolicyKind { constant, adagrad, rmsprop_adam };

const char* policy_name(PolicyKind kind);

// Accepts "constant" | "adagrad" | "adam" | "rmsprop_adam".
PolicyKind parse_policy(const std::string& name);

// Step-decay factor certified by the policy: consecutive raw steps satisfy
// a(n+1) <= a(n)/alpha coordinatewise. sqrt(1-c) for rmsprop_adam; 1 for
// constant and adagrad (their steps never grow).
double policy_alpha(PolicyKind kind, const HyperParams& hp);

// policy_alpha unless hp.alpha_override is set.
double resolved_alpha(PolicyKind kind, const HyperParams& hp);

// Fresh accumulator state: zeros(dim) for the adaptive policies, empty for
// constant.
Vector init_accumulator(PolicyKind kind, int dim);

// Advances the accumulator in place with the new gradient, then returns the
// unclipped step vector:
//   constant      a * ones
//   adagrad       a / sqrt(sum of g^2)     (accum += g^2)
//   rmsprop_adam  a / (eps_den + sqrt(v)),  v += c (g^2 - v)
// No bias correction. Throws DomainError when a denominator coordinate is
// zero (adagrad with no history, or rmsprop_adam with eps_den = 0 and a
// vanished accumulator).
Vector raw_step(PolicyKind kind, const HyperParams& hp, Vector& accum,
                const Vector& g);

// Coordinatewise clamp max(delta, min(raw, cap, prev/alpha)); the upper
// clamps are applied first, then the floor. delta = 0 disables the floor.
// Throws ConfigError when delta > cap (empty feasible interval) and
// UsageError on non-positive cap/alpha or negative delta.
Vector clip_step(const Vector& raw, const Vector& prev, double cap,
                 double delta, double alpha);

}  // namespace clipadam
