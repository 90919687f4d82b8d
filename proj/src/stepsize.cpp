#include "clipadam/stepsize.hpp"

#include <cmath>

namespace clipadam {

const char* policy_name(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::constant: return "constant";
    case PolicyKind::adagrad: return "adagrad";
    case PolicyKind::rmsprop_adam: return "adam";
  }
  return "?";
}

PolicyKind parse_policy(const std::string& name) {
  if (name == "constant") return PolicyKind::constant;
  if (name == "adagrad") return PolicyKind::adagrad;
  if (name == "adam" || name == "rmsprop_adam") return PolicyKind::rmsprop_adam;
  throw UsageError("unknown step policy '" + name +
                   "' (expected constant | adagrad | adam)");
}

double policy_alpha(PolicyKind kind, const HyperParams& hp) {
  if (kind == PolicyKind::rmsprop_adam) return std::sqrt(1.0 - hp.c);
  return 1.0;
}

double resolved_alpha(PolicyKind kind, const HyperParams& hp) {
  return hp.alpha_override.value_or(policy_alpha(kind, hp));
}

Vector init_accumulator(PolicyKind kind, int dim) {
  if (kind == PolicyKind::constant) return Vector();
  return Vector::Zero(dim);
}

Vector raw_step(PolicyKind kind, const HyperParams& hp, Vector& accum,
                const Vector& g) {
  require_finite(g, "raw_step gradient");
  switch (kind) {
    case PolicyKind::constant:
      return Vector::Constant(g.size(), hp.base_rate);
    case PolicyKind::adagrad: {
      require_same_size(accum, g, "raw_step(adagrad)");
      accum += g.square();
      if ((accum <= 0.0).any()) {
        throw DomainError(
            "adagrad step undefined: a coordinate has zero gradient history");
      }
      return hp.base_rate / accum.sqrt();
    }
    case PolicyKind::rmsprop_adam: {
      require_same_size(accum, g, "raw_step(adam)");
      accum += hp.c * (g.square() - accum);
      Vector den = hp.eps_den + accum.sqrt();
      if ((den <= 0.0).any()) {
        throw DomainError(
            "adam step undefined: eps_den + sqrt(v) vanishes at a coordinate");
      }
      return hp.base_rate / den;
    }
  }
  throw UsageError("raw_step: unhandled policy kind");
}

Vector clip_step(const Vector& raw, const Vector& prev, double cap,
                 double delta, double alpha) {
  require_same_size(raw, prev, "clip_step");
  if (!(std::isfinite(cap) && cap > 0.0)) {
    throw UsageError("clip_step: cap must be positive and finite");
  }
  if (!(std::isfinite(alpha) && alpha > 0.0)) {
    throw UsageError("clip_step: alpha must be positive and finite");
  }
  if (!(delta >= 0.0)) throw UsageError("clip_step: delta must be >= 0");
  if (delta > cap) {
    throw ConfigError("clip_step: empty feasible interval (delta " +
                      format_double(delta) + " exceeds cap " +
                      format_double(cap) + ")");
  }
  return raw.min(prev / alpha).min(cap).max(delta);
}

}  // namespace clipadam
