#pragma once

// Core value types shared by the whole library: dense double-precision
// vectors with coordinatewise semantics (Eigen arrays), the optimizer
// hyper-parameter bundle, per-iterate state and the scalar trace record.

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace clipadam {

// All vectors are dense, double precision, coordinatewise by default.
using Vector = Eigen::ArrayXd;

// Error taxonomy. UsageError: a caller broke a call contract (sizes, ranges).
// DomainError: mathematically undefined operation (division by zero
// coordinate, sqrt of negative). ConfigError: an invalid run configuration.
struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

bool all_finite(const Vector& v);

// Throws DomainError naming `what` if any component is NaN/Inf.
void require_finite(const Vector& v, const char* what);

// Throws UsageError if the two operands disagree in length.
void require_same_size(const Vector& u, const Vector& w, const char* where);

// Coordinatewise operations with explicit contracts. Everyday expression
// work should use Eigen arithmetic directly; these exist where the error
// semantics matter (quotient by a zero coordinate, sqrt of a negative
// coordinate) or where a length check is part of the contract.
Vector cw_product(const Vector& u, const Vector& w);
Vector cw_quotient(const Vector& u, const Vector& w);
Vector cw_sqrt(const Vector& u);

double inner(const Vector& u, const Vector& w);
double sq_norm(const Vector& u);

// Shortest decimal representation that parses back to the same double
// (std::to_chars round-trip form). Used everywhere a float is serialized.
std::string format_double(double x);

// Hyper-parameters of the clipped adaptive-momentum iteration.
//   base_rate  a        > 0
//   b          momentum mixing in (0, 1]   (b = 1 disables momentum)
//   c          second-moment mixing in [0, 1)
//   eps_den    denominator offset of the adaptive step, > 0 allowed to be
//              tiny; zero is accepted as long as the accumulator never
//              vanishes (a DomainError is raised otherwise)
//   eps        safety margin of the safe-step-size bound, > 0
//   clip_floor optional δ; when unset it resolves to 1e-3 times the active
//              step cap at run preparation
//   alpha_override  optional replacement for the policy's step-decay factor
struct HyperParams {
  double base_rate = 0.1;
  double b = 0.1;
  double c = 0.001;
  double eps_den = 1e-8;
  double eps = 0.1;
  std::optional<double> clip_floor;
  std::optional<double> alpha_override;

  // Throws UsageError listing every violated range, not just the first.
  void validate_or_throw() const;
};

// State advanced by one iteration of the algorithm. a_eff is the effective
// (post-clipping) step vector that produced x from its predecessor; for the
// initial state it holds the step cap by convention.
struct IterateState {
  Vector x;
  Vector p;      // momentum (gradient EMA)
  Vector v;      // second-moment accumulator (empty for non-adaptive policies)
  Vector a_eff;  // effective step vector
};

// One scalar row of a run trace; n is the iterate index (0 = initial point).
// lyapunov_H must equal f_val + inner_a_p_sq / (2b) to 1e-14 relative — the
// engine records both sides so every consumer can audit the identity.
struct TraceRecord {
  std::int64_t n = 0;
  double f_val = 0.0;
  double grad_sq_norm = 0.0;
  double lyapunov_H = 0.0;
  double step_min = 0.0;
  double step_max = 0.0;
  double p_sq_norm = 0.0;
  double dx_norm = 0.0;
  double inner_a_p_sq = 0.0;
};

}  // namespace clipadam
