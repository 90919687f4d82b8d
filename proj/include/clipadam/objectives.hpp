#pragma once

// Built-in test objectives. Each objective carries, besides the value/grad
// callables, the metadata the safe-step-size machinery and the rate
// classifiers need: a gradient-Lipschitz constant valid on the sublevel set
// of the default start, the infimum, and (when known) the KL exponent of
// f - inf f at the minimizer.

#include "clipadam/core.hpp"

#include <functional>
#include <random>

namespace clipadam {

struct Objective {
  std::string id;
  int dim = 0;
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> grad;
  double lipschitz_L = 0.0;
  double infimum = 0.0;
  std::optional<double> kl_exponent;  // theta in (0, 1]
  std::string domain_note;
  Vector default_x0;
  // Draws a point from the domain on which the gradient and its Lipschitz
  // bound are certified (used by derivative and Lipschitz property checks).
  std::function<Vector(std::mt19937_64&)> sample_domain;
};

// f(x) = (lam/2)‖x‖²; L = lam, inf = 0, theta = 1/2.
Objective quadratic(int d, double lam);

// One-dimensional f(x) = |x|^p for p in [1, 7]; theta = 1/p. The gradient at
// exactly 0 is defined as 0. For p >= 2, L = p(p-1)·max(1,|x0|)^{p-2} with the
// default start x0 = 1. For p in (1, 2) the gradient is not Lipschitz at 0;
// L = p(p-1)·r^{p-2} with cutoff radius r = 1e-6. For p = 1 the gradient is
// piecewise constant and L = 1 by convention.
Objective monomial(double p);

// Pairwise-separable Rosenbrock, d even and >= 2:
//   f(x) = sum_i (1 - x_{2i})² + 100 (x_{2i+1} - x_{2i}²)².
// L is estimated as 1.5x the maximum pair-Hessian spectral norm over 10^4
// samples of the f(default_x0) sublevel set (fixed internal seed, so the
// estimate is deterministic). Default start repeats (-1.2, 1).
Objective rosenbrock(int d);

// Central finite differences, one coordinate at a time.
Vector finite_diff_grad(const std::function<double(const Vector&)>& f,
                        const Vector& x, double h = 1e-6);

// Parses "quadratic:d=2,lam=1" | "monomial:p=4" | "rosenbrock:d=2".
// Throws UsageError on malformed input.
Objective parse_objective(const std::string& id);

}  // namespace clipadam
