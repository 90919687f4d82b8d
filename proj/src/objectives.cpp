#include "clipadam/objectives.hpp"

#include <cmath>
#include <map>
#include <sstream>
#include <utility>

namespace clipadam {

namespace {

// Spectral norm of the symmetric 2x2 matrix [[h11, h12], [h12, h22]].
double sym2_spectral_norm(double h11, double h12, double h22) {
  double half_tr = 0.5 * (h11 + h22);
  double rad = std::hypot(0.5 * (h11 - h22), h12);
  return std::abs(half_tr) + rad;
}

double rosen_pair_value(double x, double y) {
  double u = 1.0 - x;
  double s = y - x * x;
  return u * u + 100.0 * s * s;
}

// Uniform draw from the pair sublevel set {(x,y): (1-x)^2 + 100(y-x^2)^2 <= f0}
// via rejection in the sheared (x, y - x^2) box, which is measure-preserving.
std::pair<double, double> sample_rosen_pair(std::mt19937_64& rng, double f0) {
  double rx = std::sqrt(f0);
  double rs = std::sqrt(f0 / 100.0);
  std::uniform_real_distribution<double> ux(1.0 - rx, 1.0 + rx);
  std::uniform_real_distribution<double> us(-rs, rs);
  for (;;) {
    double x = ux(rng);
    double s = us(rng);
    if ((1.0 - x) * (1.0 - x) + 100.0 * s * s <= f0) return {x, x * x + s};
  }
}

double estimate_rosen_L(double f0) {
  // Fixed seed: the estimate is part of the objective's identity and must be
  // reproducible run to run.
  std::mt19937_64 rng(12345);
  double mx = 0.0;
  for (int i = 0; i < 10000; ++i) {
    auto [x, y] = sample_rosen_pair(rng, f0);
    double s = y - x * x;
    double h11 = 2.0 - 400.0 * s + 800.0 * x * x;
    mx = std::max(mx, sym2_spectral_norm(h11, -400.0 * x, 200.0));
  }
  return 1.5 * mx;
}

double parse_number(const std::string& s, const std::string& ctx) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw UsageError("objective id: cannot parse number '" + s + "' for " + ctx);
  }
}

}  // namespace

Objective quadratic(int d, double lam) {
  if (d < 1) throw UsageError("quadratic: dimension must be >= 1");
  if (!(std::isfinite(lam) && lam > 0.0)) {
    throw UsageError("quadratic: lam must be a positive finite real");
  }
  Objective o;
  o.id = "quadratic:d=" + std::to_string(d) + ",lam=" + format_double(lam);
  o.dim = d;
  o.value = [lam](const Vector& x) { return 0.5 * lam * sq_norm(x); };
  o.grad = [lam](const Vector& x) -> Vector { return lam * x; };
  o.lipschitz_L = lam;
  o.infimum = 0.0;
  o.kl_exponent = 0.5;
  o.domain_note = "globally smooth; L = lam holds everywhere";
  o.default_x0 = Vector::Ones(d);
  o.sample_domain = [d](std::mt19937_64& rng) -> Vector {
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    Vector x(d);
    for (int i = 0; i < d; ++i) x[i] = u(rng);
    return x;
  };
  return o;
}

Objective monomial(double p) {
  if (!(std::isfinite(p) && p >= 1.0 && p <= 7.0)) {
    throw UsageError("monomial: p must lie in [1, 7]");
  }
  Objective o;
  o.id = "monomial:p=" + format_double(p);
  o.dim = 1;
  o.value = [p](const Vector& x) { return std::pow(std::abs(x[0]), p); };
  o.grad = [p](const Vector& x) -> Vector {
    Vector g(1);
    double t = x[0];
    if (t == 0.0) {
      g[0] = 0.0;  // stationarity convention at the kink/minimizer
    } else {
      double s = t > 0.0 ? 1.0 : -1.0;
      g[0] = p * s * std::pow(std::abs(t), p - 1.0);
    }
    return g;
  };
  o.infimum = 0.0;
  o.kl_exponent = 1.0 / p;
  if (p >= 2.0) {
    o.lipschitz_L = p * (p - 1.0);  // max curvature over |x| <= max(1, |x0|), x0 = 1
    o.domain_note = "L valid on |x| <= 1, the sublevel set of the default start";
  } else if (p == 1.0) {
    o.lipschitz_L = 1.0;
    o.domain_note =
        "gradient is piecewise constant (sign); L = 1 by convention so the "
        "step-bound formulas stay finite; gradient at 0 defined as 0";
  } else {
    const double r = 1e-6;
    o.lipschitz_L = p * (p - 1.0) * std::pow(r, p - 2.0);
    o.domain_note =
        "gradient not Lipschitz at 0; L uses cutoff radius r = 1e-6 and is "
        "certified on r <= |x| <= 1";
  }
  o.default_x0 = Vector::Ones(1);
  const bool away_from_zero = p < 2.0;
  o.sample_domain = [away_from_zero](std::mt19937_64& rng) -> Vector {
    std::uniform_real_distribution<double> mag(away_from_zero ? 0.25 : -1.0, 1.0);
    Vector x(1);
    x[0] = mag(rng);
    if (away_from_zero && (rng() & 1u)) x[0] = -x[0];
    return x;
  };
  return o;
}

Objective rosenbrock(int d) {
  if (d < 2 || d % 2 != 0) {
    throw UsageError("rosenbrock: dimension must be even and >= 2");
  }
  Objective o;
  o.id = "rosenbrock:d=" + std::to_string(d);
  o.dim = d;
  o.value = [d](const Vector& x) {
    double acc = 0.0;
    for (int i = 0; i + 1 < d; i += 2) acc += rosen_pair_value(x[i], x[i + 1]);
    return acc;
  };
  o.grad = [d](const Vector& x) -> Vector {
    Vector g(d);
    for (int i = 0; i + 1 < d; i += 2) {
      double s = x[i + 1] - x[i] * x[i];
      g[i] = -2.0 * (1.0 - x[i]) - 400.0 * x[i] * s;
      g[i + 1] = 200.0 * s;
    }
    return g;
  };
  o.infimum = 0.0;
  Vector x0(d);
  for (int i = 0; i + 1 < d; i += 2) {
    x0[i] = -1.2;
    x0[i + 1] = 1.0;
  }
  o.default_x0 = x0;
  double f0 = o.value(x0);
  o.lipschitz_L = estimate_rosen_L(f0);
  o.domain_note =
      "L = 1.5x the max pair-Hessian spectral norm over 10^4 samples of the "
      "f(x0) sublevel set (internal seed 12345); certified on that set";
  int npairs = d / 2;
  o.sample_domain = [npairs, f0](std::mt19937_64& rng) -> Vector {
    Vector x(2 * npairs);
    double per_pair = f0 / npairs;  // keeps the total inside the sublevel set
    for (int i = 0; i < npairs; ++i) {
      auto [a, bb] = sample_rosen_pair(rng, per_pair);
      x[2 * i] = a;
      x[2 * i + 1] = bb;
    }
    return x;
  };
  return o;
}

Vector finite_diff_grad(const std::function<double(const Vector&)>& f,
                        const Vector& x, double h) {
  if (!(h > 0.0)) throw UsageError("finite_diff_grad: h must be positive");
  Vector g(x.size());
  Vector xp = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    double xi = x[i];
    xp[i] = xi + h;
    double fp = f(xp);
    xp[i] = xi - h;
    double fm = f(xp);
    xp[i] = xi;
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

Objective parse_objective(const std::string& id) {
  auto colon = id.find(':');
  std::string name = id.substr(0, colon);
  std::map<std::string, std::string> kv;
  if (colon != std::string::npos) {
    std::string rest = id.substr(colon + 1);
    std::istringstream is(rest);
    std::string item;
    while (std::getline(is, item, ',')) {
      auto eq = item.find('=');
      if (eq == std::string::npos || eq == 0) {
        throw UsageError("objective id: expected key=value, got '" + item + "'");
      }
      kv[item.substr(0, eq)] = item.substr(eq + 1);
    }
  }
  auto take = [&kv, &id](const std::string& key) {
    auto it = kv.find(key);
    if (it == kv.end()) {
      throw UsageError("objective id '" + id + "': missing parameter '" + key + "'");
    }
    std::string v = it->second;
    kv.erase(it);
    return v;
  };
  auto finish = [&kv, &id]() {
    if (!kv.empty()) {
      throw UsageError("objective id '" + id + "': unknown parameter '" +
                       kv.begin()->first + "'");
    }
  };
  if (name == "quadratic") {
    double d = parse_number(take("d"), "d");
    double lam = parse_number(take("lam"), "lam");
    finish();
    if (d != std::floor(d)) throw UsageError("quadratic: d must be an integer");
    return quadratic(static_cast<int>(d), lam);
  }
  if (name == "monomial") {
    double p = parse_number(take("p"), "p");
    finish();
    return monomial(p);
  }
  if (name == "rosenbrock") {
    double d = parse_number(take("d"), "d");
    finish();
    if (d != std::floor(d)) throw UsageError("rosenbrock: d must be an integer");
    return rosenbrock(static_cast<int>(d));
  }
  throw UsageError("unknown objective '" + name +
                   "' (expected quadratic | monomial | rosenbrock)");
}

}  // namespace clipadam
