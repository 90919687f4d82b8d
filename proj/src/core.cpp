#include "clipadam/core.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

namespace clipadam {

bool all_finite(const Vector& v) { return v.isFinite().all(); }

void require_finite(const Vector& v, const char* what) {
  if (!all_finite(v)) {
    throw DomainError(std::string(what) + " contains a non-finite component");
  }
}

void require_same_size(const Vector& u, const Vector& w, const char* where) {
  if (u.size() != w.size()) {
    std::ostringstream os;
    os << where << ": length mismatch (" << u.size() << " vs " << w.size() << ")";
    throw UsageError(os.str());
  }
}

Vector cw_product(const Vector& u, const Vector& w) {
  require_same_size(u, w, "cw_product");
  return u * w;
}

Vector cw_quotient(const Vector& u, const Vector& w) {
  require_same_size(u, w, "cw_quotient");
  if ((w == 0.0).any()) {
    throw DomainError("cw_quotient: denominator has a zero coordinate");
  }
  return u / w;
}

Vector cw_sqrt(const Vector& u) {
  if ((u < 0.0).any()) {
    throw DomainError("cw_sqrt: negative coordinate");
  }
  return u.sqrt();
}

double inner(const Vector& u, const Vector& w) {
  require_same_size(u, w, "inner");
  return (u * w).sum();
}

double sq_norm(const Vector& u) { return (u * u).sum(); }

std::string format_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

void HyperParams::validate_or_throw() const {
  std::ostringstream os;
  auto bad = [&os](const std::string& msg) {
    if (os.tellp() > 0) os << "; ";
    os << msg;
  };
  if (!(std::isfinite(base_rate) && base_rate > 0.0)) {
    bad("base_rate must be a positive finite real");
  }
  if (!(std::isfinite(b) && b > 0.0 && b <= 1.0)) {
    bad("b must lie in (0, 1]");
  }
  if (!(std::isfinite(c) && c >= 0.0 && c < 1.0)) {
    bad("c must lie in [0, 1)");
  }
  if (!(std::isfinite(eps_den) && eps_den >= 0.0)) {
    bad("eps_den must be a nonnegative finite real");
  }
  if (!(std::isfinite(eps) && eps > 0.0)) {
    bad("eps must be a positive finite real");
  }
  if (clip_floor && !(std::isfinite(*clip_floor) && *clip_floor > 0.0)) {
    bad("clip_floor must be a positive finite real when set");
  }
  if (alpha_override && !(std::isfinite(*alpha_override) && *alpha_override > 0.0)) {
    bad("alpha_override must be a positive finite real when set");
  }
  if (os.tellp() > 0) throw UsageError("invalid hyper-parameters: " + os.str());
}

}  // namespace clipadam
