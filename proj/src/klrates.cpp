#include "clipadam/klrates.hpp"

#include <algorithm>
#include <cmath>

namespace clipadam {

const char* regime_name(RateRegime regime) {
  switch (regime) {
    case RateRegime::finite: return "finite";
    case RateRegime::linear: return "linear";
    case RateRegime::sublinear: return "sublinear";
    case RateRegime::inconclusive: return "inconclusive";
  }
  return "?";
}

namespace {

struct Fit {
  double slope = 0.0;
  double r2 = 0.0;
};

Fit least_squares(const std::vector<double>& xs, const std::vector<double>& ys) {
  const double n = double(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double dx = xs[i] - mx, dy = ys[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  Fit fit;
  if (sxx > 0.0) fit.slope = sxy / sxx;
  double ssr = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double resid = ys[i] - my - fit.slope * (xs[i] - mx);
    ssr += resid * resid;
  }
  fit.r2 = syy > 0.0 ? 1.0 - ssr / syy : 0.0;
  return fit;
}

struct WindowPoints {
  std::vector<double> ks;
  std::vector<double> log_gaps;
  std::int64_t begin = 0, end = 0;
};

// Sustained-floor detection plus local-maxima envelope thinning: the fit
// window ends where the gap last exceeds twice the median of the terminal
// 5% (or 1e-13 if larger) and spans the trailing window_frac of the
// pre-floor range. Adaptive runs descend in staircases whose flat segments
// and drop offsets bias a raw fit; when the window has at least 5 local
// maxima, fitting their envelope removes that bias.
std::optional<WindowPoints> window_points(const std::vector<double>& gaps,
                                          double window_frac) {
  const std::size_t n = gaps.size();
  std::vector<double> tail(gaps.end() - std::max<std::size_t>(1, n / 20),
                           gaps.end());
  std::sort(tail.begin(), tail.end());
  double med = tail.size() % 2 == 1
                   ? tail[tail.size() / 2]
                   : 0.5 * (tail[tail.size() / 2 - 1] + tail[tail.size() / 2]);
  double floor_level = std::max(1e-13, 2.0 * med);

  std::size_t floor_k = n;  // first index of the sustained floor
  for (std::size_t i = n; i-- > 0;) {
    if (gaps[i] > floor_level) {
      floor_k = i + 1;
      break;
    }
  }
  if (floor_k < 6) return std::nullopt;

  const std::size_t w0 = std::size_t(double(floor_k) * (1.0 - window_frac));
  std::vector<double> ys(gaps.begin() + w0, gaps.begin() + floor_k);

  std::vector<std::size_t> keep;
  for (std::size_t i = 1; i + 1 < ys.size(); ++i) {
    if (ys[i] >= ys[i - 1] && ys[i] >= ys[i + 1] && ys[i] > 0.0) keep.push_back(i);
  }
  WindowPoints wp;
  wp.begin = std::int64_t(w0);
  wp.end = std::int64_t(floor_k);
  if (keep.size() >= 5) {
    for (std::size_t i : keep) {
      wp.ks.push_back(double(w0 + i));
      wp.log_gaps.push_back(std::log(ys[i]));
    }
  } else {
    for (std::size_t i = 0; i < ys.size(); ++i) {
      if (ys[i] > 0.0) {
        wp.ks.push_back(double(w0 + i));
        wp.log_gaps.push_back(std::log(ys[i]));
      }
    }
  }
  if (wp.ks.size() < 3) return std::nullopt;
  return wp;
}

// True when the gap reaches <= tol before the final iterate and stays there.
bool finite_by_threshold(const std::vector<double>& gaps, double tol = 1e-14) {
  std::size_t first = gaps.size();
  for (std::size_t i = 0; i < gaps.size(); ++i) {
    if (gaps[i] <= tol) {
      first = i;
      break;
    }
  }
  if (first + 1 >= gaps.size()) return false;
  for (std::size_t i = first; i < gaps.size(); ++i) {
    if (gaps[i] > tol) return false;
  }
  return true;
}

int sign_of(double x) { return (x > 0.0) - (x < 0.0); }

}  // namespace

RateClassification classify_gaps(const std::vector<double>& gaps_in,
                                 std::optional<double> theta,
                                 const std::vector<double>* xs,
                                 double window_frac) {
  if (gaps_in.size() < 2) throw UsageError("classify_gaps: need at least 2 points");
  if (!(window_frac > 0.0 && window_frac < 1.0)) {
    throw UsageError("classify_gaps: window_frac must lie in (0, 1)");
  }
  std::vector<double> gaps(gaps_in.size());
  for (std::size_t i = 0; i < gaps_in.size(); ++i) {
    gaps[i] = std::max(gaps_in[i], 0.0);
  }

  RateClassification out;
  if (theta && *theta > 0.5) {
    if (xs && !xs->empty()) {
      int s0 = sign_of((*xs)[0]);
      for (double x : *xs) {
        if (sign_of(x) * s0 <= 0) {
          out.regime = RateRegime::finite;
          out.detail = "iterate crossed or reached the minimizer";
          return out;
        }
      }
    }
  }
  if (theta && *theta < 0.5) out.theory_slope = 1.0 / (2.0 * *theta - 1.0);

  if (gaps.back() > 1e-2 * gaps.front()) {
    out.regime = RateRegime::inconclusive;
    out.detail = "not converged: terminal gap above 1% of the initial gap";
    return out;
  }

  auto wp = window_points(gaps, window_frac);
  if (wp) {
    out.window_begin = wp->begin;
    out.window_end = wp->end;
    std::vector<double> log_ks(wp->ks.size());
    for (std::size_t i = 0; i < wp->ks.size(); ++i) log_ks[i] = std::log(wp->ks[i]);
    Fit lin = least_squares(wp->ks, wp->log_gaps);
    Fit loglog = least_squares(log_ks, wp->log_gaps);
    double q = std::exp(lin.slope);
    if (lin.r2 >= 0.99 && lin.r2 >= loglog.r2 && q > 0.0 && q < 1.0) {
      out.regime = RateRegime::linear;
      out.fitted_q = q;
      out.fit_quality = lin.r2;
      out.detail = "semi-log fit wins";
      return out;
    }
    if (finite_by_threshold(gaps)) {
      out.regime = RateRegime::finite;
      out.detail = "gap pinned at <= 1e-14 before the horizon";
      return out;
    }
    if (loglog.r2 >= 0.95 && loglog.slope < 0.0) {
      out.regime = RateRegime::sublinear;
      out.fitted_slope = loglog.slope;
      out.fit_quality = loglog.r2;
      out.detail = "log-log fit wins";
      return out;
    }
    out.regime = RateRegime::inconclusive;
    out.fit_quality = std::max(lin.r2, loglog.r2);
    out.detail = "neither fit is decisive (semi-log R^2 " +
                 format_double(lin.r2) + ", log-log R^2 " +
                 format_double(loglog.r2) + ")";
    return out;
  }

  if (finite_by_threshold(gaps)) {
    out.regime = RateRegime::finite;
    out.detail = "gap pinned at <= 1e-14 before the horizon";
    return out;
  }
  out.regime = RateRegime::inconclusive;
  out.detail = "too few pre-floor points to fit";
  return out;
}

RateClassification classify_rate(const Trace& trace, double f_star,
                                 std::optional<double> theta) {
  std::vector<double> gaps;
  gaps.reserve(trace.records.size());
  for (const TraceRecord& r : trace.records) gaps.push_back(r.f_val - f_star);

  std::vector<double> xs;
  const std::vector<double>* xs_ptr = nullptr;
  if (!trace.snaps.empty() && trace.snaps.front().x.size() == 1) {
    xs.reserve(trace.snaps.size());
    for (const VecSnapshot& s : trace.snaps) xs.push_back(s.x[0]);
    xs_ptr = &xs;
  }
  return classify_gaps(gaps, theta, xs_ptr);
}

std::vector<Figure1Cell> figure1_experiment(const Figure1Options& opt) {
  std::vector<Figure1Cell> cells;
  cells.reserve(opt.p_values.size() * opt.algorithms.size());
  for (double p : opt.p_values) {
    Objective obj = monomial(p);
    for (const std::string& algo : opt.algorithms) {
      Figure1Cell cell;
      cell.p = p;
      cell.algorithm = algo;
      try {
        if (algo == "gd") {
          cell.trace = run_gradient_descent(obj, 1.0 / obj.lipschitz_L,
                                            Vector::Ones(1), opt.max_iter);
        } else {
          RunConfig cfg;
          cfg.objective = obj;
          cfg.policy = PolicyKind::rmsprop_adam;
          cfg.hp = opt.hp;
          cfg.clipping =
              algo == "clipped_adam" ? ClipMode::full : ClipMode::off;
          if (algo != "clipped_adam" && algo != "adam_unclipped") {
            throw UsageError("figure1_experiment: unknown algorithm '" + algo +
                             "' (expected clipped_adam | adam_unclipped | gd)");
          }
          cfg.x0 = Vector::Ones(1);
          cfg.max_iter = opt.max_iter;
          cell.trace = run(cfg);
        }
      } catch (const DivergenceError& e) {
        cell.diverged = true;
        cell.trace = e.partial;
      }
      if (cell.trace.records.size() >= 2) {
        cell.classification =
            classify_rate(cell.trace, obj.infimum, obj.kl_exponent);
      } else {
        cell.classification.detail = "run diverged immediately";
      }
      cells.push_back(std::move(cell));
    }
  }
  return cells;
}

}  // namespace clipadam
