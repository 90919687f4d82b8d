#pragma once

// Empirical convergence-rate classification for objectives with a known
// sharpness exponent theta (f - f* behaves like dist^(1/theta) near the
// minimizer): finite termination for theta > 1/2, linear decay of the gap
// for theta = 1/2, sublinear decay with log-log slope 1/(2 theta - 1) for
// theta < 1/2. Plus the canned one-dimensional |x|^p experiment grid over
// several algorithms.

#include "clipadam/engine.hpp"

#include <optional>
#include <string>
#include <vector>

namespace clipadam {

enum class RateRegime { finite, linear, sublinear, inconclusive };

const char* regime_name(RateRegime regime);

struct RateClassification {
  RateRegime regime = RateRegime::inconclusive;
  std::optional<double> fitted_q;      // per-iteration gap contraction (linear)
  std::optional<double> fitted_slope;  // log-log slope (sublinear)
  std::optional<double> theory_slope;  // 1/(2 theta - 1) when theta < 1/2
  double fit_quality = 0.0;            // R^2 of the decisive fit
  std::int64_t window_begin = 0;       // fit window [begin, end)
  std::int64_t window_end = 0;
  std::string detail;
};

// Classifies a gap sequence gaps[k] = f(x_k) - f_star (clamped at 0).
//  1. finite when theta > 1/2 and the 1-d iterate sequence xs crosses or
//     reaches 0 (momentum overshoot / exact landing);
//  2. inconclusive when the terminal gap exceeds 1e-2 of the initial one;
//  3. otherwise fit over a window ending where the gap last exceeds the
//     sustained floor max(1e-13, 2 * median of the last 5%) and starting
//     window_frac of the way back from there, thinning to the local-maxima
//     envelope when the decay staircases;
//  4. linear when the semi-log fit wins (R^2 >= 0.99, at least as good as
//     the log-log fit, contraction in (0,1)); else finite when the gap sits
//     at <= 1e-14 from some iterate on; else sublinear when the log-log fit
//     has R^2 >= 0.95 with negative slope; else inconclusive.
RateClassification classify_gaps(const std::vector<double>& gaps,
                                 std::optional<double> theta,
                                 const std::vector<double>* xs = nullptr,
                                 double window_frac = 0.5);

// Trace front end: gaps from the recorded f values against f_star; the
// iterate sequence is taken from the snapshots when the problem is
// one-dimensional.
RateClassification classify_rate(const Trace& trace, double f_star,
                                 std::optional<double> theta);

struct Figure1Options {
  std::vector<double> p_values{1.0, 1.3, 1.5, 2.0, 3.0, 4.0, 6.0};
  // Any subset of "clipped_adam", "adam_unclipped", "gd" (gd runs at
  // gamma = 1/L).
  std::vector<std::string> algorithms{"clipped_adam", "adam_unclipped", "gd"};
  std::int64_t max_iter = 40000;
  HyperParams hp;  // defaults match the library-wide defaults
};

struct Figure1Cell {
  double p = 0.0;
  std::string algorithm;
  bool diverged = false;
  Trace trace;  // partial when diverged
  RateClassification classification;
};

// Runs the |x|^p grid from x0 = 1 for every (p, algorithm) pair and
// classifies each cell against theta = 1/p. Divergent cells (possible for
// the unclipped variant) are recorded, not fatal.
std::vector<Figure1Cell> figure1_experiment(const Figure1Options& opt = {});

}  // namespace clipadam
