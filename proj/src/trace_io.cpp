#include "clipadam/trace_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace clipadam {

namespace {

constexpr const char* kTraceHeader =
    "n,f,grad_sq_norm,H,step_min,step_max,p_sq_norm,dx_norm";

double parse_field(const std::string& field, const std::string& path, int line) {
  double v = 0.0;
  const char* first = field.data();
  const char* last = first + field.size();
  auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last) {
    throw IoError(path + ":" + std::to_string(line) + ": bad number '" + field + "'");
  }
  return v;
}

// null <-> NaN: JSON has no NaN literal.
nlohmann::json num_or_null(double v) {
  if (std::isnan(v)) return nullptr;
  return v;
}

double num_from(const nlohmann::json& j) {
  if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
  return j.get<double>();
}

}  // namespace

void write_trace_csv(const Trace& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << kTraceHeader << '\n';
  for (const TraceRecord& r : trace.records) {
    out << r.n << ',' << format_double(r.f_val) << ','
        << format_double(r.grad_sq_norm) << ',' << format_double(r.lyapunov_H)
        << ',' << format_double(r.step_min) << ',' << format_double(r.step_max)
        << ',' << format_double(r.p_sq_norm) << ',' << format_double(r.dx_norm)
        << '\n';
  }
  if (!out) throw IoError("write to '" + path + "' failed");
}

std::vector<TraceRecord> read_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::string line;
  if (!std::getline(in, line) || line != kTraceHeader) {
    throw IoError(path + ": missing or unexpected header line");
  }
  std::vector<TraceRecord> records;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string field;
    std::vector<std::string> parts;
    while (std::getline(fields, field, ',')) parts.push_back(field);
    if (parts.size() != 8) {
      throw IoError(path + ":" + std::to_string(lineno) + ": expected 8 fields, got " +
                    std::to_string(parts.size()));
    }
    TraceRecord r;
    r.n = std::int64_t(parse_field(parts[0], path, lineno));
    r.f_val = parse_field(parts[1], path, lineno);
    r.grad_sq_norm = parse_field(parts[2], path, lineno);
    r.lyapunov_H = parse_field(parts[3], path, lineno);
    r.step_min = parse_field(parts[4], path, lineno);
    r.step_max = parse_field(parts[5], path, lineno);
    r.p_sq_norm = parse_field(parts[6], path, lineno);
    r.dx_norm = parse_field(parts[7], path, lineno);
    records.push_back(r);
  }
  return records;
}

void reconstruct_inner(std::vector<TraceRecord>& records, double b) {
  if (!(b > 0.0)) throw UsageError("reconstruct_inner: b must be > 0");
  for (TraceRecord& r : records) {
    r.inner_a_p_sq = 2.0 * b * (r.lyapunov_H - r.f_val);
  }
}

void write_gap_csv(const Trace& trace, double f_star, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << "k,f,gap\n";
  for (const TraceRecord& r : trace.records) {
    out << r.n << ',' << format_double(r.f_val) << ','
        << format_double(r.f_val - f_star) << '\n';
  }
  if (!out) throw IoError("write to '" + path + "' failed");
}

nlohmann::json hp_to_json(const HyperParams& hp) {
  nlohmann::json j;
  j["base_rate"] = hp.base_rate;
  j["b"] = hp.b;
  j["c"] = hp.c;
  j["eps_den"] = hp.eps_den;
  j["eps"] = hp.eps;
  j["clip_floor"] = hp.clip_floor ? nlohmann::json(*hp.clip_floor) : nullptr;
  j["alpha_override"] =
      hp.alpha_override ? nlohmann::json(*hp.alpha_override) : nullptr;
  return j;
}

HyperParams hp_from_json(const nlohmann::json& j) {
  HyperParams hp;
  hp.base_rate = j.at("base_rate").get<double>();
  hp.b = j.at("b").get<double>();
  hp.c = j.at("c").get<double>();
  hp.eps_den = j.at("eps_den").get<double>();
  hp.eps = j.at("eps").get<double>();
  if (j.contains("clip_floor") && !j.at("clip_floor").is_null()) {
    hp.clip_floor = j.at("clip_floor").get<double>();
  }
  if (j.contains("alpha_override") && !j.at("alpha_override").is_null()) {
    hp.alpha_override = j.at("alpha_override").get<double>();
  }
  return hp;
}

nlohmann::json bounds_to_json(const SafeBounds& sb) {
  return {{"alpha", num_or_null(sb.alpha)},
          {"a_sup", num_or_null(sb.a_sup)},
          {"bar_a_sup", num_or_null(sb.bar_a_sup)},
          {"valid", sb.valid},
          {"diagnostics", sb.diagnostics}};
}

SafeBounds bounds_from_json(const nlohmann::json& j) {
  SafeBounds sb;
  sb.alpha = num_from(j.at("alpha"));
  sb.a_sup = num_from(j.at("a_sup"));
  sb.bar_a_sup = num_from(j.at("bar_a_sup"));
  sb.valid = j.at("valid").get<bool>();
  sb.diagnostics = j.at("diagnostics").get<std::string>();
  return sb;
}

nlohmann::json meta_to_json(const TraceMeta& meta) {
  nlohmann::json j;
  j["objective"] = meta.objective_id;
  j["lipschitz_L"] = meta.lipschitz_L;
  j["infimum"] = meta.infimum;
  j["policy"] = policy_name(meta.policy);
  j["hp"] = hp_to_json(meta.hp);
  j["clipping"] = clip_mode_name(meta.clipping);
  j["sigma"] = meta.sigma;
  j["seed"] = meta.seed;
  j["alpha"] = num_or_null(meta.alpha);
  j["cap"] = num_or_null(meta.cap);
  j["delta"] = meta.delta;
  return j;
}

TraceMeta meta_from_json(const nlohmann::json& j) {
  TraceMeta meta;
  meta.objective_id = j.at("objective").get<std::string>();
  meta.lipschitz_L = j.at("lipschitz_L").get<double>();
  meta.infimum = j.at("infimum").get<double>();
  meta.policy = parse_policy(j.at("policy").get<std::string>());
  meta.hp = hp_from_json(j.at("hp"));
  meta.clipping = parse_clip_mode(j.at("clipping").get<std::string>());
  meta.sigma = j.at("sigma").get<double>();
  meta.seed = j.at("seed").get<std::uint64_t>();
  meta.alpha = num_from(j.at("alpha"));
  meta.cap = num_from(j.at("cap"));
  meta.delta = j.at("delta").get<double>();
  return meta;
}

nlohmann::json summary_to_json(const TraceSummary& s) {
  nlohmann::json j;
  j["steps"] = s.steps;
  j["terminal_f"] = s.terminal_f;
  j["terminal_grad_sq"] = s.terminal_grad_sq;
  j["min_grad_sq"] = s.min_grad_sq;
  j["wall_time_sec"] = s.wall_time_sec;
  j["stop_reason"] = s.stop_reason;
  j["floor_override_events"] = s.floor_override_events;
  if (s.tau) j["tau"] = *s.tau;
  if (s.grad_sq_at_tau) j["grad_sq_at_tau"] = *s.grad_sq_at_tau;
  return j;
}

nlohmann::json report_to_json(const MonotonicityReport& r) {
  return {{"check", "h_monotone"},
          {"passed", r.nonincreasing},
          {"violations", r.violations},
          {"worst_rise", r.worst_rise},
          {"steps_checked", r.steps_checked}};
}

nlohmann::json report_to_json(const DescentReport& r) {
  return {{"check", "descent"},
          {"passed", !r.violated},
          {"u", num_or_null(r.u)},
          {"B", r.B},
          {"eps", r.eps},
          {"steps_checked", r.steps_checked},
          {"lemma_violations", r.lemma_violations},
          {"bound_violations", r.bound_violations},
          {"worst_lemma_margin", r.worst_lemma_margin},
          {"worst_bound_margin", r.worst_bound_margin}};
}

nlohmann::json report_to_json(const Theorem1Report& r) {
  return {{"check", "min_grad_rate"},
          {"passed", r.holds_all && r.sum_ok},
          {"violations", r.violations},
          {"worst_ratio", r.worst_ratio},
          {"sum_p_sq", r.sum_p_sq},
          {"sum_p_sq_bound", r.sum_p_sq_bound},
          {"sum_ok", r.sum_ok},
          {"points_checked", std::int64_t(r.points.size())}};
}

nlohmann::json report_to_json(const StepWeightedSumReport& r) {
  return {{"check", "step_weighted_grad_sum"},
          {"passed", r.holds_all},
          {"violations", r.violations},
          {"total_lhs", r.total_lhs},
          {"bound", r.bound},
          {"worst_ratio", r.worst_ratio},
          {"points_checked", std::int64_t(r.points.size())}};
}

nlohmann::json report_to_json(const Theorem2Report& r) {
  return {{"check", "stochastic_rate"},
          {"passed", r.holds},
          {"trials", r.trials},
          {"horizon", r.horizon},
          {"mean_grad_sq_at_tau", r.mean_grad_sq_at_tau},
          {"std_error", r.std_error},
          {"bound_deterministic_part", r.bound_deterministic_part},
          {"bound_noise_part", r.bound_noise_part},
          {"bound", r.bound}};
}

nlohmann::json report_to_json(const GdBoundReport& r) {
  return {{"check", "gd_rate"},
          {"passed", r.holds_all},
          {"violations", r.violations},
          {"worst_ratio", r.worst_ratio},
          {"points_checked", std::int64_t(r.points.size())}};
}

nlohmann::json report_to_json(const AbstractCondReport& r) {
  return {{"check", "abstract_conditions"},
          {"passed", r.holds},
          {"rho1", r.rho1},
          {"rho2", r.rho2},
          {"steps_checked", r.steps_checked},
          {"decrease_violations", r.decrease_violations},
          {"gradient_violations", r.gradient_violations},
          {"worst_decrease_margin", r.worst_decrease_margin},
          {"worst_gradient_margin", r.worst_gradient_margin}};
}

nlohmann::json report_to_json(const RateClassification& r) {
  nlohmann::json j;
  j["regime"] = regime_name(r.regime);
  j["fitted_q"] = r.fitted_q ? nlohmann::json(*r.fitted_q) : nullptr;
  j["fitted_slope"] = r.fitted_slope ? nlohmann::json(*r.fitted_slope) : nullptr;
  j["theory_slope"] = r.theory_slope ? nlohmann::json(*r.theory_slope) : nullptr;
  j["fit_quality"] = r.fit_quality;
  j["window_begin"] = r.window_begin;
  j["window_end"] = r.window_end;
  j["detail"] = r.detail;
  return j;
}

}  // namespace clipadam
