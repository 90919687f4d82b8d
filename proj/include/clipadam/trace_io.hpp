#pragma once

// Trace and report serialization. CSV traces carry the eight scalar columns
// in shortest round-trip decimal form, so a re-read trace reproduces every
// recorded float bit for bit; reports and run metadata go to JSON.

#include "clipadam/diagnostics.hpp"
#include "clipadam/klrates.hpp"

#include "json.hpp"

#include <string>
#include <vector>

namespace clipadam {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Header: n,f,grad_sq_norm,H,step_min,step_max,p_sq_norm,dx_norm.
void write_trace_csv(const Trace& trace, const std::string& path);

// Reads the columns back. The derived field inner_a_p_sq is not stored;
// it is left at 0 — call reconstruct_inner with the run's b to restore it
// as 2b(H - f) (exact up to one rounding of the identity).
std::vector<TraceRecord> read_trace_csv(const std::string& path);
void reconstruct_inner(std::vector<TraceRecord>& records, double b);

// Column schema k,f,gap used by the rate-experiment cells.
void write_gap_csv(const Trace& trace, double f_star, const std::string& path);

nlohmann::json hp_to_json(const HyperParams& hp);
HyperParams hp_from_json(const nlohmann::json& j);

nlohmann::json bounds_to_json(const SafeBounds& sb);
SafeBounds bounds_from_json(const nlohmann::json& j);

nlohmann::json meta_to_json(const TraceMeta& meta);
TraceMeta meta_from_json(const nlohmann::json& j);

nlohmann::json summary_to_json(const TraceSummary& s);

nlohmann::json report_to_json(const MonotonicityReport& r);
nlohmann::json report_to_json(const DescentReport& r);
nlohmann::json report_to_json(const Theorem1Report& r);
nlohmann::json report_to_json(const StepWeightedSumReport& r);
nlohmann::json report_to_json(const Theorem2Report& r);
nlohmann::json report_to_json(const GdBoundReport& r);
nlohmann::json report_to_json(const AbstractCondReport& r);
nlohmann::json report_to_json(const RateClassification& r);

}  // namespace clipadam
