#pragma once

// Experiment orchestration: JSON config ingestion with exhaustive
// validation, a bounded worker pool dispatching runs, per-run CSV/JSON
// artifacts, one summary JSON, and offline re-verification of stored
// artifacts.

#include "clipadam/trace_io.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace clipadam {

struct RunSpec {
  std::string name;  // artifact file stem, unique per experiment
  std::string objective_id;
  PolicyKind policy = PolicyKind::rmsprop_adam;
  HyperParams hp;
  ClipMode clipping = ClipMode::full;
  double sigma = 0.0;
  std::int64_t trials = 1;  // > 1 (noisy runs only) aggregates the rate check
  std::optional<Vector> x0;
  std::int64_t max_iter = 10000;
  double stop_tol = 0.0;
  bool verify = false;  // attach every applicable check
};

struct ExperimentSpec {
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  int jobs = 0;  // worker threads; 0 = hardware concurrency
  std::vector<RunSpec> runs;
};

// Parses and validates the JSON config, reporting every problem at once
// (ConfigError). Grammar: top-level object with optional "out_dir", "seed",
// "jobs" and a required non-empty "runs" array; each run has a required
// unique "name" and "objective", plus optional "policy", "clipping", "hp"
// (object), "sigma", "trials", "x0" (array), "max_iter", "stop_tol",
// "verify". Unknown keys are errors.
ExperimentSpec parse_spec(const std::string& text);
ExperimentSpec parse_spec_file(const std::string& path);

struct RunOutcome {
  std::string name;
  // "ok" | "diverged" | "check_failed" | "error" | "io_error"
  std::string status;
  bool checks_passed = true;
  std::string detail;
  std::string trace_path;
  std::string report_path;
};

struct ExperimentResult {
  std::vector<RunOutcome> outcomes;
  bool any_check_failed = false;
  bool any_error = false;
  bool any_io_error = false;
  std::string summary_path;
};

// Seed handed to trial t of run i: spec.seed + 1000003 * i + t.
std::uint64_t seed_for(const ExperimentSpec& spec, std::size_t run_index,
                       std::int64_t trial);

ExperimentResult execute(const ExperimentSpec& spec);

// Writes the per-cell k,f,gap CSVs and a classification summary JSON for a
// rate-experiment grid; returns the summary path.
std::string write_figure1_outputs(const std::vector<Figure1Cell>& cells,
                                  const std::string& out_dir);

// Offline re-check of stored artifacts: reads the trace CSV and the run
// report JSON (metadata + bounds), re-derives the scalar-only checks
// (H-identity, monotonicity, min-gradient rate, abstract conditions, GD
// bound where applicable), logs one line per check, and returns true when
// everything passes.
bool verify_artifacts(const std::string& csv_path,
                      const std::string& report_json_path, std::string& log);

}  // namespace clipadam
