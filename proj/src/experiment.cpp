#include "clipadam/experiment.hpp"

#include <atomic>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <set>
#include <thread>

namespace clipadam {

namespace {

namespace fs = std::filesystem;

bool safe_name(const std::string& s) {
  if (s.empty()) return false;
  for (char ch : s) {
    if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' ||
          ch == '-' || ch == '.')) {
      return false;
    }
  }
  return true;
}

// Pulls a scalar of type T from j[key] if present, else keeps the default;
// records a problem on type mismatch.
template <typename T>
void take(const nlohmann::json& j, const std::string& key, T& out,
          const std::string& path, std::vector<std::string>& problems) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    problems.push_back(path + "." + key + ": wrong type");
  }
}

void check_unknown_keys(const nlohmann::json& j,
                        const std::set<std::string>& known,
                        const std::string& path,
                        std::vector<std::string>& problems) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!known.count(it.key())) {
      problems.push_back(path + ": unknown key '" + it.key() + "'");
    }
  }
}

RunSpec parse_run(const nlohmann::json& j, const std::string& path,
                  std::vector<std::string>& problems) {
  RunSpec run;
  if (!j.is_object()) {
    problems.push_back(path + ": must be an object");
    return run;
  }
  check_unknown_keys(j,
                     {"name", "objective", "policy", "clipping", "hp", "sigma",
                      "trials", "x0", "max_iter", "stop_tol", "verify"},
                     path, problems);

  take(j, "name", run.name, path, problems);
  if (!safe_name(run.name)) {
    problems.push_back(path + ".name: required, letters/digits/'_','-','.' only");
  }
  take(j, "objective", run.objective_id, path, problems);

  int dim = -1;
  if (run.objective_id.empty()) {
    problems.push_back(path + ".objective: required (e.g. \"quadratic:d=2,lam=1\")");
  } else {
    try {
      dim = parse_objective(run.objective_id).dim;
    } catch (const UsageError& e) {
      problems.push_back(path + ".objective: " + e.what());
    }
  }

  if (j.contains("policy")) {
    try {
      run.policy = parse_policy(j.at("policy").get<std::string>());
    } catch (const std::exception& e) {
      problems.push_back(path + ".policy: " + e.what());
    }
  }
  if (j.contains("clipping")) {
    try {
      run.clipping = parse_clip_mode(j.at("clipping").get<std::string>());
    } catch (const std::exception& e) {
      problems.push_back(path + ".clipping: " + e.what());
    }
  }
  if (j.contains("hp")) {
    if (!j.at("hp").is_object()) {
      problems.push_back(path + ".hp: must be an object");
    } else {
      const nlohmann::json& h = j.at("hp");
      check_unknown_keys(h,
                         {"base_rate", "b", "c", "eps_den", "eps", "clip_floor",
                          "alpha_override"},
                         path + ".hp", problems);
      take(h, "base_rate", run.hp.base_rate, path + ".hp", problems);
      take(h, "b", run.hp.b, path + ".hp", problems);
      take(h, "c", run.hp.c, path + ".hp", problems);
      take(h, "eps_den", run.hp.eps_den, path + ".hp", problems);
      take(h, "eps", run.hp.eps, path + ".hp", problems);
      if (h.contains("clip_floor") && !h.at("clip_floor").is_null()) {
        double v = 0;
        take(h, "clip_floor", v, path + ".hp", problems);
        run.hp.clip_floor = v;
      }
      if (h.contains("alpha_override") && !h.at("alpha_override").is_null()) {
        double v = 0;
        take(h, "alpha_override", v, path + ".hp", problems);
        run.hp.alpha_override = v;
      }
    }
  }
  take(j, "sigma", run.sigma, path, problems);
  take(j, "trials", run.trials, path, problems);
  take(j, "max_iter", run.max_iter, path, problems);
  take(j, "stop_tol", run.stop_tol, path, problems);
  take(j, "verify", run.verify, path, problems);
  if (j.contains("x0")) {
    if (!j.at("x0").is_array()) {
      problems.push_back(path + ".x0: must be an array of numbers");
    } else {
      Vector x0(j.at("x0").size());
      bool ok = true;
      for (std::size_t i = 0; i < j.at("x0").size(); ++i) {
        if (!j.at("x0")[i].is_number()) {
          problems.push_back(path + ".x0[" + std::to_string(i) + "]: not a number");
          ok = false;
          break;
        }
        x0[Eigen::Index(i)] = j.at("x0")[i].get<double>();
      }
      if (ok) run.x0 = std::move(x0);
    }
  }

  // Semantic cross-checks, mirroring what the engine would reject at run
  // time so a bad config never reaches the pool.
  try {
    run.hp.validate_or_throw();
  } catch (const UsageError& e) {
    problems.push_back(path + ".hp: " + e.what());
  }
  if (run.max_iter < 1) problems.push_back(path + ".max_iter: must be >= 1");
  if (!(run.sigma >= 0.0)) problems.push_back(path + ".sigma: must be >= 0");
  if (run.trials < 1) problems.push_back(path + ".trials: must be >= 1");
  if (run.trials > 1 && run.sigma == 0.0) {
    problems.push_back(path +
                       ".trials: repeated trials need sigma > 0 "
                       "(deterministic runs are identical)");
  }
  if (!(run.stop_tol >= 0.0)) problems.push_back(path + ".stop_tol: must be >= 0");
  if (run.stop_tol > 0.0 && run.sigma > 0.0) {
    problems.push_back(path + ".stop_tol: not usable with sigma > 0");
  }
  if (run.x0 && dim >= 0 && run.x0->size() != dim) {
    problems.push_back(path + ".x0: length " + std::to_string(run.x0->size()) +
                       " does not match objective dimension " + std::to_string(dim));
  }
  if (dim >= 0 && run.clipping != ClipMode::off) {
    Objective obj = parse_objective(run.objective_id);
    double alpha = resolved_alpha(run.policy, run.hp);
    SafeBounds sb = validate(run.hp, obj.lipschitz_L, alpha,
                             run.sigma > 0.0 ? BoundMode::stochastic
                                             : BoundMode::deterministic);
    if (!sb.valid) {
      problems.push_back(path + ": clipped run has invalid safe bounds: " +
                         sb.diagnostics);
    }
  }
  return run;
}

}  // namespace

ExperimentSpec parse_spec(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  std::vector<std::string> problems;
  ExperimentSpec spec;
  if (!j.is_object()) {
    throw ConfigError("config must be a JSON object");
  }
  check_unknown_keys(j, {"out_dir", "seed", "jobs", "runs"}, "config", problems);
  take(j, "out_dir", spec.out_dir, "config", problems);
  take(j, "seed", spec.seed, "config", problems);
  take(j, "jobs", spec.jobs, "config", problems);
  if (spec.jobs < 0) problems.push_back("config.jobs: must be >= 0");

  if (!j.contains("runs") || !j.at("runs").is_array() || j.at("runs").empty()) {
    problems.push_back("config.runs: required non-empty array");
  } else {
    std::set<std::string> names;
    for (std::size_t i = 0; i < j.at("runs").size(); ++i) {
      RunSpec run = parse_run(j.at("runs")[i], "runs[" + std::to_string(i) + "]",
                              problems);
      if (!run.name.empty() && !names.insert(run.name).second) {
        problems.push_back("runs[" + std::to_string(i) + "].name: duplicate '" +
                           run.name + "'");
      }
      spec.runs.push_back(std::move(run));
    }
  }
  if (!problems.empty()) {
    std::string msg = "invalid experiment config:";
    for (const std::string& p : problems) msg += "\n  - " + p;
    throw ConfigError(msg);
  }
  return spec;
}

ExperimentSpec parse_spec_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path + "'");
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return parse_spec(text);
}

std::uint64_t seed_for(const ExperimentSpec& spec, std::size_t run_index,
                       std::int64_t trial) {
  return spec.seed + 1000003ULL * std::uint64_t(run_index) +
         std::uint64_t(trial);
}

namespace {

RunConfig build_config(const ExperimentSpec& spec, std::size_t i,
                       std::int64_t trial) {
  const RunSpec& rs = spec.runs[i];
  RunConfig cfg;
  cfg.objective = parse_objective(rs.objective_id);
  cfg.policy = rs.policy;
  cfg.hp = rs.hp;
  cfg.clipping = rs.clipping;
  cfg.sigma = rs.sigma;
  cfg.seed = seed_for(spec, i, trial);
  cfg.x0 = rs.x0;
  cfg.max_iter = rs.max_iter;
  cfg.stop_tol = rs.stop_tol;
  cfg.record_vectors = rs.verify;
  return cfg;
}

// True when the run is gradient descent in disguise, so the baseline rate
// bound applies.
bool is_plain_gd(const Trace& t) {
  return t.meta.policy == PolicyKind::constant && t.meta.hp.b == 1.0 &&
         t.meta.clipping == ClipMode::off;
}

// Attaches every check applicable to a finished deterministic trace.
void attach_checks(const Trace& trace, nlohmann::json& checks, bool& passed) {
  auto add = [&checks, &passed](const nlohmann::json& rep) {
    checks.push_back(rep);
    if (!rep.at("passed").get<bool>()) passed = false;
  };
  if (trace.meta.sigma > 0.0) return;  // aggregated separately
  if (trace.meta.clipping != ClipMode::off) {
    add(report_to_json(check_H_monotone(trace)));
    add(report_to_json(check_descent_lemma(trace, trace.meta.hp.eps)));
    add(report_to_json(check_prop_no_lower_bound(trace)));
    if (trace.meta.clipping == ClipMode::full) {
      add(report_to_json(check_theorem1(trace)));
      add(report_to_json(check_abstract_conditions(trace)));
    }
  } else if (is_plain_gd(trace)) {
    double gamma = trace.meta.hp.base_rate;
    if (gamma < 2.0 / trace.meta.lipschitz_L) {
      add(report_to_json(check_gd_bound(trace, gamma)));
    }
  }
}

RunOutcome process_run(const ExperimentSpec& spec, std::size_t i) {
  const RunSpec& rs = spec.runs[i];
  RunOutcome out;
  out.name = rs.name;
  fs::path dir(spec.out_dir);
  out.trace_path = (dir / (rs.name + ".csv")).string();
  out.report_path = (dir / (rs.name + ".report.json")).string();

  nlohmann::json report;
  report["name"] = rs.name;
  report["checks"] = nlohmann::json::array();
  bool checks_passed = true;
  try {
    std::vector<Trace> traces;
    bool diverged = false;
    std::string divergence_msg;
    for (std::int64_t t = 0; t < rs.trials; ++t) {
      try {
        traces.push_back(run(build_config(spec, i, t)));
      } catch (const DivergenceError& e) {
        diverged = true;
        divergence_msg = e.what();
        traces.push_back(e.partial);
        break;
      }
    }
    const Trace& first = traces.front();
    report["meta"] = meta_to_json(first.meta);
    report["bounds"] = bounds_to_json(first.bounds);
    report["summary"] = summary_to_json(first.summary);
    write_trace_csv(first, out.trace_path);

    if (diverged) {
      out.status = "diverged";
      out.detail = divergence_msg;
    } else if (rs.verify) {
      if (rs.sigma > 0.0) {
        nlohmann::json taus = nlohmann::json::array();
        for (const Trace& t : traces) {
          taus.push_back({{"tau", t.summary.tau ? nlohmann::json(*t.summary.tau)
                                                : nullptr},
                          {"grad_sq_at_tau",
                           t.summary.grad_sq_at_tau
                               ? nlohmann::json(*t.summary.grad_sq_at_tau)
                               : nullptr}});
        }
        report["trial_samples"] = taus;
        if (traces.size() >= 2 && rs.clipping == ClipMode::full) {
          nlohmann::json rep = report_to_json(check_theorem2(traces));
          report["checks"].push_back(rep);
          if (!rep.at("passed").get<bool>()) checks_passed = false;
        } else {
          report["note"] =
              "noisy rate check needs >= 2 trials and full clipping";
        }
      } else {
        attach_checks(first, report["checks"], checks_passed);
        if (report["checks"].empty()) {
          report["note"] = "no checks apply to this configuration";
        }
      }
      out.status = checks_passed ? "ok" : "check_failed";
    } else {
      out.status = "ok";
    }
  } catch (const IoError& e) {
    out.status = "io_error";
    out.detail = e.what();
    out.checks_passed = false;
    return out;
  } catch (const std::exception& e) {
    out.status = "error";
    out.detail = e.what();
    out.checks_passed = false;
    return out;
  }
  out.checks_passed = checks_passed;
  report["status"] = out.status;
  if (!out.detail.empty()) report["detail"] = out.detail;
  std::ofstream rf(out.report_path);
  if (!rf) {
    out.status = "io_error";
    out.detail = "cannot open '" + out.report_path + "'";
    out.checks_passed = false;
    return out;
  }
  rf << report.dump(2) << '\n';
  return out;
}

}  // namespace

ExperimentResult execute(const ExperimentSpec& spec) {
  std::error_code ec;
  fs::create_directories(spec.out_dir, ec);
  if (ec) throw IoError("cannot create out_dir '" + spec.out_dir + "': " + ec.message());

  ExperimentResult result;
  result.outcomes.resize(spec.runs.size());
  unsigned jobs = spec.jobs > 0 ? unsigned(spec.jobs)
                                : std::max(1u, std::thread::hardware_concurrency());
  jobs = std::min<unsigned>(jobs, unsigned(spec.runs.size()));
  std::atomic<std::size_t> next{0};
  auto worker = [&spec, &result, &next]() {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= spec.runs.size()) break;
      result.outcomes[i] = process_run(spec, i);
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < jobs; ++t) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();

  nlohmann::json summary;
  summary["out_dir"] = spec.out_dir;
  summary["seed"] = spec.seed;
  summary["runs"] = nlohmann::json::array();
  for (const RunOutcome& o : result.outcomes) {
    if (o.status == "check_failed") result.any_check_failed = true;
    if (o.status == "error") result.any_error = true;
    if (o.status == "io_error") result.any_io_error = true;
    summary["runs"].push_back({{"name", o.name},
                               {"status", o.status},
                               {"checks_passed", o.checks_passed},
                               {"detail", o.detail},
                               {"trace", o.trace_path},
                               {"report", o.report_path}});
  }
  result.summary_path = (fs::path(spec.out_dir) / "summary.json").string();
  std::ofstream sf(result.summary_path);
  if (!sf) throw IoError("cannot open '" + result.summary_path + "'");
  sf << summary.dump(2) << '\n';
  return result;
}

std::string write_figure1_outputs(const std::vector<Figure1Cell>& cells,
                                  const std::string& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create out_dir '" + out_dir + "': " + ec.message());
  nlohmann::json summary = nlohmann::json::array();
  for (const Figure1Cell& cell : cells) {
    std::string stem = "fig1_p" + format_double(cell.p) + "_" + cell.algorithm;
    for (char& ch : stem) {
      if (ch == '.') ch = 'p';
    }
    std::string csv = (fs::path(out_dir) / (stem + ".csv")).string();
    write_gap_csv(cell.trace, 0.0, csv);
    nlohmann::json entry;
    entry["p"] = cell.p;
    entry["algorithm"] = cell.algorithm;
    entry["diverged"] = cell.diverged;
    entry["csv"] = csv;
    entry["classification"] = report_to_json(cell.classification);
    entry["terminal_f"] = cell.trace.summary.terminal_f;
    entry["steps"] = cell.trace.summary.steps;
    summary.push_back(entry);
  }
  std::string path = (fs::path(out_dir) / "figure1_summary.json").string();
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "'");
  out << summary.dump(2) << '\n';
  return path;
}

bool verify_artifacts(const std::string& csv_path,
                      const std::string& report_json_path, std::string& log) {
  std::ifstream rf(report_json_path);
  if (!rf) throw IoError("cannot open report '" + report_json_path + "'");
  nlohmann::json report;
  try {
    report = nlohmann::json::parse(rf);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("report parse error: ") + e.what());
  }
  Trace trace;
  trace.meta = meta_from_json(report.at("meta"));
  trace.bounds = bounds_from_json(report.at("bounds"));
  trace.records = read_trace_csv(csv_path);
  if (trace.records.size() < 2) {
    throw UsageError("verify: trace has no steps");
  }
  reconstruct_inner(trace.records, trace.meta.hp.b);
  trace.summary.steps = std::int64_t(trace.records.size()) - 1;

  bool all_ok = true;
  auto note = [&log, &all_ok](const std::string& name, bool ok,
                              const std::string& detail) {
    log += name + ": " + (ok ? "pass" : "FAIL");
    if (!detail.empty()) log += " (" + detail + ")";
    log += "\n";
    if (!ok) all_ok = false;
  };

  if (trace.meta.sigma > 0.0) {
    note("offline checks", true, "noisy trace: only aggregate checks apply, none offline");
    return all_ok;
  }
  if (trace.meta.clipping != ClipMode::off) {
    MonotonicityReport mono = check_H_monotone(trace);
    note("h_monotone", mono.nonincreasing,
         "worst rise " + format_double(mono.worst_rise));
    if (trace.meta.clipping == ClipMode::full) {
      Theorem1Report t1 = check_theorem1(trace);
      note("min_grad_rate", t1.holds_all && t1.sum_ok,
           "worst ratio " + format_double(t1.worst_ratio));
      AbstractCondReport ab = check_abstract_conditions(trace);
      note("abstract_conditions", ab.holds,
           "decrease margin " + format_double(ab.worst_decrease_margin));
    }
  } else if (is_plain_gd(trace)) {
    double gamma = trace.meta.hp.base_rate;
    if (gamma < 2.0 / trace.meta.lipschitz_L) {
      GdBoundReport gd = check_gd_bound(trace, gamma);
      note("gd_rate", gd.holds_all, "worst ratio " + format_double(gd.worst_ratio));
    } else {
      note("gd_rate", true, "skipped: gamma >= 2/L, bound vacuous");
    }
  } else {
    note("offline checks", true, "no checks apply to this configuration");
  }
  return all_ok;
}

}  // namespace clipadam
