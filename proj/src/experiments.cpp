#include "qbcat/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <omp.h>

#include "qbcat/series_io.hpp"

namespace qbcat {

using nlohmann::json;

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw std::runtime_error("write to '" + path.string() + "' failed");
}

json diagnostics_json(const StepDiagnostics& d) {
  json sw = json::array();
  for (const auto& e : d.switches) sw.push_back({{"t", e.t}, {"to", e.to_implicit ? "implicit" : "explicit"}});
  return {{"accepted", d.accepted},
          {"rejected", d.rejected},
          {"explicit_steps", d.explicit_steps},
          {"implicit_steps", d.implicit_steps},
          {"rhs_evaluations", d.rhs_evaluations},
          {"factorizations", d.factorizations},
          {"max_stiffness_ratio", d.max_stiffness_ratio},
          {"switch_events", sw}};
}

ScenarioSpec uncatalyzed_variant(const ScenarioSpec& base) {
  ScenarioSpec s = base;
  s.model.scenario = Scenario::uncatalyzed;
  s.label = base.label + "_uncatalyzed";
  return s;
}

std::string stem_for(SweepAxis axis, std::size_t index) {
  return to_string(axis) + "_" + std::to_string(index);
}

}  // namespace

json to_json(const ScenarioSummary& s) {
  return {{"label", s.label},
          {"scenario", to_string(s.scenario)},
          {"time_avg_ergotropy", s.time_avg_ergotropy},
          {"min_J", s.min_J},
          {"t_min_J", s.t_min_J},
          {"max_abs_first_law_residual", s.max_abs_residual},
          {"first_law_scale", s.residual_scale},
          {"e_cat_drift", s.e_cat_drift},
          {"max_trace_dev", s.max_trace_dev},
          {"min_eigenvalue", s.min_eigenvalue},
          {"max_hermiticity_residual", s.max_hermiticity},
          {"steps", diagnostics_json(s.diagnostics)}};
}

std::vector<double> column(const std::vector<ThermoRecord>& records, double ThermoRecord::*field) {
  std::vector<double> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.*field);
  return out;
}

double sup_norm(const std::vector<double>& a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

double sup_diff(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("sup_diff: series lengths differ");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

ScenarioSummary summarize(const std::string& label, const ModelParams& p, const Trajectory& traj,
                          const std::vector<ThermoRecord>& records) {
  ScenarioSummary s;
  s.label = label;
  s.scenario = p.scenario;
  s.diagnostics = traj.diagnostics;
  if (records.empty()) return s;

  if (records.size() > 1) {
    double area = 0.0;
    for (std::size_t i = 1; i < records.size(); ++i) {
      area += 0.5 * (records[i].ergotropy + records[i - 1].ergotropy) * (records[i].t - records[i - 1].t);
    }
    s.time_avg_ergotropy = area / (records.back().t - records.front().t);
  } else {
    s.time_avg_ergotropy = records.front().ergotropy;
  }

  s.min_J = records.front().flux_J_exact;
  s.t_min_J = records.front().t;
  s.min_eigenvalue = records.front().min_eig;
  for (const auto& r : records) {
    if (r.flux_J_exact < s.min_J) {
      s.min_J = r.flux_J_exact;
      s.t_min_J = r.t;
    }
    s.max_abs_residual = std::max(s.max_abs_residual, std::abs(r.first_law_residual));
    s.residual_scale = std::max(s.residual_scale, std::abs(r.flux_J_exact) + std::abs(r.power_P));
    s.e_cat_drift = std::max(s.e_cat_drift, std::abs(r.e_cat - records.front().e_cat));
    s.max_trace_dev = std::max(s.max_trace_dev, r.trace_dev);
    s.min_eigenvalue = std::min(s.min_eigenvalue, r.min_eig);
  }
  for (const auto& ph : traj.physicality) s.max_hermiticity = std::max(s.max_hermiticity, ph.hermiticity);
  return s;
}

ScenarioResult run_scenario(const ScenarioSpec& spec) {
  ScenarioResult res;
  try {
    const DensityMatrix rho0 = spec.initial_state.build(spec.model);
    res.trajectory = integrate(rho0, spec.model, spec.solver);
  } catch (const SolverError& e) {
    throw SolverError(e.kind(), "[" + spec.label + "] " + e.what(), e.time());
  }
  res.records = thermo_series(res.trajectory, spec.model, spec.solver, spec.fd_mode);
  res.summary = summarize(spec.label, spec.model, res.trajectory, res.records);
  return res;
}

void write_scenario(const ScenarioResult& result, const std::filesystem::path& dir, const std::string& stem) {
  std::filesystem::create_directories(dir);
  emit_series(result.records, dir / (stem + ".csv"));
  write_text(dir / (stem + "_summary.json"), to_json(result.summary).dump(2) + "\n");
}

std::string monotonicity_of(const std::vector<double>& values) {
  if (values.size() < 2) return "insufficient";
  bool inc = true;
  bool dec = true;
  bool flat = true;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] < values[i - 1]) inc = false;
    if (values[i] > values[i - 1]) dec = false;
    if (values[i] != values[i - 1]) flat = false;
  }
  if (flat) return "constant";
  if (inc) return "increasing";
  if (dec) return "decreasing";
  return "non-monotonic";
}

bool axis_affects_uncatalyzed(SweepAxis axis) { return axis == SweepAxis::gamma_D; }

SweepResult run_sweep(const SweepSpec& spec, int jobs) {
  spec.validate();
  SweepResult out;
  out.axis = spec.axis;
  if (spec.include_uncatalyzed_baseline) out.uncatalyzed = run_scenario(uncatalyzed_variant(spec.base));

  out.points.resize(spec.values.size());
  const auto n = static_cast<long>(spec.values.size());
#pragma omp parallel for schedule(dynamic) num_threads(std::max(1, jobs))
  for (long i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    SweepPoint& pt = out.points[k];
    pt.value = spec.values[k];
    ScenarioSpec s = spec.base;
    s.model = with_axis_value(spec.base.model, spec.axis, pt.value);
    s.label = spec.base.label + "_" + stem_for(spec.axis, k);
    try {
      s.model.validate();
      pt.result = run_scenario(s);
      if (spec.include_uncatalyzed_baseline && axis_affects_uncatalyzed(spec.axis)) {
        pt.matched_uncatalyzed = run_scenario(uncatalyzed_variant(s));
      }
      pt.ok = true;
    } catch (const SolverError& e) {
      pt.ok = false;
      pt.error = e.kind() + ": " + e.what();
    } catch (const std::exception& e) {
      pt.ok = false;
      pt.error = e.what();
    }
  }

  std::vector<double> averages;
  for (auto& pt : out.points) {
    if (!pt.ok) {
      out.partial = true;
      continue;
    }
    averages.push_back(pt.result->summary.time_avg_ergotropy);
    const auto& reference = pt.matched_uncatalyzed ? pt.matched_uncatalyzed : out.uncatalyzed;
    if (reference) pt.advantage = pt.result->summary.time_avg_ergotropy > reference->summary.time_avg_ergotropy;
  }
  out.monotonicity = out.partial ? "incomplete" : monotonicity_of(averages);
  return out;
}

void write_sweep(const SweepResult& result, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  json summary;
  summary["axis"] = to_string(result.axis);
  summary["partial"] = result.partial;
  summary["time_avg_ergotropy_monotonicity"] = result.monotonicity;
  if (result.uncatalyzed) {
    write_scenario(*result.uncatalyzed, dir, "uncatalyzed");
    summary["uncatalyzed"] = to_json(result.uncatalyzed->summary);
  }

  std::string table = "index,value,status,time_avg_ergotropy,min_J,t_min_J,e_cat_drift,max_abs_first_law_residual,advantage\n";
  json points = json::array();
  for (std::size_t k = 0; k < result.points.size(); ++k) {
    const SweepPoint& pt = result.points[k];
    json jp{{"index", k}, {"value", pt.value}, {"ok", pt.ok}};
    table += std::to_string(k) + "," + format_double(pt.value) + ",";
    if (pt.ok) {
      const std::string stem = stem_for(result.axis, k);
      write_scenario(*pt.result, dir, stem);
      const ScenarioSummary& s = pt.result->summary;
      jp["series"] = stem + ".csv";
      jp["summary"] = to_json(s);
      jp["advantage"] = pt.advantage;
      if (pt.matched_uncatalyzed) {
        write_scenario(*pt.matched_uncatalyzed, dir, "uncatalyzed_" + stem);
        jp["matched_uncatalyzed"] = to_json(pt.matched_uncatalyzed->summary);
        jp["matched_uncatalyzed_series"] = "uncatalyzed_" + stem + ".csv";
      }
      jp["advantage_reference"] = pt.matched_uncatalyzed ? "matched" : "shared";
      table += "ok," + format_double(s.time_avg_ergotropy) + "," + format_double(s.min_J) + "," +
               format_double(s.t_min_J) + "," + format_double(s.e_cat_drift) + "," +
               format_double(s.max_abs_residual) + "," + (pt.advantage ? "1" : "0") + "\n";
    } else {
      jp["error"] = pt.error;
      table += "failed,,,,,,\n";
    }
    points.push_back(jp);
  }
  summary["points"] = points;
  write_text(dir / "sweep_summary.csv", table);
  write_text(dir / "summary.json", summary.dump(2) + "\n");
}

ConvergenceReport run_convergence(const ConvergenceSpec& spec, int jobs) {
  spec.validate();

  std::vector<ScenarioSpec> runs;
  for (auto c : spec.cutoffs) {
    ScenarioSpec s = spec.base;
    s.model.n_photon = c;
    s.label = spec.base.label + "_cutoff_" + std::to_string(c);
    runs.push_back(s);
  }
  for (double scale : spec.step_scales) {
    ScenarioSpec s = spec.base;
    s.solver.dt_max = spec.base.solver.dt_max * scale;
    s.solver.dt_init = std::min(spec.base.solver.dt_init, s.solver.dt_max);
    s.solver.dt_min = std::min(spec.base.solver.dt_min, s.solver.dt_init);
    s.solver.max_steps = static_cast<std::size_t>(std::ceil(static_cast<double>(spec.base.solver.max_steps) / scale));
    s.label = spec.base.label + "_step_" + format_double(scale);
    runs.push_back(s);
  }

  std::vector<std::vector<double>> erg(runs.size());
  std::vector<std::vector<double>> flux(runs.size());
  std::vector<std::string> errors(runs.size());
  const auto n = static_cast<long>(runs.size());
#pragma omp parallel for schedule(dynamic) num_threads(std::max(1, jobs))
  for (long i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    try {
      const ScenarioResult r = run_scenario(runs[k]);
      erg[k] = column(r.records, &ThermoRecord::ergotropy);
      flux[k] = column(r.records, &ThermoRecord::flux_J_exact);
    } catch (const std::exception& e) {
      errors[k] = e.what();
    }
  }
  for (const auto& e : errors) {
    if (!e.empty()) throw std::runtime_error("convergence run failed: " + e);
  }

  auto compare = [&](std::size_t a, std::size_t ref, double pa, double pref) {
    ConvergenceEntry e;
    e.parameter = pa;
    e.reference = pref;
    e.delta_ergotropy = sup_diff(erg[a], erg[ref]);
    e.delta_J = sup_diff(flux[a], flux[ref]);
    e.rel_ergotropy = e.delta_ergotropy / std::max(sup_norm(erg[ref]), 1e-300);
    e.rel_J = e.delta_J / std::max(sup_norm(flux[ref]), 1e-300);
    e.converged = e.rel_ergotropy <= kConvergenceThreshold && e.rel_J <= kConvergenceThreshold;
    return e;
  };

  ConvergenceReport rep;
  const std::size_t nc = spec.cutoffs.size();
  for (std::size_t k = 0; k + 1 < nc; ++k) {
    rep.cutoff_entries.push_back(compare(k, k + 1, static_cast<double>(spec.cutoffs[k]),
                                         static_cast<double>(spec.cutoffs[k + 1])));
  }
  if (!spec.step_scales.empty()) {
    const auto tight = static_cast<std::size_t>(
        std::min_element(spec.step_scales.begin(), spec.step_scales.end()) - spec.step_scales.begin());
    for (std::size_t k = 0; k < spec.step_scales.size(); ++k) {
      if (k == tight) continue;
      rep.step_entries.push_back(
          compare(nc + k, nc + tight, spec.step_scales[k], spec.step_scales[tight]));
    }
  }
  for (const auto& e : rep.cutoff_entries) rep.flagged = rep.flagged || !e.converged;
  for (const auto& e : rep.step_entries) rep.flagged = rep.flagged || !e.converged;
  return rep;
}

json to_json(const ConvergenceReport& r) {
  auto entry = [](const ConvergenceEntry& e, const char* pname, const char* rname) {
    return json{{pname, e.parameter},
                {rname, e.reference},
                {"sup_delta_ergotropy", e.delta_ergotropy},
                {"sup_delta_J", e.delta_J},
                {"rel_delta_ergotropy", e.rel_ergotropy},
                {"rel_delta_J", e.rel_J},
                {"converged", e.converged}};
  };
  json cut = json::array();
  for (const auto& e : r.cutoff_entries) cut.push_back(entry(e, "cutoff", "next_cutoff"));
  json steps = json::array();
  for (const auto& e : r.step_entries) steps.push_back(entry(e, "step_scale", "reference_scale"));
  return {{"cutoffs", cut},
          {"step_scales", steps},
          {"threshold", kConvergenceThreshold},
          {"non_convergence_flagged", r.flagged}};
}

}  // namespace qbcat
