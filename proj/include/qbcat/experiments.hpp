#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "qbcat/config.hpp"
#include "qbcat/dynamics.hpp"
#include "qbcat/thermo.hpp"

namespace qbcat {

/// Scalar witnesses of one run.
struct ScenarioSummary {
  std::string label;
  Scenario scenario = Scenario::catalyzed;
  double time_avg_ergotropy = 0.0;  // trapezoid average over the output grid
  double min_J = 0.0;
  double t_min_J = 0.0;
  double max_abs_residual = 0.0;
  double residual_scale = 0.0;  // max_t (|J| + |P|)
  double e_cat_drift = 0.0;     // max_t |E_cat(t) - E_cat(0)|
  double max_trace_dev = 0.0;
  double min_eigenvalue = 0.0;
  double max_hermiticity = 0.0;
  StepDiagnostics diagnostics;
};

nlohmann::json to_json(const ScenarioSummary& s);

struct ScenarioResult {
  Trajectory trajectory;
  std::vector<ThermoRecord> records;
  ScenarioSummary summary;
};

ScenarioSummary summarize(const std::string& label, const ModelParams& p, const Trajectory& traj,
                          const std::vector<ThermoRecord>& records);

/// Integrate and evaluate one scenario. Solver failures are rethrown as
/// SolverError with the label prefixed to the message.
ScenarioResult run_scenario(const ScenarioSpec& spec);

/// Writes <stem>.csv and <stem>_summary.json into `dir`.
void write_scenario(const ScenarioResult& result, const std::filesystem::path& dir, const std::string& stem);

struct SweepPoint {
  double value = 0.0;
  bool ok = false;
  std::string error;
  std::optional<ScenarioResult> result;
  /// Uncatalyzed run at this point's parameters, present only when the swept
  /// parameter also enters the uncatalyzed model (gamma_D).
  std::optional<ScenarioResult> matched_uncatalyzed;
  /// Time-averaged ergotropy beats the matched uncatalyzed run if there is
  /// one, else the shared baseline.
  bool advantage = false;
};

/// True when `axis` changes the uncatalyzed model.
bool axis_affects_uncatalyzed(SweepAxis axis);

struct SweepResult {
  SweepAxis axis = SweepAxis::g;
  std::optional<ScenarioResult> uncatalyzed;
  std::vector<SweepPoint> points;
  std::string monotonicity;  // of time-averaged ergotropy along `values`
  bool partial = false;      // at least one point failed
};

/// Points run concurrently on up to `jobs` threads.
SweepResult run_sweep(const SweepSpec& spec, int jobs = 1);
void write_sweep(const SweepResult& result, const std::filesystem::path& dir);

/// "increasing", "decreasing", "constant", "non-monotonic" or "insufficient".
std::string monotonicity_of(const std::vector<double>& values);

struct ConvergenceEntry {
  double parameter = 0.0;    // cutoff (as a number) or step scale
  double reference = 0.0;    // cutoff or scale compared against
  double delta_ergotropy = 0.0;  // sup-norm
  double delta_J = 0.0;
  double rel_ergotropy = 0.0;  // delta / sup-norm of the reference series
  double rel_J = 0.0;
  bool converged = true;
};

struct ConvergenceReport {
  std::vector<ConvergenceEntry> cutoff_entries;  // cutoff[k] vs cutoff[k+1]
  std::vector<ConvergenceEntry> step_entries;    // each scale vs the smallest
  bool flagged = false;
};

constexpr double kConvergenceThreshold = 0.01;

ConvergenceReport run_convergence(const ConvergenceSpec& spec, int jobs = 1);
nlohmann::json to_json(const ConvergenceReport& r);

/// Sup-norm of the elementwise difference of two equally long series.
double sup_diff(const std::vector<double>& a, const std::vector<double>& b);
double sup_norm(const std::vector<double>& a);

std::vector<double> column(const std::vector<ThermoRecord>& records, double ThermoRecord::*field);

}  // namespace qbcat
