// Command-line front end: run, sweep, converge, check.

#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "qbcat/config.hpp"
#include "qbcat/experiments.hpp"
#include "qbcat/self_test.hpp"
#include "qbcat/series_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitSolver = 2;
constexpr int kExitCheckFailed = 3;

int report_error(const std::string& kind, const std::string& message, const json& extra = json::object()) {
  json err{{"error", kind}, {"message", message}};
  err.update(extra);
  std::cerr << err.dump() << std::endl;
  return kind == "StepLimitExceeded" || kind == "StepUnderflow" || kind == "PhysicalityViolation" ? kExitSolver
                                                                                                    : kExitFailure;
}

// Shortest round-trip rendering for console lines.
std::string brief(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return ec == std::errc{} ? std::string(buf, ptr) : std::to_string(v);
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out << text;
}

int cmd_run(const fs::path& config, const fs::path& out, const std::string& fd_mode) {
  qbcat::ScenarioSpec spec = qbcat::scenario_from_json(qbcat::load_json(config));
  if (!fd_mode.empty()) spec.fd_mode = qbcat::fd_mode_from_string(fd_mode);
  const qbcat::ScenarioResult r = qbcat::run_scenario(spec);
  fs::create_directories(out);
  qbcat::emit_series(r.records, out / "series.csv");
  json summary = qbcat::to_json(r.summary);
  summary["model"] = qbcat::to_json(spec.model);
  summary["solver"] = qbcat::to_json(spec.solver);
  summary["fd_mode"] = qbcat::to_string(spec.fd_mode);
  write_file(out / "summary.json", summary.dump(2) + "\n");
  std::cout << "run '" << spec.label << "': " << r.records.size() << " samples, time-avg ergotropy "
            << brief(r.summary.time_avg_ergotropy) << ", min J " << brief(r.summary.min_J) << " at t="
            << brief(r.summary.t_min_J) << " fs\n";
  return 0;
}

int cmd_sweep(const fs::path& config, const fs::path& out, int jobs, const std::string& fd_mode) {
  qbcat::SweepSpec spec = qbcat::sweep_from_json(qbcat::load_json(config));
  if (!fd_mode.empty()) spec.base.fd_mode = qbcat::fd_mode_from_string(fd_mode);
  const qbcat::SweepResult r = qbcat::run_sweep(spec, jobs);
  qbcat::write_sweep(r, out);
  std::cout << "sweep over " << qbcat::to_string(r.axis) << ": " << r.points.size() << " points"
            << (r.partial ? " (partial, see summary.json)" : "") << ", time-avg ergotropy " << r.monotonicity << "\n";
  for (const auto& pt : r.points) {
    std::cout << "  " << brief(pt.value) << ": ";
    if (pt.ok) {
      std::cout << brief(pt.result->summary.time_avg_ergotropy);
      if (pt.matched_uncatalyzed) {
        std::cout << " vs uncatalyzed " << brief(pt.matched_uncatalyzed->summary.time_avg_ergotropy);
      }
      std::cout << (r.uncatalyzed ? (pt.advantage ? "  advantage" : "  no advantage") : "") << "\n";
    } else {
      std::cout << "failed: " << pt.error << "\n";
    }
  }
  return 0;
}

int cmd_converge(const fs::path& config, const fs::path& out, int jobs, const std::string& fd_mode) {
  qbcat::ConvergenceSpec spec = qbcat::convergence_from_json(qbcat::load_json(config));
  if (!fd_mode.empty()) spec.base.fd_mode = qbcat::fd_mode_from_string(fd_mode);
  const qbcat::ConvergenceReport r = qbcat::run_convergence(spec, jobs);
  fs::create_directories(out);
  write_file(out / "convergence.json", qbcat::to_json(r).dump(2) + "\n");
  for (const auto& e : r.cutoff_entries) {
    std::cout << "cutoff " << e.parameter << " -> " << e.reference << ": rel dE " << e.rel_ergotropy << ", rel dJ "
              << e.rel_J << (e.converged ? "" : "  NOT CONVERGED") << "\n";
  }
  for (const auto& e : r.step_entries) {
    std::cout << "step scale " << e.parameter << " vs " << e.reference << ": sup dE " << e.delta_ergotropy
              << ", sup dJ " << e.delta_J << (e.converged ? "" : "  NOT CONVERGED") << "\n";
  }
  return 0;
}

int cmd_check(const fs::path& config, const fs::path& out) {
  std::vector<qbcat::CheckResult> results = qbcat::oracle_checks();
  qbcat::ScenarioSpec spec;
  spec.label = "default";
  if (!config.empty()) spec = qbcat::scenario_from_json(qbcat::load_json(config));
  for (auto& r : qbcat::scenario_checks(spec)) results.push_back(std::move(r));

  bool all = true;
  json doc = json::array();
  for (const auto& r : results) {
    all = all && r.passed;
    std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << "  value=" << r.value << "  tol=" << r.tolerance
              << (r.detail.empty() ? "" : "  (" + r.detail + ")") << "\n";
    doc.push_back({{"name", r.name}, {"passed", r.passed}, {"value", r.value}, {"tolerance", r.tolerance}});
  }
  if (!out.empty()) {
    fs::create_directories(out);
    write_file(out / "check.json", doc.dump(2) + "\n");
  }
  return all ? 0 : kExitCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Driven qubit battery with an oscillator catalyst: simulation and energy bookkeeping"};
  app.require_subcommand(1);

  fs::path config;
  fs::path out = "out";
  int jobs = 1;
  std::string fd_mode;

  auto add_common = [&](CLI::App* sub, bool config_required) {
    auto* opt = sub->add_option("--config", config, "JSON scenario config");
    if (config_required) opt->required();
    sub->add_option("--out", out, "output directory");
    sub->add_option("--fd-mode", fd_mode, "derivative route: exact, central or both")
        ->check(CLI::IsMember({"exact", "central", "both"}));
  };

  auto* run = app.add_subcommand("run", "integrate one scenario and write its time series");
  add_common(run, true);
  auto* sweep = app.add_subcommand("sweep", "sweep one parameter axis of a catalyzed scenario");
  add_common(sweep, true);
  sweep->add_option("--jobs", jobs, "parallel sweep points")->check(CLI::PositiveNumber);
  auto* converge = app.add_subcommand("converge", "Fock cutoff and step-size convergence study");
  add_common(converge, true);
  converge->add_option("--jobs", jobs, "parallel runs")->check(CLI::PositiveNumber);
  auto* check = app.add_subcommand("check", "physicality and closed-form oracle self-test");
  check->add_option("--config", config, "JSON scenario config (defaults to the built-in baseline)");
  check->add_option("--out", out, "output directory for check.json");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(config, out, fd_mode);
    if (sweep->parsed()) return cmd_sweep(config, out, jobs, fd_mode);
    if (converge->parsed()) return cmd_converge(config, out, jobs, fd_mode);
    if (check->parsed()) return cmd_check(config, check->count("--out") ? out : fs::path{});
  } catch (const qbcat::SolverError& e) {
    return report_error(e.kind(), e.what(), {{"t", e.time()}});
  } catch (const qbcat::ConfigError& e) {
    return report_error("ConfigError", e.what());
  } catch (const std::exception& e) {
    return report_error("Error", e.what());
  }
  return kExitFailure;
}
