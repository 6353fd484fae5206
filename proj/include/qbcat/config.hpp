#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "qbcat/dynamics.hpp"
#include "qbcat/model.hpp"
#include "qbcat/thermo.hpp"

namespace qbcat {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Initial state: either |g> x |0> or an explicit mixture of pure states
/// sum_k w_k |psi_k><psi_k| on the dims the amplitudes are given for.
struct InitialState {
  enum class Kind { ground_ground, spectral };
  struct Component {
    double weight = 1.0;
    Eigen::VectorXcd amplitudes;
  };

  Kind kind = Kind::ground_ground;
  std::vector<std::size_t> dims;  // spectral only
  std::vector<Component> components;

  /// Realize on the model's Hilbert space. A spectral state given on
  /// {2, n} is reduced to the qubit when the model is uncatalyzed.
  DensityMatrix build(const ModelParams& p) const;
};

struct ScenarioSpec {
  ModelParams model;
  SolverConfig solver;
  InitialState initial_state;
  std::string label = "scenario";
  FdMode fd_mode = FdMode::both;
};

enum class SweepAxis { omega_c, g, kappa_1, gamma_D };

std::string to_string(SweepAxis a);
SweepAxis sweep_axis_from_string(const std::string& s);
/// Copy of `p` with the swept parameter set to `value`.
ModelParams with_axis_value(ModelParams p, SweepAxis axis, double value);

struct SweepSpec {
  ScenarioSpec base;
  SweepAxis axis = SweepAxis::g;
  std::vector<double> values;
  bool include_uncatalyzed_baseline = true;

  void validate() const;
};

struct ConvergenceSpec {
  ScenarioSpec base;
  std::vector<std::size_t> cutoffs{3, 4, 5};
  std::vector<double> step_scales{1.0, 0.5, 0.25};

  void validate() const;
};

nlohmann::json load_json(const std::filesystem::path& path);

ScenarioSpec scenario_from_json(const nlohmann::json& doc);
SweepSpec sweep_from_json(const nlohmann::json& doc);
ConvergenceSpec convergence_from_json(const nlohmann::json& doc);

nlohmann::json to_json(const ModelParams& p);
nlohmann::json to_json(const SolverConfig& cfg);

}  // namespace qbcat
