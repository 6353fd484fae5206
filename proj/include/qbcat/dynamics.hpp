#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "qbcat/hilbert.hpp"
#include "qbcat/model.hpp"

namespace qbcat {

enum class StiffnessPolicy { explicit_only, switching };

std::string to_string(StiffnessPolicy s);
StiffnessPolicy stiffness_policy_from_string(const std::string& s);

struct SolverConfig {
  double t_max = 300.0;
  double dt_init = 0.01;
  double dt_max = 0.05;
  double dt_min = 1e-6;
  std::size_t max_steps = 50000;
  double rel_tol = 1e-8;
  double abs_tol = 1e-10;
  StiffnessPolicy stiffness_policy = StiffnessPolicy::switching;
  double fd_step = 0.001;
  std::vector<double> output_grid = uniform_grid(300.0, 3001);

  static std::vector<double> uniform_grid(double t_max, std::size_t points);
  /// Replace output_grid by `points` equally spaced samples on [0, t_max].
  void set_uniform_grid(std::size_t points);
  /// Throws std::invalid_argument when an invariant is broken.
  void validate() const;
};

/// Base of all integration failures. `kind()` is the machine-readable tag.
class SolverError : public std::runtime_error {
 public:
  SolverError(std::string kind, const std::string& what, double t)
      : std::runtime_error(what), kind_(std::move(kind)), time_(t) {}
  const std::string& kind() const { return kind_; }
  double time() const { return time_; }

 private:
  std::string kind_;
  double time_;
};

class StepLimitExceeded : public SolverError {
 public:
  StepLimitExceeded(const std::string& what, double t) : SolverError("StepLimitExceeded", what, t) {}
};

class StepUnderflow : public SolverError {
 public:
  StepUnderflow(const std::string& what, double t) : SolverError("StepUnderflow", what, t) {}
};

class PhysicalityViolation : public SolverError {
 public:
  PhysicalityViolation(const std::string& what, double t) : SolverError("PhysicalityViolation", what, t) {}
};

struct PhysicalityReport {
  double trace_deviation = 0.0;
  double hermiticity = 0.0;
  double min_eigenvalue = 0.0;
  bool trace_violation = false;
  bool hermiticity_violation = false;
  bool positivity_violation = false;

  bool ok() const { return !(trace_violation || hermiticity_violation || positivity_violation); }
};

PhysicalityReport check_physicality(const Operator& rho, const StateTolerances& tol = {});

struct SwitchEvent {
  double t = 0.0;
  bool to_implicit = true;
};

struct StepDiagnostics {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t explicit_steps = 0;
  std::size_t implicit_steps = 0;
  std::size_t rhs_evaluations = 0;
  std::size_t factorizations = 0;
  double max_stiffness_ratio = 0.0;  // max over accepted steps of h * spectral bound
  std::vector<SwitchEvent> switches;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<DensityMatrix> states;
  std::vector<PhysicalityReport> physicality;
  StepDiagnostics diagnostics;
};

/// Precomputed pieces of the master-equation generator
///   d rho/dt = -i[H(t), rho] + sum_k rate_k (L rho L^dag - {L^dag L, rho}/2),
/// with H(t) = H_static + sin(omega_d t) * Omega sigma_x.
class LindbladGenerator {
 public:
  explicit LindbladGenerator(const ModelParams& p);

  const ModelParams& params() const { return params_; }
  std::size_t dim() const { return static_cast<std::size_t>(h_static_.rows()); }

  Matrix hamiltonian(double t) const;
  Matrix rhs(double t, const Matrix& rho) const;
  /// Dissipative part of channel `k` alone (no rate cut-off; zero-rate gives zero).
  Matrix channel(std::size_t k, const Matrix& rho) const;
  std::size_t channel_count() const { return channels_.size(); }

  /// Superoperator acting on column-major vec(rho), dim^2 x dim^2.
  Matrix liouvillian(double t) const;

  /// Upper bound on the spectral radius of the generator.
  double spectral_bound() const { return spectral_bound_; }

 private:
  struct Channel {
    Matrix jump;
    Matrix jump_dag;
    Matrix jump_dag_jump;
    double rate;
  };

  ModelParams params_;
  Matrix h_static_;
  Matrix drive_;  // Omega sigma_x, embedded
  std::vector<Channel> channels_;
  Matrix super_static_;
  Matrix super_drive_;
  double spectral_bound_ = 0.0;
};

/// Right-hand side of the master equation. Throws ModelError if rho's dims do
/// not match the scenario.
Operator lindblad_rhs(const DensityMatrix& rho, double t, const ModelParams& p);

/// Short high-order propagation of rho from t to t + dt (dt may be negative),
/// split into sub-steps no longer than 1e-3 fs. Used for finite-difference
/// neighbours of sampled states.
Matrix propagate_short(const LindbladGenerator& gen, const Matrix& rho, double t, double dt);

/// Adaptive integration of the master equation onto cfg.output_grid.
Trajectory integrate(const DensityMatrix& rho0, const ModelParams& p, const SolverConfig& cfg);

}  // namespace qbcat
