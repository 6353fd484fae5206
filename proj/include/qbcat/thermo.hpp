#pragma once

#include <vector>

#include "qbcat/dynamics.hpp"
#include "qbcat/hilbert.hpp"
#include "qbcat/model.hpp"

namespace qbcat {

/// How time derivatives entering the first-law bookkeeping are obtained.
///  exact   - analytic master-equation RHS and closed-form dH0/dt; the
///            central-difference J column is left as NaN.
///  central - central differences at fd_step for J and P feed the residual.
///  both    - both columns are filled; the residual uses the exact forms.
enum class FdMode { exact, central, both };

std::string to_string(FdMode m);
FdMode fd_mode_from_string(const std::string& s);

struct ThermoRecord {
  double t = 0.0;
  double ergotropy = 0.0;
  double e_qb_bare = 0.0;   // Tr[rho_QB H_QB]
  double e_internal = 0.0;  // Tr[rho H_0(t)]
  double e_cat = 0.0;       // Tr[rho H_Cat]
  double flux_J_exact = 0.0;
  double flux_J_fd = 0.0;
  double flux_J_qb_local = 0.0;  // Tr[d rho_QB/dt H_QB]
  double power_P = 0.0;
  double flux_unitary_cat = 0.0;
  double flux_dephasing = 0.0;
  double flux_kappa = 0.0;
  double first_law_residual = 0.0;
  double trace_dev = 0.0;
  double min_eig = 0.0;
};

struct FluxChannels {
  double unitary_cat = 0.0;
  double dephasing = 0.0;
  double kappa = 0.0;
};

/// Same spectrum as rho, diagonal in h's eigenbasis, populations descending
/// with increasing energy.
DensityMatrix passive_state(const DensityMatrix& rho, const Operator& h);

/// Tr[rho h] - Tr[passive(rho) h].
double ergotropy(const DensityMatrix& rho, const Operator& h);

/// omega_c <a^dagger a>; catalyzed scenario only.
double catalyst_energy(const DensityMatrix& rho, const ModelParams& p);

/// Per-sample J(t) = Tr[d rho/dt H_0(t)].
std::vector<double> energy_flux_exact(const Trajectory& traj, const ModelParams& p);
/// Same quantity with d rho/dt from a central difference of width 2 * fd_step.
std::vector<double> energy_flux_central(const Trajectory& traj, const ModelParams& p, const SolverConfig& cfg);

/// P(t) = Tr[rho dH_0/dt] with the closed-form derivative.
std::vector<double> drive_power_exact(const Trajectory& traj, const ModelParams& p);
/// P(t) with dH_0/dt by central difference.
std::vector<double> drive_power_central(const Trajectory& traj, const ModelParams& p, const SolverConfig& cfg);

/// dE/dt - J - P with dE/dt by central difference; J and P from `mode`.
std::vector<double> first_law_check(const Trajectory& traj, const ModelParams& p, const SolverConfig& cfg,
                                    FdMode mode = FdMode::exact);

/// Channel-resolved contributions to J(t); catalyzed scenario only.
std::vector<FluxChannels> flux_decomposition(const Trajectory& traj, const ModelParams& p);

/// One record per trajectory sample, computed in parallel across samples.
std::vector<ThermoRecord> thermo_series(const Trajectory& traj, const ModelParams& p, const SolverConfig& cfg,
                                        FdMode mode = FdMode::both);
/// Serial reference for thermo_series; identical output.
std::vector<ThermoRecord> thermo_series_serial(const Trajectory& traj, const ModelParams& p,
                                               const SolverConfig& cfg, FdMode mode = FdMode::both);

/// Throws std::runtime_error if a record breaks ergotropy non-negativity or
/// flux decomposition completeness.
void validate_record(const ThermoRecord& r);

}  // namespace qbcat
