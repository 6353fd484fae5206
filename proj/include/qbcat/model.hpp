#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "qbcat/hilbert.hpp"

namespace qbcat {

enum class Scenario { uncatalyzed, catalyzed };

std::string to_string(Scenario s);
Scenario scenario_from_string(const std::string& s);

class ModelError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Physical parameters. hbar = 1, time in fs, frequencies and rates in rad/fs
/// and 1/fs.
struct ModelParams {
  double omega_a = 1.0;   // qubit transition frequency
  double omega_c = 1.0;   // catalyst oscillator frequency
  double omega_d = 1.0;   // drive frequency
  double Omega = 0.2;     // drive amplitude
  double g = 0.2;         // qubit-catalyst coupling
  double gamma_D = 0.02;  // qubit dephasing rate
  double kappa_1 = 2.0;   // catalyst energy-loss rate
  std::size_t n_photon = 3;  // max retained Fock occupation; oscillator dimension is n_photon + 1
  Scenario scenario = Scenario::catalyzed;

  /// Throws ModelError when an invariant is broken.
  void validate() const;

  bool catalyzed() const { return scenario == Scenario::catalyzed; }
  std::size_t fock_dim() const { return n_photon + 1; }
  /// {2} when uncatalyzed, {2, n_photon + 1} when catalyzed.
  std::vector<std::size_t> dims() const;
};

/// One Lindblad channel rate * D[L].
struct Dissipator {
  Operator jump;
  double rate = 0.0;
  std::string name;
};

// Qubit-factor operator embedded in the full space (identity on the catalyst
// when catalyzed).
Operator embed_qubit(const ModelParams& p, const Operator& q);

Operator h_qb(const ModelParams& p);
Operator h_cat(const ModelParams& p);
Operator h_int(const ModelParams& p);
Operator h_drive(const ModelParams& p, double t);
/// Closed-form d/dt of h_drive: Omega * omega_d * cos(omega_d t) * sigma_x.
Operator h_drive_rate(const ModelParams& p, double t);
/// h_qb + h_drive(t) + h_int (the last only when catalyzed).
Operator h_zero(const ModelParams& p, double t);
/// h_zero + h_cat (the last only when catalyzed).
Operator h_total(const ModelParams& p, double t);

/// Total excitation number |e><e| x I + I x a^dagger a (catalyzed only).
Operator excitation_number(const ModelParams& p);
/// I x a^dagger a (catalyzed only).
Operator photon_number(const ModelParams& p);

/// Dephasing (sigma_z, gamma_D) always; catalyst loss (a, kappa_1) when
/// catalyzed. Zero-rate channels are kept.
std::vector<Dissipator> dissipators(const ModelParams& p);

/// |g> (x |0>) projector, the default initial state.
DensityMatrix ground_state(const ModelParams& p);

}  // namespace qbcat
