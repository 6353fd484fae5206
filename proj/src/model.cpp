#include "qbcat/model.hpp"

#include <cmath>

namespace qbcat {

namespace {

void require_catalyzed(const ModelParams& p, const char* what) {
  if (!p.catalyzed()) {
    throw ModelError(std::string(what) + " is only defined for the catalyzed scenario");
  }
}

Operator lowering(const ModelParams& p) { return tensor(Operator::identity({2}), annihilation(p.fock_dim())); }

}  // namespace

std::string to_string(Scenario s) { return s == Scenario::catalyzed ? "catalyzed" : "uncatalyzed"; }

Scenario scenario_from_string(const std::string& s) {
  if (s == "catalyzed") return Scenario::catalyzed;
  if (s == "uncatalyzed") return Scenario::uncatalyzed;
  throw ModelError("unknown scenario '" + s + "'");
}

void ModelParams::validate() const {
  auto finite_nonneg = [](double v, const char* name) {
    if (!std::isfinite(v) || v < 0.0) throw ModelError(std::string(name) + " must be finite and >= 0");
  };
  finite_nonneg(omega_a, "omega_a");
  finite_nonneg(omega_c, "omega_c");
  finite_nonneg(omega_d, "omega_d");
  finite_nonneg(Omega, "Omega");
  finite_nonneg(g, "g");
  finite_nonneg(gamma_D, "gamma_D");
  finite_nonneg(kappa_1, "kappa_1");
  if (catalyzed() && n_photon < 1) throw ModelError("n_photon must be >= 1 in the catalyzed scenario");
}

std::vector<std::size_t> ModelParams::dims() const {
  if (catalyzed()) return {2, fock_dim()};
  return {2};
}

Operator embed_qubit(const ModelParams& p, const Operator& q) {
  if (!p.catalyzed()) return q;
  return tensor(q, Operator::identity({p.fock_dim()}));
}

Operator h_qb(const ModelParams& p) { return embed_qubit(p, pauli(Pauli::z) * (0.5 * p.omega_a)); }

Operator h_cat(const ModelParams& p) {
  require_catalyzed(p, "h_cat");
  const Operator a = lowering(p);
  return (a.adjoint() * a) * p.omega_c;
}

Operator h_int(const ModelParams& p) {
  require_catalyzed(p, "h_int");
  const Operator a = lowering(p);
  const Operator sp = embed_qubit(p, pauli(Pauli::plus));
  const Operator sm = embed_qubit(p, pauli(Pauli::minus));
  return (sp * a + sm * a.adjoint()) * p.g;
}

Operator h_drive(const ModelParams& p, double t) {
  return embed_qubit(p, pauli(Pauli::x) * (p.Omega * std::sin(p.omega_d * t)));
}

Operator h_drive_rate(const ModelParams& p, double t) {
  return embed_qubit(p, pauli(Pauli::x) * (p.Omega * p.omega_d * std::cos(p.omega_d * t)));
}

Operator h_zero(const ModelParams& p, double t) {
  Operator h = h_qb(p) + h_drive(p, t);
  if (p.catalyzed()) h = h + h_int(p);
  return h;
}

Operator h_total(const ModelParams& p, double t) {
  Operator h = h_zero(p, t);
  if (p.catalyzed()) h = h + h_cat(p);
  return h;
}

Operator excitation_number(const ModelParams& p) {
  require_catalyzed(p, "excitation_number");
  return embed_qubit(p, pauli(Pauli::plus) * pauli(Pauli::minus)) + photon_number(p);
}

Operator photon_number(const ModelParams& p) {
  require_catalyzed(p, "photon_number");
  const Operator a = lowering(p);
  return a.adjoint() * a;
}

std::vector<Dissipator> dissipators(const ModelParams& p) {
  std::vector<Dissipator> out;
  out.push_back({embed_qubit(p, pauli(Pauli::z)), p.gamma_D, "dephasing"});
  if (p.catalyzed()) out.push_back({lowering(p), p.kappa_1, "kappa"});
  return out;
}

DensityMatrix ground_state(const ModelParams& p) {
  // |g> is index 1 of the qubit factor; with the catalyst in vacuum the
  // composite index is 1 * fock_dim + 0.
  const auto dims = p.dims();
  const std::size_t index = p.catalyzed() ? p.fock_dim() : 1;
  return DensityMatrix::basis(dims, index);
}

}  // namespace qbcat
