#pragma once

// Independent reference routes used only by tests. Nothing here calls the
// library's eigensolver, ergotropy or integrator.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include <Eigen/Eigenvalues>

#include "qbcat/hilbert.hpp"

namespace oracle {

using qbcat::cplx;
using qbcat::Matrix;

inline Matrix random_matrix(std::mt19937_64& rng, Eigen::Index n) {
  std::normal_distribution<double> g;
  Matrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = cplx(g(rng), g(rng));
  return m;
}

inline Matrix random_hermitian(std::mt19937_64& rng, Eigen::Index n) {
  const Matrix m = random_matrix(rng, n);
  return 0.5 * (m + m.adjoint());
}

/// Random full-rank density matrix: G G^dagger / Tr.
inline Matrix random_density(std::mt19937_64& rng, Eigen::Index n) {
  const Matrix m = random_matrix(rng, n);
  Matrix rho = m * m.adjoint();
  return rho / rho.trace().real();
}

/// Eigenvalues by Eigen's own self-adjoint solver (ascending).
inline Eigen::VectorXd eigenvalues(const Matrix& h) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (h + h.adjoint()));
  return es.eigenvalues();
}

/// exp(-i H t) for time-independent Hermitian H, via Eigen's solver.
inline Matrix unitary(const Matrix& h, double t) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (h + h.adjoint()));
  Eigen::VectorXcd phases(h.rows());
  for (Eigen::Index k = 0; k < h.rows(); ++k) phases(k) = std::exp(cplx(0.0, -es.eigenvalues()(k) * t));
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

/// Ergotropy by minimizing sum_j p_{pi(j)} e_j over every permutation pi of
/// the state's eigenvalues onto the energy levels.
inline double ergotropy_brute_force(const Matrix& rho, const Matrix& h) {
  const Eigen::VectorXd p = eigenvalues(rho);
  const Eigen::VectorXd e = eigenvalues(h);
  std::vector<int> perm(static_cast<std::size_t>(p.size()));
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double s = 0.0;
    for (std::size_t j = 0; j < perm.size(); ++j) s += p(perm[j]) * e(static_cast<Eigen::Index>(j));
    best = std::min(best, s);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return (rho * h).trace().real() - best;
}

struct Bloch {
  double x, y, z;
};

/// Qubit state from a Bloch vector in the {|e>, |g>} basis (sigma_z = diag(1,-1)).
inline Matrix qubit_from_bloch(const Bloch& r) {
  Matrix m(2, 2);
  m << 0.5 * (1 + r.z), 0.5 * cplx(r.x, -r.y), 0.5 * cplx(r.x, r.y), 0.5 * (1 - r.z);
  return m;
}

/// (omega_a / 2)(r_z + |r|).
inline double qubit_ergotropy_closed_form(const Bloch& r, double omega_a) {
  return 0.5 * omega_a * (r.z + std::sqrt(r.x * r.x + r.y * r.y + r.z * r.z));
}

/// Uniform sample from the Bloch ball.
inline Bloch random_bloch(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double x = g(rng), y = g(rng), z = g(rng);
  const double s = std::cbrt(u(rng)) / std::sqrt(x * x + y * y + z * z);
  return {x * s, y * s, z * s};
}

inline double max_abs(const Matrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace oracle
