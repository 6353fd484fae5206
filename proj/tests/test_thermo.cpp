#include "doctest.h"

#include <cmath>
#include <cstring>
#include <random>

#include "oracles.hpp"
#include "qbcat/thermo.hpp"

using namespace qbcat;

namespace {

Operator half_sigma_z() { return pauli(Pauli::z) * cplx(0.5); }

DensityMatrix qubit(const oracle::Bloch& r) { return DensityMatrix(Operator::from_matrix(oracle::qubit_from_bloch(r))); }

SolverConfig short_run(double t_max, std::size_t points) {
  SolverConfig cfg;
  cfg.t_max = t_max;
  cfg.set_uniform_grid(points);
  return cfg;
}

// Trajectory holding fixed states at the given times; no integration involved.
Trajectory frozen(const std::vector<double>& times, const DensityMatrix& rho) {
  Trajectory tr;
  tr.times = times;
  tr.states.assign(times.size(), rho);
  tr.physicality.assign(times.size(), check_physicality(rho.op()));
  return tr;
}

}  // namespace

TEST_CASE("passive_state") {
  const DensityMatrix excited = DensityMatrix::basis({2}, 0);
  const DensityMatrix ground = DensityMatrix::basis({2}, 1);
  CHECK(max_abs_diff(passive_state(excited, half_sigma_z()).op(), ground.op()) <= 1e-12);

  const DensityMatrix mixed(Operator::from_matrix(0.5 * Matrix::Identity(2, 2)));
  CHECK(max_abs_diff(passive_state(mixed, pauli(Pauli::x)).op(), mixed.op()) <= 1e-12);

  Matrix passive = Matrix::Zero(2, 2);
  passive(0, 0) = 0.3;
  passive(1, 1) = 0.7;
  const DensityMatrix already(Operator::from_matrix(passive));
  CHECK(max_abs_diff(passive_state(already, half_sigma_z()).op(), already.op()) <= 1e-12);

  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix h = oracle::random_hermitian(rng, 4);
    const DensityMatrix rho(Operator::from_matrix(oracle::random_density(rng, 4)));
    const Matrix ps = passive_state(rho, Operator::from_matrix(h)).mat();
    CHECK(oracle::max_abs(ps * h - h * ps) <= 1e-10);
    CHECK((oracle::eigenvalues(ps) - oracle::eigenvalues(rho.mat())).cwiseAbs().maxCoeff() <= 1e-10);
  }

  CHECK_THROWS_AS(passive_state(mixed, Operator::identity({3})), HilbertError);
  Matrix nonherm = Matrix::Zero(2, 2);
  nonherm(0, 1) = 1.0;
  CHECK_THROWS_AS(passive_state(mixed, Operator::from_matrix(nonherm)), HilbertError);
}

TEST_CASE("ergotropy examples") {
  CHECK(ergotropy(DensityMatrix::basis({2}, 0), half_sigma_z()) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(std::abs(ergotropy(qubit({0, 0, 0}), half_sigma_z())) <= 1e-15);
  CHECK(std::abs(ergotropy(qubit({0, 0, 0}), pauli(Pauli::z) * cplx(3.7))) <= 1e-15);
  CHECK(ergotropy(qubit({0.6, 0, 0}), half_sigma_z()) == doctest::Approx(0.3).epsilon(1e-14));
  CHECK(std::abs(oracle::ergotropy_brute_force(oracle::qubit_from_bloch({0.6, 0, 0}), half_sigma_z().mat()) - 0.3) <=
        1e-14);
}

TEST_CASE("ergotropy against two independent oracles on random qubits") {
  std::mt19937_64 rng(20261015);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const oracle::Bloch r = oracle::random_bloch(rng);
    const DensityMatrix rho = qubit(r);
    const double e = ergotropy(rho, half_sigma_z());
    worst = std::max(worst, std::abs(e - oracle::qubit_ergotropy_closed_form(r, 1.0)));
    worst = std::max(worst, std::abs(e - oracle::ergotropy_brute_force(rho.mat(), half_sigma_z().mat())));
    CHECK(e >= -1e-10);
    CHECK(e <= (rho.mat() * half_sigma_z().mat()).trace().real() + 0.5 + 1e-12);
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("ergotropy on larger spaces matches brute force") {
  std::mt19937_64 rng(4);
  for (Eigen::Index n = 2; n <= 6; ++n) {
    for (int trial = 0; trial < 10; ++trial) {
      const Matrix h = oracle::random_hermitian(rng, n);
      const DensityMatrix rho(Operator::from_matrix(oracle::random_density(rng, n)));
      const double e = ergotropy(rho, Operator::from_matrix(h));
      CHECK(std::abs(e - oracle::ergotropy_brute_force(rho.mat(), h)) <= 1e-10);
      CHECK(e >= -1e-10);
    }
  }
}

TEST_CASE("ergotropy vanishes on diagonal states with descending populations") {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 0.5);
  for (int trial = 0; trial < 50; ++trial) {
    Matrix m = Matrix::Zero(2, 2);
    const double pe = u(rng);
    m(0, 0) = pe;
    m(1, 1) = 1 - pe;
    CHECK(std::abs(ergotropy(DensityMatrix(Operator::from_matrix(m)), half_sigma_z())) <= 1e-10);
  }
}

TEST_CASE("catalyst_energy") {
  ModelParams p;
  const std::size_t nf = p.fock_dim();
  CHECK(catalyst_energy(DensityMatrix::basis(p.dims(), nf), p) == 0.0);  // |g,0>
  CHECK(catalyst_energy(DensityMatrix::basis(p.dims(), nf + 2), p) == doctest::Approx(2.0));  // |g,2>

  Matrix m = Matrix::Zero(8, 8);
  m(nf, nf) = 0.5;
  m(nf + 1, nf + 1) = 0.5;
  CHECK(catalyst_energy(DensityMatrix(Operator(p.dims(), m)), p) == doctest::Approx(0.5));

  ModelParams u;
  u.scenario = Scenario::uncatalyzed;
  CHECK_THROWS_AS(catalyst_energy(DensityMatrix::basis({2}, 1), u), ModelError);
}

TEST_CASE("drive power") {
  ModelParams p;
  p.scenario = Scenario::uncatalyzed;
  p.Omega = 0.5;
  p.omega_d = 1.0;
  Eigen::VectorXcd psi(2);
  psi << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  const Trajectory tr = frozen({0.0, 0.5, 1.0}, DensityMatrix::pure({2}, psi));
  const auto pw = drive_power_exact(tr, p);
  CHECK(pw[0] == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(pw[1] == doctest::Approx(0.5 * std::cos(0.5)).epsilon(1e-14));

  SolverConfig cfg;
  const auto pc = drive_power_central(tr, p, cfg);
  for (std::size_t i = 0; i < pw.size(); ++i) CHECK(std::abs(pc[i] - pw[i]) <= 1e-6 * 0.5);

  const Trajectory g = frozen({0.0}, DensityMatrix::basis({2}, 1));
  CHECK(drive_power_exact(g, p)[0] == 0.0);

  ModelParams off = p;
  off.Omega = 0.0;
  for (double v : drive_power_exact(tr, off)) CHECK(v == 0.0);
}

TEST_CASE("energy flux vanishes where it must") {
  SUBCASE("closed undriven qubit") {
    ModelParams p;
    p.scenario = Scenario::uncatalyzed;
    p.Omega = 0.0;
    p.gamma_D = 0.0;
    Eigen::VectorXcd psi(2);
    psi << 0.6, cplx(0.0, 0.8);
    const Trajectory tr = integrate(DensityMatrix::pure({2}, psi), p, short_run(5.0, 51));
    for (double j : energy_flux_exact(tr, p)) CHECK(std::abs(j) <= 1e-15);
    const auto r = first_law_check(tr, p, short_run(5.0, 51));
    for (double v : r) CHECK(std::abs(v) <= 1e-12);
  }
  SUBCASE("closed driven qubit") {
    ModelParams p;
    p.scenario = Scenario::uncatalyzed;
    p.gamma_D = 0.0;
    const Trajectory tr = integrate(ground_state(p), p, short_run(5.0, 51));
    for (double j : energy_flux_exact(tr, p)) CHECK(std::abs(j) <= 1e-15);
  }
  SUBCASE("pure dephasing moves no sigma_z energy") {
    ModelParams p;
    p.scenario = Scenario::uncatalyzed;
    p.Omega = 0.0;
    p.gamma_D = 0.05;
    Eigen::VectorXcd psi(2);
    psi << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
    const Trajectory tr = integrate(DensityMatrix::pure({2}, psi), p, short_run(5.0, 51));
    for (double j : energy_flux_exact(tr, p)) CHECK(std::abs(j) <= 1e-15);
  }
}

TEST_CASE("flux decomposition") {
  ModelParams p;
  p.kappa_1 = 0.5;
  const SolverConfig cfg = short_run(20.0, 201);
  const Trajectory tr = integrate(ground_state(p), p, cfg);
  const auto j = energy_flux_exact(tr, p);
  const auto ch = flux_decomposition(tr, p);
  for (std::size_t i = 0; i < j.size(); ++i)
    CHECK(std::abs(j[i] - (ch[i].unitary_cat + ch[i].dephasing + ch[i].kappa)) <= 1e-10);

  ModelParams g0 = p;
  g0.g = 0.0;
  const Trajectory t0 = integrate(ground_state(g0), g0, cfg);
  for (const auto& c : flux_decomposition(t0, g0)) CHECK(c.unitary_cat == 0.0);

  ModelParams k0 = p;
  k0.kappa_1 = 0.0;
  const Trajectory tk = integrate(ground_state(k0), k0, cfg);
  for (const auto& c : flux_decomposition(tk, k0)) CHECK(c.kappa == 0.0);

  ModelParams u = p;
  u.scenario = Scenario::uncatalyzed;
  const Trajectory tu = integrate(ground_state(u), u, cfg);
  CHECK_THROWS_AS(flux_decomposition(tu, u), ModelError);
}

TEST_CASE("exact and central derivatives agree") {
  const ModelParams p;
  const SolverConfig cfg = short_run(40.0, 401);
  const Trajectory tr = integrate(ground_state(p), p, cfg);
  const auto je = energy_flux_exact(tr, p);
  const auto jc = energy_flux_central(tr, p, cfg);
  const auto pe = drive_power_exact(tr, p);
  const auto pc = drive_power_central(tr, p, cfg);
  SolverConfig half = cfg;
  half.fd_step /= 2;
  const auto jh = energy_flux_central(tr, p, half);
  // Same energy-rate scale as the first-law check.
  double scale = 0.0, dj = 0.0, dp = 0.0, extrapolated = 0.0;
  for (std::size_t i = 0; i < je.size(); ++i) {
    scale = std::max(scale, std::abs(je[i]) + std::abs(pe[i]));
    dj = std::max(dj, std::abs(je[i] - jc[i]));
    dp = std::max(dp, std::abs(pe[i] - pc[i]));
    extrapolated = std::max(extrapolated, std::abs(je[i] - (4 * jh[i] - jc[i]) / 3));
  }
  CHECK(dj <= 1e-6 * scale);
  CHECK(dp <= 1e-6 * scale);
  // The remaining gap is the O(fd_step^2) truncation term alone.
  CHECK(extrapolated <= 1e-12 * scale);

  SolverConfig coarse = cfg;
  coarse.fd_step = 1.0;
  CHECK_THROWS_AS(energy_flux_central(tr, p, coarse), std::invalid_argument);
}

TEST_CASE("first law residual on a short baseline run") {
  const ModelParams p;
  const SolverConfig cfg = short_run(40.0, 401);
  const Trajectory tr = integrate(ground_state(p), p, cfg);
  const auto j = energy_flux_exact(tr, p);
  const auto pw = drive_power_exact(tr, p);
  double scale = 0.0;
  for (std::size_t i = 0; i < j.size(); ++i) scale = std::max(scale, std::abs(j[i]) + std::abs(pw[i]));
  for (FdMode mode : {FdMode::exact, FdMode::central}) {
    const auto r = first_law_check(tr, p, cfg, mode);
    double worst = 0.0;
    for (double v : r) worst = std::max(worst, std::abs(v));
    CHECK(worst <= 1e-4 * scale);
  }
}

TEST_CASE("thermo_series") {
  SUBCASE("ground start") {
    const ModelParams p;
    const SolverConfig cfg = short_run(1.0, 11);
    const Trajectory tr = integrate(ground_state(p), p, cfg);
    const auto rec = thermo_series(tr, p, cfg);
    CHECK(rec[0].t == 0.0);
    CHECK(std::abs(rec[0].ergotropy) <= 1e-15);
    CHECK(rec[0].e_cat == 0.0);
    CHECK(rec[0].power_P == 0.0);
  }
  SUBCASE("dephasing-only ergotropy decays as (omega_a/2) e^{-2 gamma t}") {
    ModelParams p;
    p.scenario = Scenario::uncatalyzed;
    p.Omega = 0.0;
    p.gamma_D = 0.05;
    p.omega_a = 1.4;
    Eigen::VectorXcd psi(2);
    psi << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
    const SolverConfig cfg = short_run(20.0, 201);
    const Trajectory tr = integrate(DensityMatrix::pure({2}, psi), p, cfg);
    for (const auto& r : thermo_series(tr, p, cfg, FdMode::exact)) {
      const double expected = 0.7 * std::exp(-0.1 * r.t);
      CHECK(std::abs(r.ergotropy - expected) <= 1e-6 * expected);
      CHECK(std::isnan(r.flux_J_fd));
      CHECK(r.flux_unitary_cat == 0.0);
      CHECK(r.flux_kappa == 0.0);
    }
  }
  SUBCASE("parallel and serial kernels are bit-identical") {
    const ModelParams p;
    const SolverConfig cfg = short_run(20.0, 201);
    const Trajectory tr = integrate(ground_state(p), p, cfg);
    for (FdMode mode : {FdMode::exact, FdMode::central, FdMode::both}) {
      const auto a = thermo_series(tr, p, cfg, mode);
      const auto b = thermo_series_serial(tr, p, cfg, mode);
      REQUIRE(a.size() == b.size());
      for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(std::memcmp(&a[i], &b[i], sizeof(ThermoRecord)) == 0);
        CHECK_NOTHROW(validate_record(a[i]));
      }
    }
  }
  SUBCASE("validate_record rejects broken records") {
    ThermoRecord r;
    r.ergotropy = -1e-6;
    CHECK_THROWS(validate_record(r));
    ThermoRecord s;
    s.flux_J_exact = 1.0;
    s.flux_dephasing = 0.5;
    CHECK_THROWS(validate_record(s));
  }
  SUBCASE("fd mode strings") {
    for (FdMode m : {FdMode::exact, FdMode::central, FdMode::both}) CHECK(fd_mode_from_string(to_string(m)) == m);
    CHECK_THROWS(fd_mode_from_string("forward"));
  }
}
