#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "qbcat/dynamics.hpp"

using namespace qbcat;

namespace {

ModelParams quiet(Scenario s) {
  ModelParams p;
  p.scenario = s;
  p.Omega = 0.0;
  p.g = 0.0;
  p.gamma_D = 0.0;
  p.kappa_1 = 0.0;
  return p;
}

SolverConfig short_run(double t_max, std::size_t points) {
  SolverConfig cfg;
  cfg.t_max = t_max;
  cfg.set_uniform_grid(points);
  return cfg;
}

DensityMatrix plus_state() {
  Eigen::VectorXcd psi(2);
  psi << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  return DensityMatrix::pure({2}, psi);
}

}  // namespace

TEST_CASE("lindblad_rhs") {
  SUBCASE("stationary eigenstate") {
    ModelParams p = quiet(Scenario::catalyzed);
    const DensityMatrix rho = DensityMatrix::basis(p.dims(), 2);
    CHECK(oracle::max_abs(lindblad_rhs(rho, 0.0, p).mat()) == 0.0);
  }
  SUBCASE("dephasing on |+><+| (hand expansion)") {
    ModelParams p = quiet(Scenario::uncatalyzed);
    p.omega_a = 0.0;
    p.gamma_D = 0.05;
    const Matrix r = lindblad_rhs(plus_state(), 0.0, p).mat();
    CHECK(std::abs(r(0, 0)) <= 1e-15);
    CHECK(std::abs(r(1, 1)) <= 1e-15);
    CHECK(std::abs(r(0, 1) - cplx(-2 * 0.05 * 0.5)) <= 1e-15);
    CHECK(std::abs(r(1, 0) - cplx(-2 * 0.05 * 0.5)) <= 1e-15);
  }
  SUBCASE("traceless and Hermitian on random inputs") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(0.0, 2.0);
    for (int trial = 0; trial < 40; ++trial) {
      ModelParams p;
      p.omega_a = u(rng);
      p.omega_c = u(rng);
      p.Omega = u(rng);
      p.g = u(rng);
      p.gamma_D = u(rng);
      p.kappa_1 = u(rng);
      p.n_photon = 1 + static_cast<std::size_t>(trial % 4);
      p.scenario = trial % 4 == 0 ? Scenario::uncatalyzed : Scenario::catalyzed;
      const auto n = static_cast<Eigen::Index>(p.catalyzed() ? 2 * p.fock_dim() : 2);
      const DensityMatrix rho(Operator(p.dims(), oracle::random_density(rng, n)));
      const Operator r = lindblad_rhs(rho, 10 * u(rng), p);
      CHECK(std::abs(r.trace()) <= 1e-12);
      CHECK(r.hermiticity_residual() <= 1e-12);
    }
  }
  SUBCASE("dimension mismatch") {
    CHECK_THROWS_AS(lindblad_rhs(plus_state(), 0.0, ModelParams{}), ModelError);
  }
}

TEST_CASE("liouvillian matches the matrix form") {
  ModelParams p;
  p.Omega = 0.4;
  p.gamma_D = 0.1;
  p.kappa_1 = 0.7;
  const LindbladGenerator gen(p);
  std::mt19937_64 rng(1);
  const Matrix rho = oracle::random_density(rng, 8);
  for (double t : {0.0, 0.9, 4.2}) {
    const Matrix lhs = gen.rhs(t, rho);
    Eigen::VectorXcd v = Eigen::Map<const Eigen::VectorXcd>(rho.data(), rho.size());
    Eigen::VectorXcd w = gen.liouvillian(t) * v;
    const Matrix rhs = Eigen::Map<Matrix>(w.data(), 8, 8);
    CHECK(oracle::max_abs(lhs - rhs) <= 1e-13);
  }
}

TEST_CASE("check_physicality") {
  const PhysicalityReport half = check_physicality(Operator::from_matrix(0.5 * Matrix::Identity(2, 2)));
  CHECK(half.ok());
  CHECK(half.trace_deviation == 0.0);
  CHECK(half.hermiticity == 0.0);
  CHECK(half.min_eigenvalue == doctest::Approx(0.5));

  Matrix bad = Matrix::Zero(2, 2);
  bad(0, 0) = 1.2;
  bad(1, 1) = -0.2;
  const PhysicalityReport r = check_physicality(Operator::from_matrix(bad));
  CHECK(r.positivity_violation);
  CHECK_FALSE(r.ok());
  CHECK(r.min_eigenvalue == doctest::Approx(-0.2));
  CHECK_FALSE(r.trace_violation);
}

TEST_CASE("free evolution keeps populations and matches exp(-iHt)") {
  ModelParams p = quiet(Scenario::catalyzed);
  p.omega_c = 1.3;
  std::mt19937_64 rng(17);
  const DensityMatrix rho0(Operator(p.dims(), oracle::random_density(rng, 8)));
  SolverConfig cfg = short_run(5.0, 11);
  const Trajectory tr = integrate(rho0, p, cfg);
  const Matrix h = h_total(p, 0.0).mat();
  for (std::size_t i = 0; i < tr.times.size(); ++i) {
    const Matrix u = oracle::unitary(h, tr.times[i]);
    const Matrix expected = u * rho0.mat() * u.adjoint();
    CHECK(oracle::max_abs(tr.states[i].mat() - expected) <= 1e-6);
    CHECK(oracle::max_abs((tr.states[i].mat() - rho0.mat()).diagonal()) <= 1e-12);
  }
}

TEST_CASE("pure dephasing: rho_01(10 fs) = 0.5 e^-1") {
  ModelParams p = quiet(Scenario::uncatalyzed);
  p.omega_a = 0.0;
  p.gamma_D = 0.05;
  const Trajectory tr = integrate(plus_state(), p, short_run(10.0, 101));
  const cplx r01 = tr.states.back().mat()(0, 1);
  CHECK(std::abs(r01 - cplx(0.18393972058572117)) <= 1e-6 * 0.18393972058572117);
  for (std::size_t i = 0; i < tr.times.size(); ++i) {
    const double expected = 0.5 * std::exp(-2 * 0.05 * tr.times[i]);
    CHECK(std::abs(tr.states[i].mat()(0, 1) - cplx(expected)) <= 1e-6 * expected);
  }
}

TEST_CASE("damped cavity: <n>(10 fs) = e^-1") {
  ModelParams p = quiet(Scenario::catalyzed);
  p.kappa_1 = 0.1;
  const DensityMatrix rho0 = DensityMatrix::basis(p.dims(), p.fock_dim() + 1);  // |g,1>
  const Trajectory tr = integrate(rho0, p, short_run(10.0, 101));
  const Operator n = photon_number(p);
  for (std::size_t i = 0; i < tr.times.size(); ++i) {
    const double got = (tr.states[i].mat() * n.mat()).trace().real();
    const double expected = std::exp(-0.1 * tr.times[i]);
    CHECK(std::abs(got - expected) <= 1e-6 * expected);
  }
  CHECK((tr.states.back().mat() * n.mat()).trace().real() == doctest::Approx(0.36787944117144233).epsilon(1e-6));
}

TEST_CASE("vacuum Rabi: P_e = cos^2(g t)") {
  ModelParams p = quiet(Scenario::catalyzed);
  p.g = 0.1;
  const DensityMatrix rho0 = DensityMatrix::basis(p.dims(), 0);  // |e,0>
  const double t_end = std::numbers::pi / (2 * p.g);
  const Trajectory tr = integrate(rho0, p, short_run(t_end, 51));
  const Operator pe = embed_qubit(p, Operator::from_matrix((pauli(Pauli::plus) * pauli(Pauli::minus)).mat()));
  for (std::size_t i = 0; i < tr.times.size(); ++i) {
    const double got = (tr.states[i].mat() * pe.mat()).trace().real();
    const double c = std::cos(p.g * tr.times[i]);
    CHECK(std::abs(got - c * c) <= 1e-6);
  }
  CHECK(std::abs((tr.states.back().mat() * pe.mat()).trace().real()) <= 1e-6);
}

TEST_CASE("solver errors") {
  const ModelParams p;
  const DensityMatrix rho0 = ground_state(p);

  SUBCASE("step limit") {
    SolverConfig cfg;
    cfg.max_steps = 10;
    try {
      integrate(rho0, p, cfg);
      FAIL("expected StepLimitExceeded");
    } catch (const StepLimitExceeded& e) {
      CHECK(e.kind() == "StepLimitExceeded");
      CHECK(e.time() > 0.0);
      CHECK(e.time() < cfg.t_max);
    }
  }
  SUBCASE("stiff loss with explicit-only policy underflows") {
    ModelParams stiff = p;
    stiff.kappa_1 = 5000.0;
    // Explicit stability caps the step near 2e-4 fs, below dt_min.
    SolverConfig cfg = short_run(2.0, 21);
    cfg.dt_min = 1e-3;
    cfg.stiffness_policy = StiffnessPolicy::explicit_only;
    CHECK_THROWS_AS(integrate(ground_state(stiff), stiff, cfg), StepUnderflow);
  }
  SUBCASE("unphysical initial state is reported at the first sample") {
    Matrix bad = Matrix::Zero(8, 8);
    bad(4, 4) = 1.001;
    bad(0, 0) = -0.001;
    const DensityMatrix loose(Operator(p.dims(), bad), StateTolerances{1, 1, 1});
    CHECK_THROWS_AS(integrate(loose, p, short_run(1.0, 11)), PhysicalityViolation);
  }
  SUBCASE("dims mismatch") {
    CHECK_THROWS(integrate(plus_state(), p, short_run(1.0, 11)));
  }
}

TEST_CASE("solver config validation") {
  SolverConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  CHECK(cfg.output_grid.size() == 3001);
  CHECK(cfg.output_grid.back() == 300.0);

  SolverConfig a = cfg;
  a.dt_min = 0.0;
  CHECK_THROWS_AS(a.validate(), std::invalid_argument);
  SolverConfig b = cfg;
  b.dt_init = 0.1;
  CHECK_THROWS_AS(b.validate(), std::invalid_argument);
  SolverConfig c = cfg;
  c.output_grid = {0.0, 2.0, 1.0};
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  SolverConfig d = cfg;
  d.output_grid = {0.0, 301.0};
  CHECK_THROWS_AS(d.validate(), std::invalid_argument);
  SolverConfig e = cfg;
  e.max_steps = 0;
  CHECK_THROWS_AS(e.validate(), std::invalid_argument);
  SolverConfig f = cfg;
  f.rel_tol = 0.0;
  CHECK_THROWS_AS(f.validate(), std::invalid_argument);
}

TEST_CASE("stiffness switching") {
  ModelParams stiff;
  stiff.kappa_1 = 5000.0;
  stiff.g = 0.5;
  // The loss mode is never excited far from equilibrium, so only stability
  // (not accuracy) limits the explicit step.
  const DensityMatrix rho0 = ground_state(stiff);
  SolverConfig sw = short_run(2.0, 21);
  sw.dt_min = 1e-4;
  const Trajectory implicit_run = integrate(rho0, stiff, sw);
  CHECK(implicit_run.diagnostics.implicit_steps > 0);
  REQUIRE_FALSE(implicit_run.diagnostics.switches.empty());
  CHECK(implicit_run.diagnostics.switches.front().to_implicit);
  CHECK(implicit_run.diagnostics.factorizations > 0);

  SolverConfig ex = sw;
  ex.dt_min = 1e-9;
  ex.stiffness_policy = StiffnessPolicy::explicit_only;
  const Trajectory explicit_run = integrate(rho0, stiff, ex);
  CHECK(explicit_run.diagnostics.implicit_steps == 0);
  for (std::size_t i = 0; i < explicit_run.times.size(); ++i) {
    CHECK(oracle::max_abs(implicit_run.states[i].mat() - explicit_run.states[i].mat()) <= 1e-6);
    CHECK(implicit_run.physicality[i].ok());
  }
}

TEST_CASE("baseline trajectory is physical and deterministic") {
  const ModelParams p;
  SolverConfig cfg = short_run(30.0, 301);
  const Trajectory a = integrate(ground_state(p), p, cfg);
  const Trajectory b = integrate(ground_state(p), p, cfg);
  REQUIRE(a.times.size() == 301);
  for (std::size_t i = 0; i < a.times.size(); ++i) {
    CHECK(a.times[i] == b.times[i]);
    CHECK((a.states[i].mat() - b.states[i].mat()).cwiseAbs().maxCoeff() == 0.0);
    const PhysicalityReport r = check_physicality(a.states[i].op());
    CHECK(r.trace_deviation <= 1e-8);
    CHECK(r.hermiticity <= 1e-10);
    CHECK(r.min_eigenvalue >= -1e-8);
  }
  CHECK(a.diagnostics.accepted <= cfg.max_steps);
}

TEST_CASE("step halving changes the trajectory by at most 1e-6") {
  const ModelParams p;
  SolverConfig cfg = short_run(50.0, 501);
  SolverConfig fine = cfg;
  fine.dt_max /= 2;
  fine.rel_tol /= 10;
  const Trajectory a = integrate(ground_state(p), p, cfg);
  const Trajectory b = integrate(ground_state(p), p, fine);
  double worst = 0.0;
  for (std::size_t i = 0; i < a.times.size(); ++i)
    worst = std::max(worst, oracle::max_abs(a.states[i].mat() - b.states[i].mat()));
  CHECK(worst <= 1e-6);
}

TEST_CASE("decoupled catalyst reproduces the bare qubit") {
  ModelParams c;
  c.g = 0.0;
  c.kappa_1 = 0.0;
  ModelParams u = c;
  u.scenario = Scenario::uncatalyzed;
  const SolverConfig cfg = short_run(60.0, 601);
  const Trajectory tc = integrate(ground_state(c), c, cfg);
  const Trajectory tu = integrate(ground_state(u), u, cfg);
  double worst = 0.0;
  for (std::size_t i = 0; i < tc.times.size(); ++i)
    worst = std::max(worst, oracle::max_abs(partial_trace(tc.states[i].op(), 0).mat() - tu.states[i].mat()));
  CHECK(worst <= 1e-8);
}

TEST_CASE("propagate_short agrees with exp(-iHt) for static H") {
  ModelParams p = quiet(Scenario::catalyzed);
  p.g = 0.3;
  const LindbladGenerator gen(p);
  std::mt19937_64 rng(8);
  const Matrix rho = oracle::random_density(rng, 8);
  for (double dt : {0.001, -0.001, 0.0037}) {
    const Matrix u = oracle::unitary(gen.hamiltonian(0.0), dt);
    CHECK(oracle::max_abs(propagate_short(gen, rho, 0.0, dt) - u * rho * u.adjoint()) <= 1e-14);
  }
}
