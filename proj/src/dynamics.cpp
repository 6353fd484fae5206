#include "qbcat/dynamics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <sstream>

#include <Eigen/LU>

namespace qbcat {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

// TR-BDF2 with gamma = 2 - sqrt(2); the embedded third-order weights give the
// local error estimate.
const double kGamma = 2.0 - std::sqrt(2.0);
const double kD = kGamma / 2.0;
const double kW = std::sqrt(2.0) / 4.0;
const double kB1 = (1.0 - kW) / 3.0;
const double kB2 = (3.0 * kW + 1.0) / 3.0;
const double kB3 = kD / 3.0;

constexpr double kSafety = 0.9;
constexpr double kFacMin = 0.2;   // largest shrink per step is 1/5
constexpr double kFacMax = 10.0;  // largest growth per step
constexpr double kBeta = 0.04;    // PI controller memory
constexpr double kExplicitStability = 3.0;
constexpr std::size_t kMinImplicitSteps = 20;

constexpr double kShortSubstep = 1e-3;

Matrix project_physical(const Matrix& y) {
  Matrix out = 0.5 * (y + y.adjoint());
  const cplx tr = out.trace();
  if (std::abs(tr) > 0.0) out /= tr.real();
  return out;
}

double error_norm(const Matrix& err, const Matrix& y0, const Matrix& y1, double rel_tol, double abs_tol) {
  double acc = 0.0;
  const Eigen::Index n = err.size();
  for (Eigen::Index k = 0; k < n; ++k) {
    const double sc = abs_tol + rel_tol * std::max(std::abs(y0(k)), std::abs(y1(k)));
    const double r = std::abs(err(k)) / sc;
    acc += r * r;
  }
  return std::sqrt(acc / static_cast<double>(n));
}

Eigen::Map<const Eigen::VectorXcd> as_vec(const Matrix& m) { return {m.data(), m.size()}; }

Matrix from_vec(const Eigen::VectorXcd& v, Eigen::Index d) {
  return Eigen::Map<const Matrix>(v.data(), d, d);
}

Matrix commutator_super(const Matrix& h) {
  const Eigen::Index d = h.rows();
  const Matrix id = Matrix::Identity(d, d);
  return cplx{0.0, -1.0} * (kron(id, h) - kron(h.transpose(), id));
}

struct DpStep {
  Matrix y1;
  Matrix f1;
  Matrix err;
};

DpStep dopri_step(const LindbladGenerator& gen, double t, double h, const Matrix& y, const Matrix& k1) {
  const Matrix k2 = gen.rhs(t + c2 * h, y + h * (a21 * k1));
  const Matrix k3 = gen.rhs(t + c3 * h, y + h * (a31 * k1 + a32 * k2));
  const Matrix k4 = gen.rhs(t + c4 * h, y + h * (a41 * k1 + a42 * k2 + a43 * k3));
  const Matrix k5 = gen.rhs(t + c5 * h, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
  const Matrix k6 = gen.rhs(t + h, y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
  DpStep s;
  s.y1 = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
  s.f1 = gen.rhs(t + h, s.y1);
  s.err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * s.f1);
  return s;
}

struct TrStep {
  Matrix y1;
  Matrix f1;
  Matrix err;
};

TrStep trbdf2_step(const LindbladGenerator& gen, double t, double h, const Matrix& y, const Matrix& f0) {
  const auto d = static_cast<Eigen::Index>(gen.dim());
  const Eigen::Index n = d * d;
  const Matrix id = Matrix::Identity(n, n);

  const double tg = t + kGamma * h;
  const Matrix lg = gen.liouvillian(tg);
  Eigen::VectorXcd rhs1 = as_vec(y) + (kD * h) * as_vec(f0);
  const Eigen::VectorXcd z = Eigen::PartialPivLU<Matrix>(id - (kD * h) * lg).solve(rhs1);
  const Eigen::VectorXcd fg = lg * z;

  const Matrix l1 = gen.liouvillian(t + h);
  Eigen::VectorXcd rhs2 = as_vec(y) + (kW * h) * (as_vec(f0) + fg);
  const Eigen::VectorXcd y1 = Eigen::PartialPivLU<Matrix>(id - (kD * h) * l1).solve(rhs2);
  const Eigen::VectorXcd f1 = l1 * y1;

  TrStep s;
  s.y1 = from_vec(y1, d);
  s.f1 = from_vec(f1, d);
  s.err = from_vec(h * ((kB1 - kW) * as_vec(f0) + (kB2 - kW) * fg + (kB3 - kD) * f1), d);
  return s;
}

Matrix hermite(double theta, double h, const Matrix& y0, const Matrix& f0, const Matrix& y1, const Matrix& f1) {
  const double t2 = theta * theta;
  const double t3 = t2 * theta;
  const double h00 = 2 * t3 - 3 * t2 + 1;
  const double h10 = t3 - 2 * t2 + theta;
  const double h01 = -2 * t3 + 3 * t2;
  const double h11 = t3 - t2;
  return h00 * y0 + (h10 * h) * f0 + h01 * y1 + (h11 * h) * f1;
}

std::string fmt_time(double t) {
  std::ostringstream os;
  os.precision(10);
  os << t;
  return os.str();
}

}  // namespace

std::string to_string(StiffnessPolicy s) { return s == StiffnessPolicy::switching ? "switching" : "explicit_only"; }

StiffnessPolicy stiffness_policy_from_string(const std::string& s) {
  if (s == "switching") return StiffnessPolicy::switching;
  if (s == "explicit_only") return StiffnessPolicy::explicit_only;
  throw std::invalid_argument("unknown stiffness policy '" + s + "'");
}

std::vector<double> SolverConfig::uniform_grid(double t_max, std::size_t points) {
  std::vector<double> grid(points);
  if (points == 1) {
    grid[0] = 0.0;
    return grid;
  }
  for (std::size_t k = 0; k < points; ++k) {
    grid[k] = t_max * static_cast<double>(k) / static_cast<double>(points - 1);
  }
  return grid;
}

void SolverConfig::set_uniform_grid(std::size_t points) { output_grid = uniform_grid(t_max, points); }

void SolverConfig::validate() const {
  auto fail = [](const std::string& m) { throw std::invalid_argument("SolverConfig: " + m); };
  if (!(dt_min > 0.0)) fail("dt_min must be > 0");
  if (!(dt_min <= dt_init && dt_init <= dt_max && dt_max <= t_max)) {
    fail("need 0 < dt_min <= dt_init <= dt_max <= t_max");
  }
  if (max_steps < 1) fail("max_steps must be >= 1");
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) fail("tolerances must be > 0");
  if (!(fd_step > 0.0)) fail("fd_step must be > 0");
  if (output_grid.empty()) fail("output_grid must be non-empty");
  for (std::size_t k = 0; k < output_grid.size(); ++k) {
    const double t = output_grid[k];
    if (!(t >= 0.0 && t <= t_max)) fail("output_grid values must lie in [0, t_max]");
    if (k > 0 && !(t > output_grid[k - 1])) fail("output_grid must be strictly increasing");
  }
}

PhysicalityReport check_physicality(const Operator& rho, const StateTolerances& tol) {
  PhysicalityReport r;
  r.trace_deviation = std::abs(rho.trace() - 1.0);
  r.hermiticity = rho.hermiticity_residual();
  const Matrix sym = 0.5 * (rho.mat() + rho.mat().adjoint());
  r.min_eigenvalue = hermitian_eig(sym).values(0);
  r.trace_violation = r.trace_deviation > tol.trace;
  r.hermiticity_violation = r.hermiticity > tol.hermiticity;
  r.positivity_violation = r.min_eigenvalue < -tol.positivity;
  return r;
}

LindbladGenerator::LindbladGenerator(const ModelParams& p) : params_(p) {
  p.validate();
  h_static_ = h_qb(p).mat();
  if (p.catalyzed()) h_static_ += h_int(p).mat() + h_cat(p).mat();
  drive_ = embed_qubit(p, pauli(Pauli::x) * p.Omega).mat();

  const Eigen::Index d = h_static_.rows();
  const Matrix id = Matrix::Identity(d, d);
  super_static_ = commutator_super(h_static_);
  super_drive_ = commutator_super(drive_);

  spectral_bound_ = 2.0 * (h_static_.norm() + drive_.norm());
  for (const auto& diss : dissipators(p)) {
    Channel c{diss.jump.mat(), diss.jump.mat().adjoint(), Matrix{}, diss.rate};
    c.jump_dag_jump = c.jump_dag * c.jump;
    super_static_ += c.rate * (kron(c.jump.conjugate(), c.jump) - 0.5 * kron(id, c.jump_dag_jump) -
                               0.5 * kron(c.jump_dag_jump.transpose(), id));
    spectral_bound_ += 2.0 * c.rate * c.jump.squaredNorm();
    channels_.push_back(std::move(c));
  }
}

Matrix LindbladGenerator::hamiltonian(double t) const {
  return h_static_ + std::sin(params_.omega_d * t) * drive_;
}

Matrix LindbladGenerator::channel(std::size_t k, const Matrix& rho) const {
  const Channel& c = channels_.at(k);
  return c.rate * (c.jump * rho * c.jump_dag - 0.5 * (c.jump_dag_jump * rho + rho * c.jump_dag_jump));
}

Matrix LindbladGenerator::rhs(double t, const Matrix& rho) const {
  const Matrix h = hamiltonian(t);
  Matrix out = cplx{0.0, -1.0} * (h * rho - rho * h);
  for (const auto& c : channels_) {
    if (c.rate == 0.0) continue;
    out += c.rate * (c.jump * rho * c.jump_dag - 0.5 * (c.jump_dag_jump * rho + rho * c.jump_dag_jump));
  }
  return out;
}

Matrix LindbladGenerator::liouvillian(double t) const {
  return super_static_ + std::sin(params_.omega_d * t) * super_drive_;
}

Operator lindblad_rhs(const DensityMatrix& rho, double t, const ModelParams& p) {
  if (rho.dims() != p.dims()) {
    throw ModelError("lindblad_rhs: state dims do not match the model scenario");
  }
  const LindbladGenerator gen(p);
  return {rho.dims(), gen.rhs(t, rho.mat())};
}

Matrix propagate_short(const LindbladGenerator& gen, const Matrix& rho, double t, double dt) {
  const auto n = std::max<long>(1, static_cast<long>(std::ceil(std::abs(dt) / kShortSubstep - 1e-9)));
  const double h = dt / static_cast<double>(n);
  Matrix y = rho;
  for (long k = 0; k < n; ++k) {
    const double tk = t + static_cast<double>(k) * h;
    y = dopri_step(gen, tk, h, y, gen.rhs(tk, y)).y1;
  }
  return y;
}

Trajectory integrate(const DensityMatrix& rho0, const ModelParams& p, const SolverConfig& cfg) {
  cfg.validate();
  if (rho0.dims() != p.dims()) {
    throw ModelError("integrate: initial state dims do not match the model scenario");
  }
  const LindbladGenerator gen(p);
  const auto dims = rho0.dims();
  const StateTolerances tol{};

  Trajectory traj;
  traj.times.reserve(cfg.output_grid.size());
  traj.states.reserve(cfg.output_grid.size());
  traj.physicality.reserve(cfg.output_grid.size());
  StepDiagnostics& diag = traj.diagnostics;

  std::size_t next_out = 0;
  auto emit = [&](double t_out, const Matrix& raw) {
    const Matrix m = project_physical(raw);
    Operator op(dims, m);
    const PhysicalityReport rep = check_physicality(op, tol);
    if (!rep.ok()) {
      std::ostringstream os;
      os << "sampled state violates physicality at t=" << fmt_time(t_out) << " (trace dev " << rep.trace_deviation
         << ", hermiticity " << rep.hermiticity << ", min eigenvalue " << rep.min_eigenvalue << ")";
      throw PhysicalityViolation(os.str(), t_out);
    }
    traj.times.push_back(t_out);
    traj.states.emplace_back(std::move(op), StateTolerances{1.0, 1.0, 1.0});
    traj.physicality.push_back(rep);
  };

  double t = 0.0;
  Matrix y = rho0.mat();
  Matrix f = gen.rhs(t, y);
  ++diag.rhs_evaluations;

  while (next_out < cfg.output_grid.size() && cfg.output_grid[next_out] <= 0.0) {
    emit(cfg.output_grid[next_out], y);
    ++next_out;
  }

  const double t_end = cfg.output_grid.back();
  double h = std::min(cfg.dt_init, cfg.dt_max);
  double err_old = 1e-4;
  bool last_rejected = false;
  bool implicit = false;
  std::size_t implicit_run = 0;
  const std::size_t attempt_limit = 10 * cfg.max_steps + 100;
  std::size_t attempts = 0;

  while (t < t_end) {
    if (diag.accepted >= cfg.max_steps) {
      throw StepLimitExceeded("reached max_steps=" + std::to_string(cfg.max_steps) + " before t_max", t);
    }
    if (++attempts > attempt_limit) {
      throw StepLimitExceeded("too many rejected step attempts", t);
    }

    h = std::min(h, cfg.dt_max);
    bool final_step = false;
    if (t + h >= t_end || t_end - (t + h) < 1e-12 * std::max(1.0, t_end)) {
      h = t_end - t;
      final_step = true;
    }

    Matrix y1, f1, err;
    if (implicit) {
      TrStep s = trbdf2_step(gen, t, h, y, f);
      diag.factorizations += 2;
      diag.rhs_evaluations += 2;
      y1 = std::move(s.y1);
      f1 = std::move(s.f1);
      err = std::move(s.err);
    } else {
      DpStep s = dopri_step(gen, t, h, y, f);
      diag.rhs_evaluations += 6;
      y1 = std::move(s.y1);
      f1 = std::move(s.f1);
      err = std::move(s.err);
    }
    const double en = error_norm(err, y, y1, cfg.rel_tol, cfg.abs_tol);

    double h_new;
    if (en <= 1.0) {
      const double t1 = final_step ? t_end : t + h;
      y1 = project_physical(y1);

      while (next_out < cfg.output_grid.size() && cfg.output_grid[next_out] <= t1) {
        const double to = cfg.output_grid[next_out];
        if (to == t1) {
          emit(to, y1);
        } else {
          emit(to, hermite((to - t) / h, h, y, f, y1, f1));
        }
        ++next_out;
      }

      ++diag.accepted;
      if (implicit) {
        ++diag.implicit_steps;
        ++implicit_run;
      } else {
        ++diag.explicit_steps;
      }
      diag.max_stiffness_ratio = std::max(diag.max_stiffness_ratio, h * gen.spectral_bound());

      if (implicit) {
        const double fac = std::clamp(kSafety * std::pow(std::max(en, 1e-10), -1.0 / 3.0), kFacMin, 5.0);
        h_new = h * (last_rejected ? std::min(fac, 1.0) : fac);
      } else {
        const double fac11 = std::pow(std::max(en, 1e-10), 0.2 - 0.75 * kBeta);
        double fac = fac11 / std::pow(err_old, kBeta);
        fac = std::clamp(fac / kSafety, 1.0 / kFacMax, 1.0 / kFacMin);
        h_new = h / fac;
        if (last_rejected) h_new = std::min(h_new, h);
        err_old = std::max(en, 1e-4);
      }
      last_rejected = false;
      t = t1;
      y = std::move(y1);
      f = std::move(f1);
    } else {
      ++diag.rejected;
      if (implicit) {
        h_new = h * std::clamp(kSafety * std::pow(en, -1.0 / 3.0), kFacMin, 1.0);
      } else {
        const double fac11 = std::pow(en, 0.2 - 0.75 * kBeta);
        h_new = h / std::min(1.0 / kFacMin, fac11 / kSafety);
      }
      last_rejected = true;
    }

    if (t >= t_end) break;

    if (!implicit) {
      if (cfg.stiffness_policy == StiffnessPolicy::switching && h_new < 4.0 * cfg.dt_min) {
        implicit = true;
        implicit_run = 0;
        diag.switches.push_back({t, true});
        h_new = std::max(h_new, cfg.dt_min);
        last_rejected = false;
      } else if (h_new < cfg.dt_min) {
        throw StepUnderflow("explicit step fell below dt_min=" + fmt_time(cfg.dt_min), t);
      }
    } else {
      if (h_new < cfg.dt_min) {
        throw StepUnderflow("implicit step fell below dt_min=" + fmt_time(cfg.dt_min), t);
      }
      if (implicit_run >= kMinImplicitSteps && !last_rejected &&
          h_new * gen.spectral_bound() <= kExplicitStability && h_new >= 16.0 * cfg.dt_min) {
        implicit = false;
        diag.switches.push_back({t, false});
        err_old = 1e-4;
      }
    }
    h = h_new;
  }

  return traj;
}

}  // namespace qbcat
