#include "qbcat/thermo.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace qbcat {

namespace {

double re_trace_product(const Matrix& a, const Matrix& b) {
  // Re Tr[a b] without forming the product.
  return (a.transpose().cwiseProduct(b)).sum().real();
}

// Everything a per-sample kernel needs; built once per series.
struct SeriesContext {
  SeriesContext(const ModelParams& p, const SolverConfig& cfg)
      : params(p), gen(p), fd_step(cfg.fd_step) {
    h_qb_local = pauli(Pauli::z).mat() * (0.5 * p.omega_a);
    h0_static = h_qb(p).mat();
    if (p.catalyzed()) {
      h0_static += h_int(p).mat();
      h_cat_full = h_cat(p).mat();
    }
    drive = embed_qubit(p, pauli(Pauli::x) * p.Omega).mat();
  }

  Matrix h0(double t) const { return h0_static + std::sin(params.omega_d * t) * drive; }
  Matrix h0_rate(double t) const { return (params.omega_d * std::cos(params.omega_d * t)) * drive; }

  Matrix reduce(const Matrix& m) const {
    if (!params.catalyzed()) return m;
    return partial_trace(Operator(params.dims(), m), 0).mat();
  }

  ModelParams params;
  LindbladGenerator gen;
  double fd_step;
  Matrix h_qb_local;
  Matrix h0_static;
  Matrix h_cat_full;
  Matrix drive;
};

struct Neighbours {
  Matrix minus;
  Matrix plus;
};

Neighbours neighbours(const SeriesContext& ctx, const Matrix& rho, double t) {
  return {propagate_short(ctx.gen, rho, t, -ctx.fd_step), propagate_short(ctx.gen, rho, t, ctx.fd_step)};
}

FluxChannels channels_at(const SeriesContext& ctx, const Matrix& rho, const Matrix& h0) {
  FluxChannels c;
  if (ctx.params.catalyzed()) {
    const Matrix comm = cplx{0.0, -1.0} * (ctx.h_cat_full * rho - rho * ctx.h_cat_full);
    c.unitary_cat = re_trace_product(comm, h0);
    c.kappa = re_trace_product(ctx.gen.channel(1, rho), h0);
  }
  c.dephasing = re_trace_product(ctx.gen.channel(0, rho), h0);
  return c;
}

ThermoRecord record_at(const SeriesContext& ctx, const Trajectory& traj, std::size_t i, FdMode mode) {
  const double t = traj.times[i];
  const Matrix& rho = traj.states[i].mat();
  const double h = ctx.fd_step;

  ThermoRecord r;
  r.t = t;

  const Matrix rho_qb = ctx.reduce(rho);
  const Operator hq = Operator::from_matrix(ctx.h_qb_local);
  const DensityMatrix rq(Operator::from_matrix(0.5 * (rho_qb + rho_qb.adjoint())));
  r.ergotropy = ergotropy(rq, hq);
  r.e_qb_bare = re_trace_product(rho_qb, ctx.h_qb_local);

  const Matrix h0 = ctx.h0(t);
  r.e_internal = re_trace_product(rho, h0);
  if (ctx.params.catalyzed()) r.e_cat = re_trace_product(rho, ctx.h_cat_full);

  const Matrix rhs = ctx.gen.rhs(t, rho);
  r.flux_J_exact = re_trace_product(rhs, h0);
  r.flux_J_qb_local = re_trace_product(ctx.reduce(rhs), ctx.h_qb_local);
  r.power_P = re_trace_product(rho, ctx.h0_rate(t));

  const FluxChannels ch = channels_at(ctx, rho, h0);
  r.flux_unitary_cat = ch.unitary_cat;
  r.flux_dephasing = ch.dephasing;
  r.flux_kappa = ch.kappa;

  const Neighbours nb = neighbours(ctx, rho, t);
  const double de_dt =
      (re_trace_product(nb.plus, ctx.h0(t + h)) - re_trace_product(nb.minus, ctx.h0(t - h))) / (2.0 * h);

  double j_used = r.flux_J_exact;
  double p_used = r.power_P;
  if (mode == FdMode::exact) {
    r.flux_J_fd = std::numeric_limits<double>::quiet_NaN();
  } else {
    r.flux_J_fd = re_trace_product(nb.plus - nb.minus, h0) / (2.0 * h);
    if (mode == FdMode::central) {
      j_used = r.flux_J_fd;
      p_used = re_trace_product(rho, ctx.h0(t + h) - ctx.h0(t - h)) / (2.0 * h);
    }
  }
  r.first_law_residual = de_dt - j_used - p_used;

  if (i < traj.physicality.size()) {
    r.trace_dev = traj.physicality[i].trace_deviation;
    r.min_eig = traj.physicality[i].min_eigenvalue;
  }
  return r;
}

}  // namespace

std::string to_string(FdMode m) {
  switch (m) {
    case FdMode::exact:
      return "exact";
    case FdMode::central:
      return "central";
    case FdMode::both:
      return "both";
  }
  return "both";
}

FdMode fd_mode_from_string(const std::string& s) {
  if (s == "exact") return FdMode::exact;
  if (s == "central") return FdMode::central;
  if (s == "both") return FdMode::both;
  throw std::invalid_argument("unknown fd mode '" + s + "'");
}

DensityMatrix passive_state(const DensityMatrix& rho, const Operator& h) {
  if (rho.size() != h.size()) throw HilbertError("passive_state: dimension mismatch");
  const EigenSystem energy = hermitian_eig(h);
  const EigenSystem pops = hermitian_eig(rho.mat());
  const Eigen::Index n = pops.values.size();
  Matrix out = Matrix::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double p = pops.values(n - 1 - j);
    const auto v = energy.vectors.col(j);
    out += p * (v * v.adjoint());
  }
  return DensityMatrix(Operator(rho.dims(), out));
}

double ergotropy(const DensityMatrix& rho, const Operator& h) {
  if (rho.size() != h.size()) throw HilbertError("ergotropy: dimension mismatch");
  const EigenSystem energy = hermitian_eig(h);
  const EigenSystem pops = hermitian_eig(rho.mat());
  const Eigen::Index n = pops.values.size();
  double passive_energy = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) passive_energy += pops.values(n - 1 - j) * energy.values(j);
  return re_trace_product(rho.mat(), h.mat()) - passive_energy;
}

double catalyst_energy(const DensityMatrix& rho, const ModelParams& p) {
  if (!p.catalyzed()) throw ModelError("catalyst_energy requires the catalyzed scenario");
  if (rho.dims() != p.dims()) throw ModelError("catalyst_energy: state dims do not match the model");
  return re_trace_product(rho.mat(), h_cat(p).mat());
}

std::vector<double> energy_flux_exact(const Trajectory& traj, const ModelParams& p) {
  const SeriesContext ctx(p, SolverConfig{});
  std::vector<double> out(traj.times.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const Matrix& rho = traj.states[i].mat();
    out[i] = re_trace_product(ctx.gen.rhs(traj.times[i], rho), ctx.h0(traj.times[i]));
  }
  return out;
}

namespace {
void require_fd_step(const SolverConfig& cfg) {
  if (!(cfg.fd_step > 0.0) || cfg.fd_step > cfg.dt_max) {
    throw std::invalid_argument("fd_step must be positive and no larger than dt_max");
  }
}
}  // namespace

std::vector<double> energy_flux_central(const Trajectory& traj, const ModelParams& p, const SolverConfig& cfg) {
  require_fd_step(cfg);
  const SeriesContext ctx(p, cfg);
  std::vector<double> out(traj.times.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double t = traj.times[i];
    const Neighbours nb = neighbours(ctx, traj.states[i].mat(), t);
    out[i] = re_trace_product(nb.plus - nb.minus, ctx.h0(t)) / (2.0 * cfg.fd_step);
  }
  return out;
}

std::vector<double> drive_power_exact(const Trajectory& traj, const ModelParams& p) {
  const SeriesContext ctx(p, SolverConfig{});
  std::vector<double> out(traj.times.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = re_trace_product(traj.states[i].mat(), ctx.h0_rate(traj.times[i]));
  }
  return out;
}

std::vector<double> drive_power_central(const Trajectory& traj, const ModelParams& p, const SolverConfig& cfg) {
  require_fd_step(cfg);
  const SeriesContext ctx(p, cfg);
  const double h = cfg.fd_step;
  std::vector<double> out(traj.times.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double t = traj.times[i];
    out[i] = re_trace_product(traj.states[i].mat(), ctx.h0(t + h) - ctx.h0(t - h)) / (2.0 * h);
  }
  return out;
}

std::vector<double> first_law_check(const Trajectory& traj, const ModelParams& p, const SolverConfig& cfg,
                                    FdMode mode) {
  require_fd_step(cfg);
  const SeriesContext ctx(p, cfg);
  std::vector<double> out(traj.times.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = record_at(ctx, traj, i, mode).first_law_residual;
  return out;
}

std::vector<FluxChannels> flux_decomposition(const Trajectory& traj, const ModelParams& p) {
  if (!p.catalyzed()) throw ModelError("flux_decomposition requires the catalyzed scenario");
  const SeriesContext ctx(p, SolverConfig{});
  std::vector<FluxChannels> out(traj.times.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = channels_at(ctx, traj.states[i].mat(), ctx.h0(traj.times[i]));
  }
  return out;
}

std::vector<ThermoRecord> thermo_series(const Trajectory& traj, const ModelParams& p, const SolverConfig& cfg,
                                        FdMode mode) {
  require_fd_step(cfg);
  const SeriesContext ctx(p, cfg);
  const auto n = static_cast<long>(traj.times.size());
  std::vector<ThermoRecord> out(traj.times.size());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)] = record_at(ctx, traj, static_cast<std::size_t>(i), mode);
  }
  return out;
}

std::vector<ThermoRecord> thermo_series_serial(const Trajectory& traj, const ModelParams& p,
                                               const SolverConfig& cfg, FdMode mode) {
  require_fd_step(cfg);
  const SeriesContext ctx(p, cfg);
  std::vector<ThermoRecord> out(traj.times.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = record_at(ctx, traj, i, mode);
  return out;
}

void validate_record(const ThermoRecord& r) {
  if (!(r.ergotropy >= -1e-10)) {
    throw std::runtime_error("record at t=" + std::to_string(r.t) + ": negative ergotropy");
  }
  const double sum = r.flux_unitary_cat + r.flux_dephasing + r.flux_kappa;
  if (!(std::abs(sum - r.flux_J_exact) <= 1e-10)) {
    throw std::runtime_error("record at t=" + std::to_string(r.t) + ": flux channels do not sum to J");
  }
}

}  // namespace qbcat
