#include "qbcat/hilbert.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

namespace qbcat {

namespace {

std::size_t product(const std::vector<std::size_t>& dims) {
  return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>{});
}

void require_same_dims(const Operator& a, const Operator& b, const char* what) {
  if (a.dims() != b.dims()) {
    throw HilbertError(std::string(what) + ": operator dims differ");
  }
}

constexpr double kHermitianInputTol = 1e-10;
constexpr double kJacobiOffTol = 1e-12;
constexpr int kJacobiMaxSweeps = 100;

}  // namespace

Operator::Operator(std::vector<std::size_t> dims, Matrix mat) : dims_(std::move(dims)), mat_(std::move(mat)) {
  if (dims_.empty()) {
    throw HilbertError("Operator: dims must be non-empty");
  }
  for (auto d : dims_) {
    if (d < 1) throw HilbertError("Operator: every subsystem dimension must be >= 1");
  }
  const auto n = product(dims_);
  if (mat_.rows() != mat_.cols() || static_cast<std::size_t>(mat_.rows()) != n) {
    throw HilbertError("Operator: matrix must be square with side equal to the product of dims");
  }
}

Operator Operator::from_matrix(Matrix mat) {
  auto n = static_cast<std::size_t>(mat.rows());
  return {{n}, std::move(mat)};
}

Operator Operator::identity(std::vector<std::size_t> dims) {
  auto n = static_cast<Eigen::Index>(product(dims));
  return {std::move(dims), Matrix::Identity(n, n)};
}

Operator Operator::zero(std::vector<std::size_t> dims) {
  auto n = static_cast<Eigen::Index>(product(dims));
  return {std::move(dims), Matrix::Zero(n, n)};
}

double Operator::hermiticity_residual() const {
  if (mat_.size() == 0) return 0.0;
  return (mat_ - mat_.adjoint()).cwiseAbs().maxCoeff();
}

Operator Operator::operator+(const Operator& o) const {
  require_same_dims(*this, o, "operator+");
  return {dims_, mat_ + o.mat_};
}

Operator Operator::operator-(const Operator& o) const {
  require_same_dims(*this, o, "operator-");
  return {dims_, mat_ - o.mat_};
}

Operator Operator::operator*(const Operator& o) const {
  require_same_dims(*this, o, "operator*");
  return {dims_, mat_ * o.mat_};
}

Operator Operator::operator*(cplx s) const { return {dims_, mat_ * s}; }

double max_abs_diff(const Operator& a, const Operator& b) {
  require_same_dims(a, b, "max_abs_diff");
  return (a.mat() - b.mat()).cwiseAbs().maxCoeff();
}

DensityMatrix::DensityMatrix(Operator op, const StateTolerances& tol) : op_(std::move(op)) {
  const double herm = op_.hermiticity_residual();
  if (herm > tol.hermiticity) {
    throw HilbertError("DensityMatrix: Hermiticity residual " + std::to_string(herm) + " exceeds tolerance");
  }
  const double trace_dev = std::abs(op_.trace() - 1.0);
  if (trace_dev > tol.trace) {
    throw HilbertError("DensityMatrix: trace deviates from 1 by " + std::to_string(trace_dev));
  }
  Matrix sym = 0.5 * (op_.mat() + op_.mat().adjoint());
  const double lmin = hermitian_eig(sym).values(0);
  if (lmin < -tol.positivity) {
    throw HilbertError("DensityMatrix: negative eigenvalue " + std::to_string(lmin));
  }
}

DensityMatrix DensityMatrix::pure(const std::vector<std::size_t>& dims, const Eigen::VectorXcd& psi) {
  if (static_cast<std::size_t>(psi.size()) != product(dims)) {
    throw HilbertError("DensityMatrix::pure: state vector length does not match dims");
  }
  const double norm = psi.norm();
  if (norm == 0.0) throw HilbertError("DensityMatrix::pure: zero state vector");
  Eigen::VectorXcd v = psi / norm;
  return DensityMatrix(Operator(dims, v * v.adjoint()));
}

DensityMatrix DensityMatrix::basis(const std::vector<std::size_t>& dims, std::size_t index) {
  const auto n = product(dims);
  if (index >= n) throw HilbertError("DensityMatrix::basis: index out of range");
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(n));
  v(static_cast<Eigen::Index>(index)) = 1.0;
  return pure(dims, v);
}

Operator pauli(Pauli which) {
  Matrix m = Matrix::Zero(2, 2);
  const cplx i{0.0, 1.0};
  switch (which) {
    case Pauli::x:
      m(0, 1) = 1.0;
      m(1, 0) = 1.0;
      break;
    case Pauli::y:
      m(0, 1) = -i;
      m(1, 0) = i;
      break;
    case Pauli::z:
      m(0, 0) = 1.0;
      m(1, 1) = -1.0;
      break;
    case Pauli::plus:
      m(0, 1) = 1.0;  // |e><g|
      break;
    case Pauli::minus:
      m(1, 0) = 1.0;  // |g><e|
      break;
  }
  return Operator::from_matrix(std::move(m));
}

Operator annihilation(std::size_t n_levels) {
  if (n_levels < 2) throw HilbertError("annihilation: need at least 2 Fock levels");
  const auto n = static_cast<Eigen::Index>(n_levels);
  Matrix m = Matrix::Zero(n, n);
  for (Eigen::Index k = 1; k < n; ++k) {
    m(k - 1, k) = std::sqrt(static_cast<double>(k));
  }
  return Operator::from_matrix(std::move(m));
}

Matrix kron(const Matrix& a, const Matrix& b) {
  const Eigen::Index rb = b.rows();
  const Eigen::Index cb = b.cols();
  Matrix out(a.rows() * rb, a.cols() * cb);
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * rb, j * cb, rb, cb) = a(i, j) * b;
    }
  }
  return out;
}

Operator tensor(const Operator& a, const Operator& b) {
  std::vector<std::size_t> dims = a.dims();
  dims.insert(dims.end(), b.dims().begin(), b.dims().end());
  return {std::move(dims), kron(a.mat(), b.mat())};
}

Operator partial_trace(const Operator& op, std::size_t keep) {
  const auto& dims = op.dims();
  if (dims.size() < 2) throw HilbertError("partial_trace: need at least two subsystems");
  if (keep >= dims.size()) throw HilbertError("partial_trace: subsystem index out of range");

  std::size_t left = 1;
  for (std::size_t k = 0; k < keep; ++k) left *= dims[k];
  const std::size_t mid = dims[keep];
  std::size_t right = 1;
  for (std::size_t k = keep + 1; k < dims.size(); ++k) right *= dims[k];

  const auto m = static_cast<Eigen::Index>(mid);
  Matrix red = Matrix::Zero(m, m);
  const Matrix& a = op.mat();
  for (std::size_t l = 0; l < left; ++l) {
    for (std::size_t r = 0; r < right; ++r) {
      for (std::size_t i = 0; i < mid; ++i) {
        const auto row = static_cast<Eigen::Index>((l * mid + i) * right + r);
        for (std::size_t j = 0; j < mid; ++j) {
          const auto col = static_cast<Eigen::Index>((l * mid + j) * right + r);
          red(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) += a(row, col);
        }
      }
    }
  }
  return {{mid}, std::move(red)};
}

DensityMatrix partial_trace(const DensityMatrix& rho, std::size_t keep) {
  return DensityMatrix(partial_trace(rho.op(), keep));
}

EigenSystem hermitian_eig(const Operator& h) { return hermitian_eig(h.mat()); }

EigenSystem hermitian_eig(const Matrix& h) {
  if (h.rows() != h.cols()) throw HilbertError("hermitian_eig: matrix not square");
  const Eigen::Index n = h.rows();
  if (n > 0 && (h - h.adjoint()).cwiseAbs().maxCoeff() > kHermitianInputTol) {
    throw HilbertError("hermitian_eig: input is not Hermitian");
  }

  Matrix a = 0.5 * (h + h.adjoint());
  Matrix v = Matrix::Identity(n, n);

  auto off_norm = [&] {
    double s = 0.0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = 0; q < n; ++q)
        if (p != q) s += std::norm(a(p, q));
    return std::sqrt(s);
  };
  const double scale = std::max(a.norm(), 1e-300);

  for (int sweep = 0; sweep < kJacobiMaxSweeps && off_norm() > kJacobiOffTol * scale; ++sweep) {
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double mag = std::abs(a(p, q));
        if (mag <= 1e-300) continue;

        // Rotate the phase out of a(p,q) so the remaining 2x2 problem is real.
        const cplx phase = a(p, q) / mag;  // e^{i phi}
        a.col(q) *= std::conj(phase);
        a.row(q) *= phase;
        v.col(q) *= std::conj(phase);

        const double app = a(p, p).real();
        const double aqq = a(q, q).real();
        const double theta = (aqq - app) / (2.0 * mag);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        const Eigen::VectorXcd cp = a.col(p);
        const Eigen::VectorXcd cq = a.col(q);
        a.col(p) = c * cp - s * cq;
        a.col(q) = s * cp + c * cq;
        const Eigen::RowVectorXcd rp = a.row(p);
        const Eigen::RowVectorXcd rq = a.row(q);
        a.row(p) = c * rp - s * rq;
        a.row(q) = s * rp + c * rq;
        a(p, q) = 0.0;
        a(q, p) = 0.0;

        const Eigen::VectorXcd vp = v.col(p);
        const Eigen::VectorXcd vq = v.col(q);
        v.col(p) = c * vp - s * vq;
        v.col(q) = s * vp + c * vq;
      }
    }
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index x, Eigen::Index y) { return a(x, x).real() < a(y, y).real(); });

  EigenSystem out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto src = order[static_cast<std::size_t>(k)];
    out.values(k) = a(src, src).real();
    Eigen::VectorXcd col = v.col(src);
    for (Eigen::Index r = 0; r < n; ++r) {
      if (std::abs(col(r)) > 1e-8) {
        col *= std::conj(col(r)) / std::abs(col(r));
        break;
      }
    }
    out.vectors.col(k) = col;
  }
  return out;
}

}  // namespace qbcat
