#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace qbcat {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;

/// Raised on malformed operator arguments: bad dims, subsystem index out of
/// range, non-Hermitian input to a Hermitian routine, and so on.
class HilbertError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Dense square operator on a tensor-product space. `dims` lists the factor
/// dimensions in order; the matrix side is their product.
class Operator {
 public:
  Operator() = default;
  Operator(std::vector<std::size_t> dims, Matrix mat);

  /// Single-factor operator, dims = {mat.rows()}.
  static Operator from_matrix(Matrix mat);
  static Operator identity(std::vector<std::size_t> dims);
  static Operator zero(std::vector<std::size_t> dims);

  const std::vector<std::size_t>& dims() const { return dims_; }
  const Matrix& mat() const { return mat_; }
  std::size_t size() const { return static_cast<std::size_t>(mat_.rows()); }
  cplx operator()(std::size_t r, std::size_t c) const { return mat_(r, c); }

  Operator adjoint() const { return {dims_, mat_.adjoint()}; }
  cplx trace() const { return mat_.trace(); }

  /// max |A - A^dagger| elementwise.
  double hermiticity_residual() const;

  Operator operator+(const Operator& o) const;
  Operator operator-(const Operator& o) const;
  Operator operator*(const Operator& o) const;
  Operator operator*(cplx s) const;
  friend Operator operator*(cplx s, const Operator& a) { return a * s; }

 private:
  std::vector<std::size_t> dims_;
  Matrix mat_;
};

/// max |a - b| elementwise; dims must agree.
double max_abs_diff(const Operator& a, const Operator& b);

/// Tolerances a density matrix must satisfy.
struct StateTolerances {
  double trace = 1e-8;
  double hermiticity = 1e-10;
  double positivity = 1e-8;
};

/// Hermitian, unit-trace, positive-semidefinite operator. Construction
/// validates against StateTolerances and throws HilbertError on failure.
class DensityMatrix {
 public:
  explicit DensityMatrix(Operator op, const StateTolerances& tol = {});

  /// |psi><psi| for a normalized state vector on `dims`.
  static DensityMatrix pure(const std::vector<std::size_t>& dims, const Eigen::VectorXcd& psi);
  /// Projector on computational basis state `index`.
  static DensityMatrix basis(const std::vector<std::size_t>& dims, std::size_t index);

  const Operator& op() const { return op_; }
  const std::vector<std::size_t>& dims() const { return op_.dims(); }
  const Matrix& mat() const { return op_.mat(); }
  std::size_t size() const { return op_.size(); }

 private:
  Operator op_;
};

enum class Pauli { x, y, z, plus, minus };

/// 2x2 Pauli-type matrix in the ordered basis {|e>, |g>}: sigma_z = diag(+1, -1),
/// sigma_plus = |e><g|, sigma_minus = |g><e|.
Operator pauli(Pauli which);

/// Truncated bosonic lowering operator on Fock states {0, ..., n_levels-1}.
Operator annihilation(std::size_t n_levels);

/// Plain Kronecker product of matrices.
Matrix kron(const Matrix& a, const Matrix& b);

/// Kronecker product; dims are concatenated.
Operator tensor(const Operator& a, const Operator& b);

/// Reduce onto the single subsystem `keep`, tracing out every other factor.
Operator partial_trace(const Operator& op, std::size_t keep);
DensityMatrix partial_trace(const DensityMatrix& rho, std::size_t keep);

struct EigenSystem {
  Eigen::VectorXd values;   // ascending
  Matrix vectors;           // unitary, column j pairs with values[j]
};

/// Cyclic complex Jacobi diagonalization for small Hermitian matrices.
/// Input must be Hermitian to 1e-10; eigenvalues come back ascending and each
/// eigenvector is phase-fixed so its first non-negligible component is real
/// and positive.
EigenSystem hermitian_eig(const Operator& h);
EigenSystem hermitian_eig(const Matrix& h);

}  // namespace qbcat
