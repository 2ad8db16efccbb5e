#pragma once

#include <complex>
#include <span>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace cpinterp {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;
using Index = Eigen::Index;

class LinalgError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a spectrum exceeds the range of std::exp.
class ExpOverflow : public LinalgError {
 public:
  explicit ExpOverflow(double max_eigenvalue);
  double max_eigenvalue() const { return max_eigenvalue_; }

 private:
  double max_eigenvalue_;
};

/// Dense Hermitian matrix. The stored entries are exactly Hermitian:
/// construction from an arbitrary square matrix keeps (M + M*)/2.
class HermMatrix {
 public:
  HermMatrix() = default;
  explicit HermMatrix(Index dim) : m_(CMatrix::Zero(dim, dim)) {}

  /// Symmetrizes `m`. Throws LinalgError if `m` is not square or has a
  /// non-finite entry.
  static HermMatrix from(const CMatrix& m);
  static HermMatrix identity(Index dim);
  static HermMatrix diagonal(const RVector& d);

  Index dim() const { return m_.rows(); }
  const CMatrix& matrix() const { return m_; }
  Complex operator()(Index i, Index j) const { return m_(i, j); }
  double frobenius_norm() const { return m_.norm(); }
  bool is_diagonal(double tol = 0.0) const;

  HermMatrix& operator+=(const HermMatrix& o);
  HermMatrix& operator-=(const HermMatrix& o);
  HermMatrix& operator*=(double s);
  /// this += s * o
  HermMatrix& add_scaled(double s, const HermMatrix& o);

  friend HermMatrix operator+(HermMatrix a, const HermMatrix& b) { return a += b; }
  friend HermMatrix operator-(HermMatrix a, const HermMatrix& b) { return a -= b; }
  friend HermMatrix operator*(double s, HermMatrix a) { return a *= s; }

 private:
  CMatrix m_;
};

/// Spectral decomposition h = U diag(eigenvalues) U*, eigenvalues ascending.
struct EigDecomp {
  RVector eigenvalues;
  CMatrix eigenvectors;
};

/// The n x k matrix with a single 1 at (i, j), zero-based.
CMatrix matrix_unit(Index rows, Index cols, Index i, Index j);

CMatrix kron(const CMatrix& a, const CMatrix& b);

EigDecomp herm_eig(const HermMatrix& h);

/// e^h via the spectral decomposition; always positive definite.
HermMatrix expm_herm(const HermMatrix& h);

/// Re tr(a b) for Hermitian a, b.
double trace_pair(const HermMatrix& a, const HermMatrix& b);

double min_eigenvalue(const HermMatrix& h);

/// Orthonormal basis (as columns) of the common kernel of `hs`. A right
/// singular vector of the stacked matrices belongs to the kernel when its
/// singular value is at most tol * max(1, largest singular value).
CMatrix common_nullspace(std::span<const HermMatrix> hs, double tol);

/// Orthonormal basis of the orthogonal complement of span(basis) in C^dim.
CMatrix orthogonal_complement(const CMatrix& basis, Index dim);

/// Default kernel/PSD threshold 1e-10 * (1 + ||h||_F).
double default_tolerance(const HermMatrix& h);

}  // namespace cpinterp
