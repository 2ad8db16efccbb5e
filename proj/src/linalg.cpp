#include "cpinterp/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace cpinterp {

namespace {

// Largest argument for which std::exp stays finite, with a little headroom
// for the subsequent sum over the spectrum.
constexpr double kMaxExpArgument = 700.0;

}  // namespace

ExpOverflow::ExpOverflow(double max_eigenvalue)
    : LinalgError([max_eigenvalue] {
        std::ostringstream os;
        os << "matrix exponential overflow: largest eigenvalue " << max_eigenvalue;
        return os.str();
      }()),
      max_eigenvalue_(max_eigenvalue) {}

HermMatrix HermMatrix::from(const CMatrix& m) {
  if (m.rows() != m.cols()) {
    std::ostringstream os;
    os << "Hermitian matrix must be square, got " << m.rows() << "x" << m.cols();
    throw LinalgError(os.str());
  }
  if (!m.allFinite()) throw LinalgError("matrix has a non-finite entry");
  HermMatrix h;
  h.m_ = 0.5 * (m + m.adjoint());
  return h;
}

HermMatrix HermMatrix::identity(Index dim) {
  HermMatrix h;
  h.m_ = CMatrix::Identity(dim, dim);
  return h;
}

HermMatrix HermMatrix::diagonal(const RVector& d) {
  HermMatrix h(d.size());
  h.m_.diagonal() = d.cast<Complex>();
  return h;
}

bool HermMatrix::is_diagonal(double tol) const {
  for (Index j = 0; j < dim(); ++j)
    for (Index i = 0; i < dim(); ++i)
      if (i != j && std::abs(m_(i, j)) > tol) return false;
  return true;
}

HermMatrix& HermMatrix::operator+=(const HermMatrix& o) {
  m_ += o.m_;
  return *this;
}

HermMatrix& HermMatrix::operator-=(const HermMatrix& o) {
  m_ -= o.m_;
  return *this;
}

HermMatrix& HermMatrix::operator*=(double s) {
  m_ *= s;
  return *this;
}

HermMatrix& HermMatrix::add_scaled(double s, const HermMatrix& o) {
  m_ += s * o.m_;
  return *this;
}

CMatrix matrix_unit(Index rows, Index cols, Index i, Index j) {
  CMatrix e = CMatrix::Zero(rows, cols);
  e(i, j) = 1.0;
  return e;
}

CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

EigDecomp herm_eig(const HermMatrix& h) {
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(h.matrix());
  if (solver.info() != Eigen::Success) {
    std::ostringstream os;
    os << "Hermitian eigensolver did not converge (dim " << h.dim() << ")";
    throw LinalgError(os.str());
  }
  return {solver.eigenvalues(), solver.eigenvectors()};
}

HermMatrix expm_herm(const HermMatrix& h) {
  if (h.dim() == 0) return h;
  const EigDecomp eig = herm_eig(h);
  const double top = eig.eigenvalues.maxCoeff();
  if (!(top <= kMaxExpArgument)) throw ExpOverflow(top);
  const RVector e = eig.eigenvalues.array().exp();
  return HermMatrix::from(eig.eigenvectors * e.cast<Complex>().asDiagonal() *
                          eig.eigenvectors.adjoint());
}

double trace_pair(const HermMatrix& a, const HermMatrix& b) {
  if (a.dim() != b.dim()) {
    std::ostringstream os;
    os << "trace_pair dimension mismatch: " << a.dim() << " vs " << b.dim();
    throw LinalgError(os.str());
  }
  // tr(ab) = sum_ij a_ij b_ji
  const Complex t = a.matrix().cwiseProduct(b.matrix().transpose()).sum();
  const double scale = a.frobenius_norm() * b.frobenius_norm();
  if (std::abs(t.imag()) > 1e-12 * scale + std::numeric_limits<double>::min())
    throw LinalgError("trace_pair: imaginary residue exceeds Hermitian round-off");
  return t.real();
}

double min_eigenvalue(const HermMatrix& h) {
  if (h.dim() == 0) return std::numeric_limits<double>::infinity();
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(h.matrix(), Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success)
    throw LinalgError("Hermitian eigensolver did not converge");
  return solver.eigenvalues()(0);
}

CMatrix common_nullspace(std::span<const HermMatrix> hs, double tol) {
  if (hs.empty()) return CMatrix(0, 0);
  const Index dim = hs.front().dim();
  CMatrix stacked(static_cast<Index>(hs.size()) * dim, dim);
  for (std::size_t t = 0; t < hs.size(); ++t) {
    if (hs[t].dim() != dim) throw LinalgError("common_nullspace: dimension mismatch");
    stacked.middleRows(static_cast<Index>(t) * dim, dim) = hs[t].matrix();
  }
  Eigen::JacobiSVD<CMatrix> svd(stacked, Eigen::ComputeFullV);
  const RVector& sv = svd.singularValues();
  const double cutoff = tol * std::max(1.0, sv.size() > 0 ? sv(0) : 0.0);
  Index rank = 0;
  while (rank < sv.size() && sv(rank) > cutoff) ++rank;
  return svd.matrixV().rightCols(dim - rank);
}

CMatrix orthogonal_complement(const CMatrix& basis, Index dim) {
  if (basis.cols() == 0) return CMatrix::Identity(dim, dim);
  Eigen::HouseholderQR<CMatrix> qr(basis);
  const CMatrix q = qr.householderQ() * CMatrix::Identity(dim, dim);
  return q.rightCols(dim - basis.cols());
}

double default_tolerance(const HermMatrix& h) { return 1e-10 * (1.0 + h.frobenius_norm()); }

}  // namespace cpinterp
