#include "cpinterp/choi.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace cpinterp {

ChoiMatrix::ChoiMatrix(Index n, Index k, CMatrix phi) : n_(n), k_(k), phi_(std::move(phi)) {
  if (n < 1 || k < 1) throw LinalgError("Choi matrix dimensions must be positive");
  if (phi_.rows() != n * k || phi_.cols() != n * k) {
    std::ostringstream os;
    os << "Choi matrix for n=" << n << ", k=" << k << " must be " << n * k << "x" << n * k
       << ", got " << phi_.rows() << "x" << phi_.cols();
    throw LinalgError(os.str());
  }
}

bool ChoiMatrix::is_hermitian(double tol) const {
  return (phi_ - phi_.adjoint()).norm() <= tol;
}

HermMatrix ChoiMatrix::hermitian() const {
  if (!is_hermitian(1e-10 * (1.0 + phi_.norm())))
    throw LinalgError("Choi matrix is not Hermitian");
  return HermMatrix::from(phi_);
}

NotCompletelyPositive::NotCompletelyPositive(double min_eigenvalue)
    : LinalgError([min_eigenvalue] {
        std::ostringstream os;
        os << "Choi matrix is not positive semidefinite: min eigenvalue " << min_eigenvalue;
        return os.str();
      }()),
      min_eigenvalue_(min_eigenvalue) {}

ChoiMatrix choi_from_unit_images(Index n, Index k,
                                 const std::vector<std::vector<CMatrix>>& images) {
  if (static_cast<Index>(images.size()) != n)
    throw LinalgError("unit image table must have n rows");
  CMatrix phi(n * k, n * k);
  for (Index i = 0; i < n; ++i) {
    if (static_cast<Index>(images[i].size()) != n)
      throw LinalgError("unit image table must have n columns");
    for (Index j = 0; j < n; ++j) {
      const CMatrix& img = images[i][j];
      if (img.rows() != k || img.cols() != k) {
        std::ostringstream os;
        os << "image of E_" << i + 1 << j + 1 << " must be " << k << "x" << k;
        throw LinalgError(os.str());
      }
      phi.block(i * k, j * k, k, k) = img;
    }
  }
  return ChoiMatrix(n, k, std::move(phi));
}

CMatrix apply_choi(const ChoiMatrix& c, const CMatrix& a) {
  const Index n = c.n(), k = c.k();
  if (a.rows() != n || a.cols() != n) {
    std::ostringstream os;
    os << "apply_choi: input must be " << n << "x" << n << ", got " << a.rows() << "x"
       << a.cols();
    throw LinalgError(os.str());
  }
  // phi(A) = sum_ij a_ij phi(E_ij), and phi(E_ij) is block (i,j).
  CMatrix out = CMatrix::Zero(k, k);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      if (a(i, j) != Complex(0.0)) out += a(i, j) * c.matrix().block(i * k, j * k, k, k);
  return out;
}

CMatrix apply_kraus(const KrausSet& ks, const CMatrix& a) {
  if (a.rows() != ks.n || a.cols() != ks.n) throw LinalgError("apply_kraus: dimension mismatch");
  CMatrix out = CMatrix::Zero(ks.k, ks.k);
  for (const CMatrix& v : ks.elements) out += v.adjoint() * a * v;
  return out;
}

double default_rank_tolerance(const HermMatrix& phi) {
  if (phi.dim() == 0) return 0.0;
  const EigDecomp eig = herm_eig(phi);
  return 1e-9 * std::max(0.0, eig.eigenvalues(eig.eigenvalues.size() - 1));
}

namespace {

struct Spectrum {
  EigDecomp eig;
  double tol;
};

Spectrum checked_spectrum(const ChoiMatrix& c, std::optional<double> tol) {
  const HermMatrix phi = c.hermitian();
  Spectrum s{herm_eig(phi), 0.0};
  const RVector& ev = s.eig.eigenvalues;
  s.tol = tol.value_or(1e-9 * std::max(0.0, ev(ev.size() - 1)));
  if (ev(0) < -s.tol) throw NotCompletelyPositive(ev(0));
  return s;
}

}  // namespace

KrausSet choi_to_kraus(const ChoiMatrix& c, std::optional<double> tol) {
  const Spectrum s = checked_spectrum(c, tol);
  const Index n = c.n(), k = c.k();
  KrausSet ks{n, k, {}};
  // Descending eigenvalue order, so the dominant element comes first.
  for (Index r = s.eig.eigenvalues.size() - 1; r >= 0; --r) {
    const double lambda = s.eig.eigenvalues(r);
    if (!(lambda > s.tol)) continue;
    CVector u = s.eig.eigenvectors.col(r);
    Index top = 0;
    for (Index t = 1; t < u.size(); ++t)
      if (std::abs(u(t)) > std::abs(u(top)) + 1e-14) top = t;
    u *= std::conj(u(top)) / std::abs(u(top));
    u *= std::sqrt(lambda);
    // Phi = sum w w* with w_(i,m) = conj(V_im)
    CMatrix v(n, k);
    for (Index i = 0; i < n; ++i)
      for (Index m = 0; m < k; ++m) v(i, m) = std::conj(u(i * k + m));
    ks.elements.push_back(std::move(v));
  }
  return ks;
}

ChoiMatrix kraus_to_choi(const KrausSet& ks) {
  for (const CMatrix& v : ks.elements)
    if (v.rows() != ks.n || v.cols() != ks.k)
      throw LinalgError("Kraus element shape does not match n x k");
  std::vector<std::vector<CMatrix>> images(ks.n, std::vector<CMatrix>(ks.n));
  for (Index i = 0; i < ks.n; ++i)
    for (Index j = 0; j < ks.n; ++j)
      images[i][j] = apply_kraus(ks, matrix_unit(ks.n, ks.n, i, j));
  return choi_from_unit_images(ks.n, ks.k, images);
}

std::size_t minimal_kraus_count(const ChoiMatrix& c, std::optional<double> tol) {
  const Spectrum s = checked_spectrum(c, tol);
  return static_cast<std::size_t>(
      (s.eig.eigenvalues.array() > s.tol).count());
}

}  // namespace cpinterp
