#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "cpinterp/linalg.hpp"

namespace cpinterp {

/// Choi matrix of a linear map M_n -> M_k.
///
/// Rows and columns are indexed by pairs (i, m), i < n, m < k, in
/// lexicographic order r = i*k + m. Entry ((i,m),(j,l)) is the (m,l) entry
/// of the image of the matrix unit E_ij, so block (i,j) of the matrix is
/// phi(E_ij). The map is completely positive iff the matrix is PSD.
class ChoiMatrix {
 public:
  ChoiMatrix(Index n, Index k, CMatrix phi);
  ChoiMatrix(Index n, Index k, const HermMatrix& phi) : ChoiMatrix(n, k, phi.matrix()) {}

  Index n() const { return n_; }
  Index k() const { return k_; }
  Index dim() const { return n_ * k_; }
  const CMatrix& matrix() const { return phi_; }

  bool is_hermitian(double tol) const;
  /// Throws LinalgError when not Hermitian within 1e-10 (1 + ||phi||_F).
  HermMatrix hermitian() const;

 private:
  Index n_;
  Index k_;
  CMatrix phi_;
};

/// Operation elements V_1..V_m (each n x k) of phi(A) = sum_i V_i^* A V_i.
struct KrausSet {
  Index n = 0;
  Index k = 0;
  std::vector<CMatrix> elements;
};

/// Raised by choi_to_kraus when the Choi matrix is not PSD.
class NotCompletelyPositive : public LinalgError {
 public:
  explicit NotCompletelyPositive(double min_eigenvalue);
  double min_eigenvalue() const { return min_eigenvalue_; }

 private:
  double min_eigenvalue_;
};

/// Assembles the Choi matrix from images[i][j] = phi(E_ij), each k x k.
ChoiMatrix choi_from_unit_images(Index n, Index k,
                                 const std::vector<std::vector<CMatrix>>& images);

/// phi(A), with phi(A)_{ml} = tr((A^T (x) E_lm) Phi).
CMatrix apply_choi(const ChoiMatrix& c, const CMatrix& a);

/// sum_i V_i^* A V_i
CMatrix apply_kraus(const KrausSet& ks, const CMatrix& a);

/// Numerical-rank threshold used when no tolerance is given: 1e-9 * lambda_max.
double default_rank_tolerance(const HermMatrix& phi);

/// One operation element per eigenvalue above `tol`. Each eigenvector is
/// phase-fixed so its largest-magnitude component is real positive.
KrausSet choi_to_kraus(const ChoiMatrix& c, std::optional<double> tol = std::nullopt);

ChoiMatrix kraus_to_choi(const KrausSet& ks);

std::size_t minimal_kraus_count(const ChoiMatrix& c, std::optional<double> tol = std::nullopt);

}  // namespace cpinterp
