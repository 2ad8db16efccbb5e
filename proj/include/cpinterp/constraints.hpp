#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "cpinterp/linalg.hpp"

namespace cpinterp {

/// One interpolation condition phi(input) = output.
struct InterpolationPair {
  CMatrix input;   // n x n
  CMatrix output;  // k x k
};

/// Find a completely positive phi: M_n -> M_k with phi(A_nu) = B_nu,
/// optionally trace preserving.
struct ProblemInstance {
  Index n = 0;
  Index k = 0;
  std::vector<InterpolationPair> pairs;
  bool trace_preserving = false;

  /// Throws std::invalid_argument naming the offending pair.
  void validate() const;
};

enum class ConstraintSource { Interpolation, TracePreserving };

/// Which hermitized part of a complex equation a constraint carries.
enum class ConstraintPart { Whole, Real, Imaginary };

/// Where a constraint came from. For interpolation constraints `pair` is
/// nu and (row, col) = (m, l), the entry of B_nu. For trace-preserving
/// constraints (row, col) = (i, j) of tr(phi(E_ij)) = delta_ij. Zero-based.
struct ConstraintOrigin {
  ConstraintSource source = ConstraintSource::Interpolation;
  std::size_t pair = 0;
  Index row = 0;
  Index col = 0;
  ConstraintPart part = ConstraintPart::Whole;
};

std::string describe(const ConstraintOrigin& o);

/// tr(matrix X) = target, matrix generally non-Hermitian.
struct RawConstraint {
  CMatrix matrix;
  Complex target;
  ConstraintOrigin origin;
};

struct RawSystem {
  Index dim = 0;
  std::vector<RawConstraint> constraints;
  /// Every A_nu and B_nu is selfadjoint, so (m,l) and (l,m) equations are
  /// conjugate and only m <= l needs to be kept.
  bool selfadjoint_data = false;
};

/// tr(matrix X) = target with a Hermitian matrix and a real target.
struct Constraint {
  HermMatrix matrix;
  double target = 0.0;
  ConstraintOrigin origin;
};

struct ConstraintSystem {
  Index dim = 0;
  std::vector<Constraint> constraints;

  std::size_t size() const { return constraints.size(); }
  RVector targets() const;
  /// sum_i x_i C(i)
  HermMatrix combination(const RVector& x) const;
  /// trace_pair(C(i), x) for all i
  RVector traces(const HermMatrix& x) const;
  /// G_ij = trace_pair(C(i), C(j))
  RMatrix gram() const;
};

/// Raised when the constraints admit no Hermitian solution at all.
/// `coefficients` is a combination y (over the offending system) with
/// sum_i y_i C(i) = 0 and sum_i y_i b_i != 0, when one is known.
class InconsistentConstraints : public std::runtime_error {
 public:
  InconsistentConstraints(std::string what, std::size_t index, RVector coefficients);
  std::size_t index() const { return index_; }
  const RVector& coefficients() const { return coefficients_; }

 private:
  std::size_t index_;
  RVector coefficients_;
};

/// Raw constraints C(nu,m,l) = A_nu^T (x) E_lm with target (B_nu)_{ml}.
RawSystem assemble(const ProblemInstance& inst);

/// Replaces each raw constraint by its selfadjoint parts
/// (C + C*, 2 Re b) and (i(C - C*), -2 Im b).
ConstraintSystem hermitize(const RawSystem& raw);

/// Appends tr(phi(E_ij)) = delta_ij, hermitized.
ConstraintSystem add_trace_preserving(ConstraintSystem sys, Index n, Index k);

/// Keeps a maximal real-linearly-independent subset in order. A dependent
/// constraint whose target disagrees with the retained combination by more
/// than `tol` (relative to the targets' scale) raises InconsistentConstraints.
ConstraintSystem prune_dependent(const ConstraintSystem& sys, double tol = 1e-9);

/// Orthonormal basis W of the joint support (common kernel complement).
struct SupportReduction {
  CMatrix basis;  // p x p'
  Index full_dim() const { return basis.rows(); }
  Index reduced_dim() const { return basis.cols(); }
};

struct ReducedSystem {
  ConstraintSystem system;
  SupportReduction reduction;
};

ReducedSystem joint_support_reduce(const ConstraintSystem& sys, double tol = 1e-10);

/// W xred W*
HermMatrix embed_solution(const HermMatrix& xred, const SupportReduction& red);

bool is_diagonal_instance(const ProblemInstance& inst, double tol = 0.0);

/// For a diagonal instance: drops the constraints whose matrices have zero
/// diagonal (every diagonal X satisfies them when their target is zero).
/// Throws std::invalid_argument if a remaining constraint is not diagonal,
/// InconsistentConstraints if a dropped one has a nonzero target.
ConstraintSystem restrict_to_diagonal(const ConstraintSystem& sys, double tol = 1e-12);

/// Full pipeline front half: assemble, hermitize, trace preservation if
/// requested, prune.
ConstraintSystem build_system(const ProblemInstance& inst, double prune_tol = 1e-9);

}  // namespace cpinterp
