#include "cpinterp/constraints.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace cpinterp {

namespace {

bool is_selfadjoint(const CMatrix& m) {
  return m.rows() == m.cols() && (m - m.adjoint()).norm() <= 1e-14 * m.norm();
}

void check_shape(const CMatrix& m, Index dim, std::size_t pair, const char* which) {
  if (m.rows() != dim || m.cols() != dim) {
    std::ostringstream os;
    os << "pair " << pair + 1 << ": " << which << " must be " << dim << "x" << dim << ", got "
       << m.rows() << "x" << m.cols();
    throw std::invalid_argument(os.str());
  }
  if (!m.allFinite()) {
    std::ostringstream os;
    os << "pair " << pair + 1 << ": " << which << " has a non-finite entry";
    throw std::invalid_argument(os.str());
  }
}

}  // namespace

void ProblemInstance::validate() const {
  if (n < 1 || k < 1) throw std::invalid_argument("dimensions n and k must be positive");
  if (pairs.empty()) throw std::invalid_argument("at least one interpolation pair is required");
  for (std::size_t nu = 0; nu < pairs.size(); ++nu) {
    check_shape(pairs[nu].input, n, nu, "A");
    check_shape(pairs[nu].output, k, nu, "B");
  }
}

std::string describe(const ConstraintOrigin& o) {
  std::ostringstream os;
  if (o.source == ConstraintSource::Interpolation)
    os << "pair " << o.pair + 1 << " entry (" << o.row + 1 << "," << o.col + 1 << ")";
  else
    os << "trace-preserving (" << o.row + 1 << "," << o.col + 1 << ")";
  switch (o.part) {
    case ConstraintPart::Whole: break;
    case ConstraintPart::Real: os << " real part"; break;
    case ConstraintPart::Imaginary: os << " imaginary part"; break;
  }
  return os.str();
}

RVector ConstraintSystem::targets() const {
  RVector b(static_cast<Index>(size()));
  for (std::size_t i = 0; i < size(); ++i) b(static_cast<Index>(i)) = constraints[i].target;
  return b;
}

HermMatrix ConstraintSystem::combination(const RVector& x) const {
  HermMatrix out(dim);
  for (std::size_t i = 0; i < size(); ++i) {
    const double xi = x(static_cast<Index>(i));
    if (xi != 0.0) out.add_scaled(xi, constraints[i].matrix);
  }
  return out;
}

RVector ConstraintSystem::traces(const HermMatrix& x) const {
  RVector t(static_cast<Index>(size()));
  for (std::size_t i = 0; i < size(); ++i)
    t(static_cast<Index>(i)) = trace_pair(constraints[i].matrix, x);
  return t;
}

RMatrix ConstraintSystem::gram() const {
  const Index q = static_cast<Index>(size());
  RMatrix g(q, q);
  for (Index i = 0; i < q; ++i)
    for (Index j = 0; j <= i; ++j)
      g(i, j) = g(j, i) = trace_pair(constraints[i].matrix, constraints[j].matrix);
  return g;
}

InconsistentConstraints::InconsistentConstraints(std::string what, std::size_t index,
                                                 RVector coefficients)
    : std::runtime_error(std::move(what)), index_(index), coefficients_(std::move(coefficients)) {}

RawSystem assemble(const ProblemInstance& inst) {
  inst.validate();
  const Index n = inst.n, k = inst.k;
  RawSystem raw;
  raw.dim = n * k;
  raw.selfadjoint_data = std::all_of(inst.pairs.begin(), inst.pairs.end(), [](const auto& pr) {
    return is_selfadjoint(pr.input) && is_selfadjoint(pr.output);
  });
  for (std::size_t nu = 0; nu < inst.pairs.size(); ++nu) {
    const CMatrix at = inst.pairs[nu].input.transpose();
    for (Index m = 0; m < k; ++m)
      for (Index l = 0; l < k; ++l)
        raw.constraints.push_back({kron(at, matrix_unit(k, k, l, m)), inst.pairs[nu].output(m, l),
                                   {ConstraintSource::Interpolation, nu, m, l}});
  }
  return raw;
}

ConstraintSystem hermitize(const RawSystem& raw) {
  ConstraintSystem sys;
  sys.dim = raw.dim;
  for (std::size_t t = 0; t < raw.constraints.size(); ++t) {
    const RawConstraint& rc = raw.constraints[t];
    if (raw.selfadjoint_data && rc.origin.row > rc.origin.col) continue;
    const double scale = rc.matrix.norm();
    const double target_tol = 1e-12 * (1.0 + std::abs(rc.target));

    if (is_selfadjoint(rc.matrix)) {
      if (std::abs(rc.target.imag()) > target_tol)
        throw InconsistentConstraints(
            describe(rc.origin) + ": selfadjoint constraint with non-real target", t, RVector());
      sys.constraints.push_back({HermMatrix::from(rc.matrix), rc.target.real(), rc.origin});
      continue;
    }

    // tr(C* X) = conj(tr(C X)) for Hermitian X, hence
    // tr((C + C*) X) = 2 Re b and tr(i(C - C*) X) = -2 Im b.
    const CMatrix re = rc.matrix + rc.matrix.adjoint();
    const CMatrix im = Complex(0.0, 1.0) * (rc.matrix - rc.matrix.adjoint());
    const auto push = [&](const CMatrix& part, double target, ConstraintPart which) {
      ConstraintOrigin origin = rc.origin;
      origin.part = which;
      if (part.norm() <= 1e-14 * scale) {
        if (std::abs(target) > target_tol)
          throw InconsistentConstraints(
              describe(origin) + ": vanishing constraint with nonzero target", t, RVector());
        return;
      }
      sys.constraints.push_back({HermMatrix::from(part), target, origin});
    };
    push(re, 2.0 * rc.target.real(), ConstraintPart::Real);
    push(im, -2.0 * rc.target.imag(), ConstraintPart::Imaginary);
  }
  return sys;
}

ConstraintSystem add_trace_preserving(ConstraintSystem sys, Index n, Index k) {
  if (sys.dim != n * k) throw std::invalid_argument("add_trace_preserving: dimension mismatch");
  // tr(phi(A)) = tr((A^T (x) I_k) Phi); the (i,j) and (j,i) equations are
  // conjugate, so i <= j suffices.
  RawSystem raw;
  raw.dim = n * k;
  raw.selfadjoint_data = true;
  const CMatrix id = CMatrix::Identity(k, k);
  for (Index i = 0; i < n; ++i)
    for (Index j = i; j < n; ++j)
      raw.constraints.push_back({kron(matrix_unit(n, n, j, i), id), i == j ? 1.0 : 0.0,
                                 {ConstraintSource::TracePreserving, 0, i, j}});
  ConstraintSystem extra = hermitize(raw);
  for (Constraint& c : extra.constraints) sys.constraints.push_back(std::move(c));
  return sys;
}

ConstraintSystem prune_dependent(const ConstraintSystem& sys, double tol) {
  constexpr double kPivotRatio = 1e-10;
  const Index q = static_cast<Index>(sys.size());
  ConstraintSystem out;
  out.dim = sys.dim;
  if (q == 0) return out;

  const RMatrix g = sys.gram();
  const RVector b = sys.targets();
  const double max_pivot = g.diagonal().maxCoeff();
  std::vector<Index> kept;

  for (Index i = 0; i < q; ++i) {
    RVector coef;
    double pivot = g(i, i);
    if (!kept.empty()) {
      const Index r = static_cast<Index>(kept.size());
      RMatrix grr(r, r);
      RVector gri(r), br(r);
      for (Index s = 0; s < r; ++s) {
        gri(s) = g(kept[s], i);
        br(s) = b(kept[s]);
        for (Index t = 0; t < r; ++t) grr(s, t) = g(kept[s], kept[t]);
      }
      coef = grr.ldlt().solve(gri);
      pivot -= gri.dot(coef);
    }
    if (pivot > kPivotRatio * max_pivot) {
      kept.push_back(i);
      out.constraints.push_back(sys.constraints[static_cast<std::size_t>(i)]);
      continue;
    }
    // Dependent: the target must follow from the retained ones.
    double predicted = 0.0, spread = 0.0;
    for (Index s = 0; s < coef.size(); ++s) {
      predicted += coef(s) * b(kept[s]);
      spread += std::abs(coef(s) * b(kept[s]));
    }
    if (std::abs(b(i) - predicted) > tol * (1.0 + std::abs(b(i)) + spread)) {
      RVector y = RVector::Zero(q);
      y(i) = 1.0;
      for (Index s = 0; s < coef.size(); ++s) y(kept[s]) = -coef(s);
      std::ostringstream os;
      os << "constraint " << i + 1 << " (" << describe(sys.constraints[i].origin)
         << ") is a combination of earlier constraints but its target " << b(i)
         << " disagrees with the implied value " << predicted;
      throw InconsistentConstraints(os.str(), static_cast<std::size_t>(i), std::move(y));
    }
  }
  return out;
}

ReducedSystem joint_support_reduce(const ConstraintSystem& sys, double tol) {
  std::vector<HermMatrix> mats;
  mats.reserve(sys.size());
  for (const Constraint& c : sys.constraints) mats.push_back(c.matrix);
  const CMatrix kernel = common_nullspace(mats, tol);

  ReducedSystem red;
  if (kernel.cols() == 0) {
    red.reduction.basis = CMatrix::Identity(sys.dim, sys.dim);
    red.system = sys;
    return red;
  }
  const CMatrix& w = red.reduction.basis = orthogonal_complement(kernel, sys.dim);
  red.system.dim = w.cols();
  for (const Constraint& c : sys.constraints)
    red.system.constraints.push_back(
        {HermMatrix::from(w.adjoint() * c.matrix.matrix() * w), c.target, c.origin});
  return red;
}

HermMatrix embed_solution(const HermMatrix& xred, const SupportReduction& red) {
  if (xred.dim() != red.reduced_dim()) {
    std::ostringstream os;
    os << "embed_solution: expected " << red.reduced_dim() << "x" << red.reduced_dim()
       << ", got " << xred.dim();
    throw LinalgError(os.str());
  }
  return HermMatrix::from(red.basis * xred.matrix() * red.basis.adjoint());
}

bool is_diagonal_instance(const ProblemInstance& inst, double tol) {
  const auto diag = [tol](const CMatrix& m) {
    for (Index j = 0; j < m.cols(); ++j)
      for (Index i = 0; i < m.rows(); ++i)
        if (i != j && std::abs(m(i, j)) > tol) return false;
    return true;
  };
  return std::all_of(inst.pairs.begin(), inst.pairs.end(),
                     [&](const auto& pr) { return diag(pr.input) && diag(pr.output); });
}

ConstraintSystem restrict_to_diagonal(const ConstraintSystem& sys, double tol) {
  ConstraintSystem out;
  out.dim = sys.dim;
  for (std::size_t t = 0; t < sys.size(); ++t) {
    const Constraint& c = sys.constraints[t];
    const double scale = c.matrix.frobenius_norm();
    const double diag_norm = c.matrix.matrix().diagonal().norm();
    if (diag_norm <= tol * scale) {
      if (std::abs(c.target) > tol * (1.0 + scale))
        throw InconsistentConstraints(
            describe(c.origin) + ": off-diagonal constraint with nonzero target", t, RVector());
      continue;
    }
    if (!c.matrix.is_diagonal(tol * scale))
      throw std::invalid_argument(describe(c.origin) + ": constraint is not diagonal");
    out.constraints.push_back(c);
  }
  return out;
}

ConstraintSystem build_system(const ProblemInstance& inst, double prune_tol) {
  ConstraintSystem sys = hermitize(assemble(inst));
  if (inst.trace_preserving) sys = add_trace_preserving(std::move(sys), inst.n, inst.k);
  return prune_dependent(sys, prune_tol);
}

}  // namespace cpinterp
