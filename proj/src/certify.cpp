#include "cpinterp/certify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

namespace cpinterp {

std::string to_string(CertificateKind k) {
  return k == CertificateKind::ExcludesPSD ? "excludes-psd" : "excludes-pd";
}

std::string to_string(FeasibilityStatus s) {
  switch (s) {
    case FeasibilityStatus::Feasible: return "feasible";
    case FeasibilityStatus::CertifiedInfeasible: return "certified-infeasible";
    case FeasibilityStatus::CertifiedNoStrict: return "certified-no-strict";
    case FeasibilityStatus::Undetermined: return "undetermined";
    case FeasibilityStatus::Inconsistent: return "inconsistent";
  }
  return "unknown";
}

CertificateVerdict validate(const Certificate& cert, const ConstraintSystem& sys, double tol) {
  CertificateVerdict v;
  if (cert.coefficients.size() != static_cast<Index>(sys.size())) {
    v.reason = "coefficient count does not match the system";
    return v;
  }
  const double norm = cert.coefficients.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    v.reason = "coefficients must be a finite nonzero vector";
    return v;
  }
  const RVector x = cert.coefficients / norm;
  const HermMatrix s = sys.combination(x);
  const EigDecomp eig = herm_eig(s);
  v.min_eigenvalue = eig.eigenvalues(0);
  v.value = x.dot(sys.targets());
  if (v.min_eigenvalue < -tol) {
    v.reason = "combination of constraint matrices is not positive semidefinite";
    return v;
  }
  if (cert.kind == CertificateKind::ExcludesPSD) {
    if (!(v.value < -tol)) {
      v.reason = "target functional is not negative";
      return v;
    }
  } else {
    if (!(v.value <= tol)) {
      v.reason = "target functional is positive";
      return v;
    }
    if (!(eig.eigenvalues(eig.eigenvalues.size() - 1) > tol)) {
      v.reason = "combination of constraint matrices vanishes";
      return v;
    }
  }
  v.valid = true;
  return v;
}

namespace {

struct MinEig {
  double value;
  RVector gradient;  // d lambda_min / dx_i = u* C(i) u
};

MinEig min_eig_with_gradient(const ConstraintSystem& sys, const RVector& x) {
  const EigDecomp eig = herm_eig(sys.combination(x));
  const CVector u = eig.eigenvectors.col(0);
  MinEig m{eig.eigenvalues(0), RVector(static_cast<Index>(sys.size()))};
  for (std::size_t i = 0; i < sys.size(); ++i)
    m.gradient(static_cast<Index>(i)) =
        u.dot(sys.constraints[i].matrix.matrix() * u).real();
  return m;
}

RVector random_unit(std::mt19937_64& rng, Index q) {
  std::normal_distribution<double> normal;
  RVector x(q);
  for (Index i = 0; i < q; ++i) x(i) = normal(rng);
  const double n = x.norm();
  return n > 0.0 ? RVector(x / n) : RVector(RVector::Unit(q, 0));
}

class CertificateSearch {
 public:
  CertificateSearch(const ConstraintSystem& sys, const SearchBudget& budget,
                    const PositiveSpanCheck& span)
      : sys_(sys), b_(sys.targets()), budget_(budget), span_(span) {}

  std::optional<Certificate> attempt(const RVector& raw) const {
    if (!(raw.norm() > 0.0) || !raw.allFinite()) return std::nullopt;
    if (auto c = accept(raw)) return c;
    return accept(repair(raw));
  }

  std::optional<Certificate> descend(RVector x) const {
    x.normalize();
    double rho = 10.0;
    double step = 0.1;
    const std::size_t stage = std::max<std::size_t>(1, budget_.iterations / 5);
    for (std::size_t it = 0; it < budget_.iterations; ++it) {
      if (it > 0 && it % stage == 0) {
        rho *= 10.0;
        if (auto c = attempt(x)) return c;
      }
      const MinEig m = min_eig_with_gradient(sys_, x);
      const double violation = std::max(0.0, -m.value);
      const double f = b_.dot(x) + rho * violation * violation;
      RVector g = b_ - 2.0 * rho * violation * m.gradient;
      g -= g.dot(x) * x;  // tangent to the sphere
      if (g.norm() < 1e-14) break;
      bool moved = false;
      for (int back = 0; back < 30; ++back, step *= 0.5) {
        RVector trial = x - step * g;
        trial.normalize();
        const double vt = std::max(0.0, -herm_eig(sys_.combination(trial)).eigenvalues(0));
        if (b_.dot(trial) + rho * vt * vt < f) {
          x = std::move(trial);
          moved = true;
          step *= 2.0;
          break;
        }
      }
      if (!moved) step = 0.1;
    }
    return attempt(x);
  }

 private:
  // Shift toward a positive definite combination until the matrix is PSD.
  RVector repair(const RVector& raw) const {
    RVector x = raw / raw.norm();
    if (!span_.holds) return x;
    const double lambda = herm_eig(sys_.combination(x)).eigenvalues(0);
    if (lambda >= 0.0) return x;
    const double t = -lambda / span_.best_min_eigenvalue * (1.0 + 1e-9);
    x += t * span_.coefficients;
    return x / x.norm();
  }

  std::optional<Certificate> accept(const RVector& raw) const {
    for (CertificateKind kind : {CertificateKind::ExcludesPSD, CertificateKind::ExcludesPD}) {
      Certificate c;
      c.coefficients = raw / raw.norm();
      c.kind = kind;
      const CertificateVerdict v = validate(c, sys_, budget_.tol);
      if (v.valid) {
        c.value = v.value;
        c.min_eigenvalue = v.min_eigenvalue;
        return c;
      }
    }
    return std::nullopt;
  }

  const ConstraintSystem& sys_;
  RVector b_;
  const SearchBudget& budget_;
  const PositiveSpanCheck& span_;
};

}  // namespace

PositiveSpanCheck check_positive_span(const ConstraintSystem& sys, std::uint64_t seed) {
  PositiveSpanCheck out;
  const Index q = static_cast<Index>(sys.size());
  if (q == 0) return out;

  std::vector<RVector> starts;
  // Projection of the identity onto the span.
  RVector tr(q);
  for (Index i = 0; i < q; ++i)
    tr(i) = sys.constraints[static_cast<std::size_t>(i)].matrix.matrix().trace().real();
  const RVector y = sys.gram().ldlt().solve(tr);
  if (y.allFinite() && y.norm() > 0.0) starts.push_back(y / y.norm());
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  for (int r = 0; r < 3; ++r) starts.push_back(random_unit(rng, q));

  out.best_min_eigenvalue = -std::numeric_limits<double>::infinity();
  for (RVector x : starts) {
    double step = 0.5;
    for (int it = 0; it < 200; ++it) {
      const MinEig m = min_eig_with_gradient(sys, x);
      if (m.value > out.best_min_eigenvalue) {
        out.best_min_eigenvalue = m.value;
        out.coefficients = x;
      }
      RVector g = m.gradient - m.gradient.dot(x) * x;
      if (g.norm() < 1e-14) break;
      x += step * g / g.norm();
      x.normalize();
      step *= 0.97;
    }
  }
  double scale = 0.0;
  for (const Constraint& c : sys.constraints) scale = std::max(scale, c.matrix.frobenius_norm());
  out.holds = out.best_min_eigenvalue > 1e-9 * scale;
  return out;
}

std::optional<Certificate> search_certificate(const ConstraintSystem& sys, std::uint64_t seed,
                                              const SearchBudget& budget,
                                              const std::optional<RVector>& hint) {
  const Index q = static_cast<Index>(sys.size());
  if (q == 0) return std::nullopt;
  const PositiveSpanCheck span = check_positive_span(sys, seed);
  const CertificateSearch search(sys, budget, span);

  if (hint && hint->size() == q) {
    if (auto c = search.attempt(*hint)) return c;
  }
  for (Index i = 0; i < q; ++i)
    for (double sign : {1.0, -1.0})
      if (auto c = search.attempt(sign * RVector::Unit(q, i))) return c;

  const RVector b = sys.targets();
  std::vector<RVector> starts;
  if (hint && hint->size() == q && hint->norm() > 0.0) starts.push_back(*hint);
  if (b.norm() > 0.0) starts.push_back(-b);
  std::mt19937_64 rng(seed);
  while (starts.size() < budget.restarts) starts.push_back(random_unit(rng, q));
  for (const RVector& s : starts)
    if (auto c = search.descend(s)) return c;
  return std::nullopt;
}

FeasibilityReport feasibility_report(const ConstraintSystem& sys, const FeasibilityConfig& cfg) {
  FeasibilityReport rep;
  rep.solve = solve_exp(sys, cfg.solver);
  rep.positive_span = check_positive_span(sys, cfg.seed);

  std::optional<RVector> hint;
  if (rep.solve.coefficients && rep.solve.coefficients->norm() > 0.0)
    hint = RVector(-*rep.solve.coefficients);

  if (rep.solve.status == SolveStatus::Feasible) {
    const HermMatrix& x = *rep.solve.solution;
    if (rep.solve.min_eigenvalue > cfg.strict_margin * (1.0 + x.frobenius_norm())) {
      rep.status = FeasibilityStatus::Feasible;
      return rep;
    }
    auto cert = search_certificate(sys, cfg.seed, cfg.search, hint);
    if (cert && cert->kind == CertificateKind::ExcludesPD) {
      rep.status = FeasibilityStatus::CertifiedNoStrict;
      rep.certificate = std::move(cert);
    } else {
      rep.status = FeasibilityStatus::Feasible;
    }
    return rep;
  }

  rep.certificate = search_certificate(sys, cfg.seed, cfg.search, hint);
  if (!rep.certificate)
    rep.status = FeasibilityStatus::Undetermined;
  else if (rep.certificate->kind == CertificateKind::ExcludesPSD)
    rep.status = FeasibilityStatus::CertifiedInfeasible;
  else
    rep.status = FeasibilityStatus::CertifiedNoStrict;
  return rep;
}

}  // namespace cpinterp
