#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "cpinterp/solvers.hpp"

namespace cpinterp {

namespace {

struct Center {
  bool positive = false;
  CMatrix inverse;
};

// a(x) = a0 + sum x_i C(i) and its inverse when a(x) > 0.
Center evaluate_lmi(const ConstraintSystem& sys, const HermMatrix& a0, const RVector& x) {
  Center c;
  const HermMatrix a = a0 + sys.combination(x);
  const Eigen::LLT<CMatrix> llt(a.matrix());
  if (llt.info() != Eigen::Success) return c;
  const RVector diag = llt.matrixLLT().diagonal().real();
  if (!(diag.minCoeff() > 0.0)) return c;
  c.positive = true;
  c.inverse = llt.solve(CMatrix::Identity(a.dim(), a.dim()));
  return c;
}

}  // namespace

SolveOutcome analytic_center(const ConstraintSystem& sys, const BarrierConfig& cfg) {
  const Index q = static_cast<Index>(sys.size()), p = sys.dim;
  const HermMatrix a0 = cfg.offset.value_or(HermMatrix::identity(p));
  if (a0.dim() != p) throw std::invalid_argument("analytic_center: offset dimension mismatch");
  if (!(min_eigenvalue(a0) > 0.0))
    throw std::invalid_argument("analytic_center: offset a0 must be positive definite");

  SolveOutcome out;
  const RVector b = sys.targets();
  if (b.squaredNorm() == 0.0 && cfg.level != 0.0) {
    out.status = SolveStatus::LevelUnattainable;
    out.diagnostic = "all targets vanish, so the only attainable level is 0";
    return out;
  }

  // Infeasible-start Newton on the KKT residual
  //   r_dual = -t + nu b,  r_pri = b.x - level,  t_i = tr(C(i) a(x)^{-1}).
  RVector x = RVector::Zero(q);
  double nu = 0.0;
  Center cur = evaluate_lmi(sys, a0, x);
  const double level_scale = 1.0 + std::abs(cfg.level);
  bool converged = false;

  const auto residual = [&](const Center& c, const RVector& xs, double nus, RVector& t) {
    t.resize(q);
    for (Index i = 0; i < q; ++i)
      t(i) = (sys.constraints[static_cast<std::size_t>(i)].matrix.matrix() * c.inverse)
                 .trace()
                 .real();
    RVector r(q + 1);
    r.head(q) = -t + nus * b;
    r(q) = b.dot(xs) - cfg.level;
    return r;
  };

  for (out.iterations = 0; out.iterations < cfg.max_newton_steps; ++out.iterations) {
    RVector t;
    const RVector r = residual(cur, x, nu, t);
    const double dual_scale = 1.0 + t.norm();
    if (std::abs(r(q)) <= 1e-13 * level_scale && r.head(q).norm() <= cfg.newton_tol * dual_scale) {
      converged = true;
      break;
    }

    // Hessian of -ln det a(x): H_ij = tr(C(i) a^{-1} C(j) a^{-1}).
    std::vector<CMatrix> k(static_cast<std::size_t>(q));
    for (Index i = 0; i < q; ++i)
      k[static_cast<std::size_t>(i)] = sys.constraints[static_cast<std::size_t>(i)].matrix.matrix() * cur.inverse;
    RMatrix kkt = RMatrix::Zero(q + 1, q + 1);
    for (Index i = 0; i < q; ++i) {
      for (Index j = 0; j <= i; ++j) {
        const double h = k[static_cast<std::size_t>(i)]
                             .cwiseProduct(k[static_cast<std::size_t>(j)].transpose())
                             .sum()
                             .real();
        kkt(i, j) = kkt(j, i) = h;
      }
      kkt(i, q) = kkt(q, i) = b(i);
    }
    const RVector step = kkt.fullPivLu().solve(-r);
    const RVector dx = step.head(q);
    const double dnu = step(q);
    if (!step.allFinite()) {
      out.diagnostic = "singular Newton system";
      break;
    }

    double s = 1.0;
    const double rnorm = r.norm();
    bool accepted = false;
    for (int back = 0; back < 60; ++back, s *= 0.5) {
      const RVector xs = x + s * dx;
      Center trial = evaluate_lmi(sys, a0, xs);
      if (!trial.positive) continue;
      RVector ts;
      const RVector rs = residual(trial, xs, nu + s * dnu, ts);
      if (rs.norm() <= (1.0 - 0.01 * s) * rnorm) {
        x = xs;
        nu += s * dnu;
        cur = std::move(trial);
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      out.status = std::abs(r(q)) > 1e-9 * level_scale ? SolveStatus::LevelUnattainable
                                                       : SolveStatus::IterationLimit;
      out.diagnostic = "Newton step could not keep a(x) positive definite";
      out.coefficients = x;
      return out;
    }
    if (x.norm() > 1e12) {
      out.diagnostic = "barrier iterates unbounded; no strictly positive solution on this slice";
      break;
    }
  }
  out.coefficients = x;

  if (!converged) {
    out.status = SolveStatus::IterationLimit;
    if (out.diagnostic.empty()) out.diagnostic = "Newton iteration limit reached";
    return out;
  }

  RVector t;
  residual(cur, x, nu, t);
  const double mu = b.squaredNorm() > 0.0 ? t.dot(b) / b.squaredNorm() : 0.0;
  if (!(mu > 0.0)) {
    std::ostringstream os;
    os << "stationarity multiplier " << mu << " is not positive";
    out.status = SolveStatus::IterationLimit;
    out.diagnostic = os.str();
    return out;
  }
  const HermMatrix xs = (1.0 / mu) * HermMatrix::from(cur.inverse);
  const VerificationReport rep = verify(xs, sys, cfg.residual_tol);
  out.residuals = sys.traces(xs) - b;
  out.min_eigenvalue = rep.min_eigenvalue;
  if (rep.satisfied && rep.min_eigenvalue > 0.0) {
    out.status = SolveStatus::Feasible;
    out.solution = xs;
  } else {
    std::ostringstream os;
    os << "center found but solution does not verify (max residual " << rep.max_residual << ")";
    out.status = SolveStatus::IterationLimit;
    out.diagnostic = os.str();
  }
  return out;
}

SolveOutcome solve_barrier(const ConstraintSystem& sys, const BarrierSweepConfig& cfg) {
  const double scale = sys.targets().cwiseAbs().sum();
  SolveOutcome last;
  last.diagnostic = "empty level sweep";
  if (scale == 0.0) {
    BarrierConfig c = cfg.base;
    c.level = 0.0;
    return analytic_center(sys, c);
  }
  std::vector<int> exponents;
  for (int j = cfg.min_exponent; j <= cfg.max_exponent; ++j) exponents.push_back(j);
  for (int j = cfg.min_exponent - 1; j >= cfg.fallback_min_exponent; --j) exponents.push_back(j);
  std::size_t total = 0;
  for (int j : exponents) {
    BarrierConfig c = cfg.base;
    c.level = std::ldexp(scale, j);
    last = analytic_center(sys, c);
    total += last.iterations;
    if (last.status == SolveStatus::Feasible) break;
  }
  last.iterations = total;
  return last;
}

}  // namespace cpinterp
