#include "cpinterp/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "cpinterp/nlcg.hpp"

namespace cpinterp {

namespace {

RVector constraint_traces(const ConstraintSystem& sys, const HermMatrix& x, bool parallel) {
  const std::size_t q = sys.size();
  const unsigned workers = std::min<unsigned>(std::max(1u, std::thread::hardware_concurrency()), 8u);
  if (!parallel || workers < 2 || q < 2 * workers) return sys.traces(x);
  RVector t(static_cast<Index>(q));
  {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (q + workers - 1) / workers;
    for (std::size_t start = 0; start < q; start += chunk) {
      pool.emplace_back([&, start] {
        const std::size_t stop = std::min(q, start + chunk);
        for (std::size_t i = start; i < stop; ++i)
          t(static_cast<Index>(i)) = trace_pair(sys.constraints[i].matrix, x);
      });
    }
  }
  return t;
}

void check_length(const ConstraintSystem& sys, const RVector& x) {
  if (x.size() != static_cast<Index>(sys.size())) {
    std::ostringstream os;
    os << "coefficient vector has length " << x.size() << ", system has " << sys.size()
       << " constraints";
    throw std::invalid_argument(os.str());
  }
}

class ExpPotential : public SmoothObjective {
 public:
  ExpPotential(const ConstraintSystem& sys, bool parallel)
      : sys_(sys), b_(sys.targets()), parallel_(parallel) {}

  std::optional<double> evaluate(const RVector& x, RVector& grad) override {
    HermMatrix e;
    try {
      e = expm_herm(sys_.combination(x));
    } catch (const ExpOverflow&) {
      return std::nullopt;
    }
    grad = constraint_traces(sys_, e, parallel_) - b_;
    return e.matrix().trace().real() - x.dot(b_);
  }

 private:
  const ConstraintSystem& sys_;
  RVector b_;
  bool parallel_;
};

// Diagonal constraints: V(x) = sum_j exp((D^T x)_j) - b.x with
// D(i, j) = C(i)_jj.
class DiagonalPotential : public SmoothObjective {
 public:
  DiagonalPotential(const RMatrix& d, const RVector& b) : d_(d), b_(b) {}

  std::optional<double> evaluate(const RVector& x, RVector& grad) override {
    const RVector s = d_.transpose() * x;
    if (s.size() > 0 && !(s.maxCoeff() <= 700.0)) return std::nullopt;
    const RVector e = s.array().exp();
    grad = d_ * e - b_;
    return e.sum() - x.dot(b_);
  }

 private:
  const RMatrix& d_;
  const RVector& b_;
};

CgOptions cg_options(const ExpSolveConfig& cfg, std::size_t q, const RVector& start) {
  CgOptions opt;
  opt.gradient_tol = cfg.gradient_tol;
  opt.max_iterations = cfg.max_iterations;
  opt.armijo = cfg.armijo;
  opt.curvature = cfg.curvature;
  opt.restart_period = cfg.restart_period.value_or(std::max<std::size_t>(1, q));
  opt.divergence_radius = cfg.divergence_factor * (1.0 + start.norm());
  return opt;
}

RVector start_point(const ExpSolveConfig& cfg, const ConstraintSystem& sys) {
  if (!cfg.start) return RVector::Zero(static_cast<Index>(sys.size()));
  check_length(sys, *cfg.start);
  return *cfg.start;
}

// C'(i) = sum_j (L^{-1})_ij C(j), b' = L^{-1} b with Gram matrix G = L L^T.
// The constraints then are orthonormal, the minimizer X is unchanged
// (x = L^{-T} y) and the Hessian of the potential is about as well
// conditioned as X itself.
struct Whitened {
  ConstraintSystem system;
  RMatrix linv;
  double gain = 1.0;  // ||L||_2, so ||r|| <= gain * ||r'||
};

std::optional<Whitened> whiten(const ConstraintSystem& sys) {
  const Index q = static_cast<Index>(sys.size());
  if (q == 0) return std::nullopt;
  const RMatrix g = sys.gram();
  const Eigen::LLT<RMatrix> llt(g);
  if (llt.info() != Eigen::Success) return std::nullopt;
  const RVector pivots = RMatrix(llt.matrixL()).diagonal();
  if (!(pivots.minCoeff() > 1e-6 * pivots.maxCoeff())) return std::nullopt;
  Whitened w;
  w.linv = llt.matrixL().solve(RMatrix::Identity(q, q));
  w.gain = std::sqrt(Eigen::SelfAdjointEigenSolver<RMatrix>(g, Eigen::EigenvaluesOnly)
                         .eigenvalues()
                         .maxCoeff());
  const RVector b = w.linv * sys.targets();
  w.system.dim = sys.dim;
  for (Index i = 0; i < q; ++i) {
    HermMatrix c(sys.dim);
    for (Index j = 0; j <= i; ++j)
      if (w.linv(i, j) != 0.0) c.add_scaled(w.linv(i, j), sys.constraints[static_cast<std::size_t>(j)].matrix);
    w.system.constraints.push_back({std::move(c), b(i), sys.constraints[static_cast<std::size_t>(i)].origin});
  }
  return w;
}

RVector gradient_or_empty(const ConstraintSystem& sys, const RVector& x) {
  try {
    return gradient(sys, x);
  } catch (const ExpOverflow&) {
    return RVector();
  }
}

SolveOutcome outcome_from(const CgResult& cg, HermMatrix x, const ConstraintSystem& sys,
                          const ExpSolveConfig& cfg) {
  SolveOutcome out;
  out.iterations = cg.iterations;
  out.coefficients = cg.x;
  out.residuals = sys.traces(x) - sys.targets();
  out.min_eigenvalue = min_eigenvalue(x);
  switch (cg.stop) {
    case CgStop::Converged:
      out.status = SolveStatus::Feasible;
      out.solution = std::move(x);
      break;
    case CgStop::Diverged:
      out.status = SolveStatus::NoStrictlyPositiveSolution;
      out.diagnostic = "potential keeps decreasing as ||x|| grows";
      break;
    case CgStop::IterationLimit:
      out.status = SolveStatus::IterationLimit;
      out.diagnostic = "iteration limit reached";
      break;
    case CgStop::LineSearchFailure:
      out.status = SolveStatus::IterationLimit;
      out.diagnostic = "line search failed";
      break;
  }
  if (out.status == SolveStatus::Feasible && out.max_residual() > cfg.gradient_tol) {
    out.status = SolveStatus::IterationLimit;
    out.diagnostic = "converged gradient but residual above tolerance";
    out.solution.reset();
  }
  if (out.status != SolveStatus::Feasible) {
    std::ostringstream os;
    os << out.diagnostic << " (gradient norm " << cg.gradient.norm() << ", ||x|| " << cg.x.norm()
       << ")";
    out.diagnostic = os.str();
  }
  return out;
}

}  // namespace

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Feasible: return "feasible";
    case SolveStatus::NoStrictlyPositiveSolution: return "no-strictly-positive-solution";
    case SolveStatus::IterationLimit: return "iteration-limit";
    case SolveStatus::LevelUnattainable: return "level-unattainable";
  }
  return "unknown";
}

double SolveOutcome::max_residual() const {
  return residuals.size() ? residuals.cwiseAbs().maxCoeff() : 0.0;
}

double potential(const ConstraintSystem& sys, const RVector& x) {
  check_length(sys, x);
  try {
    const HermMatrix e = expm_herm(sys.combination(x));
    return e.matrix().trace().real() - x.dot(sys.targets());
  } catch (const ExpOverflow&) {
    return std::numeric_limits<double>::infinity();
  }
}

RVector gradient(const ConstraintSystem& sys, const RVector& x, bool parallel) {
  check_length(sys, x);
  const HermMatrix e = expm_herm(sys.combination(x));
  return constraint_traces(sys, e, parallel) - sys.targets();
}

SolveOutcome solve_exp(const ConstraintSystem& sys, const ExpSolveConfig& cfg) {
  const RVector x0 = start_point(cfg, sys);
  const std::optional<Whitened> w = whiten(sys);
  if (!w) {
    ExpPotential objective(sys, cfg.parallel);
    const CgResult cg = minimize_cg(objective, x0, cg_options(cfg, sys.size(), x0));
    return outcome_from(cg, expm_herm(sys.combination(cg.x)), sys, cfg);
  }
  // x = L^{-T} y, so y0 = L^T x0 = (L^{-T})^{-1} x0.
  const RVector y0 = w->linv.transpose().triangularView<Eigen::Upper>().solve(x0);
  ExpPotential objective(w->system, cfg.parallel);
  CgOptions opt = cg_options(cfg, sys.size(), y0);
  opt.gradient_tol = cfg.gradient_tol / w->gain;
  CgResult cg = minimize_cg(objective, y0, opt);
  cg.x = w->linv.transpose() * cg.x;
  cg.gradient = gradient_or_empty(sys, cg.x);
  return outcome_from(cg, expm_herm(sys.combination(cg.x)), sys, cfg);
}

SolveOutcome solve_diagonal(const ConstraintSystem& sys, const ExpSolveConfig& cfg) {
  const Index q = static_cast<Index>(sys.size()), p = sys.dim;
  RMatrix d(q, p);
  for (Index i = 0; i < q; ++i) {
    const HermMatrix& c = sys.constraints[static_cast<std::size_t>(i)].matrix;
    if (!c.is_diagonal(1e-14 * c.frobenius_norm()))
      throw std::invalid_argument("solve_diagonal: constraint " + std::to_string(i + 1) +
                                  " is not diagonal");
    d.row(i) = c.matrix().diagonal().real().transpose();
  }
  const RVector b = sys.targets();
  const RVector x0 = start_point(cfg, sys);
  DiagonalPotential objective(d, b);
  const CgResult cg = minimize_cg(objective, x0, cg_options(cfg, sys.size(), x0));

  RVector diag = (d.transpose() * cg.x).array().exp();
  for (Index j = 0; j < p; ++j)
    if (q == 0 || d.col(j).cwiseAbs().maxCoeff() == 0.0) diag(j) = 0.0;
  return outcome_from(cg, HermMatrix::diagonal(diag), sys, cfg);
}

HermMatrix project_affine(const HermMatrix& x, const ConstraintSystem& sys) {
  if (x.dim() != sys.dim) throw LinalgError("project_affine: dimension mismatch");
  if (sys.size() == 0) return x;
  const RMatrix g = sys.gram();
  const Eigen::LDLT<RMatrix> ldlt(g);
  const RVector pivots = ldlt.vectorD();
  if (ldlt.info() != Eigen::Success || !(pivots.minCoeff() > 1e-13 * pivots.cwiseAbs().maxCoeff()))
    throw std::invalid_argument(
        "project_affine: constraint Gram matrix is singular; prune dependent constraints first");
  const RVector b = sys.targets();
  HermMatrix out = x;
  // A second pass removes the residual left by round-off in the first.
  for (int pass = 0; pass < 2; ++pass) {
    const RVector r = sys.traces(out) - b;
    out -= sys.combination(ldlt.solve(r));
  }
  return out;
}

VerificationReport verify(const HermMatrix& x, const ConstraintSystem& sys, double tol) {
  if (x.dim() != sys.dim) throw LinalgError("verify: dimension mismatch");
  VerificationReport rep;
  rep.residuals = (sys.traces(x) - sys.targets()).cwiseAbs();
  rep.max_residual = rep.residuals.size() ? rep.residuals.maxCoeff() : 0.0;
  rep.min_eigenvalue = min_eigenvalue(x);
  rep.psd = rep.min_eigenvalue >= -tol;
  rep.satisfied = rep.max_residual <= tol;
  return rep;
}

}  // namespace cpinterp
