#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "cpinterp/constraints.hpp"
#include "cpinterp/linalg.hpp"

namespace cpinterp {

/// V(x) = tr e^{sum x_i C(i)} - sum x_i b_i. Returns +infinity when the
/// exponential overflows.
double potential(const ConstraintSystem& sys, const RVector& x);

/// dV/dx_i = tr(C(i) e^{sum x_j C(j)}) - b_i. Throws ExpOverflow.
RVector gradient(const ConstraintSystem& sys, const RVector& x, bool parallel = false);

struct ExpSolveConfig {
  double gradient_tol = 1e-10;
  std::size_t max_iterations = 20000;
  double armijo = 1e-4;
  double curvature = 0.1;
  /// Steepest-descent restart period; the number of constraints when unset.
  std::optional<std::size_t> restart_period;
  /// Divergence is declared once ||x|| > divergence_factor * (1 + ||x_start||).
  double divergence_factor = 1e4;
  /// Starting point; zero when unset.
  std::optional<RVector> start;
  /// Evaluate gradient components on several threads.
  bool parallel = false;
};

enum class SolveStatus { Feasible, NoStrictlyPositiveSolution, IterationLimit, LevelUnattainable };

std::string to_string(SolveStatus s);

struct SolveOutcome {
  SolveStatus status = SolveStatus::IterationLimit;
  std::optional<HermMatrix> solution;
  std::optional<RVector> coefficients;
  RVector residuals;
  double min_eigenvalue = 0.0;
  std::size_t iterations = 0;
  std::string diagnostic;

  double max_residual() const;
};

/// Minimizes V by nonlinear conjugate gradients; on convergence the
/// solution is X = e^{sum x_i C(i)}, strictly positive definite.
SolveOutcome solve_exp(const ConstraintSystem& sys, const ExpSolveConfig& cfg = {});

/// Same minimization for a system of diagonal constraints, where the
/// exponential acts entrywise. Coordinates outside the joint support of the
/// constraints are set to zero in the returned (diagonal) solution.
SolveOutcome solve_diagonal(const ConstraintSystem& sys, const ExpSolveConfig& cfg = {});

struct BarrierConfig {
  /// a0, strictly positive definite. Identity when unset.
  std::optional<HermMatrix> offset;
  /// Level of the slice sum b_i x_i = level.
  double level = 1.0;
  double newton_tol = 1e-12;
  std::size_t max_newton_steps = 200;
  /// Verification tolerance for the recovered solution.
  double residual_tol = 1e-6;
};

/// Analytic center of a(x) = a0 + sum x_i C(i) > 0 on the slice
/// sum b_i x_i = level, found by infeasible-start equality-constrained
/// Newton. Returns X = mu^{-1} a(x*)^{-1} where mu is the multiplier of the
/// stationarity condition tr(C(i) a(x*)^{-1}) = mu b_i.
SolveOutcome analytic_center(const ConstraintSystem& sys, const BarrierConfig& cfg);

struct BarrierSweepConfig {
  BarrierConfig base;
  int min_exponent = -4;
  int max_exponent = 8;
  /// Smaller levels tried afterwards, down to 2^fallback_min_exponent.
  /// With mixed-sign targets the multiplier is often positive only near 0.
  int fallback_min_exponent = -30;
};

/// Tries levels 2^j * sum |b_i|, j = min..max, then j = min-1 down to
/// fallback_min, returning the first center whose solution verifies at
/// base.residual_tol.
SolveOutcome solve_barrier(const ConstraintSystem& sys, const BarrierSweepConfig& cfg = {});

/// Orthogonal (Frobenius) projection of x onto the affine set
/// {X : tr(C(i) X) = b_i}. Requires linearly independent constraints.
HermMatrix project_affine(const HermMatrix& x, const ConstraintSystem& sys);

struct VerificationReport {
  RVector residuals;
  double max_residual = 0.0;
  double min_eigenvalue = 0.0;
  bool psd = false;
  bool satisfied = false;
};

VerificationReport verify(const HermMatrix& x, const ConstraintSystem& sys, double tol);

}  // namespace cpinterp
