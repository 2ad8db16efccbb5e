#pragma once

#include <cstddef>
#include <optional>

#include "cpinterp/linalg.hpp"

namespace cpinterp {

/// Smooth objective for minimize_cg. `evaluate` returns the value and fills
/// `grad`, or std::nullopt when the point is outside the numerically
/// representable domain (the line search then backtracks).
class SmoothObjective {
 public:
  virtual ~SmoothObjective() = default;
  virtual std::optional<double> evaluate(const RVector& x, RVector& grad) = 0;
};

struct CgOptions {
  double gradient_tol = 1e-10;
  std::size_t max_iterations = 20000;
  /// Sufficient-decrease constant.
  double armijo = 1e-4;
  /// Strong-Wolfe curvature constant.
  double curvature = 0.1;
  /// Restart with steepest descent every this many iterations.
  std::size_t restart_period = 1;
  /// Stop as divergent once ||x|| exceeds this while still descending.
  double divergence_radius = 1e4;
};

enum class CgStop { Converged, Diverged, IterationLimit, LineSearchFailure };

struct CgResult {
  RVector x;
  RVector gradient;
  double value = 0.0;
  std::size_t iterations = 0;
  CgStop stop = CgStop::IterationLimit;
};

/// Polak-Ribiere-plus nonlinear conjugate gradients with restarts.
CgResult minimize_cg(SmoothObjective& f, RVector x0, const CgOptions& opt);

}  // namespace cpinterp
