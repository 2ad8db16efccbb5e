#include "cpinterp/nlcg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cpinterp {

namespace {

struct Probe {
  double alpha = 0.0;
  double value = 0.0;
  double slope = 0.0;
  bool ok = false;
  RVector x;
  RVector grad;
};

enum class SearchStatus { Found, Diverged, Failed };

struct SearchResult {
  SearchStatus status;
  Probe point;
};

// Line search along a descent direction. Brackets the first point where the
// directional derivative turns nonnegative, then refines by safeguarded
// secant steps on the derivative until the strong Wolfe conditions hold.
// The sufficient-decrease test carries a round-off allowance proportional
// to |f(x)|: close to the minimizer the true decrease falls below the
// resolution of the objective while the derivative is still accurate.
class LineSearch {
 public:
  LineSearch(SmoothObjective& f, const RVector& x, const RVector& d, double f0, double s0,
             const CgOptions& opt)
      : f_(f), x_(x), d_(d), f0_(f0), s0_(s0), opt_(opt),
        noise_(64.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(f0))) {}

  SearchResult run(double alpha) {
    Probe prev;
    prev.ok = true;
    prev.value = f0_;
    prev.slope = s0_;
    for (int i = 0; i < 80; ++i) {
      Probe p = eval(alpha);
      if (!decreases(p) || p.slope >= 0.0) return zoom(prev, p);
      if (flat(p)) return {SearchStatus::Found, p};
      if (p.x.norm() > opt_.divergence_radius) return {SearchStatus::Diverged, p};
      prev = std::move(p);
      alpha *= 4.0;
    }
    return {SearchStatus::Failed, prev};
  }

 private:
  Probe eval(double alpha) {
    Probe p;
    p.alpha = alpha;
    p.x = x_ + alpha * d_;
    p.grad.resize(x_.size());
    const auto v = f_.evaluate(p.x, p.grad);
    if (!v || !std::isfinite(*v) || !p.grad.allFinite()) return p;
    p.ok = true;
    p.value = *v;
    p.slope = p.grad.dot(d_);
    return p;
  }

  bool decreases(const Probe& p) const {
    return p.ok && p.value <= f0_ + opt_.armijo * p.alpha * s0_ + noise_;
  }
  bool flat(const Probe& p) const { return std::abs(p.slope) <= -opt_.curvature * s0_; }

  // lo: sufficient decrease, negative slope. hi: fails decrease or has
  // nonnegative slope.
  SearchResult zoom(Probe lo, Probe hi) {
    for (int i = 0; i < 100; ++i) {
      const double width = hi.alpha - lo.alpha;
      if (width <= 1e-15 * hi.alpha) break;
      double alpha = 0.5 * (lo.alpha + hi.alpha);
      if (hi.ok && hi.slope > lo.slope) {
        const double secant = lo.alpha - lo.slope * width / (hi.slope - lo.slope);
        alpha = std::clamp(secant, lo.alpha + 0.1 * width, hi.alpha - 0.1 * width);
      }
      Probe p = eval(alpha);
      if (!decreases(p)) {
        hi = std::move(p);
        continue;
      }
      if (flat(p)) return {SearchStatus::Found, p};
      if (p.slope < 0.0)
        lo = std::move(p);
      else
        hi = std::move(p);
    }
    if (lo.alpha > 0.0) return {SearchStatus::Found, lo};
    return {SearchStatus::Failed, lo};
  }

  SmoothObjective& f_;
  const RVector& x_;
  const RVector& d_;
  double f0_;
  double s0_;
  const CgOptions& opt_;
  double noise_;
};

}  // namespace

CgResult minimize_cg(SmoothObjective& f, RVector x0, const CgOptions& opt) {
  CgResult res;
  res.x = std::move(x0);
  res.gradient.resize(res.x.size());
  const auto v0 = f.evaluate(res.x, res.gradient);
  if (!v0) throw LinalgError("minimize_cg: objective undefined at the starting point");
  res.value = *v0;
  if (res.x.size() == 0) {
    res.stop = CgStop::Converged;
    return res;
  }

  RVector d = -res.gradient;
  double prev_alpha = 0.0, prev_slope = 0.0;
  const std::size_t period = std::max<std::size_t>(1, opt.restart_period);
  std::size_t since_restart = 0;

  for (res.iterations = 0; res.iterations < opt.max_iterations; ++res.iterations) {
    const double gnorm = res.gradient.norm();
    if (gnorm <= opt.gradient_tol) {
      res.stop = CgStop::Converged;
      return res;
    }
    double slope = res.gradient.dot(d);
    if (!(slope < 0.0)) {
      d = -res.gradient;
      slope = -gnorm * gnorm;
      since_restart = 0;
    }
    double alpha = prev_alpha > 0.0 ? prev_alpha * prev_slope / slope
                                    : 1.0 / std::max(1.0, res.gradient.cwiseAbs().maxCoeff());

    SearchResult ls = LineSearch(f, res.x, d, res.value, slope, opt).run(alpha);
    if (ls.status == SearchStatus::Failed && since_restart > 0) {
      d = -res.gradient;
      slope = -gnorm * gnorm;
      since_restart = 0;
      ls = LineSearch(f, res.x, d, res.value, slope, opt).run(alpha);
    }
    if (ls.status == SearchStatus::Failed) {
      res.stop = CgStop::LineSearchFailure;
      return res;
    }

    const RVector g_old = std::move(res.gradient);
    res.x = std::move(ls.point.x);
    res.gradient = std::move(ls.point.grad);
    res.value = ls.point.value;
    prev_alpha = ls.point.alpha;
    prev_slope = slope;
    if (ls.status == SearchStatus::Diverged || res.x.norm() > opt.divergence_radius) {
      ++res.iterations;
      res.stop = CgStop::Diverged;
      return res;
    }

    ++since_restart;
    double beta = res.gradient.dot(res.gradient - g_old) / g_old.squaredNorm();
    beta = std::max(0.0, beta);
    if (since_restart >= period) {
      beta = 0.0;
      since_restart = 0;
    }
    d = -res.gradient + beta * d;
  }
  res.stop = res.gradient.norm() <= opt.gradient_tol ? CgStop::Converged : CgStop::IterationLimit;
  return res;
}

}  // namespace cpinterp
