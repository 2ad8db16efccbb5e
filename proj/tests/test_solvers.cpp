#include <doctest.h>

#include "cpinterp/solvers.hpp"
#include "oracles.hpp"

using namespace cpinterp;

namespace {

CMatrix combination_direct(const ConstraintSystem& sys, const RVector& x) {
  CMatrix s = CMatrix::Zero(sys.dim, sys.dim);
  for (std::size_t i = 0; i < sys.size(); ++i)
    s += x(static_cast<Index>(i)) * sys.constraints[i].matrix.matrix();
  return s;
}

double potential_direct(const ConstraintSystem& sys, const RVector& x) {
  return oracle::expm_taylor(combination_direct(sys, x)).trace().real() - x.dot(sys.targets());
}

ConstraintSystem single(const CMatrix& c, double b) {
  ConstraintSystem sys;
  sys.dim = c.rows();
  sys.constraints.push_back({HermMatrix::from(c), b, {}});
  return sys;
}

}  // namespace

TEST_CASE("potential matches the Taylor-series definition") {
  oracle::Rng rng(20);
  const auto ps = oracle::planted_system(rng, 4, 5);
  for (int t = 0; t < 5; ++t) {
    RVector x(5);
    for (Index i = 0; i < 5; ++i) x(i) = 0.3 * rng.normal();
    CHECK(potential(ps.system, x) == doctest::Approx(potential_direct(ps.system, x)).epsilon(1e-11));
  }
}

TEST_CASE("gradient matches central differences of the reference potential") {
  oracle::Rng rng(21);
  const auto ps = oracle::planted_system(rng, 3, 4);
  RVector x(4);
  for (Index i = 0; i < 4; ++i) x(i) = 0.2 * rng.normal();
  const RVector g = gradient(ps.system, x);
  const double h = 1e-5;
  for (Index i = 0; i < 4; ++i) {
    RVector xp = x, xm = x;
    xp(i) += h;
    xm(i) -= h;
    const double fd = (potential_direct(ps.system, xp) - potential_direct(ps.system, xm)) / (2 * h);
    CHECK(g(i) == doctest::Approx(fd).epsilon(1e-6));
  }
  CHECK((gradient(ps.system, x, true) - g).norm() <= 1e-14 * (1 + g.norm()));
}

TEST_CASE("potential is +inf on overflow and gradient throws") {
  const ConstraintSystem sys = single(CMatrix::Identity(2, 2), 1.0);
  RVector x(1);
  x << 1000.0;
  CHECK(std::isinf(potential(sys, x)));
  CHECK_THROWS_AS(gradient(sys, x), ExpOverflow);
}

TEST_CASE("solve_exp on the worked example reaches the unique minimizer") {
  const ConstraintSystem sys = build_system(oracle::worked_example());
  const SolveOutcome out = solve_exp(sys);
  REQUIRE(out.status == SolveStatus::Feasible);
  CHECK(out.max_residual() <= 1e-8);
  CHECK(out.min_eigenvalue > 0.1);
  const CMatrix ref = oracle::exp_minimizer();
  CHECK((out.solution->matrix() - ref).cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("solve_exp: planted systems are solved") {
  oracle::Rng rng(22);
  for (int t = 0; t < 10; ++t) {
    const auto ps = oracle::planted_system(rng, rng.integer(2, 5), static_cast<std::size_t>(rng.integer(1, 6)));
    const SolveOutcome out = solve_exp(ps.system);
    REQUIRE(out.status == SolveStatus::Feasible);
    CHECK(out.max_residual() <= 1e-8);
    CHECK(oracle::min_eig_direct(out.solution->matrix()) > 0.0);
  }
}

TEST_CASE("solve_exp: no strictly positive solution is detected") {
  const ConstraintSystem neg = single(CMatrix::Identity(2, 2), -1.0);
  CHECK(solve_exp(neg).status == SolveStatus::NoStrictlyPositiveSolution);
}

TEST_CASE("solve_exp: an unattained infimum ends on a nearly singular solution") {
  // tr(E11 X) = 0 admits X >= 0 but no X > 0; the potential decreases
  // towards an infimum that is approached as x -> -inf. The solver either
  // gives up or stops once the residual e^x is below tolerance.
  CMatrix e11 = CMatrix::Zero(2, 2);
  e11(0, 0) = 1.0;
  const SolveOutcome out = solve_exp(single(e11, 0.0));
  if (out.status == SolveStatus::Feasible) CHECK(out.min_eigenvalue <= 1e-9);
}

TEST_CASE("solve_exp: iteration limit is reported") {
  const ConstraintSystem sys = build_system(oracle::worked_example());
  ExpSolveConfig cfg;
  cfg.max_iterations = 2;
  CHECK(solve_exp(sys, cfg).status == SolveStatus::IterationLimit);
}

TEST_CASE("solve_diagonal returns a diagonal solution") {
  ConstraintSystem sys;
  sys.dim = 3;
  const double d1[] = {1, 1, 0}, d2[] = {0, 1, 1};
  for (const double* d : {d1, d2}) {
    CMatrix c = CMatrix::Zero(3, 3);
    for (Index i = 0; i < 3; ++i) c(i, i) = d[i];
    sys.constraints.push_back({HermMatrix::from(c), 2.0, {}});
  }
  const SolveOutcome out = solve_diagonal(sys);
  REQUIRE(out.status == SolveStatus::Feasible);
  CHECK(out.solution->is_diagonal(0.0));
  CHECK(out.max_residual() <= 1e-9);
  // The exponential minimizer is symmetric under swapping coordinates 1 and 3.
  CHECK((*out.solution)(0, 0).real() == doctest::Approx((*out.solution)(2, 2).real()));
}

TEST_CASE("solve_diagonal zeroes coordinates outside the support") {
  CMatrix c = CMatrix::Zero(2, 2);
  c(0, 0) = 1.0;
  const SolveOutcome out = solve_diagonal(single(c, 3.0));
  REQUIRE(out.status == SolveStatus::Feasible);
  CHECK((*out.solution)(0, 0).real() == doctest::Approx(3.0));
  CHECK((*out.solution)(1, 1).real() == 0.0);
  CHECK_THROWS(solve_diagonal(build_system(oracle::worked_example())));
}

TEST_CASE("analytic center on the worked example is feasible") {
  const ConstraintSystem sys = build_system(oracle::worked_example());
  const SolveOutcome out = solve_barrier(sys);
  REQUIRE(out.status == SolveStatus::Feasible);
  CHECK(out.max_residual() <= 1e-6);
  CHECK(oracle::min_eig_direct(out.solution->matrix()) > 0.0);
}

TEST_CASE("barrier sweep handles mixed-sign targets") {
  // Targets of both signs: at level sum|b| the stationarity multiplier is
  // negative, so the sweep has to move towards smaller levels.
  oracle::Rng rng(23);
  const auto ps = oracle::planted_system(rng, 3, 3);
  const RVector b = ps.system.targets();
  REQUIRE(b.minCoeff() < 0.0);
  REQUIRE(b.maxCoeff() > 0.0);
  BarrierConfig cfg;
  cfg.level = b.cwiseAbs().sum();
  CHECK(analytic_center(ps.system, cfg).status != SolveStatus::Feasible);
  const SolveOutcome out = solve_barrier(ps.system);
  REQUIRE(out.status == SolveStatus::Feasible);
  // X = a^-1 / mu, so tr(C_i X) = b_i is the stationarity condition itself.
  CHECK(out.max_residual() <= 1e-8 * (1 + b.norm()));
  CHECK(oracle::min_eig_direct(out.solution->matrix()) > 0.0);
}

TEST_CASE("project_affine lands on the constraint set and is orthogonal") {
  oracle::Rng rng(24);
  const auto ps = oracle::planted_system(rng, 4, 5);
  const HermMatrix x0 = HermMatrix::from(rng.hermitian(4));
  const HermMatrix x = project_affine(x0, ps.system);
  CHECK((ps.system.traces(x) - ps.system.targets()).cwiseAbs().maxCoeff() <= 1e-10);
  // x - x0 lies in span{C}, so it is orthogonal to (x_true - x).
  const CMatrix diff = (x - x0).matrix();
  const CMatrix along = ps.x_true - x.matrix();
  CHECK(std::abs(oracle::trace_direct(diff, along)) <= 1e-9 * (1 + diff.norm() * along.norm()));
  // Projecting a feasible point changes nothing.
  const HermMatrix again = project_affine(HermMatrix::from(ps.x_true), ps.system);
  CHECK((again.matrix() - ps.x_true).norm() <= 1e-10);
}

TEST_CASE("verify reports residuals and positivity") {
  const ConstraintSystem sys = build_system(oracle::worked_example());
  const VerificationReport v = verify(HermMatrix::from(oracle::exp_minimizer()), sys, 1e-6);
  CHECK(v.satisfied);
  CHECK(v.psd);
  const VerificationReport bad = verify(-1.0 * HermMatrix::identity(4), sys, 1e-6);
  CHECK(!bad.satisfied);
  CHECK(!bad.psd);
}

TEST_CASE("property: the exp solution is unique regardless of the starting point") {
  const ConstraintSystem sys = build_system(oracle::worked_example());
  oracle::Rng rng(25);
  const CMatrix ref = solve_exp(sys).solution->matrix();
  for (int t = 0; t < 5; ++t) {
    ExpSolveConfig cfg;
    RVector start(static_cast<Index>(sys.size()));
    for (Index i = 0; i < start.size(); ++i) start(i) = 0.3 * rng.normal();
    cfg.start = start;
    const SolveOutcome out = solve_exp(sys, cfg);
    REQUIRE(out.status == SolveStatus::Feasible);
    CHECK((out.solution->matrix() - ref).cwiseAbs().maxCoeff() <= 1e-6);
  }
}
