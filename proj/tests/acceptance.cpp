// Acceptance suite. `acceptance` runs every criterion; `acceptance N` runs
// criterion N. One PASS/FAIL line per criterion; exit status 1 if any fails.
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <string>
#include <vector>

#include "cpinterp/certify.hpp"
#include "cpinterp/choi.hpp"
#include "cpinterp/constraints.hpp"
#include "cpinterp/pipeline.hpp"
#include "cpinterp/solvers.hpp"
#include "oracles.hpp"

using namespace cpinterp;

namespace {

// Tolerances, as stated by the criteria.
constexpr double kGoldenEntryTol = 5e-3;
constexpr double kProjectedResidualTol = 1e-6;
constexpr double kGoldenSeconds = 5.0;
constexpr double kApplyTol = 1e-6;
constexpr double kFdStep = 1e-5;
constexpr double kFdRelTol = 1e-6;
constexpr double kPlantedResidualTol = 1e-8;
constexpr double kPlantedSeconds = 60.0;
constexpr double kCertificateTol = 1e-9;
constexpr double kRoundTripTol = 1e-10;
constexpr double kDiagonalVerifyTol = 1e-8;
constexpr double kBarrierResidualTol = 1e-6;
constexpr double kTraceTol = 1e-8;
constexpr double kSupportResidualTol = 1e-10;

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

// Golden reproduction of the worked example.
Outcome criterion1() {
  const auto t0 = Clock::now();
  const ConstraintSystem sys = build_system(oracle::worked_example());
  const SolveOutcome out = solve_exp(sys);
  if (out.status != SolveStatus::Feasible) return {false, "solve_exp: " + to_string(out.status)};
  const HermMatrix x = project_affine(*out.solution, sys);
  const double elapsed = seconds_since(t0);
  const VerificationReport v = verify(x, sys, kProjectedResidualTol);
  const double dev = (x.matrix() - oracle::reference_x0()).cwiseAbs().maxCoeff();
  const bool pass = dev <= kGoldenEntryTol && v.max_residual <= kProjectedResidualTol &&
                    v.min_eigenvalue > 0.0 && elapsed < kGoldenSeconds;
  return {pass, fmt("max |X - X~0| = %.3e (tol 5e-3), max residual %.2e, min eig %.4f", dev,
                    v.max_residual, v.min_eigenvalue) +
                    fmt(", %.3f s", elapsed)};
}

// Interpolation check on the solved example.
Outcome criterion2() {
  const ProblemInstance inst = oracle::worked_example();
  const ConstraintSystem sys = build_system(inst);
  const SolveOutcome out = solve_exp(sys);
  if (out.status != SolveStatus::Feasible) return {false, "solve_exp: " + to_string(out.status)};
  const ChoiMatrix c(2, 2, project_affine(*out.solution, sys));
  const CMatrix b1 = apply_choi(c, inst.pairs[0].input);
  const CMatrix b2 = apply_choi(c, inst.pairs[1].input);
  const double e1 = std::abs(b1(0, 0) - 4.0);
  const double e2 = (b2 - inst.pairs[1].output).cwiseAbs().maxCoeff();
  return {e1 <= kApplyTol && e2 <= kApplyTol,
          fmt("|phi(A1)[1,1] - 4| = %.2e, max |phi(A2) - B2| = %.2e", e1, e2)};
}

// Gradient against central finite differences of the potential.
Outcome criterion3() {
  oracle::Rng rng(3003);
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    const Index p = rng.integer(1, 8);
    const Index q = rng.integer(1, 10);
    ConstraintSystem sys;
    sys.dim = p;
    for (Index i = 0; i < q; ++i)
      sys.constraints.push_back({HermMatrix::from(rng.hermitian(p)), rng.normal(), {}});
    RVector x(q);
    for (Index i = 0; i < q; ++i) x(i) = rng.normal() / std::sqrt(static_cast<double>(q * p));
    const RVector g = gradient(sys, x);
    RVector fd(q);
    for (Index i = 0; i < q; ++i) {
      RVector xp = x, xm = x;
      xp(i) += kFdStep;
      xm(i) -= kFdStep;
      fd(i) = (potential(sys, xp) - potential(sys, xm)) / (2.0 * kFdStep);
    }
    worst = std::max(worst, (g - fd).cwiseAbs().maxCoeff() / std::max(1.0, g.cwiseAbs().maxCoeff()));
  }
  return {worst <= kFdRelTol, fmt("worst relative error %.2e over 20 systems (tol 1e-6)", worst)};
}

// Planted feasibility.
Outcome criterion4() {
  const auto t0 = Clock::now();
  oracle::Rng rng(4004);
  double worst = 0.0;
  int infeasible = 0, certified = 0;
  for (int t = 0; t < 50; ++t) {
    const auto planted = oracle::planted_instance(rng, rng.integer(1, 3), rng.integer(1, 3),
                                                  static_cast<std::size_t>(rng.integer(1, 4)));
    const ConstraintSystem sys = build_system(planted.instance);
    const SolveOutcome out = solve_exp(sys);
    if (out.status != SolveStatus::Feasible) {
      ++infeasible;
      continue;
    }
    worst = std::max(worst, out.max_residual());
    if (search_certificate(sys, static_cast<std::uint64_t>(t)).has_value()) ++certified;
  }
  const double elapsed = seconds_since(t0);
  const bool pass = infeasible == 0 && certified == 0 && worst <= kPlantedResidualTol &&
                    elapsed < kPlantedSeconds;
  return {pass, fmt("%g not feasible, %g with a certificate, ", infeasible, certified) +
                    fmt("worst residual %.2e, %.2f s", worst, elapsed)};
}

// Certified infeasibility of A1 = I, B1 = -I.
Outcome criterion5() {
  ProblemInstance inst;
  inst.n = 2;
  inst.k = 2;
  inst.pairs.push_back({CMatrix::Identity(2, 2), -CMatrix::Identity(2, 2)});
  const ConstraintSystem sys = build_system(inst);
  const FeasibilityReport r = feasibility_report(sys);
  if (r.status != FeasibilityStatus::CertifiedInfeasible || !r.certificate)
    return {false, "status " + to_string(r.status)};
  const CertificateVerdict v = validate(*r.certificate, sys, kCertificateTol);
  return {v.valid, fmt("certificate value %.3f, min eigenvalue %.3e", v.value, v.min_eigenvalue)};
}

// Choi/Kraus round trip.
Outcome criterion6() {
  oracle::Rng rng(6006);
  double worst = 0.0;
  int count_mismatch = 0;
  for (int t = 0; t < 100; ++t) {
    const Index n = rng.integer(1, 4), k = rng.integer(1, 4);
    const Index m = rng.integer(1, n * k);
    KrausSet ks{n, k, {}};
    for (Index c = 0; c < m; ++c) ks.elements.push_back(rng.complex_matrix(n, k));
    const ChoiMatrix c1 = kraus_to_choi(ks);
    const ChoiMatrix c2 = kraus_to_choi(choi_to_kraus(c1));
    worst = std::max(worst, (c1.matrix() - c2.matrix()).norm());
    const Index rank = oracle::rank_direct(c1.matrix(), 1e-9 * c1.matrix().norm());
    if (static_cast<Index>(minimal_kraus_count(c1)) != rank || rank != m) ++count_mismatch;
  }
  return {worst <= kRoundTripTol && count_mismatch == 0,
          fmt("worst Frobenius mismatch %.2e, %g rank mismatches", worst, count_mismatch)};
}

// Diagonal reduction.
Outcome criterion7() {
  oracle::Rng rng(7007);
  int failures = 0;
  double worst_a = 0.0, worst_b = 0.0;
  for (int t = 0; t < 20; ++t) {
    const Index n = rng.integer(1, 3), k = rng.integer(1, 3);
    CMatrix phi = CMatrix::Zero(n * k, n * k);
    for (Index i = 0; i < n * k; ++i) phi(i, i) = rng.uniform(0.5, 2.0);
    ProblemInstance inst;
    inst.n = n;
    inst.k = k;
    const Index pairs = rng.integer(1, 4);
    for (Index nu = 0; nu < pairs; ++nu) {
      CMatrix a = CMatrix::Zero(n, n);
      for (Index i = 0; i < n; ++i) a(i, i) = rng.normal();
      inst.pairs.push_back({a, oracle::apply_direct(phi, n, k, a)});
    }
    const ConstraintSystem sys = build_system(inst);
    const SolveOutcome d = solve_diagonal(restrict_to_diagonal(sys));
    const SolveOutcome full = solve_exp(sys);
    if (d.status != SolveStatus::Feasible || full.status != SolveStatus::Feasible) {
      ++failures;
      continue;
    }
    const VerificationReport va = verify(*d.solution, sys, kDiagonalVerifyTol);
    const HermMatrix diag = HermMatrix::diagonal(full.solution->matrix().diagonal().real());
    const VerificationReport vb = verify(diag, sys, kDiagonalVerifyTol);
    worst_a = std::max(worst_a, va.max_residual);
    worst_b = std::max(worst_b, vb.max_residual);
    if (!d.solution->is_diagonal(0.0) || !va.satisfied || !va.psd || !vb.satisfied || !vb.psd)
      ++failures;
  }
  return {failures == 0, fmt("%g failures; worst residual diagonal solve %.2e, diag(X) %.2e",
                             failures, worst_a, worst_b)};
}

// Barrier cross-check on the worked example.
Outcome criterion8() {
  const ConstraintSystem sys = build_system(oracle::worked_example());
  const SolveOutcome b = solve_barrier(sys);
  const SolveOutcome e = solve_exp(sys);
  if (b.status != SolveStatus::Feasible) return {false, "barrier: " + to_string(b.status)};
  const VerificationReport v = verify(*b.solution, sys, kBarrierResidualTol);
  const bool pass = v.max_residual <= kBarrierResidualTol && v.min_eigenvalue > 0.0 &&
                    e.status == SolveStatus::Feasible;
  return {pass, fmt("barrier max residual %.2e, min eig %.4f; exp feasible: %g", v.max_residual,
                    v.min_eigenvalue, e.status == SolveStatus::Feasible ? 1.0 : 0.0)};
}

// Trace-preserving mode.
Outcome criterion9() {
  oracle::Rng rng(9009);
  double worst = 0.0;
  int failures = 0;
  for (int t = 0; t < 10; ++t) {
    const Index n = rng.integer(1, 3), k = rng.integer(1, 3);
    const KrausSet ks = oracle::random_channel(rng, n, k, n * k);
    ProblemInstance inst = oracle::instance_from_kraus(rng, ks, static_cast<std::size_t>(rng.integer(1, 3)));
    inst.trace_preserving = true;
    const RunReport r = run_solve(inst, {});
    if (r.status != FeasibilityStatus::Feasible || !r.choi) {
      ++failures;
      continue;
    }
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j) {
        const CMatrix img = oracle::apply_direct(r.choi->matrix(), n, k, matrix_unit(n, n, i, j));
        worst = std::max(worst, std::abs(img.trace() - (i == j ? 1.0 : 0.0)));
      }
  }
  return {failures == 0 && worst <= kTraceTol,
          fmt("%g failures, worst |tr phi(E_ij) - delta_ij| = %.2e", failures, worst)};
}

// Support reduction.
Outcome criterion10() {
  oracle::Rng rng(10010);
  ExpSolveConfig cfg;
  cfg.gradient_tol = 1e-12;
  double worst = 0.0;
  int failures = 0;
  for (int t = 0; t < 10; ++t) {
    const Index n = rng.integer(2, 3), k = rng.integer(1, 3);
    const Index zero = rng.integer(1, n - 1);
    const Index live = n - zero;
    CMatrix phi = oracle::expm_taylor(0.5 * rng.hermitian(n * k));
    ProblemInstance inst;
    inst.n = n;
    inst.k = k;
    const Index pairs = rng.integer(1, 3);
    for (Index nu = 0; nu < pairs; ++nu) {
      CMatrix a = CMatrix::Zero(n, n);
      a.topLeftCorner(live, live) = rng.complex_matrix(live, live);
      inst.pairs.push_back({a, oracle::apply_direct(phi, n, k, a)});
    }
    const ConstraintSystem sys = build_system(inst);
    const ReducedSystem red = joint_support_reduce(sys);
    const SolveOutcome direct = solve_exp(sys, cfg);
    const SolveOutcome reduced = solve_exp(red.system, cfg);
    if (direct.status != SolveStatus::Feasible || reduced.status != SolveStatus::Feasible ||
        red.reduction.reduced_dim() != n * k - zero * k) {
      ++failures;
      continue;
    }
    const HermMatrix x = embed_solution(*reduced.solution, red.reduction);
    const RVector r_red = sys.traces(x) - sys.targets();
    const RVector r_dir = sys.traces(*direct.solution) - sys.targets();
    worst = std::max(worst, (r_red - r_dir).cwiseAbs().maxCoeff());
  }
  return {failures == 0 && worst <= kSupportResidualTol,
          fmt("%g failures, worst residual difference %.2e", failures, worst)};
}

struct Criterion {
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria = {
      {"golden reproduction of the worked 2x2 example", criterion1},
      {"interpolation check on the worked example", criterion2},
      {"gradient matches finite differences", criterion3},
      {"planted feasibility", criterion4},
      {"certified infeasibility of I -> -I", criterion5},
      {"Choi/Kraus round trip", criterion6},
      {"diagonal reduction", criterion7},
      {"barrier cross-check", criterion8},
      {"trace-preserving mode", criterion9},
      {"support reduction", criterion10},
  };
  std::size_t first = 0, last = criteria.size();
  if (argc > 1) {
    const long which = std::strtol(argv[1], nullptr, 10);
    if (which < 1 || which > static_cast<long>(criteria.size())) {
      std::fprintf(stderr, "usage: acceptance [1-%zu]\n", criteria.size());
      return 2;
    }
    first = static_cast<std::size_t>(which - 1);
    last = first + 1;
  }
  bool all = true;
  for (std::size_t i = first; i < last; ++i) {
    Outcome o;
    try {
      o = criteria[i].run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    all = all && o.pass;
    std::printf("[%s] criterion %zu: %s -- %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].name,
                o.detail.c_str());
  }
  return all ? 0 : 1;
}
