#include "cpinterp/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

namespace cpinterp {

namespace {

constexpr double kPruneTol = 1e-9;
constexpr double kCertificateTol = 1e-9;

ExpSolveConfig exp_config(const SolveOptions& opt) {
  ExpSolveConfig cfg;
  cfg.gradient_tol = 0.1 * opt.tol;
  cfg.max_iterations = opt.max_iters;
  cfg.parallel = opt.parallel;
  return cfg;
}

void classify_certificate(RunReport& r, std::optional<Certificate> cert) {
  if (!cert) {
    r.status = FeasibilityStatus::Undetermined;
    return;
  }
  r.status = cert->kind == CertificateKind::ExcludesPSD ? FeasibilityStatus::CertifiedInfeasible
                                                         : FeasibilityStatus::CertifiedNoStrict;
  r.certificate = std::move(cert);
}

// A dependent constraint with a contradictory target yields y with
// sum y_i C(i) = 0 and b.y != 0; -sign(b.y) y / ||y|| is an ExcludesPSD
// certificate for the unpruned system.
std::optional<Certificate> certificate_from_dependence(const InconsistentConstraints& e,
                                                       const ConstraintSystem& sys) {
  const RVector& y = e.coefficients();
  if (y.size() != static_cast<Index>(sys.size()) || !(y.norm() > 0.0)) return std::nullopt;
  const double v = y.dot(sys.targets());
  Certificate c;
  c.kind = CertificateKind::ExcludesPSD;
  c.coefficients = (v > 0.0 ? -1.0 : 1.0) * y / y.norm();
  const CertificateVerdict verdict = validate(c, sys, kCertificateTol);
  if (!verdict.valid) return std::nullopt;
  c.value = verdict.value;
  c.min_eigenvalue = verdict.min_eigenvalue;
  return c;
}

ConstraintSystem hermitized_system(const ProblemInstance& inst) {
  ConstraintSystem sys = hermitize(assemble(inst));
  if (inst.trace_preserving) sys = add_trace_preserving(std::move(sys), inst.n, inst.k);
  return sys;
}

json certificate_to_json(const Certificate& c, bool unpruned) {
  json coeffs = json::array();
  for (Index i = 0; i < c.coefficients.size(); ++i) coeffs.push_back(c.coefficients(i));
  return {{"kind", to_string(c.kind)},
          {"coefficients", std::move(coeffs)},
          {"value", c.value},
          {"min_eigenvalue", c.min_eigenvalue},
          {"system", unpruned ? "hermitized" : "pruned"}};
}

json vector_to_json(const RVector& v) {
  json a = json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

}  // namespace

SolveOptions merge_options(SolveOptions base, const SolverSection& s) {
  if (s.method) base.method = *s.method;
  if (s.tol) base.tol = *s.tol;
  if (s.max_iters) base.max_iters = *s.max_iters;
  if (s.seed) base.seed = *s.seed;
  return base;
}

RunReport run_solve(const ProblemInstance& inst, const SolveOptions& opt) {
  const auto started = std::chrono::steady_clock::now();
  RunReport r;
  r.method = opt.method;
  r.n = inst.n;
  r.k = inst.k;
  r.trace_preserving = inst.trace_preserving;
  const auto finish = [&]() -> RunReport {
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return std::move(r);
  };

  ConstraintSystem hermitized;
  try {
    hermitized = hermitized_system(inst);
  } catch (const InconsistentConstraints& e) {
    r.status = FeasibilityStatus::Inconsistent;
    r.diagnostic = e.what();
    return finish();
  }
  ConstraintSystem sys;
  try {
    sys = prune_dependent(hermitized, kPruneTol);
  } catch (const InconsistentConstraints& e) {
    r.diagnostic = e.what();
    r.constraint_count = hermitized.size();
    if (auto cert = certificate_from_dependence(e, hermitized)) {
      r.status = FeasibilityStatus::CertifiedInfeasible;
      r.certificate = std::move(cert);
      r.certificate_unpruned = true;
    } else {
      r.status = FeasibilityStatus::Inconsistent;
    }
    return finish();
  }
  r.constraint_count = sys.size();
  r.reduced_dim = sys.dim;

  const ExpSolveConfig cfg = exp_config(opt);
  SearchBudget budget;
  budget.tol = kCertificateTol;

  std::optional<HermMatrix> candidate;
  const ConstraintSystem* projection_system = &sys;
  ConstraintSystem diagonal_system;

  if (opt.method != Method::Barrier && is_diagonal_instance(inst)) {
    r.solver = "diagonal";
    diagonal_system = restrict_to_diagonal(sys);
    projection_system = &diagonal_system;
    const SolveOutcome out = solve_diagonal(diagonal_system, cfg);
    r.iterations = out.iterations;
    r.diagnostic = out.diagnostic;
    if (out.status == SolveStatus::Feasible) {
      candidate = *out.solution;
      r.status = FeasibilityStatus::Feasible;
    } else if (opt.certify) {
      classify_certificate(r, search_certificate(sys, opt.seed, budget));
    }
  } else {
    const ReducedSystem red = joint_support_reduce(sys);
    r.reduced_dim = red.reduction.reduced_dim();
    bool try_barrier = opt.method == Method::Barrier;

    if (opt.method != Method::Barrier) {
      r.solver = "exp";
      if (opt.certify) {
        FeasibilityConfig fcfg;
        fcfg.solver = cfg;
        fcfg.search = budget;
        fcfg.seed = opt.seed;
        FeasibilityReport fr = feasibility_report(red.system, fcfg);
        r.iterations = fr.solve.iterations;
        r.diagnostic = fr.solve.diagnostic;
        r.positive_span = fr.positive_span;
        r.status = fr.status;
        r.certificate = std::move(fr.certificate);
        if (fr.solve.solution) candidate = embed_solution(*fr.solve.solution, red.reduction);
      } else {
        const SolveOutcome out = solve_exp(red.system, cfg);
        r.iterations = out.iterations;
        r.diagnostic = out.diagnostic;
        r.status = FeasibilityStatus::Undetermined;
        if (out.solution) {
          r.status = FeasibilityStatus::Feasible;
          candidate = embed_solution(*out.solution, red.reduction);
        }
      }
      try_barrier = opt.method == Method::Auto && !candidate &&
                    r.status == FeasibilityStatus::Undetermined;
    }

    if (try_barrier) {
      r.solver = "barrier";
      BarrierSweepConfig bcfg;
      bcfg.base.residual_tol = opt.tol;
      const SolveOutcome out = solve_barrier(red.system, bcfg);
      r.iterations += out.iterations;
      r.diagnostic = out.diagnostic;
      if (out.status == SolveStatus::Feasible) {
        candidate = embed_solution(*out.solution, red.reduction);
        r.status = FeasibilityStatus::Feasible;
        r.certificate.reset();
      } else if (opt.certify && !r.certificate) {
        classify_certificate(r, search_certificate(red.system, opt.seed, budget));
      } else if (!r.certificate) {
        r.status = FeasibilityStatus::Undetermined;
      }
    }
  }

  if (candidate) {
    const HermMatrix projected = project_affine(*candidate, *projection_system);
    const VerificationReport vp = verify(projected, sys, opt.tol);
    const VerificationReport vc = verify(*candidate, sys, opt.tol);
    if (vp.satisfied && vp.psd) {
      candidate = projected;
      r.projected = true;
    } else if (!(vc.satisfied && vc.psd)) {
      std::ostringstream os;
      os << "solution failed verification (max residual " << vc.max_residual
         << ", min eigenvalue " << vc.min_eigenvalue << ")";
      r.diagnostic = os.str();
      r.status = FeasibilityStatus::Undetermined;
      candidate.reset();
    }
  }

  if (candidate) {
    const VerificationReport v = verify(*candidate, sys, opt.tol);
    r.residuals = sys.traces(*candidate) - sys.targets();
    r.max_residual = v.max_residual;
    r.min_eigenvalue = v.min_eigenvalue;
    r.choi = ChoiMatrix(inst.n, inst.k, *candidate);
    const double rank_tol =
        std::max(default_rank_tolerance(*candidate), std::max(0.0, -v.min_eigenvalue));
    r.kraus = choi_to_kraus(*r.choi, rank_tol);
  }
  return finish();
}

int exit_code(const RunReport& r) {
  switch (r.status) {
    case FeasibilityStatus::Feasible: return kExitFeasible;
    case FeasibilityStatus::CertifiedInfeasible:
    case FeasibilityStatus::Inconsistent: return kExitInfeasible;
    case FeasibilityStatus::CertifiedNoStrict: return r.choi ? kExitFeasible : kExitUndetermined;
    case FeasibilityStatus::Undetermined: return kExitUndetermined;
  }
  return kExitUndetermined;
}

json report_to_json(const RunReport& r) {
  json j;
  j["tool"] = kToolName;
  j["version"] = kToolVersion;
  j["status"] = to_string(r.status);
  j["method"] = to_string(r.method);
  j["solver"] = r.solver;
  j["n"] = r.n;
  j["k"] = r.k;
  j["trace_preserving"] = r.trace_preserving;
  j["constraints"] = r.constraint_count;
  j["reduced_dim"] = r.reduced_dim;
  j["iterations"] = r.iterations;
  if (!r.diagnostic.empty()) j["diagnostic"] = r.diagnostic;
  if (r.choi) {
    j["choi"] = matrix_to_json(r.choi->matrix());
    j["projected"] = r.projected;
    j["residuals"] = vector_to_json(r.residuals);
    j["max_residual"] = r.max_residual;
    j["min_eigenvalue"] = r.min_eigenvalue;
  }
  if (r.kraus) {
    json ks = json::array();
    for (const CMatrix& v : r.kraus->elements) ks.push_back(matrix_to_json(v));
    j["kraus"] = std::move(ks);
  }
  if (r.certificate) j["certificate"] = certificate_to_json(*r.certificate, r.certificate_unpruned);
  if (r.positive_span)
    j["positive_span"] = {{"holds", r.positive_span->holds},
                          {"best_min_eigenvalue", r.positive_span->best_min_eigenvalue}};
  j["metadata"] = {{"seconds", r.seconds}};
  return j;
}

ReportFile parse_report(const json& j) {
  if (!j.is_object()) throw InputError("report must be a JSON object");
  ReportFile f;
  try {
    f.status = j.at("status").get<std::string>();
    f.n = j.at("n").get<Index>();
    f.k = j.at("k").get<Index>();
  } catch (const json::exception& e) {
    throw InputError(std::string("report: ") + e.what());
  }
  if (f.n < 1 || f.k < 1) throw InputError("report: dimensions must be positive");
  if (j.contains("choi")) {
    try {
      f.choi = ChoiMatrix(f.n, f.k, matrix_from_json(j["choi"], "report choi"));
    } catch (const LinalgError& e) {
      throw InputError(std::string("report: ") + e.what());
    }
  }
  if (j.contains("kraus")) {
    KrausSet ks{f.n, f.k, {}};
    for (std::size_t i = 0; i < j["kraus"].size(); ++i)
      ks.elements.push_back(
          matrix_from_json(j["kraus"][i], "report kraus element " + std::to_string(i + 1)));
    f.kraus = std::move(ks);
  }
  if (j.contains("certificate")) {
    const json& c = j["certificate"];
    Certificate cert;
    try {
      cert.kind = c.at("kind").get<std::string>() == "excludes-pd" ? CertificateKind::ExcludesPD
                                                                   : CertificateKind::ExcludesPSD;
      const auto coeffs = c.at("coefficients").get<std::vector<double>>();
      cert.coefficients = Eigen::Map<const RVector>(coeffs.data(), static_cast<Index>(coeffs.size()));
      cert.value = c.value("value", 0.0);
      cert.min_eigenvalue = c.value("min_eigenvalue", 0.0);
      f.certificate_unpruned = c.value("system", std::string("pruned")) == "hermitized";
    } catch (const json::exception& e) {
      throw InputError(std::string("report certificate: ") + e.what());
    }
    f.certificate = std::move(cert);
  }
  return f;
}

CMatrix run_apply(const ReportFile& report, const CMatrix& a) {
  if (!report.choi) throw InputError("report has no Choi matrix (status " + report.status + ")");
  if (a.rows() != report.n || a.cols() != report.n)
    throw InputError("input matrix must be " + std::to_string(report.n) + "x" +
                     std::to_string(report.n));
  return apply_choi(*report.choi, a);
}

VerifyResult run_verify(const ReportFile& report, const ProblemInstance& inst, double tol) {
  VerifyResult res;
  const auto check = [&](bool ok, const std::string& what) {
    res.checks.push_back(std::string(ok ? "ok    " : "FAIL  ") + what);
    if (!ok && res.first_failure.empty()) res.first_failure = what;
    return ok;
  };
  const auto finish = [&] {
    res.pass = res.first_failure.empty();
    return res;
  };

  if (!check(report.n == inst.n && report.k == inst.k, "dimensions match the instance"))
    return finish();

  ConstraintSystem hermitized;
  try {
    hermitized = hermitized_system(inst);
  } catch (const InconsistentConstraints& e) {
    check(report.status == "inconsistent", std::string("instance is inconsistent: ") + e.what());
    return finish();
  }
  std::optional<ConstraintSystem> pruned;
  try {
    pruned = prune_dependent(hermitized, kPruneTol);
  } catch (const InconsistentConstraints&) {
  }

  if (report.status == "certified-infeasible" || report.certificate) {
    if (!check(report.certificate.has_value(), "certificate present")) return finish();
    const ConstraintSystem* target = report.certificate_unpruned ? &hermitized
                                     : pruned                   ? &*pruned
                                                                : nullptr;
    if (!check(target != nullptr, "certificate refers to a rebuildable system")) return finish();
    const CertificateVerdict v = validate(*report.certificate, *target, kCertificateTol);
    std::ostringstream os;
    os << "certificate validates (value " << v.value << ", min eigenvalue " << v.min_eigenvalue
       << ")";
    check(v.valid, os.str() + (v.valid ? "" : ": " + v.reason));
  }

  const bool needs_choi = report.status == "feasible";
  if (needs_choi && !check(report.choi.has_value(), "Choi matrix present")) return finish();
  if (report.choi) {
    if (!check(pruned.has_value(), "instance constraints are consistent")) return finish();
    const ChoiMatrix& c = *report.choi;
    if (!check(c.is_hermitian(1e-10 * (1.0 + c.matrix().norm())), "Choi matrix is Hermitian"))
      return finish();
    const VerificationReport v = verify(c.hermitian(), *pruned, tol);
    std::ostringstream rs, ps;
    rs << "constraint residuals (max " << v.max_residual << ", tol " << tol << ")";
    ps << "positive semidefinite (min eigenvalue " << v.min_eigenvalue << ")";
    check(v.satisfied, rs.str());
    check(v.psd, ps.str());
    if (report.kraus) {
      const double diff = (kraus_to_choi(*report.kraus).matrix() - c.matrix()).norm();
      std::ostringstream ks;
      ks << "Kraus round trip (" << report.kraus->elements.size() << " elements, mismatch "
         << diff << ")";
      check(diff <= std::max(tol, 1e-9) * (1.0 + c.matrix().norm()), ks.str());
    }
  }
  return finish();
}

}  // namespace cpinterp
