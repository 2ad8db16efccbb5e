#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cpinterp/certify.hpp"
#include "cpinterp/choi.hpp"
#include "cpinterp/constraints.hpp"
#include "cpinterp/io.hpp"
#include "cpinterp/solvers.hpp"

namespace cpinterp {

inline constexpr const char* kToolName = "cpinterp";
inline constexpr const char* kToolVersion = "0.1.0";

/// Process exit codes of the command-line tool.
enum ExitCode : int {
  kExitFeasible = 0,
  kExitVerifyFailed = 1,
  kExitInfeasible = 2,
  kExitUndetermined = 3,
  kExitInputError = 4,
};

struct SolveOptions {
  Method method = Method::Exp;
  /// Residual and PSD tolerance of the reported solution.
  double tol = 1e-9;
  std::size_t max_iters = 20000;
  std::uint64_t seed = 0;
  bool parallel = false;
  /// Search for an infeasibility certificate when no solution is found.
  bool certify = true;
};

/// Overlays an instance file's solver section on `base`.
SolveOptions merge_options(SolveOptions base, const SolverSection& section);

struct RunReport {
  FeasibilityStatus status = FeasibilityStatus::Undetermined;
  Method method = Method::Exp;
  /// Which solver produced the result: "exp", "diagonal" or "barrier".
  std::string solver;
  Index n = 0;
  Index k = 0;
  bool trace_preserving = false;
  std::optional<ChoiMatrix> choi;
  std::optional<KrausSet> kraus;
  RVector residuals;
  double max_residual = 0.0;
  double min_eigenvalue = 0.0;
  std::optional<Certificate> certificate;
  /// The certificate refers to the hermitized system before pruning
  /// (contradictory duplicate constraints) rather than the pruned one.
  bool certificate_unpruned = false;
  std::optional<PositiveSpanCheck> positive_span;
  std::size_t constraint_count = 0;
  Index reduced_dim = 0;
  std::size_t iterations = 0;
  bool projected = false;
  double seconds = 0.0;
  std::string diagnostic;
};

/// assemble -> hermitize -> [trace preserving] -> prune -> reduce -> solve
/// -> embed -> project -> verify -> Kraus.
RunReport run_solve(const ProblemInstance& inst, const SolveOptions& opt);

int exit_code(const RunReport& r);

/// Report as JSON. Timing lives under "metadata" so the remaining payload
/// is reproducible bit for bit.
json report_to_json(const RunReport& r);

/// The parts of a report file needed by apply/kraus/verify.
struct ReportFile {
  std::string status;
  Index n = 0;
  Index k = 0;
  std::optional<ChoiMatrix> choi;
  std::optional<KrausSet> kraus;
  std::optional<Certificate> certificate;
  bool certificate_unpruned = false;
};

ReportFile parse_report(const json& j);

/// phi(A) from the report's Choi matrix.
CMatrix run_apply(const ReportFile& report, const CMatrix& a);

struct VerifyResult {
  bool pass = false;
  std::vector<std::string> checks;  // one line per check performed
  std::string first_failure;
};

/// Rebuilds the constraint system from the instance and re-checks the
/// report: residuals, positivity, Kraus round trip, certificate.
VerifyResult run_verify(const ReportFile& report, const ProblemInstance& inst, double tol);

}  // namespace cpinterp
