#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "cpinterp/constraints.hpp"
#include "cpinterp/solvers.hpp"

namespace cpinterp {

/// ExcludesPSD: sum x_i C(i) >= 0 and sum b_i x_i < 0, so no X >= 0
/// satisfies the system. ExcludesPD: sum x_i C(i) >= 0, x != 0 and
/// sum b_i x_i <= 0, so no X > 0 does.
enum class CertificateKind { ExcludesPSD, ExcludesPD };

std::string to_string(CertificateKind k);

struct Certificate {
  RVector coefficients;  // unit Euclidean norm
  CertificateKind kind = CertificateKind::ExcludesPSD;
  double value = 0.0;           // sum b_i x_i
  double min_eigenvalue = 0.0;  // of sum x_i C(i)
};

struct CertificateVerdict {
  bool valid = false;
  double value = 0.0;
  double min_eigenvalue = 0.0;
  std::string reason;
};

/// Exact check of a certificate against a system. The coefficients are
/// normalized before testing.
CertificateVerdict validate(const Certificate& cert, const ConstraintSystem& sys, double tol);

struct SearchBudget {
  std::size_t restarts = 6;
  std::size_t iterations = 300;
  double tol = 1e-9;
};

/// Heuristic minimization of sum b_i x_i over unit x with
/// sum x_i C(i) >= 0, by penalized projected descent with random restarts.
/// `hint`, when given, is tried first (e.g. the direction along which the
/// exponential potential decreased without bound). Returns only
/// certificates that pass validate(); std::nullopt proves nothing.
std::optional<Certificate> search_certificate(const ConstraintSystem& sys, std::uint64_t seed,
                                              const SearchBudget& budget = {},
                                              const std::optional<RVector>& hint = std::nullopt);

/// Whether span{C(i)} contains a positive definite matrix, estimated by
/// maximizing lambda_min(sum x_i C(i)) over unit x.
struct PositiveSpanCheck {
  bool holds = false;
  double best_min_eigenvalue = 0.0;
  RVector coefficients;
};

PositiveSpanCheck check_positive_span(const ConstraintSystem& sys, std::uint64_t seed = 0);

/// Inconsistent: the data admit no Hermitian X at all (e.g. a selfadjoint
/// constraint with a non-real target), detected before any solve.
enum class FeasibilityStatus {
  Feasible,
  CertifiedInfeasible,
  CertifiedNoStrict,
  Undetermined,
  Inconsistent
};

std::string to_string(FeasibilityStatus s);

struct FeasibilityConfig {
  ExpSolveConfig solver;
  SearchBudget search;
  std::uint64_t seed = 0;
  /// A Feasible solution whose smallest eigenvalue is below
  /// strict_margin * (1 + ||X||_F) is treated as possibly non-strict and
  /// triggers a search for an ExcludesPD certificate.
  double strict_margin = 1e-6;
};

struct FeasibilityReport {
  FeasibilityStatus status = FeasibilityStatus::Undetermined;
  SolveOutcome solve;
  std::optional<Certificate> certificate;
  PositiveSpanCheck positive_span;
};

/// Runs the exponential-potential solver and, when it does not produce a
/// strictly positive solution, searches for a certificate.
FeasibilityReport feasibility_report(const ConstraintSystem& sys, const FeasibilityConfig& cfg = {});

}  // namespace cpinterp
