#include <doctest.h>

#include "cpinterp/certify.hpp"
#include "oracles.hpp"

using namespace cpinterp;

namespace {

CMatrix e11(Index p) {
  CMatrix c = CMatrix::Zero(p, p);
  c(0, 0) = 1.0;
  return c;
}

ConstraintSystem single(const CMatrix& c, double b) {
  ConstraintSystem sys;
  sys.dim = c.rows();
  sys.constraints.push_back({HermMatrix::from(c), b, {}});
  return sys;
}

Certificate make(RVector x, CertificateKind kind) {
  Certificate c;
  c.coefficients = std::move(x);
  c.kind = kind;
  return c;
}

ProblemInstance identity_to_minus_identity() {
  ProblemInstance inst;
  inst.n = 2;
  inst.k = 2;
  inst.pairs.push_back({CMatrix::Identity(2, 2), -CMatrix::Identity(2, 2)});
  return inst;
}

}  // namespace

TEST_CASE("validate: planted negative target on a positive constraint") {
  const ConstraintSystem sys = single(e11(2), -1.0);
  RVector x(1);
  x << 1.0;
  const CertificateVerdict v = validate(make(x, CertificateKind::ExcludesPSD), sys, 1e-9);
  CHECK(v.valid);
  CHECK(v.value == doctest::Approx(-1.0));
}

TEST_CASE("validate: zero target on a positive constraint excludes only PD") {
  const ConstraintSystem sys = single(e11(2), 0.0);
  RVector x(1);
  x << 1.0;
  CHECK(validate(make(x, CertificateKind::ExcludesPD), sys, 1e-9).valid);
  CHECK(!validate(make(x, CertificateKind::ExcludesPSD), sys, 1e-9).valid);
}

TEST_CASE("validate is invariant under scaling") {
  const ConstraintSystem sys = single(e11(2), -1.0);
  for (double s : {1e-6, 1.0, 1e6}) {
    RVector x(1);
    x << s;
    const CertificateVerdict v = validate(make(x, CertificateKind::ExcludesPSD), sys, 1e-9);
    CHECK(v.valid);
    CHECK(v.value == doctest::Approx(-1.0));
  }
  RVector neg(1);
  neg << -1.0;
  CHECK(!validate(make(neg, CertificateKind::ExcludesPSD), sys, 1e-9).valid);
}

TEST_CASE("validate rejects length mismatch and the zero vector") {
  const ConstraintSystem sys = single(e11(2), -1.0);
  CHECK(!validate(make(RVector::Zero(2), CertificateKind::ExcludesPSD), sys, 1e-9).valid);
  CHECK(!validate(make(RVector::Zero(1), CertificateKind::ExcludesPD), sys, 1e-9).valid);
}

TEST_CASE("search_certificate finds the planted certificate") {
  const auto c = search_certificate(single(e11(2), -1.0), 0);
  REQUIRE(c.has_value());
  CHECK(c->kind == CertificateKind::ExcludesPSD);
  CHECK(c->coefficients(0) == doctest::Approx(1.0));
}

TEST_CASE("search_certificate on the identity to minus identity instance") {
  const ConstraintSystem sys = build_system(identity_to_minus_identity());
  const auto c = search_certificate(sys, 1);
  REQUIRE(c.has_value());
  CHECK(c->kind == CertificateKind::ExcludesPSD);
  CHECK(validate(*c, sys, 1e-9).valid);
}

TEST_CASE("worked example: no certificate exists and none is found") {
  const ConstraintSystem sys = build_system(oracle::worked_example());
  CHECK(!search_certificate(sys, 2).has_value());
  oracle::Rng rng(30);
  for (int t = 0; t < 200; ++t) {
    RVector x(static_cast<Index>(sys.size()));
    for (Index i = 0; i < x.size(); ++i) x(i) = rng.normal();
    CHECK(!validate(make(x, CertificateKind::ExcludesPSD), sys, 1e-9).valid);
  }
}

TEST_CASE("soundness: no certificate validates on a planted-feasible system") {
  oracle::Rng rng(31);
  for (int t = 0; t < 5; ++t) {
    const auto ps = oracle::planted_system(rng, 3, 4);
    CHECK(!search_certificate(ps.system, static_cast<std::uint64_t>(t)).has_value());
    for (int s = 0; s < 100; ++s) {
      RVector x(4);
      for (Index i = 0; i < 4; ++i) x(i) = rng.normal();
      CHECK(!validate(make(x, CertificateKind::ExcludesPSD), ps.system, 1e-9).valid);
      CHECK(!validate(make(x, CertificateKind::ExcludesPD), ps.system, 1e-9).valid);
    }
  }
}

TEST_CASE("check_positive_span") {
  CHECK(check_positive_span(build_system(oracle::worked_example())).holds);
  CHECK(!check_positive_span(single(e11(2), 1.0)).holds);
}

TEST_CASE("feasibility_report outcomes") {
  SUBCASE("worked example is feasible") {
    const FeasibilityReport r = feasibility_report(build_system(oracle::worked_example()));
    CHECK(r.status == FeasibilityStatus::Feasible);
    CHECK(!r.certificate.has_value());
  }
  SUBCASE("identity to minus identity is certified infeasible") {
    const ConstraintSystem sys = build_system(identity_to_minus_identity());
    const FeasibilityReport r = feasibility_report(sys);
    CHECK(r.status == FeasibilityStatus::CertifiedInfeasible);
    REQUIRE(r.certificate.has_value());
    CHECK(validate(*r.certificate, sys, 1e-9).valid);
  }
  SUBCASE("zero target on E11 is certified no-strict") {
    const FeasibilityReport r = feasibility_report(single(e11(2), 0.0));
    CHECK(r.status == FeasibilityStatus::CertifiedNoStrict);
    REQUIRE(r.certificate.has_value());
    CHECK(r.certificate->kind == CertificateKind::ExcludesPD);
  }
}

TEST_CASE("cross-consistency: feasible solves never carry a PSD-excluding certificate") {
  oracle::Rng rng(32);
  for (int t = 0; t < 5; ++t) {
    const auto ps = oracle::planted_system(rng, 3, 3);
    const FeasibilityReport r = feasibility_report(ps.system);
    CHECK(r.status == FeasibilityStatus::Feasible);
    CHECK(!(r.certificate && r.certificate->kind == CertificateKind::ExcludesPSD));
  }
}
