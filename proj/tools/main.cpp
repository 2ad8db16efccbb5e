#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "cpinterp/pipeline.hpp"

using namespace cpinterp;

namespace {

struct SolveArgs {
  std::string instance;
  std::string method;
  double tol = 0.0;
  std::size_t max_iters = 0;
  std::uint64_t seed = 0;
  bool trace_preserving = false;
  bool parallel = false;
  bool no_certify = false;
  std::string out;
  CLI::Option* method_opt = nullptr;
  CLI::Option* tol_opt = nullptr;
  CLI::Option* iters_opt = nullptr;
  CLI::Option* seed_opt = nullptr;
};

void add_solve_options(CLI::App* cmd, SolveArgs& a) {
  cmd->add_option("instance", a.instance, "Instance JSON file")->required()->check(CLI::ExistingFile);
  a.method_opt = cmd->add_option("--method", a.method, "exp, barrier or auto")
                     ->check(CLI::IsMember({"exp", "barrier", "auto"}));
  a.tol_opt = cmd->add_option("--tol", a.tol, "Residual and PSD tolerance")
                  ->check(CLI::PositiveNumber);
  a.iters_opt = cmd->add_option("--max-iters", a.max_iters, "Iteration budget")
                    ->check(CLI::PositiveNumber);
  a.seed_opt = cmd->add_option("--seed", a.seed, "Seed of the certificate search");
  cmd->add_flag("--trace-preserving", a.trace_preserving, "Add trace-preservation constraints");
  cmd->add_flag("--parallel", a.parallel, "Evaluate constraint traces on several threads");
  cmd->add_option("--out", a.out, "Write the report here instead of stdout");
}

void emit(const json& j, const std::string& out) {
  const std::string text = dump_json(j) + "\n";
  if (out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(out);
  if (!f) throw InputError("cannot write " + out);
  f << text;
}

RunReport solve_from_args(const SolveArgs& a, bool certify) {
  InstanceFile file = parse_instance(a.instance);
  if (a.trace_preserving) file.instance.trace_preserving = true;
  try {
    file.instance.validate();
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
  SolveOptions opt = merge_options({}, file.solver);
  if (*a.method_opt) opt.method = parse_method(a.method);
  if (*a.tol_opt) opt.tol = a.tol;
  if (*a.iters_opt) opt.max_iters = a.max_iters;
  if (*a.seed_opt) opt.seed = a.seed;
  opt.parallel = a.parallel;
  opt.certify = certify;
  return run_solve(file.instance, opt);
}

ReportFile load_report(const std::string& path) {
  try {
    return parse_report(read_json_file(path));
  } catch (const InputError& e) {
    throw InputError(path + ": " + e.what());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Completely positive interpolation: find a CP map sending each A to its B"};
  app.set_version_flag("--version", std::string(kToolName) + " " + kToolVersion);
  app.require_subcommand(1);

  SolveArgs solve_args;
  auto* solve = app.add_subcommand("solve", "Find a CP map and print its Choi matrix and Kraus form");
  add_solve_options(solve, solve_args);
  solve->add_flag("--no-certify", solve_args.no_certify,
                  "Skip the infeasibility certificate search");

  SolveArgs cert_args;
  auto* certify = app.add_subcommand("certify", "Decide feasibility; report only status and certificate");
  add_solve_options(certify, cert_args);

  std::string report_path, matrix_text, matrix_file, out;
  auto* apply = app.add_subcommand("apply", "Apply the map of a report to a matrix");
  apply->add_option("report", report_path, "Report JSON file")->required()->check(CLI::ExistingFile);
  auto* mt = apply->add_option("--matrix", matrix_text, "Matrix as JSON, e.g. [[1,0],[0,1]]");
  auto* mf = apply->add_option("--matrix-file", matrix_file, "File holding the matrix JSON")
                 ->check(CLI::ExistingFile);
  mt->excludes(mf);
  apply->add_option("--out", out, "Output file");

  auto* kraus = app.add_subcommand("kraus", "Recompute a minimal Kraus form from a report");
  kraus->add_option("report", report_path, "Report JSON file")->required()->check(CLI::ExistingFile);
  kraus->add_option("--out", out, "Output file");

  std::string instance_path;
  double verify_tol = 1e-6;
  auto* verify_cmd = app.add_subcommand("verify", "Independently re-check a report against its instance");
  verify_cmd->add_option("report", report_path, "Report JSON file")->required()->check(CLI::ExistingFile);
  verify_cmd->add_option("instance", instance_path, "Instance JSON file")
      ->required()
      ->check(CLI::ExistingFile);
  verify_cmd->add_option("--tol", verify_tol, "Residual and PSD tolerance")->check(CLI::PositiveNumber);
  bool trace_preserving = false;
  verify_cmd->add_flag("--trace-preserving", trace_preserving, "Instance is trace preserving");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInputError;
  }

  try {
    if (*solve) {
      const RunReport r = solve_from_args(solve_args, !solve_args.no_certify);
      emit(report_to_json(r), solve_args.out);
      if (!r.diagnostic.empty() && exit_code(r) != kExitFeasible)
        std::cerr << "cpinterp: " << to_string(r.status) << ": " << r.diagnostic << "\n";
      return exit_code(r);
    }
    if (*certify) {
      const RunReport r = solve_from_args(cert_args, true);
      json j = report_to_json(r);
      j.erase("choi");
      j.erase("kraus");
      j.erase("residuals");
      emit(j, cert_args.out);
      return exit_code(r);
    }
    if (*apply) {
      if (matrix_text.empty() && matrix_file.empty())
        throw InputError("apply needs --matrix or --matrix-file");
      const ReportFile report = load_report(report_path);
      json m;
      try {
        m = matrix_file.empty() ? json::parse(matrix_text) : read_json_file(matrix_file);
      } catch (const json::parse_error& e) {
        throw InputError(std::string("matrix: malformed JSON: ") + e.what());
      }
      emit(json{{"output", matrix_to_json(run_apply(report, matrix_from_json(m, "matrix")))}}, out);
      return kExitFeasible;
    }
    if (*kraus) {
      const ReportFile report = load_report(report_path);
      if (!report.choi) throw InputError("report has no Choi matrix (status " + report.status + ")");
      const KrausSet ks = choi_to_kraus(*report.choi);
      json elems = json::array();
      for (const CMatrix& v : ks.elements) elems.push_back(matrix_to_json(v));
      emit(json{{"n", ks.n}, {"k", ks.k}, {"count", ks.elements.size()}, {"kraus", elems}}, out);
      return kExitFeasible;
    }
    if (*verify_cmd) {
      const ReportFile report = load_report(report_path);
      InstanceFile file = parse_instance(instance_path);
      if (trace_preserving) file.instance.trace_preserving = true;
      const VerifyResult v = run_verify(report, file.instance, verify_tol);
      for (const std::string& line : v.checks) std::cout << line << "\n";
      std::cout << (v.pass ? "PASS" : "FAIL") << "\n";
      return v.pass ? kExitFeasible : kExitVerifyFailed;
    }
  } catch (const InputError& e) {
    std::cerr << "cpinterp: input error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "cpinterp: input error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const NotCompletelyPositive& e) {
    std::cerr << "cpinterp: " << e.what() << "\n";
    return kExitVerifyFailed;
  } catch (const std::exception& e) {
    std::cerr << "cpinterp: error: " << e.what() << "\n";
    return kExitUndetermined;
  }
  return kExitInputError;
}
