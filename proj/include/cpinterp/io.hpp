#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include <json.hpp>

#include "cpinterp/constraints.hpp"
#include "cpinterp/linalg.hpp"

namespace cpinterp {

using json = nlohmann::json;

/// Malformed or inconsistent input file.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Method { Exp, Barrier, Auto };

std::string to_string(Method m);
Method parse_method(std::string_view name);

/// Optional "solver" section of an instance file.
struct SolverSection {
  std::optional<Method> method;
  std::optional<double> tol;
  std::optional<std::size_t> max_iters;
  std::optional<std::uint64_t> seed;
};

struct InstanceFile {
  ProblemInstance instance;
  SolverSection solver;
};

/// Complex scalars are [re, im] pairs; matrices are arrays of rows.
CMatrix matrix_from_json(const json& j, const std::string& where);
json matrix_to_json(const CMatrix& m);

InstanceFile parse_instance_json(const json& j);
InstanceFile parse_instance_text(std::string_view text);
InstanceFile parse_instance(const std::filesystem::path& path);
json serialize_instance(const InstanceFile& f);

json read_json_file(const std::filesystem::path& path);

/// JSON text with every floating-point number written to 17 significant
/// digits.
std::string dump_json(const json& j, int indent = 2);

}  // namespace cpinterp
