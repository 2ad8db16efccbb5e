#include "cpinterp/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace cpinterp {

std::string to_string(Method m) {
  switch (m) {
    case Method::Exp: return "exp";
    case Method::Barrier: return "barrier";
    case Method::Auto: return "auto";
  }
  return "exp";
}

Method parse_method(std::string_view name) {
  if (name == "exp") return Method::Exp;
  if (name == "barrier") return Method::Barrier;
  if (name == "auto") return Method::Auto;
  throw InputError("unknown method '" + std::string(name) + "' (expected exp, barrier or auto)");
}

namespace {

double finite_number(const json& v, const std::string& where) {
  if (!v.is_number()) throw InputError(where + ": expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw InputError(where + ": non-finite entry");
  return d;
}

Complex scalar_from_json(const json& v, const std::string& where) {
  if (v.is_number()) return {finite_number(v, where), 0.0};
  if (!v.is_array() || v.size() != 2)
    throw InputError(where + ": complex entries are [re, im] pairs");
  return {finite_number(v[0], where + "[0]"), finite_number(v[1], where + "[1]")};
}

std::size_t count_field(const json& j, const char* key) {
  if (!j.contains(key)) throw InputError(std::string("missing field '") + key + "'");
  const json& v = j.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 1)
    throw InputError(std::string("field '") + key + "' must be a positive integer");
  return v.get<std::size_t>();
}

void write_number(std::ostream& os, double d) {
  if (!std::isfinite(d)) {
    os << "null";
    return;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", d);
  os << buf;
  // Keep integral values recognizable as floating point.
  if (std::string_view(buf).find_first_of(".eE") == std::string_view::npos) os << ".0";
}

void write_json(std::ostream& os, const json& j, int indent, int depth) {
  const auto newline = [&](int d) {
    if (indent < 0) return;
    os << '\n' << std::string(static_cast<std::size_t>(indent * d), ' ');
  };
  // Short arrays of scalars stay on one line so matrices read as rows.
  const auto flat = [](const json& a) {
    for (const json& e : a)
      if (e.is_structured() && !(e.is_array() && e.size() == 2 && e[0].is_number())) return false;
    return true;
  };
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        os << "{}";
        return;
      }
      os << '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) os << ',';
        first = false;
        newline(depth + 1);
        os << json(it.key()).dump() << (indent < 0 ? ":" : ": ");
        write_json(os, it.value(), indent, depth + 1);
      }
      newline(depth);
      os << '}';
      return;
    }
    case json::value_t::array: {
      os << '[';
      const bool one_line = flat(j);
      bool first = true;
      for (const json& e : j) {
        if (!first) os << (one_line && indent >= 0 ? ", " : ",");
        first = false;
        if (!one_line) newline(depth + 1);
        write_json(os, e, one_line ? -1 : indent, depth + 1);
      }
      if (!one_line && !j.empty()) newline(depth);
      os << ']';
      return;
    }
    case json::value_t::number_float: write_number(os, j.get<double>()); return;
    default: os << j.dump(); return;
  }
}

}  // namespace

CMatrix matrix_from_json(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) throw InputError(where + ": expected a non-empty array of rows");
  const std::size_t rows = j.size();
  if (!j[0].is_array()) throw InputError(where + ": rows must be arrays");
  const std::size_t cols = j[0].size();
  CMatrix m(static_cast<Index>(rows), static_cast<Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    const std::string row_where = where + " row " + std::to_string(r + 1);
    if (!j[r].is_array() || j[r].size() != cols)
      throw InputError(row_where + ": ragged matrix (expected " + std::to_string(cols) +
                       " entries)");
    for (std::size_t c = 0; c < cols; ++c)
      m(static_cast<Index>(r), static_cast<Index>(c)) =
          scalar_from_json(j[r][c], row_where + " col " + std::to_string(c + 1));
  }
  return m;
}

json matrix_to_json(const CMatrix& m) {
  json rows = json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back({m(r, c).real(), m(r, c).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

InstanceFile parse_instance_json(const json& j) {
  if (!j.is_object()) throw InputError("instance must be a JSON object");
  InstanceFile f;
  ProblemInstance& inst = f.instance;
  inst.n = static_cast<Index>(count_field(j, "n"));
  inst.k = static_cast<Index>(count_field(j, "k"));
  if (j.contains("trace_preserving")) {
    if (!j["trace_preserving"].is_boolean())
      throw InputError("field 'trace_preserving' must be a boolean");
    inst.trace_preserving = j["trace_preserving"].get<bool>();
  }
  if (!j.contains("pairs") || !j["pairs"].is_array() || j["pairs"].empty())
    throw InputError("field 'pairs' must be a non-empty array");
  for (std::size_t nu = 0; nu < j["pairs"].size(); ++nu) {
    const json& pr = j["pairs"][nu];
    const std::string where = "pair " + std::to_string(nu + 1);
    if (!pr.is_object() || !pr.contains("A") || !pr.contains("B"))
      throw InputError(where + ": expected an object with fields A and B");
    InterpolationPair pair{matrix_from_json(pr["A"], where + " A"),
                           matrix_from_json(pr["B"], where + " B")};
    if (pair.input.rows() != inst.n || pair.input.cols() != inst.n)
      throw InputError(where + ": A is " + std::to_string(pair.input.rows()) + "x" +
                       std::to_string(pair.input.cols()) + " but n = " + std::to_string(inst.n));
    if (pair.output.rows() != inst.k || pair.output.cols() != inst.k)
      throw InputError(where + ": B is " + std::to_string(pair.output.rows()) + "x" +
                       std::to_string(pair.output.cols()) + " but k = " + std::to_string(inst.k));
    inst.pairs.push_back(std::move(pair));
  }
  if (j.contains("solver")) {
    const json& s = j["solver"];
    if (!s.is_object()) throw InputError("field 'solver' must be an object");
    if (s.contains("method")) {
      if (!s["method"].is_string()) throw InputError("solver.method must be a string");
      f.solver.method = parse_method(s["method"].get<std::string>());
    }
    if (s.contains("tol")) {
      const double tol = finite_number(s["tol"], "solver.tol");
      if (!(tol > 0.0)) throw InputError("solver.tol must be positive");
      f.solver.tol = tol;
    }
    if (s.contains("max_iters")) f.solver.max_iters = count_field(s, "max_iters");
    if (s.contains("seed")) {
      if (!s["seed"].is_number_integer() || s["seed"].get<long long>() < 0)
        throw InputError("solver.seed must be a nonnegative integer");
      f.solver.seed = s["seed"].get<std::uint64_t>();
    }
  }
  return f;
}

InstanceFile parse_instance_text(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(std::string("malformed JSON: ") + e.what());
  }
  return parse_instance_json(j);
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError(path.string() + ": malformed JSON: " + e.what());
  }
}

InstanceFile parse_instance(const std::filesystem::path& path) {
  try {
    return parse_instance_json(read_json_file(path));
  } catch (const InputError& e) {
    const std::string msg = e.what();
    if (msg.rfind(path.string(), 0) == 0) throw;
    throw InputError(path.string() + ": " + msg);
  }
}

json serialize_instance(const InstanceFile& f) {
  json j;
  j["n"] = f.instance.n;
  j["k"] = f.instance.k;
  j["trace_preserving"] = f.instance.trace_preserving;
  json pairs = json::array();
  for (const InterpolationPair& pr : f.instance.pairs)
    pairs.push_back({{"A", matrix_to_json(pr.input)}, {"B", matrix_to_json(pr.output)}});
  j["pairs"] = std::move(pairs);
  json s = json::object();
  if (f.solver.method) s["method"] = to_string(*f.solver.method);
  if (f.solver.tol) s["tol"] = *f.solver.tol;
  if (f.solver.max_iters) s["max_iters"] = *f.solver.max_iters;
  if (f.solver.seed) s["seed"] = *f.solver.seed;
  if (!s.empty()) j["solver"] = std::move(s);
  return j;
}

std::string dump_json(const json& j, int indent) {
  std::ostringstream os;
  write_json(os, j, indent, 0);
  return os.str();
}

}  // namespace cpinterp
