#include "switchstab/io.hpp"

#include <fstream>
#include <sstream>

namespace switchstab {

namespace {

Complex number_from_json(const json& j, const std::string& where) {
  if (j.is_number()) return Complex(j.get<double>(), 0.0);
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return Complex(j[0].get<double>(), j[1].get<double>());
  throw ParseError(where + ": expected a number or a [re, im] pair, got " +
                   j.dump());
}

json number_to_json(const Complex& z, bool as_real) {
  if (as_real) return json(z.real());
  return json::array({z.real(), z.imag()});
}

bool matrix_is_real(const Mat& M) {
  for (int r = 0; r < M.rows(); ++r)
    for (int c = 0; c < M.cols(); ++c)
      if (M(r, c).imag() != 0.0) return false;
  return true;
}

Mat column_from_json(const json& j, int n, const std::string& where) {
  if (!j.is_array() || j.empty())
    throw ParseError(where + ": expected a non-empty array");
  Mat B(static_cast<int>(j.size()), 1);
  for (std::size_t r = 0; r < j.size(); ++r) {
    const json& e = j[r];
    const std::string cell = where + "[" + std::to_string(r) + "]";
    if (e.is_array() && e.size() == 1) {
      B(static_cast<int>(r), 0) = number_from_json(e[0], cell + "[0]");
    } else if (e.is_array() && e.size() == 2 && e[0].is_number() &&
               e[1].is_number()) {
      B(static_cast<int>(r), 0) = number_from_json(e, cell);
    } else if (e.is_number()) {
      B(static_cast<int>(r), 0) = number_from_json(e, cell);
    } else if (e.is_array() && e.size() > 1) {
      throw ParseError(cell + ": input column must have exactly one entry "
                              "per row (single-input systems only)");
    } else {
      throw ParseError(cell + ": expected a number, [re, im] pair, or "
                              "1-element row");
    }
  }
  if (n > 0 && B.rows() != n)
    throw ParseError(where + ": expected " + std::to_string(n) +
                     " rows, got " + std::to_string(B.rows()));
  return B;
}

}  // namespace

Mat matrix_from_json(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty())
    throw ParseError(where + ": expected a non-empty array of rows");
  if (!j[0].is_array())
    throw ParseError(where + ": expected rows to be arrays");
  const int rows = static_cast<int>(j.size());
  const int cols = static_cast<int>(j[0].size());
  if (cols == 0) throw ParseError(where + "[0]: empty row");
  Mat M(rows, cols);
  for (int r = 0; r < rows; ++r) {
    const json& row = j[r];
    const std::string rw = where + "[" + std::to_string(r) + "]";
    if (!row.is_array() || static_cast<int>(row.size()) != cols)
      throw ParseError(rw + ": expected " + std::to_string(cols) +
                       " entries, got " + row.dump());
    for (int c = 0; c < cols; ++c)
      M(r, c) = number_from_json(row[c], rw + "[" + std::to_string(c) + "]");
  }
  return M;
}

json matrix_to_json(const Mat& M) {
  const bool as_real = matrix_is_real(M);
  json out = json::array();
  for (int r = 0; r < M.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < M.cols(); ++c)
      row.push_back(number_to_json(M(r, c), as_real));
    out.push_back(row);
  }
  return out;
}

json matrix_to_json(const RMat& M) {
  json out = json::array();
  for (int r = 0; r < M.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < M.cols(); ++c) row.push_back(M(r, c));
    out.push_back(row);
  }
  return out;
}

ProblemFile parse_problem(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    // Covers parse_error as well as out_of_range (e.g. number overflow),
    // both of which the parser raises for unusable input text.
    throw ParseError(std::string("problem file is not valid JSON: ") +
                     e.what());
  }
  if (!root.is_object())
    throw ParseError("problem file: top level must be an object");
  if (!root.contains("systems"))
    throw ParseError("problem file: missing required field 'systems'");
  const json& systems = root["systems"];
  if (!systems.is_array() || systems.empty())
    throw ParseError("systems: expected a non-empty array");

  ProblemFile pf;
  int n = 0;
  for (std::size_t i = 0; i < systems.size(); ++i) {
    const std::string where = "systems[" + std::to_string(i) + "]";
    const json& s = systems[i];
    if (!s.is_object() || !s.contains("A") || !s.contains("B"))
      throw ParseError(where + ": expected an object with fields 'A' and 'B'");
    Mat A = matrix_from_json(s["A"], where + ".A");
    if (A.rows() != A.cols())
      throw ParseError(where + ".A: matrix must be square, got " +
                       std::to_string(A.rows()) + "x" +
                       std::to_string(A.cols()));
    if (n == 0) n = static_cast<int>(A.rows());
    if (A.rows() != n)
      throw ParseError(where + ".A: state dimension " +
                       std::to_string(A.rows()) +
                       " disagrees with earlier modes (" + std::to_string(n) +
                       ")");
    Mat B = column_from_json(s["B"], n, where + ".B");
    pf.spec.modes.push_back({std::move(A), std::move(B),
                             static_cast<int>(i) + 1});
  }

  if (root.contains("gains")) {
    const json& gains = root["gains"];
    if (!gains.is_array() || gains.size() != systems.size())
      throw ParseError("gains: expected one 1x" + std::to_string(n) +
                       " row per mode");
    for (std::size_t i = 0; i < gains.size(); ++i) {
      const std::string where = "gains[" + std::to_string(i) + "]";
      const json* g = &gains[i];
      // A gain is a flat row: entries are numbers or [re, im] pairs. A
      // single-row nested matrix [[...]] (as emitted in reports) is unwrapped
      // so report gains round-trip into problem files; the flat shape is
      // checked first, so a row of [re, im] pairs keeps its meaning.
      if (g->is_array() && g->size() == 1 && (*g)[0].is_array() &&
          static_cast<int>((*g)[0].size()) == n && n != 1)
        g = &(*g)[0];
      else if (n == 1 && g->is_array() && g->size() == 1 &&
               (*g)[0].is_array() && (*g)[0].size() == 1)
        g = &(*g)[0];
      if (!g->is_array() || static_cast<int>(g->size()) != n)
        throw ParseError(where + ": expected a flat row of " +
                         std::to_string(n) + " entries");
      Mat K(1, n);
      for (int c = 0; c < n; ++c)
        K(0, c) =
            number_from_json((*g)[c], where + "[" + std::to_string(c) + "]");
      pf.gains.push_back(std::move(K));
    }
  }

  if (root.contains("params")) {
    const json& p = root["params"];
    if (!p.is_object()) throw ParseError("params: expected an object");
    auto num = [&](const char* key) -> std::optional<double> {
      if (!p.contains(key)) return std::nullopt;
      if (!p[key].is_number())
        throw ParseError(std::string("params.") + key + ": expected a number");
      return p[key].get<double>();
    };
    pf.params.eps_c = num("eps_c");
    pf.params.eps_d = num("eps_d");
    pf.params.cert_floor = num("cert_floor");
    if (auto v = num("multistart")) pf.params.multistart = static_cast<int>(*v);
    if (auto v = num("seed")) pf.params.seed = static_cast<unsigned>(*v);
    if (auto v = num("horizon")) pf.params.horizon = static_cast<int>(*v);
    for (auto it = p.begin(); it != p.end(); ++it) {
      const std::string k = it.key();
      if (k != "eps_c" && k != "eps_d" && k != "multistart" && k != "seed" &&
          k != "horizon" && k != "cert_floor")
        throw ParseError("params." + k + ": unknown parameter");
    }
  }
  return pf;
}

json problem_to_json(const ProblemFile& pf) {
  json root;
  root["systems"] = json::array();
  for (const auto& m : pf.spec.modes) {
    json s;
    s["A"] = matrix_to_json(m.A);
    // Columns are emitted flat.
    json b = json::array();
    const bool as_real = matrix_is_real(m.B);
    for (int r = 0; r < m.B.rows(); ++r)
      b.push_back(number_to_json(m.B(r, 0), as_real));
    s["B"] = b;
    root["systems"].push_back(s);
  }
  if (!pf.gains.empty()) {
    json g = json::array();
    for (const auto& K : pf.gains) {
      json row = json::array();
      const bool as_real = matrix_is_real(K);
      for (int c = 0; c < K.cols(); ++c)
        row.push_back(number_to_json(K(0, c), as_real));
      g.push_back(row);
    }
    root["gains"] = g;
  }
  json p = json::object();
  if (pf.params.eps_c) p["eps_c"] = *pf.params.eps_c;
  if (pf.params.eps_d) p["eps_d"] = *pf.params.eps_d;
  if (pf.params.multistart) p["multistart"] = *pf.params.multistart;
  if (pf.params.seed) p["seed"] = *pf.params.seed;
  if (pf.params.horizon) p["horizon"] = *pf.params.horizon;
  if (pf.params.cert_floor) p["cert_floor"] = *pf.params.cert_floor;
  if (!p.empty()) root["params"] = p;
  return root;
}

std::string emit_problem(const ProblemFile& pf) {
  return problem_to_json(pf).dump(2) + "\n";
}

ProblemFile load_problem(const std::string& path) {
  return parse_problem(read_text_file(path));
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << text;
}

}  // namespace switchstab
