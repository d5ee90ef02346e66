#pragma once

#include "switchstab/model.hpp"

#include "json.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace switchstab {

using nlohmann::json;

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Optional parameter block of a problem file; absent fields fall back to the
// CLI flag or the built-in default.
struct ProblemParams {
  std::optional<double> eps_c;
  std::optional<double> eps_d;
  std::optional<int> multistart;
  std::optional<unsigned> seed;
  std::optional<int> horizon;
  std::optional<double> cert_floor;
};

struct ProblemFile {
  SwitchedSystemSpec spec;
  std::vector<Mat> gains;  // optional, for `check`; empty when absent
  ProblemParams params;
};

// Numbers are bare reals or [re, im] pairs; B may be a flat array or a
// column of 1-element rows. Throws ParseError with field context.
ProblemFile parse_problem(const std::string& text);
ProblemFile load_problem(const std::string& path);
std::string emit_problem(const ProblemFile& pf);

// JSON encoding of matrices: entries are bare doubles when the whole matrix
// is exactly real, [re, im] pairs otherwise.
json matrix_to_json(const Mat& M);
json matrix_to_json(const RMat& M);
Mat matrix_from_json(const json& j, const std::string& where);

json problem_to_json(const ProblemFile& pf);

void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

inline constexpr const char* kToolName = "switchstab";
inline constexpr const char* kToolVersion = "1.0.0";

}  // namespace switchstab
