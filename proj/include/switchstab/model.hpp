#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

namespace switchstab {

using Complex = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;

// Shared numeric defaults. All tolerances are pinned here so every caller
// (library, CLI, tests) agrees on them.
namespace defaults {
inline constexpr double rank_tol = 1e-10;   // relative singular-value floor
inline constexpr double feastol = 1e-9;     // constraint-margin feasibility slack
inline constexpr double eps_p = 1e-6;       // certificate eigenvalue floor
inline constexpr double tau_im = 1e-6;      // relative imaginary norm for realization
inline constexpr int multistart = 32;       // random starts per CEA call
inline constexpr int lmi_budget = 20000;    // subgradient iterations
inline constexpr int horizon = 1000;        // simulation steps
inline constexpr std::uint64_t seed = 1;
}  // namespace defaults

// One mode of the switched system: x+ = A x + B u, single input column.
struct SubsystemPair {
  Mat A;          // n x n
  Mat B;          // n x 1
  int index = 0;  // 1-based mode identifier
};

struct SwitchedSystemSpec {
  std::vector<SubsystemPair> modes;

  int n() const { return modes.empty() ? 0 : static_cast<int>(modes.front().A.rows()); }
  int N() const { return static_cast<int>(modes.size()); }
  // True when every entry of every A_i, B_i has (numerically) zero imaginary part.
  bool all_real(double tol = 0.0) const;
};

// Feedback gains and the closed loops they induce: A_i^cl = A_i + B_i K_i.
struct ClosedLoopSet {
  std::vector<Mat> gains;         // 1 x n rows
  std::vector<Mat> closed_loops;  // n x n
};

struct ValidationReport {
  bool pass = true;
  std::vector<std::string> violations;  // "mode i: <predicate>" entries
};

// Checks the standing assumptions: square A, single nonzero input column,
// matching dimensions across modes, contiguous 1..N indices, controllability
// of every (A_i, B_i) under the relative rank tolerance.
ValidationReport validate(const SwitchedSystemSpec& spec,
                          double rank_tol = defaults::rank_tol);

// max |eigenvalue| of a square matrix.
double spectral_radius(const Mat& M);

// Euclidean distance from v to the complex line Im B = span{B}:
// ‖v − B(B*B)⁻¹B*v‖. Throws std::invalid_argument when B = 0.
double distance_to_image(const Vec& v, const Mat& B);

// Convenience constructor for ClosedLoopSet; gains[i] is 1 x n.
ClosedLoopSet make_closed_loops(const SwitchedSystemSpec& spec,
                                const std::vector<Mat>& gains);

}  // namespace switchstab
