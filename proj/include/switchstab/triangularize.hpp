#pragma once

#include "switchstab/cea.hpp"
#include "switchstab/model.hpp"

#include <limits>
#include <optional>
#include <variant>
#include <vector>

namespace switchstab {

// One outer-loop level: the CEA solution on the current deflated pair set,
// the completion used to deflate, and the deflated pairs handed to the next
// level (both absent at the final, scalar level).
struct IterationRecord {
  int level = 0;  // 1-based
  int n_r = 0;    // dimension of this level's pairs
  CeaSolution cea;
  std::optional<Mat> U_next;  // n_r x (n_r - 1)
  std::optional<std::vector<std::pair<Mat, Mat>>> deflated;
  // Deflation bookkeeping: min_i ||B_i^{l+1}|| and its guaranteed floor
  // (eps_d - feastol) * min_i ||B_i^l||.
  double deflated_B_min_norm = std::numeric_limits<double>::quiet_NaN();
  double deflated_B_floor = std::numeric_limits<double>::quiet_NaN();
};

enum class Realization { complex_basis, real_projected };

struct DesignResult {
  std::vector<Mat> gains;  // N rows, each 1 x n
  Mat U;                   // n x n accumulated basis
  std::vector<IterationRecord> iterations;
  double lower_residual = 0.0;
  Realization realization = Realization::complex_basis;
  double discarded_imag_norm = 0.0;  // max relative Im-norm dropped per gain
  std::vector<bool> active_levels;   // active stability constraint per level
  std::vector<double> closed_loop_radii;  // spectral radius per mode
};

struct Algorithm1Failure {
  int level = 0;  // level at which CEA failed
  CeaFailure cea;
  std::vector<IterationRecord> partial;  // levels completed before failure
  std::vector<Mat> partial_gains;
  Mat partial_U;  // columns 1..level-1 filled, rest zero
};

struct RealizationRefusal {
  DesignResult complex_result;  // untouched
  double worst_rel_imag = 0.0;
  int worst_mode = 0;  // 1-based mode index
};

// Columns 2..n_r of a deterministic unitary matrix whose first column is v
// (single Householder reflector, sign fixed against cancellation).
Mat unitary_completion(const Vec& v);

// (U* A_i^cl U, U* B_i) per mode with U = unitary_completion(cea.v).
// Throws when a deflated input column vanishes (the distance constraint on
// cea.v guarantees every deflated B_i keeps full column rank).
std::vector<std::pair<Mat, Mat>> deflate(
    const std::vector<std::pair<Mat, Mat>>& pairs, const CeaSolution& cea);

using Algorithm1Outcome = std::variant<DesignResult, Algorithm1Failure>;

Algorithm1Outcome run_algorithm1(const SwitchedSystemSpec& spec, double eps_c,
                                 double eps_d, const CeaOptions& opts = {});

// Replace each gain by its real part when the relative imaginary norm is at
// most tau_im; otherwise refuse, returning the complex result untouched.
std::variant<DesignResult, RealizationRefusal> realize_real_gains(
    const DesignResult& result, const SwitchedSystemSpec& spec,
    double tau_im = defaults::tau_im);

// max over modes of || strict lower triangle of U*(A_i + B_i K_i)U ||_F.
double near_triangularity(const std::vector<Mat>& gains, const Mat& U,
                          const SwitchedSystemSpec& spec);

}  // namespace switchstab
