#pragma once

#include "switchstab/model.hpp"

#include <utility>
#include <variant>
#include <vector>

namespace switchstab {

// One level's search problem: find an approximately assignable common
// eigenvector v on the unit sphere, with per-mode stability margin eps_c and
// image-distance margin eps_d.
struct CeaInputs {
  std::vector<std::pair<Mat, Mat>> pairs;  // (A_i, B_i), n_r x n_r and n_r x 1
  double eps_c = 1e-4;
  double eps_d = 1e-4;

  int n_r() const { return pairs.empty() ? 0 : static_cast<int>(pairs.front().first.rows()); }
  int N() const { return static_cast<int>(pairs.size()); }
};

struct OptimizerTrace {
  int starts_tried = 0;
  int best_start = -1;           // index into the start list
  long iterations = 0;           // total local-optimizer iterations
  bool active_stability_constraint = false;  // some S2 margin < 1e-6
  bool real_restricted = false;  // search ran on the real sphere
};

struct CeaSolution {
  Vec v;                          // unit vector, phase-normalized
  std::vector<Mat> F;             // 1 x n_r feedback rows, F_i = M_i(v)
  std::vector<Complex> lambdas;   // v*(A_i + B_i F_i)v
  double residual = 0.0;          // J(v)
  std::vector<double> s2_margins; // (1 - eps_c) - ‖A_i^cl(v) v‖
  std::vector<double> s3_margins; // d(v, Im B_i) - eps_d
  OptimizerTrace trace;
};

struct CeaFailure {
  enum class Reason { feasibility_search_exhausted, empty_constraint_set_witness };
  Reason reason = Reason::feasibility_search_exhausted;
  double best_violation = 0.0;  // smallest strict-feasibility deficit seen
  int starts = 0;
};

struct CeaOptions {
  int multistart = defaults::multistart;
  std::uint64_t seed = defaults::seed;
  double feastol = defaults::feastol;
  // Among feasible local minimizers, prefer those whose S2 margins all clear
  // this threshold (the same threshold that raises the active-constraint
  // flag); fall back to the overall best J when no interior point exists.
  double interior_threshold = 1e-6;
  int phase1_iters = 200;
  int phase2_iters = 400;
  bool force_complex = false;  // disable the real-sphere restriction
  // When true and n_r = 2, corroborate a failed search with the dense grid
  // scan before returning; failure then carries the witness reason.
  bool grid_corroborate = false;
  int grid_points_per_angle = 128;
};

// E = (vv* - I)A, H = (vv* - I)B.
std::pair<Mat, Mat> residual_terms(const Vec& v, const Mat& A, const Mat& B);

// M(v) = -(H*H)⁻¹H*E: least-squares minimizer of ‖(E + HM)w‖ per column;
// throws when ‖H(v)‖ is below the singularity floor (v too close to Im B).
Mat optimal_feedback(const Vec& v, const Mat& A, const Mat& B);

// A + B M(v).
Mat closed_loop_map(const Vec& v, const Mat& A, const Mat& B);

// J(v) = Σ_i ‖[E_i(v) + H_i(v)M_i(v)] v‖².
double cost(const Vec& v, const CeaInputs& inputs);

struct Membership {
  bool in_S1 = false;              // ‖v‖ = 1 within 1e-12
  std::vector<double> s2_margins;  // -1e30 sentinel when v ∈ Im B_i
  std::vector<double> s3_margins;
};
Membership constraint_membership(const Vec& v, const CeaInputs& inputs);

// Largest-magnitude component made real nonnegative (ties: lowest index).
Vec phase_normalize(const Vec& v);

using CeaOutcome = std::variant<CeaSolution, CeaFailure>;

// Two-phase multistart search (feasibility, then constrained J-descent).
// n_r = 1 short-circuits to the deadbeat assignment a_cl = 0.
CeaOutcome run_cea(const CeaInputs& inputs, const CeaOptions& opts = {});

// Dense scan over the phase-fixed unit sphere of C², v = (cos t, sin t e^{jp});
// returns the maximum over grid points of the minimum constraint margin
// (argmax optionally reported). Only valid for n_r = 2.
double grid_scan_max_margin(const CeaInputs& inputs, int points_per_angle,
                            Vec* argmax = nullptr);

}  // namespace switchstab
