#pragma once

#include "switchstab/model.hpp"

#include <variant>
#include <vector>

namespace switchstab {

// Common quadratic Lyapunov certificate for x_{k+1} = A_i^cl x_k:
// P symmetric, trace(P) = n, with lambda_min(P) and every
// lambda_min(P - (A_i^cl)^T P A_i^cl) at least the configured floor.
struct CqlfCertificate {
  RMat P;
  double margin_pd = 0.0;
  std::vector<double> margins_decrease;
};

struct LmiInfeasible {
  enum class Reason { mode_unstable, budget_exhausted, verification_failed };
  Reason reason = Reason::budget_exhausted;
  // mode_unstable is an exact verdict (spectral-radius necessary condition);
  // budget exhaustion is heuristic solver failure, not an infeasibility proof.
  bool exact = false;
  double best_deficit = 0.0;  // smallest phi reached (> 0 on failure)
  int iterations = 0;
  int unstable_mode = 0;  // 1-based; 0 when not applicable
};

struct SynthesisCertificate {
  RMat X;                    // symmetric positive definite, trace n
  std::vector<RMat> N;       // N real 1 x n rows
  std::vector<RMat> gains;   // K_i = N_i X^{-1}
  std::vector<double> block_margins;  // lambda_min of each 2n x 2n block
  // Implied Lyapunov matrix P proportional to X^{-1} (trace-normalized) with
  // its directly verified margins; these are strictly positive but need not
  // reach the eps_p floor on borderline-feasible instances.
  RMat P;
  double p_margin_pd = 0.0;
  std::vector<double> p_margins_decrease;
  int iterations = 0;
};

struct LmiOptions {
  double eps_p = defaults::eps_p;
  int budget = defaults::lmi_budget;
  enum class Step { polyak, diminishing } step = Step::polyak;
  double diminishing_c = 1.0;   // step c/sqrt(k) when diminishing
  double polyak_offset = 1.0;   // Polyak target depth, in units of eps_p
};

// Nearest (Frobenius) symmetric matrix with lambda_min >= floor.
RMat project_psd(const RMat& S, double floor);

// Exact P solving P - A^T P A = Q via the vectorized linear system.
// Requires rho(A) < 1.
RMat discrete_lyapunov(const RMat& A, const RMat& Q);

using CqlfOutcome = std::variant<CqlfCertificate, LmiInfeasible>;

CqlfOutcome check_cqlf(const std::vector<RMat>& closed_loops,
                       const LmiOptions& opts = {});
// Complex inputs accepted only when the imaginary norm is <= 1e-10.
CqlfOutcome check_cqlf(const std::vector<Mat>& closed_loops,
                       const LmiOptions& opts = {});

using SynthesisOutcome = std::variant<SynthesisCertificate, LmiInfeasible>;

SynthesisOutcome synthesize_lmi(const SwitchedSystemSpec& spec,
                                const LmiOptions& opts = {});

// Independent certificate verification (plain eigendecomposition, shares no
// state with the solvers). Returns true iff lambda_min(P) >= floor and every
// decrease margin is >= floor; margins are written out when requested.
bool verify_cqlf(const RMat& P, const std::vector<RMat>& closed_loops,
                 double floor, double* margin_pd = nullptr,
                 std::vector<double>* margins_decrease = nullptr);

}  // namespace switchstab
