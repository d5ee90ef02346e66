#include "switchstab/lmi.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <stdexcept>

namespace switchstab {

namespace {

std::pair<double, RVec> eig_min(const RMat& S) {
  Eigen::SelfAdjointEigenSolver<RMat> es(S);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("eig_min: eigendecomposition failed");
  return {es.eigenvalues()(0), es.eigenvectors().col(0)};
}

double lambda_min(const RMat& S) {
  Eigen::SelfAdjointEigenSolver<RMat> es(S);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("lambda_min: eigendecomposition failed");
  return es.eigenvalues()(0);
}

RMat symmetrize(const RMat& S) { return 0.5 * (S + S.transpose()); }

}  // namespace

RMat project_psd(const RMat& S, double floor) {
  if ((S - S.transpose()).cwiseAbs().maxCoeff() >
      1e-10 * (1.0 + S.cwiseAbs().maxCoeff()))
    throw std::invalid_argument("project_psd: input is not symmetric");
  Eigen::SelfAdjointEigenSolver<RMat> es(symmetrize(S));
  RVec w = es.eigenvalues();
  for (int i = 0; i < w.size(); ++i) w(i) = std::max(w(i), floor);
  return symmetrize(es.eigenvectors() * w.asDiagonal() *
                    es.eigenvectors().transpose());
}

RMat discrete_lyapunov(const RMat& A, const RMat& Q) {
  const int n = static_cast<int>(A.rows());
  if (A.cols() != n || Q.rows() != n || Q.cols() != n)
    throw std::invalid_argument("discrete_lyapunov: dimension mismatch");
  if (spectral_radius(A.cast<Complex>()) >= 1.0)
    throw std::invalid_argument("discrete_lyapunov: A is not Schur stable");
  // vec(P) - (A^T (x) A^T) vec(P) = vec(Q), column-major vec.
  RMat M = RMat::Identity(n * n, n * n);
  const RMat At = A.transpose();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      M.block(i * n, j * n, n, n) -= At(i, j) * At;
  Eigen::Map<const RVec> q(Q.data(), n * n);
  RVec p = M.partialPivLu().solve(q);
  Eigen::Map<const RMat> P(p.data(), n, n);
  return symmetrize(P);
}

namespace {

// Max over the PD term and the decrease terms of (eps_p - lambda_min),
// returning the active term index (0 = PD) and its unit eigenvector.
std::tuple<double, int, RVec> phi_at(const RMat& P,
                                     const std::vector<RMat>& cls,
                                     double eps_p) {
  auto [lam, u] = eig_min(P);
  double worst = eps_p - lam;
  int j = 0;
  RVec uw = u;
  for (std::size_t i = 0; i < cls.size(); ++i) {
    auto [li, ui] = eig_min(symmetrize(P - cls[i].transpose() * P * cls[i]));
    const double v = eps_p - li;
    if (v > worst) {
      worst = v;
      j = static_cast<int>(i) + 1;
      uw = ui;
    }
  }
  return {worst, j, uw};
}

}  // namespace

bool verify_cqlf(const RMat& P, const std::vector<RMat>& closed_loops,
                 double floor, double* margin_pd,
                 std::vector<double>* margins_decrease) {
  const double mpd = lambda_min(symmetrize(P));
  if (margin_pd) *margin_pd = mpd;
  bool ok = mpd >= floor;
  if (margins_decrease) margins_decrease->clear();
  for (const RMat& A : closed_loops) {
    const double m = lambda_min(symmetrize(P - A.transpose() * P * A));
    if (margins_decrease) margins_decrease->push_back(m);
    ok = ok && m >= floor;
  }
  return ok;
}

CqlfOutcome check_cqlf(const std::vector<RMat>& closed_loops,
                       const LmiOptions& opts) {
  if (closed_loops.empty())
    throw std::invalid_argument("check_cqlf: no closed loops given");
  const int n = static_cast<int>(closed_loops[0].rows());
  for (const RMat& A : closed_loops)
    if (A.rows() != n || A.cols() != n)
      throw std::invalid_argument("check_cqlf: inconsistent dimensions");

  // Necessary condition: every individual mode must be Schur stable.
  for (std::size_t i = 0; i < closed_loops.size(); ++i) {
    if (spectral_radius(closed_loops[i].cast<Complex>()) >= 1.0) {
      LmiInfeasible inf;
      inf.reason = LmiInfeasible::Reason::mode_unstable;
      inf.exact = true;
      inf.unstable_mode = static_cast<int>(i) + 1;
      return inf;
    }
  }

  // Warm start: average of the single-mode Lyapunov solutions.
  RMat P = RMat::Zero(n, n);
  for (const RMat& A : closed_loops)
    P += discrete_lyapunov(A, RMat::Identity(n, n));
  P /= static_cast<double>(closed_loops.size());
  P *= static_cast<double>(n) / P.trace();

  double best_phi = std::numeric_limits<double>::infinity();
  RMat best_P = P;
  int k = 0;
  for (k = 1; k <= opts.budget; ++k) {
    auto [phi, j, u] = phi_at(P, closed_loops, opts.eps_p);
    if (phi < best_phi) {
      best_phi = phi;
      best_P = P;
    }
    if (phi <= 0.0) break;  // all margins >= eps_p
    RMat G;
    if (j == 0) {
      G = -(u * u.transpose());
    } else {
      const RVec Au = closed_loops[j - 1] * u;
      G = -(u * u.transpose() - Au * Au.transpose());
    }
    G = symmetrize(G);
    G -= (G.trace() / n) * RMat::Identity(n, n);  // stay on the trace slice
    const double gn2 = G.squaredNorm();
    if (gn2 < 1e-30) break;
    const double alpha =
        (opts.step == LmiOptions::Step::polyak)
            ? (phi + opts.polyak_offset * opts.eps_p) / gn2
            : opts.diminishing_c / std::sqrt(static_cast<double>(k));
    P = symmetrize(P - alpha * G);
    P += ((n - P.trace()) / n) * RMat::Identity(n, n);
  }
  const int iters = std::min(k, opts.budget);

  CqlfCertificate cert;
  cert.P = symmetrize(best_P);
  if (verify_cqlf(cert.P, closed_loops, opts.eps_p, &cert.margin_pd,
                  &cert.margins_decrease))
    return cert;

  LmiInfeasible inf;
  inf.reason = (best_phi <= 0.0) ? LmiInfeasible::Reason::verification_failed
                                 : LmiInfeasible::Reason::budget_exhausted;
  inf.best_deficit = best_phi;
  inf.iterations = iters;
  return inf;
}

CqlfOutcome check_cqlf(const std::vector<Mat>& closed_loops,
                       const LmiOptions& opts) {
  std::vector<RMat> real_loops;
  real_loops.reserve(closed_loops.size());
  for (const Mat& A : closed_loops) {
    if (A.imag().norm() > 1e-10)
      throw std::invalid_argument(
          "check_cqlf: closed loop has a non-negligible imaginary part; "
          "realize the gains first");
    real_loops.push_back(A.real());
  }
  return check_cqlf(real_loops, opts);
}

SynthesisOutcome synthesize_lmi(const SwitchedSystemSpec& spec,
                                const LmiOptions& opts) {
  const ValidationReport rep = validate(spec);
  if (!rep.pass)
    throw std::invalid_argument("synthesize_lmi: invalid system: " +
                                rep.violations.front());
  if (!spec.all_real(1e-12))
    throw std::invalid_argument("synthesize_lmi: system data must be real");
  const int n = spec.n();
  const int N = spec.N();
  std::vector<RMat> As, Bs;
  for (const auto& m : spec.modes) {
    As.push_back(m.A.real());
    Bs.push_back(m.B.real());
  }

  RMat X = RMat::Identity(n, n);
  std::vector<RMat> Ns(N, RMat::Zero(1, n));
  double best_phi = std::numeric_limits<double>::infinity();
  RMat best_X = X;
  std::vector<RMat> best_N = Ns;
  int k = 0;
  for (k = 1; k <= opts.budget; ++k) {
    // phi = eps_p - min over modes of lambda_min([[X, Y^T], [Y, X]]).
    double worst = -std::numeric_limits<double>::infinity();
    int j = -1;
    RVec uw;
    for (int i = 0; i < N; ++i) {
      const RMat Y = As[i] * X + Bs[i] * Ns[i];
      RMat Blk(2 * n, 2 * n);
      Blk.topLeftCorner(n, n) = X;
      Blk.topRightCorner(n, n) = Y.transpose();
      Blk.bottomLeftCorner(n, n) = Y;
      Blk.bottomRightCorner(n, n) = X;
      auto [lam, u] = eig_min(symmetrize(Blk));
      const double v = opts.eps_p - lam;
      if (v > worst) {
        worst = v;
        j = i;
        uw = u;
      }
    }
    if (worst < best_phi) {
      best_phi = worst;
      best_X = X;
      best_N = Ns;
    }
    if (worst <= 0.0) break;  // all block margins >= eps_p
    const RVec p = uw.head(n);
    const RVec q = uw.tail(n);
    // d lambda / dX = pp^T + qq^T + A^T q p^T + p q^T A (symmetrized);
    // d lambda / dN = 2 (q^T B) p^T. Subgradients of phi are the negatives.
    RMat GX = -(p * p.transpose() + q * q.transpose() +
                As[j].transpose() * (q * p.transpose()) +
                (p * q.transpose()) * As[j]);
    GX = symmetrize(GX);
    GX -= (GX.trace() / n) * RMat::Identity(n, n);
    const double qb = (q.transpose() * Bs[j])(0, 0);
    const RMat GN = -2.0 * qb * p.transpose();
    const double gn2 = GX.squaredNorm() + GN.squaredNorm();
    if (gn2 < 1e-30) break;
    const double alpha =
        (opts.step == LmiOptions::Step::polyak)
            ? (worst + opts.polyak_offset * opts.eps_p) / gn2
            : opts.diminishing_c / std::sqrt(static_cast<double>(k));
    X = symmetrize(X - alpha * GX);
    X += ((n - X.trace()) / n) * RMat::Identity(n, n);
    Ns[j] -= alpha * GN;
  }
  const int iters = std::min(k, opts.budget);

  if (best_phi > 0.0) {
    LmiInfeasible inf;
    inf.best_deficit = best_phi;
    inf.iterations = iters;
    return inf;
  }

  // Re-verify the block margins by fresh eigendecompositions.
  SynthesisCertificate cert;
  cert.X = symmetrize(best_X);
  cert.N = best_N;
  cert.iterations = iters;
  for (int i = 0; i < N; ++i) {
    const RMat Y = As[i] * cert.X + Bs[i] * cert.N[i];
    RMat Blk(2 * n, 2 * n);
    Blk.topLeftCorner(n, n) = cert.X;
    Blk.topRightCorner(n, n) = Y.transpose();
    Blk.bottomLeftCorner(n, n) = Y;
    Blk.bottomRightCorner(n, n) = cert.X;
    cert.block_margins.push_back(lambda_min(symmetrize(Blk)));
  }
  for (double m : cert.block_margins) {
    if (m < opts.eps_p) {
      LmiInfeasible inf;
      inf.reason = LmiInfeasible::Reason::verification_failed;
      inf.best_deficit = best_phi;
      inf.iterations = iters;
      return inf;
    }
  }

  Eigen::SelfAdjointEigenSolver<RMat> es(cert.X);
  const double lmin = es.eigenvalues()(0);
  const double lmax = es.eigenvalues()(n - 1);
  if (!(lmin > 0.0) || lmax / lmin > 1e12)
    throw std::runtime_error(
        "synthesize_lmi: X is numerically singular (condition number above "
        "1e12); certificate withheld");
  const RMat Xinv = es.eigenvectors() *
                    es.eigenvalues().cwiseInverse().asDiagonal() *
                    es.eigenvectors().transpose();
  for (int i = 0; i < N; ++i) cert.gains.push_back(cert.N[i] * Xinv);

  // Implied Lyapunov matrix P ~ X^{-1}, trace-normalized, margins verified
  // directly (strictly positive; borderline instances may sit below eps_p).
  RMat P = symmetrize(Xinv);
  P *= static_cast<double>(n) / P.trace();
  std::vector<RMat> loops;
  for (int i = 0; i < N; ++i) loops.push_back(As[i] + Bs[i] * cert.gains[i]);
  std::vector<double> mdec;
  double mpd = 0.0;
  if (!verify_cqlf(P, loops, 0.0, &mpd, &mdec) || mpd <= 0.0) {
    LmiInfeasible inf;
    inf.reason = LmiInfeasible::Reason::verification_failed;
    inf.best_deficit = best_phi;
    inf.iterations = iters;
    return inf;
  }
  for (double m : mdec)
    if (m <= 0.0) {
      LmiInfeasible inf;
      inf.reason = LmiInfeasible::Reason::verification_failed;
      inf.best_deficit = best_phi;
      inf.iterations = iters;
      return inf;
    }
  cert.P = P;
  cert.p_margin_pd = mpd;
  cert.p_margins_decrease = mdec;
  return cert;
}

}  // namespace switchstab
