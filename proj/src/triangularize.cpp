#include "switchstab/triangularize.hpp"

#include <cmath>
#include <stdexcept>

namespace switchstab {

Mat unitary_completion(const Vec& v) {
  const int n = static_cast<int>(v.size());
  if (n < 2)
    throw std::invalid_argument("unitary_completion: need dimension >= 2");
  if (std::abs(v.norm() - 1.0) > 1e-8)
    throw std::invalid_argument("unitary_completion: v is not a unit vector");
  // Reflector sign: alpha = -v1/|v1| makes w = v - alpha e1 long (no
  // cancellation); for exactly real v this keeps every entry exactly real.
  const double av1 = std::abs(v(0));
  const Complex alpha = (av1 > 0.0) ? Complex(-v(0) / av1) : Complex(-1.0, 0.0);
  Vec w = v;
  w(0) -= alpha;
  const double nw = w.norm();
  Mat Q;
  if (nw < 1e-14) {
    Q = alpha * Mat::Identity(n, n);
  } else {
    w /= nw;
    Q = alpha * (Mat::Identity(n, n) - 2.0 * (w * w.adjoint()));
  }
  return Q.rightCols(n - 1);
}

std::vector<std::pair<Mat, Mat>> deflate(
    const std::vector<std::pair<Mat, Mat>>& pairs, const CeaSolution& cea) {
  if (pairs.size() != cea.F.size())
    throw std::invalid_argument("deflate: solution does not match pair count");
  const Mat U = unitary_completion(cea.v);
  std::vector<std::pair<Mat, Mat>> out;
  out.reserve(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& [A, B] = pairs[i];
    const Mat Acl = A + B * cea.F[i];
    Mat Ad = U.adjoint() * Acl * U;
    Mat Bd = U.adjoint() * B;
    if (Bd.norm() <= 1e-12 * B.norm())
      throw std::runtime_error(
          "deflate: deflated input column vanished for mode " +
          std::to_string(i + 1) +
          " — v lies in Im B, violating the full-rank deflation guarantee");
    out.emplace_back(std::move(Ad), std::move(Bd));
  }
  return out;
}

Algorithm1Outcome run_algorithm1(const SwitchedSystemSpec& spec, double eps_c,
                                 double eps_d, const CeaOptions& opts) {
  const ValidationReport rep = validate(spec);
  if (!rep.pass)
    throw std::invalid_argument("run_algorithm1: invalid system: " +
                                rep.violations.front());
  const int n = spec.n();
  const int N = spec.N();

  std::vector<std::pair<Mat, Mat>> pairs;
  pairs.reserve(N);
  for (const auto& m : spec.modes) pairs.emplace_back(m.A, m.B);

  std::vector<Mat> K(N, Mat::Zero(1, n));
  Mat P = Mat::Identity(n, n);  // U_1 U_2 ... U_l, shape n x n_r
  Mat U = Mat::Zero(n, n);
  std::vector<IterationRecord> records;
  std::vector<bool> active;

  for (int level = 1; level <= n; ++level) {
    const int nr = n - level + 1;
    CeaInputs in{pairs, eps_c, eps_d};
    CeaOptions lopts = opts;
    lopts.seed = opts.seed + static_cast<unsigned>(level);
    CeaOutcome oc = run_cea(in, lopts);
    if (std::holds_alternative<CeaFailure>(oc)) {
      Algorithm1Failure fail;
      fail.level = level;
      fail.cea = std::get<CeaFailure>(std::move(oc));
      fail.partial = std::move(records);
      fail.partial_gains = std::move(K);
      fail.partial_U = std::move(U);
      return fail;
    }
    CeaSolution sol = std::get<CeaSolution>(std::move(oc));

    U.col(level - 1) = P * sol.v;
    for (int i = 0; i < N; ++i) K[i] += sol.F[i] * P.adjoint();
    active.push_back(sol.trace.active_stability_constraint);

    IterationRecord rec;
    rec.level = level;
    rec.n_r = nr;
    if (level < n) {
      double bmin_prev = std::numeric_limits<double>::infinity();
      for (const auto& [A, B] : pairs) {
        (void)A;
        bmin_prev = std::min(bmin_prev, B.norm());
      }
      rec.U_next = unitary_completion(sol.v);
      auto next = deflate(pairs, sol);
      double bmin = std::numeric_limits<double>::infinity();
      for (const auto& [A, B] : next) {
        (void)A;
        bmin = std::min(bmin, B.norm());
      }
      rec.deflated_B_min_norm = bmin;
      rec.deflated_B_floor = (eps_d - opts.feastol) * bmin_prev;
      rec.deflated = next;
      P = P * (*rec.U_next);
      pairs = std::move(next);
    }
    rec.cea = std::move(sol);
    records.push_back(std::move(rec));
  }

  DesignResult res;
  res.gains = std::move(K);
  res.U = std::move(U);
  res.iterations = std::move(records);
  res.active_levels = std::move(active);
  res.realization = Realization::complex_basis;
  res.closed_loop_radii.reserve(N);
  for (int i = 0; i < N; ++i)
    res.closed_loop_radii.push_back(
        spectral_radius(spec.modes[i].A + spec.modes[i].B * res.gains[i]));
  res.lower_residual = near_triangularity(res.gains, res.U, spec);
  return res;
}

std::variant<DesignResult, RealizationRefusal> realize_real_gains(
    const DesignResult& result, const SwitchedSystemSpec& spec,
    double tau_im) {
  if (!spec.all_real())
    throw std::invalid_argument("realize_real_gains: system is not all-real");
  double worst = 0.0;
  int worst_mode = 1;
  for (std::size_t i = 0; i < result.gains.size(); ++i) {
    const double kn = result.gains[i].norm();
    const double rel = (kn == 0.0) ? 0.0 : result.gains[i].imag().norm() / kn;
    if (rel > worst) {
      worst = rel;
      worst_mode = static_cast<int>(i) + 1;
    }
  }
  if (worst > tau_im)
    return RealizationRefusal{result, worst, worst_mode};

  DesignResult out = result;
  for (auto& Ki : out.gains) Ki = Ki.real().cast<Complex>();
  out.realization = Realization::real_projected;
  out.discarded_imag_norm = worst;
  out.closed_loop_radii.clear();
  for (std::size_t i = 0; i < out.gains.size(); ++i)
    out.closed_loop_radii.push_back(
        spectral_radius(spec.modes[i].A + spec.modes[i].B * out.gains[i]));
  out.lower_residual = near_triangularity(out.gains, out.U, spec);
  return out;
}

double near_triangularity(const std::vector<Mat>& gains, const Mat& U,
                          const SwitchedSystemSpec& spec) {
  if (gains.size() != spec.modes.size())
    throw std::invalid_argument("near_triangularity: gain count mismatch");
  const int n = spec.n();
  if (U.rows() != n || U.cols() != n ||
      (U.adjoint() * U - Mat::Identity(n, n)).cwiseAbs().maxCoeff() > 1e-6)
    throw std::invalid_argument("near_triangularity: U is not unitary");
  double worst = 0.0;
  for (std::size_t i = 0; i < gains.size(); ++i) {
    const Mat T =
        U.adjoint() * (spec.modes[i].A + spec.modes[i].B * gains[i]) * U;
    double sq = 0.0;
    for (int c = 0; c < n; ++c)
      for (int r = c + 1; r < n; ++r) sq += std::norm(T(r, c));
    worst = std::max(worst, std::sqrt(sq));
  }
  return worst;
}

}  // namespace switchstab
