#include "switchstab/cea.hpp"

#include "switchstab/rng.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>

namespace switchstab {

namespace {

constexpr double kDGuard = 1e-13;      // d(v, Im B) floor for M(v) to be usable
constexpr double kS2Sentinel = -1e30;  // S2 margin surrogate when v ∈ Im B
constexpr double kEarlyStopJ = 1e-22;  // residual at which the multistart stops

}  // namespace

std::pair<Mat, Mat> residual_terms(const Vec& v, const Mat& A, const Mat& B) {
  const int n = static_cast<int>(v.size());
  Mat P = v * v.adjoint() - Mat::Identity(n, n);
  return {P * A, P * B};
}

Mat optimal_feedback(const Vec& v, const Mat& A, const Mat& B) {
  auto [E, H] = residual_terms(v, A, B);
  const Vec h = H.col(0);
  const double hh = h.squaredNorm();
  // ‖H‖ = ‖B‖ d(v, Im B); below the floor the normal equations degenerate.
  if (hh <= kDGuard * kDGuard * B.squaredNorm())
    throw std::invalid_argument(
        "optimal_feedback: v lies (numerically) in Im B, ‖H(v)‖ below the "
        "singularity floor");
  return -(h.adjoint() * E) / hh;  // 1 x n
}

Mat closed_loop_map(const Vec& v, const Mat& A, const Mat& B) {
  return A + B * optimal_feedback(v, A, B);
}

double cost(const Vec& v, const CeaInputs& inputs) {
  double J = 0.0;
  for (const auto& [A, B] : inputs.pairs) {
    auto [E, H] = residual_terms(v, A, B);
    const Mat M = optimal_feedback(v, A, B);
    J += ((E + H * M) * v).squaredNorm();
  }
  return J;
}

Membership constraint_membership(const Vec& v, const CeaInputs& inputs) {
  Membership m;
  m.in_S1 = std::abs(v.norm() - 1.0) <= 1e-12;
  m.s2_margins.reserve(inputs.pairs.size());
  m.s3_margins.reserve(inputs.pairs.size());
  for (const auto& [A, B] : inputs.pairs) {
    const double d = distance_to_image(v, B);
    m.s3_margins.push_back(d - inputs.eps_d);
    if (d < kDGuard) {
      m.s2_margins.push_back(kS2Sentinel);
    } else {
      const double grow = (closed_loop_map(v, A, B) * v).norm();
      m.s2_margins.push_back((1.0 - inputs.eps_c) - grow);
    }
  }
  return m;
}

Vec phase_normalize(const Vec& v) {
  int k = 0;
  double best = std::abs(v(0));
  for (int i = 1; i < v.size(); ++i) {
    const double a = std::abs(v(i));
    if (a > best) {
      best = a;
      k = i;
    }
  }
  if (best == 0.0) return v;
  return v * (best / v(k));
}

namespace {

using Pairs = std::vector<std::pair<Mat, Mat>>;

// ---- sphere coordinates: z ∈ R^{n_r} (real mode) or R^{2 n_r} ----

Vec z_to_v(const RVec& z, int nr, bool real_mode) {
  Vec v(nr);
  if (real_mode) {
    for (int i = 0; i < nr; ++i) v(i) = Complex(z(i), 0.0);
  } else {
    for (int i = 0; i < nr; ++i) v(i) = Complex(z(i), z(nr + i));
  }
  return v / v.norm();
}

RVec v_to_z(const Vec& v, bool real_mode) {
  const int nr = static_cast<int>(v.size());
  if (real_mode) {
    RVec z(nr);
    for (int i = 0; i < nr; ++i) z(i) = v(i).real();
    return z;
  }
  RVec z(2 * nr);
  for (int i = 0; i < nr; ++i) {
    z(i) = v(i).real();
    z(nr + i) = v(i).imag();
  }
  return z;
}

struct Margins {
  double s2_min;
  double s3_min;
  double min() const { return std::min(s2_min, s3_min); }
};

Margins margins_at(const Vec& v, const Pairs& pairs, double eps_c, double eps_d) {
  Margins m{std::numeric_limits<double>::infinity(),
            std::numeric_limits<double>::infinity()};
  for (const auto& [A, B] : pairs) {
    const double d = distance_to_image(v, B);
    m.s3_min = std::min(m.s3_min, d - eps_d);
    double s2;
    if (d < kDGuard) {
      s2 = kS2Sentinel;
    } else {
      const Vec h = (v * (v.adjoint() * B.col(0))) - B.col(0);  // H(v) column
      const Mat E = v * (v.adjoint() * A) - A;
      const Complex u = -(h.dot(E * v)) / h.squaredNorm();      // M(v) v
      s2 = (1.0 - eps_c) - (A * v + B.col(0) * u).norm();
    }
    m.s2_min = std::min(m.s2_min, s2);
  }
  return m;
}

// Phase-1 residuals: hinge deficits against the strict-interior witness
// target (every margin ≥ feastol); sentinel margins contribute a fixed 1e3.
RVec viol_residuals(const Vec& v, const Pairs& pairs, double eps_c, double eps_d,
                    double feastol) {
  const int N = static_cast<int>(pairs.size());
  RVec r(2 * N);
  int k = 0;
  for (const auto& [A, B] : pairs) {
    const double d = distance_to_image(v, B);
    double s2;
    if (d < kDGuard) {
      s2 = kS2Sentinel;
    } else {
      Mat E = v * (v.adjoint() * A) - A;
      Vec h = (v * (v.adjoint() * B.col(0))) - B.col(0);
      const Complex u = -(h.dot(E * v)) / h.squaredNorm();  // M(v) v
      s2 = (1.0 - eps_c) - (A * v + B.col(0) * u).norm();
    }
    r(k++) = (s2 > -1e29) ? std::max(0.0, feastol - s2) : 1e3;
  }
  for (const auto& [A, B] : pairs) {
    (void)A;
    r(k++) = std::max(0.0, feastol - (distance_to_image(v, B) - eps_d));
  }
  return r;
}

// Phase-2 residuals: the stacked real/imaginary parts of (E_i + H_i M_i)v;
// empty optional when some d(v, Im B_i) is below the guard.
std::optional<RVec> residual_stack(const Vec& v, const Pairs& pairs) {
  const int nr = static_cast<int>(v.size());
  const int N = static_cast<int>(pairs.size());
  RVec out(2 * N * nr);
  int k = 0;
  for (const auto& [A, B] : pairs) {
    const double d = distance_to_image(v, B);
    if (d < kDGuard) return std::nullopt;
    const Mat E = v * (v.adjoint() * A) - A;
    const Vec h = (v * (v.adjoint() * B.col(0))) - B.col(0);
    const Complex u = -(h.dot(E * v)) / h.squaredNorm();
    const Vec r = E * v + h * u;  // (E + H M) v
    for (int i = 0; i < nr; ++i) out(k++) = r(i).real();
    for (int i = 0; i < nr; ++i) out(k++) = r(i).imag();
  }
  return out;
}

constexpr double kFdStep = 1e-6;

// Levenberg–Marquardt over ambient sphere coordinates (renormalized each
// step). `fun` maps a unit v to a residual vector; empty optional marks an
// invalid point. Returns (z, f = ‖r‖², iterations).
template <typename Fun>
std::tuple<RVec, double, int> lm_minimize(const Fun& fun, RVec z, int nr,
                                          bool real_mode, int max_iter) {
  z /= z.norm();
  auto eval = [&](const RVec& zz) { return fun(z_to_v(zz, nr, real_mode)); };
  auto r_opt = eval(z);
  if (!r_opt) return {z, std::numeric_limits<double>::infinity(), 0};
  RVec r = *r_opt;
  double f = r.squaredNorm();
  double mu = 1e-3;
  const int m = static_cast<int>(z.size());
  int nit = 0;
  for (int it = 0; it < max_iter; ++it) {
    nit = it + 1;
    RMat Jac(r.size(), m);
    for (int k = 0; k < m; ++k) {
      RVec zp = z, zm = z;
      zp(k) += kFdStep;
      zm(k) -= kFdStep;
      auto rp = eval(zp);
      auto rm = eval(zm);
      const RVec& rpv = rp ? *rp : r;
      const RVec& rmv = rm ? *rm : r;
      Jac.col(k) = (rpv - rmv) / (2.0 * kFdStep);
    }
    const RVec g = Jac.transpose() * r;
    if (g.norm() < 1e-16 || f == 0.0) break;
    bool ok = false;
    for (int tries = 0; tries < 25; ++tries) {
      RMat M = Jac.transpose() * Jac;
      M.diagonal().array() += mu;
      const RVec dz = M.ldlt().solve(-g);
      if (!dz.allFinite()) {
        mu *= 10.0;
        continue;
      }
      RVec zn = z + dz;
      zn /= zn.norm();
      auto rn = eval(zn);
      if (rn) {
        const double fn = rn->squaredNorm();
        if (fn < f) {
          z = zn;
          r = *rn;
          f = fn;
          mu = std::max(mu * 0.3, 1e-12);
          ok = true;
          break;
        }
      }
      mu *= 10.0;
    }
    if (!ok) break;
    if (f == 0.0) break;
  }
  return {z, f, nit};
}

struct Phase1Result {
  RVec z;
  double deficit;  // max(0, feastol - min margin) at the end point
  bool feasible;   // min margin ≥ feastol (strict-interior witness)
  int iters;
};

Phase1Result phase1(const RVec& z0, const Pairs& pairs, double eps_c,
                    double eps_d, int nr, bool real_mode, double feastol,
                    int max_iter) {
  auto fun = [&](const Vec& v) -> std::optional<RVec> {
    return viol_residuals(v, pairs, eps_c, eps_d, feastol);
  };
  auto [z, f, nit] = lm_minimize(fun, z0, nr, real_mode, max_iter);
  (void)f;
  const Vec v = z_to_v(z, nr, real_mode);
  const double mmin = margins_at(v, pairs, eps_c, eps_d).min();
  return {z, std::max(0.0, feastol - mmin), mmin >= feastol, nit};
}

struct Phase2Result {
  RVec z;
  double f;  // J at the end point
  int iters;
};

Phase2Result phase2(const RVec& z0, const Pairs& pairs, double eps_c,
                    double eps_d, int nr, bool real_mode, double feastol,
                    int max_iter) {
  RVec z = z0 / z0.norm();
  Vec v = z_to_v(z, nr, real_mode);
  auto r_opt = residual_stack(v, pairs);
  if (!r_opt) return {z, std::numeric_limits<double>::infinity(), 0};
  RVec r = *r_opt;
  double f = r.squaredNorm();
  double mu = 1e-3;
  const int m = static_cast<int>(z.size());
  auto feasible = [&](const Vec& vv) {
    return margins_at(vv, pairs, eps_c, eps_d).min() >= -feastol;
  };
  int nit = 0;
  for (int it = 0; it < max_iter; ++it) {
    nit = it + 1;
    if (f < 1e-26) break;
    RMat Jac(r.size(), m);
    for (int k = 0; k < m; ++k) {
      RVec zp = z, zm = z;
      zp(k) += kFdStep;
      zm(k) -= kFdStep;
      auto rp = residual_stack(z_to_v(zp, nr, real_mode), pairs);
      auto rm = residual_stack(z_to_v(zm, nr, real_mode), pairs);
      const RVec& rpv = rp ? *rp : r;
      const RVec& rmv = rm ? *rm : r;
      Jac.col(k) = (rpv - rmv) / (2.0 * kFdStep);
    }
    const RVec g = Jac.transpose() * r;
    bool accepted = false;
    for (int tries = 0; tries < 30 && !accepted; ++tries) {
      RMat M = Jac.transpose() * Jac;
      M.diagonal().array() += mu;
      const RVec dz = M.ldlt().solve(-g);
      if (!dz.allFinite()) {
        mu *= 10.0;
        continue;
      }
      // Backtrack along dz keeping both descent and feasibility.
      double t = 1.0;
      for (int bt = 0; bt < 40; ++bt) {
        RVec zn = z + t * dz;
        zn /= zn.norm();
        const Vec vn = z_to_v(zn, nr, real_mode);
        auto rn = residual_stack(vn, pairs);
        if (rn && feasible(vn)) {
          const double fn = rn->squaredNorm();
          if (fn < f) {
            z = zn;
            r = *rn;
            f = fn;
            accepted = true;
            break;
          }
        }
        t *= 0.5;
      }
      if (accepted)
        mu = std::max(mu * 0.5, 1e-12);
      else
        mu *= 10.0;
    }
    if (!accepted) {
      // Gradient-projection fallback along -g.
      double t = 1.0 / std::max(1.0, g.norm());
      bool improved = false;
      for (int bt = 0; bt < 50; ++bt) {
        RVec zn = z - t * g;
        zn /= zn.norm();
        const Vec vn = z_to_v(zn, nr, real_mode);
        auto rn = residual_stack(vn, pairs);
        if (rn && feasible(vn)) {
          const double fn = rn->squaredNorm();
          if (fn < f * (1.0 - 1e-12)) {
            z = zn;
            r = *rn;
            f = fn;
            improved = true;
            break;
          }
        }
        t *= 0.5;
      }
      if (!improved) break;
    }
  }
  return {z, f, nit};
}

struct Candidate {
  RVec z;
  double f;
  int start_index;
  double s2_min;
};

struct SearchResult {
  std::optional<Candidate> pick;
  double best_deficit = std::numeric_limits<double>::infinity();
  int starts_tried = 0;
  long iterations = 0;
};

std::vector<RVec> make_starts(const Pairs& pairs, int nr, bool real_mode,
                              double eps_d, int multistart, Rng& rng) {
  std::vector<RVec> starts;
  starts.reserve(pairs.size() + multistart);
  for (const auto& [A, B] : pairs) {
    Eigen::ComplexEigenSolver<Mat> es(A);
    Vec v0;
    if (es.info() == Eigen::Success) {
      int k = 0;
      double best = std::abs(es.eigenvalues()(0));
      for (int i = 1; i < nr; ++i) {
        const double a = std::abs(es.eigenvalues()(i));
        if (a > best) {
          best = a;
          k = i;
        }
      }
      v0 = es.eigenvectors().col(k);
    } else {
      v0 = Vec::Ones(nr);
    }
    if (real_mode) {
      Vec re(nr), im(nr);
      for (int i = 0; i < nr; ++i) {
        re(i) = Complex(v0(i).real(), 0.0);
        im(i) = Complex(v0(i).imag(), 0.0);
      }
      v0 = (re.norm() > im.norm()) ? re : im;
      if (v0.norm() < 1e-12) v0 = Vec::Ones(nr);
    }
    v0 /= v0.norm();
    if (distance_to_image(v0, B) < eps_d) {
      // Project off Im B so the start respects S3.
      const Vec b = B.col(0);
      Vec w = v0 - b * (b.dot(v0) / b.squaredNorm());
      if (w.norm() < 1e-12) {
        RVec z(real_mode ? nr : 2 * nr);
        for (int i = 0; i < z.size(); ++i) z(i) = rng.normal();
        starts.push_back(z);
        continue;
      }
      v0 = w / w.norm();
    }
    starts.push_back(v_to_z(v0, real_mode));
  }
  const int dim = real_mode ? nr : 2 * nr;
  for (int s = 0; s < multistart; ++s) {
    if (!real_mode && (s % 2 == 1) && !starts.empty()) {
      // Conjugate of the previous random start: the start set is closed
      // under conjugation, making the search conjugation-equivariant.
      RVec z = starts.back();
      for (int i = nr; i < 2 * nr; ++i) z(i) = -z(i);
      starts.push_back(z);
      continue;
    }
    RVec z(dim);
    for (int i = 0; i < dim; ++i) z(i) = rng.normal();
    starts.push_back(z);
  }
  return starts;
}

SearchResult search_sphere(const Pairs& pairs, const CeaInputs& inputs,
                           const CeaOptions& opts, bool real_mode) {
  const int nr = inputs.n_r();
  Rng rng(opts.seed);
  const auto starts =
      make_starts(pairs, nr, real_mode, inputs.eps_d, opts.multistart, rng);
  SearchResult out;
  std::vector<Candidate> cands;
  for (std::size_t si = 0; si < starts.size(); ++si) {
    ++out.starts_tried;
    RVec z0 = starts[si] / starts[si].norm();
    auto p1 = phase1(z0, pairs, inputs.eps_c, inputs.eps_d, nr, real_mode,
                     opts.feastol, opts.phase1_iters);
    out.iterations += p1.iters;
    out.best_deficit = std::min(out.best_deficit, p1.deficit);
    if (!p1.feasible) continue;
    auto p2 = phase2(p1.z, pairs, inputs.eps_c, inputs.eps_d, nr, real_mode,
                     opts.feastol, opts.phase2_iters);
    out.iterations += p2.iters;
    const Vec v = z_to_v(p2.z, nr, real_mode);
    const Margins m = margins_at(v, pairs, inputs.eps_c, inputs.eps_d);
    cands.push_back({p2.z, p2.f, static_cast<int>(si), m.s2_min});
    if (p2.f < kEarlyStopJ && m.s2_min >= opts.interior_threshold) break;
  }
  if (cands.empty()) return out;
  auto better = [](const Candidate& a, const Candidate& b) {
    return a.f < b.f || (a.f == b.f && a.start_index < b.start_index);
  };
  const Candidate* pick = nullptr;
  for (const auto& c : cands) {  // interior candidates first
    if (c.s2_min < opts.interior_threshold) continue;
    if (!pick || better(c, *pick)) pick = &c;
  }
  if (!pick) {
    for (const auto& c : cands)
      if (!pick || better(c, *pick)) pick = &c;
  }
  out.pick = *pick;
  return out;
}

bool pairs_numerically_real(const Pairs& pairs) {
  double re = 0.0, im = 0.0;
  for (const auto& [A, B] : pairs) {
    re = std::max({re, A.real().cwiseAbs().maxCoeff(), B.real().cwiseAbs().maxCoeff()});
    im = std::max({im, A.imag().cwiseAbs().maxCoeff(), B.imag().cwiseAbs().maxCoeff()});
  }
  return im <= 1e-12 * (1.0 + re);
}

CeaSolution finalize(const Vec& v_raw, const CeaInputs& inputs,
                     const SearchResult& sr, bool real_restricted) {
  CeaSolution sol;
  sol.v = phase_normalize(v_raw);
  for (const auto& [A, B] : inputs.pairs) {
    sol.F.push_back(optimal_feedback(sol.v, A, B));
    const Mat Acl = A + B * sol.F.back();
    sol.lambdas.push_back((sol.v.adjoint() * (Acl * sol.v))(0, 0));
  }
  sol.residual = cost(sol.v, inputs);
  Membership mem = constraint_membership(sol.v, inputs);
  sol.s2_margins = std::move(mem.s2_margins);
  sol.s3_margins = std::move(mem.s3_margins);
  sol.trace.starts_tried = sr.starts_tried;
  sol.trace.best_start = sr.pick->start_index;
  sol.trace.iterations = sr.iterations;
  sol.trace.real_restricted = real_restricted;
  for (double s2 : sol.s2_margins)
    if (s2 < 1e-6) sol.trace.active_stability_constraint = true;
  return sol;
}

}  // namespace

CeaOutcome run_cea(const CeaInputs& inputs, const CeaOptions& opts) {
  const int nr = inputs.n_r();
  const int N = inputs.N();
  if (nr < 1 || N < 1)
    throw std::invalid_argument("run_cea: empty inputs");
  for (const auto& [A, B] : inputs.pairs)
    if (A.rows() != nr || A.cols() != nr || B.rows() != nr || B.cols() != 1 ||
        B.norm() == 0.0)
      throw std::invalid_argument("run_cea: malformed or zero-input pair");

  const bool data_real = pairs_numerically_real(inputs.pairs);

  if (nr == 1) {
    // Scalar level: assign the deadbeat closed loop a_cl = 0 directly.
    CeaSolution sol;
    sol.v = Vec::Ones(1);
    for (const auto& [A, B] : inputs.pairs) {
      Mat F(1, 1);
      F(0, 0) = -(A(0, 0) / B(0, 0));
      sol.F.push_back(F);
      sol.lambdas.push_back(A(0, 0) + B(0, 0) * F(0, 0));
      sol.s2_margins.push_back((1.0 - inputs.eps_c) - std::abs(sol.lambdas.back()));
      sol.s3_margins.push_back(0.0);  // S3 is vacuous at the scalar level
    }
    sol.residual = 0.0;
    sol.trace.real_restricted = data_real;
    return sol;
  }

  // Real data: search the real sphere first so feedback rows stay exactly
  // real; fall back to the complex sphere when that search finds nothing.
  if (data_real && !opts.force_complex) {
    Pairs real_pairs;
    real_pairs.reserve(inputs.pairs.size());
    for (const auto& [A, B] : inputs.pairs)
      real_pairs.emplace_back(A.real().cast<Complex>(), B.real().cast<Complex>());
    CeaInputs clean{real_pairs, inputs.eps_c, inputs.eps_d};
    SearchResult sr = search_sphere(real_pairs, clean, opts, /*real_mode=*/true);
    if (sr.pick) {
      const Vec v = z_to_v(sr.pick->z, nr, true);
      return finalize(v, clean, sr, true);
    }
    SearchResult src = search_sphere(real_pairs, clean, opts, /*real_mode=*/false);
    if (src.pick) {
      const Vec v = z_to_v(src.pick->z, nr, false);
      src.starts_tried += sr.starts_tried;
      src.iterations += sr.iterations;
      return finalize(v, clean, src, false);
    }
    CeaFailure fail;
    fail.best_violation = std::min(sr.best_deficit, src.best_deficit);
    fail.starts = sr.starts_tried + src.starts_tried;
    if (opts.grid_corroborate && nr == 2 &&
        grid_scan_max_margin(clean, opts.grid_points_per_angle) <= -1e-6)
      fail.reason = CeaFailure::Reason::empty_constraint_set_witness;
    return fail;
  }

  SearchResult sr = search_sphere(inputs.pairs, inputs, opts, /*real_mode=*/false);
  if (sr.pick) {
    const Vec v = z_to_v(sr.pick->z, nr, false);
    return finalize(v, inputs, sr, false);
  }
  CeaFailure fail;
  fail.best_violation = sr.best_deficit;
  fail.starts = sr.starts_tried;
  if (opts.grid_corroborate && nr == 2 &&
      grid_scan_max_margin(inputs, opts.grid_points_per_angle) <= -1e-6)
    fail.reason = CeaFailure::Reason::empty_constraint_set_witness;
  return fail;
}

double grid_scan_max_margin(const CeaInputs& inputs, int points_per_angle,
                            Vec* argmax) {
  if (inputs.n_r() != 2)
    throw std::invalid_argument("grid_scan_max_margin: only n_r = 2 is supported");
  if (points_per_angle < 2)
    throw std::invalid_argument("grid_scan_max_margin: need at least 2 points per angle");
  double best = -std::numeric_limits<double>::infinity();
  Vec best_v(2);
  // Phase-fixed sphere: v = (cos t, sin t e^{jp}), global phase removed.
  for (int it = 0; it < points_per_angle; ++it) {
    const double t = (M_PI / 2.0) * it / (points_per_angle - 1);
    const double c = std::cos(t), s = std::sin(t);
    for (int ip = 0; ip < points_per_angle; ++ip) {
      const double p = 2.0 * M_PI * ip / points_per_angle;
      Vec v(2);
      v(0) = Complex(c, 0.0);
      v(1) = Complex(s * std::cos(p), s * std::sin(p));
      const Membership m = constraint_membership(v, inputs);
      double mn = std::numeric_limits<double>::infinity();
      for (double x : m.s2_margins) mn = std::min(mn, x);
      for (double x : m.s3_margins) mn = std::min(mn, x);
      if (mn > best) {
        best = mn;
        best_v = v;
      }
    }
  }
  if (argmax) *argmax = best_v;
  return best;
}

}  // namespace switchstab
