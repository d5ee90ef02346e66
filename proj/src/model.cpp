#include "switchstab/model.hpp"

#include <Eigen/Eigenvalues>

#include <stdexcept>

namespace switchstab {

bool SwitchedSystemSpec::all_real(double tol) const {
  for (const auto& m : modes) {
    if (m.A.imag().cwiseAbs().maxCoeff() > tol) return false;
    if (m.B.imag().cwiseAbs().maxCoeff() > tol) return false;
  }
  return true;
}

namespace {

bool controllable(const Mat& A, const Mat& B, double rank_tol) {
  const int n = static_cast<int>(A.rows());
  Mat C(n, n);  // [B, AB, ..., A^{n-1}B], m = 1
  Mat col = B;
  for (int k = 0; k < n; ++k) {
    C.col(k) = col.col(0);
    col = A * col;
  }
  Eigen::JacobiSVD<Mat> svd(C);
  const auto& s = svd.singularValues();
  return s(n - 1) > rank_tol * s(0);
}

}  // namespace

ValidationReport validate(const SwitchedSystemSpec& spec, double rank_tol) {
  ValidationReport rep;
  auto fail = [&rep](const std::string& msg) {
    rep.pass = false;
    rep.violations.push_back(msg);
  };

  if (spec.modes.empty()) {
    fail("structural: no modes given (N >= 1 required)");
    return rep;
  }

  const int n = static_cast<int>(spec.modes.front().A.rows());
  for (std::size_t i = 0; i < spec.modes.size(); ++i) {
    const auto& m = spec.modes[i];
    const std::string tag = "mode " + std::to_string(i + 1);
    if (m.index != static_cast<int>(i + 1))
      fail("structural: " + tag + ": index " + std::to_string(m.index) +
           " breaks the contiguous 1..N numbering");
    if (m.A.rows() != m.A.cols()) {
      fail("structural: " + tag + ": A is not square");
      continue;
    }
    if (m.A.rows() != n) {
      fail("structural: " + tag + ": state dimension " +
           std::to_string(m.A.rows()) + " differs from mode 1's " +
           std::to_string(n));
      continue;
    }
    if (m.B.cols() != 1) {
      fail("structural: " + tag + ": B has " + std::to_string(m.B.cols()) +
           " columns; multi-input systems are out of scope (m = 1 only)");
      continue;
    }
    if (m.B.rows() != n) {
      fail("structural: " + tag + ": B row count does not match A");
      continue;
    }
    if (m.B.norm() <= rank_tol) {
      fail(tag + ": B = 0 (input column must be nonzero)");
      continue;
    }
    if (!controllable(m.A, m.B, rank_tol))
      fail(tag + ": (A, B) is not controllable under rank tolerance " +
           std::to_string(rank_tol));
  }
  return rep;
}

double spectral_radius(const Mat& M) {
  if (M.rows() != M.cols())
    throw std::invalid_argument("spectral_radius: matrix must be square");
  if (M.rows() == 0) return 0.0;
  if (M.rows() == 1) return std::abs(M(0, 0));
  Eigen::ComplexEigenSolver<Mat> es(M, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("spectral_radius: eigensolver failed to converge");
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double distance_to_image(const Vec& v, const Mat& B) {
  if (B.cols() != 1 || B.rows() != v.size())
    throw std::invalid_argument("distance_to_image: B must be a column matching v");
  const Vec b = B.col(0);
  const double bb = b.squaredNorm();
  if (bb == 0.0)
    throw std::invalid_argument("distance_to_image: B = 0 (image degenerates to {0})");
  const Complex coef = b.dot(v) / bb;  // b.dot(v) = b* v
  return (v - coef * b).norm();
}

ClosedLoopSet make_closed_loops(const SwitchedSystemSpec& spec,
                                const std::vector<Mat>& gains) {
  if (gains.size() != spec.modes.size())
    throw std::invalid_argument("make_closed_loops: one gain row per mode required");
  ClosedLoopSet cl;
  cl.gains = gains;
  cl.closed_loops.reserve(gains.size());
  for (std::size_t i = 0; i < gains.size(); ++i)
    cl.closed_loops.push_back(spec.modes[i].A + spec.modes[i].B * gains[i]);
  return cl;
}

}  // namespace switchstab
