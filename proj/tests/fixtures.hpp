#pragma once

#include "switchstab/model.hpp"
#include "switchstab/rng.hpp"

#include <Eigen/QR>

namespace switchstab::testfx {

inline RMat random_real(Rng& rng, int r, int c) {
  RMat M(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) M(i, j) = rng.normal();
  return M;
}

inline bool controllable_pair(const RMat& A, const RMat& B, double tol = 1e-10) {
  const int n = static_cast<int>(A.rows());
  RMat C(n, n);
  RMat col = B;
  for (int k = 0; k < n; ++k) {
    C.col(k) = col.col(0);
    col = A * col;
  }
  Eigen::JacobiSVD<RMat> svd(C);
  const auto& s = svd.singularValues();
  return s(n - 1) > tol * s(0);
}

// Exactly-triangularizable switched system: a random orthogonal basis T
// (QR with diagonal sign fix), per mode an upper-triangular target with
// diagonal drawn uniformly in [-0.9, 0.9], a controllable input column, and
// a random planted gain; A_i = T Ahat_i T^T - B_i Khat_i, so the planted
// gains triangularize the closed loop exactly in the basis T.
struct ExactFixture {
  SwitchedSystemSpec spec;
  RMat T;
  std::vector<RMat> planted_gains;
};

inline ExactFixture make_exact_fixture(Rng& rng, int n, int N) {
  ExactFixture fx;
  const RMat G = random_real(rng, n, n);
  Eigen::HouseholderQR<RMat> qr(G);
  RMat Q = qr.householderQ();
  const RMat R = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int i = 0; i < n; ++i)
    if (R(i, i) < 0) Q.col(i) = -Q.col(i);
  fx.T = Q;
  for (int i = 0; i < N; ++i) {
    RMat Ahat = random_real(rng, n, n).triangularView<Eigen::Upper>();
    for (int d = 0; d < n; ++d) Ahat(d, d) = rng.uniform_pm(0.9);
    const RMat Acl = fx.T * Ahat * fx.T.transpose();
    RMat B(n, 1);
    do {
      B = random_real(rng, n, 1);
    } while (!controllable_pair(Acl, B));
    const RMat K = random_real(rng, 1, n);
    const RMat A = Acl - B * K;
    fx.spec.modes.push_back(
        {A.cast<Complex>(), B.cast<Complex>(), i + 1});
    fx.planted_gains.push_back(K);
  }
  return fx;
}

inline SwitchedSystemSpec perturb_spec(const SwitchedSystemSpec& spec,
                                       Rng& rng, double magnitude) {
  SwitchedSystemSpec out = spec;
  for (auto& m : out.modes) {
    for (int r = 0; r < m.A.rows(); ++r)
      for (int c = 0; c < m.A.cols(); ++c)
        m.A(r, c) += Complex(rng.uniform_pm(magnitude), 0.0);
    for (int r = 0; r < m.B.rows(); ++r)
      m.B(r, 0) += Complex(rng.uniform_pm(magnitude), 0.0);
  }
  return out;
}

}  // namespace switchstab::testfx
