#include "switchstab/simulate.hpp"

#include "switchstab/rng.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace switchstab {

namespace {

constexpr double kNormFloor = 1e-280;  // underflow guard for fits and V-checks

void check_shapes(const std::vector<RMat>& loops, const RVec& x0) {
  if (loops.empty())
    throw std::invalid_argument("rollout: no closed loops given");
  const int n = static_cast<int>(loops[0].rows());
  for (const RMat& A : loops)
    if (A.rows() != n || A.cols() != n)
      throw std::invalid_argument("rollout: inconsistent closed-loop sizes");
  if (x0.size() != n)
    throw std::invalid_argument("rollout: x0 length does not match state size");
}

double fit_decay_rate(const std::vector<RVec>& states) {
  // Least-squares slope of log||x_k|| against k, over non-degenerate states.
  double sk = 0, sy = 0, skk = 0, sky = 0;
  int m = 0;
  for (std::size_t k = 0; k < states.size(); ++k) {
    const double nx = states[k].norm();
    if (nx < kNormFloor) break;
    const double y = std::log(nx);
    sk += k;
    sy += y;
    skk += static_cast<double>(k) * k;
    sky += k * y;
    ++m;
  }
  if (m < 2) return 0.0;
  const double denom = m * skk - sk * sk;
  if (denom == 0.0) return 0.0;
  return std::exp((m * sky - sk * sy) / denom);
}

void finish_trace(SwitchingTrace& tr, const RMat* P) {
  if (P) {
    tr.lyapunov.reserve(tr.states.size());
    for (const RVec& x : tr.states)
      tr.lyapunov.push_back((x.transpose() * (*P) * x)(0, 0));
  }
  tr.decay_rate = fit_decay_rate(tr.states);
}

}  // namespace

RVec default_x0(int n) {
  RVec x = RVec::Ones(n);
  return x / x.norm();
}

SwitchingTrace rollout(const std::vector<RMat>& closed_loops, const RVec& x0,
                       const SwitchingSource& switching, int horizon,
                       const RMat* P) {
  if (switching.kind == SwitchingSource::Kind::adversarial)
    return adversarial_switch(closed_loops, x0, horizon, P);
  check_shapes(closed_loops, x0);
  if (horizon < 0) throw std::invalid_argument("rollout: negative horizon");
  const int N = static_cast<int>(closed_loops.size());

  SwitchingTrace tr;
  tr.sequence.reserve(horizon);
  tr.states.reserve(horizon + 1);
  tr.states.push_back(x0);

  Rng rng(switching.seed);
  for (int k = 0; k < horizon; ++k) {
    int i = 0;
    switch (switching.kind) {
      case SwitchingSource::Kind::explicit_list:
        if (k >= static_cast<int>(switching.sequence.size()))
          throw std::invalid_argument(
              "rollout: explicit switching sequence shorter than horizon");
        i = switching.sequence[k];
        if (i < 0 || i >= N)
          throw std::invalid_argument("rollout: mode index " +
                                      std::to_string(i) + " out of range");
        break;
      case SwitchingSource::Kind::random:
        i = static_cast<int>(rng.uniform() * N);
        if (i == N) i = N - 1;
        break;
      case SwitchingSource::Kind::periodic:
        if (switching.period < 1)
          throw std::invalid_argument("rollout: period must be >= 1");
        i = (k / switching.period) % N;
        break;
      case SwitchingSource::Kind::adversarial:
        break;  // handled above
    }
    tr.sequence.push_back(i);
    tr.states.push_back(closed_loops[i] * tr.states.back());
  }
  finish_trace(tr, P);
  return tr;
}

SwitchingTrace adversarial_switch(const std::vector<RMat>& closed_loops,
                                  const RVec& x0, int horizon, const RMat* P) {
  check_shapes(closed_loops, x0);
  if (horizon < 0)
    throw std::invalid_argument("adversarial_switch: negative horizon");
  const int N = static_cast<int>(closed_loops.size());

  SwitchingTrace tr;
  tr.sequence.reserve(horizon);
  tr.states.reserve(horizon + 1);
  tr.states.push_back(x0);

  for (int k = 0; k < horizon; ++k) {
    int best_i = 0;
    double best_v = -1.0;
    RVec best_x;
    for (int i = 0; i < N; ++i) {
      RVec xn = closed_loops[i] * tr.states.back();
      const double v =
          P ? (xn.transpose() * (*P) * xn)(0, 0) : xn.squaredNorm();
      if (v > best_v) {
        best_v = v;
        best_i = i;
        best_x = std::move(xn);
      }
    }
    tr.sequence.push_back(best_i);
    tr.states.push_back(std::move(best_x));
  }
  finish_trace(tr, P);
  return tr;
}

double product_radius_lower_bound(const std::vector<RMat>& closed_loops,
                                  int horizon, std::size_t max_words,
                                  ProductMeasure measure) {
  if (closed_loops.empty())
    throw std::invalid_argument("product_radius_lower_bound: no closed loops");
  if (horizon < 1)
    throw std::invalid_argument("product_radius_lower_bound: horizon must be >= 1");
  const std::size_t N = closed_loops.size();
  const int n = static_cast<int>(closed_loops[0].rows());
  for (const RMat& A : closed_loops)
    if (A.rows() != n || A.cols() != n)
      throw std::invalid_argument(
          "product_radius_lower_bound: inconsistent closed-loop sizes");

  double words = 1.0;
  for (int h = 0; h < horizon; ++h) {
    words *= static_cast<double>(N);
    if (words > static_cast<double>(max_words))
      throw std::invalid_argument(
          "product_radius_lower_bound: N^H = " + std::to_string(words) +
          " exceeds the enumeration cap (" + std::to_string(max_words) +
          "); use a smaller horizon");
  }

  // Depth-first enumeration reusing prefix products.
  std::vector<RMat> prefix(horizon + 1);
  prefix[0] = RMat::Identity(n, n);
  std::vector<std::size_t> word(horizon, 0);
  double best = 0.0;
  int depth = 0;
  while (true) {
    if (depth == horizon) {
      double v;
      if (measure == ProductMeasure::spectral_radius) {
        v = spectral_radius(prefix[horizon].cast<Complex>());
      } else {
        Eigen::JacobiSVD<RMat> svd(prefix[horizon]);
        v = svd.singularValues()(0);
      }
      best = std::max(best, std::pow(v, 1.0 / horizon));
      // Backtrack to the next word.
      while (depth > 0 && word[depth - 1] == N - 1) {
        word[--depth] = 0;
      }
      if (depth == 0) break;
      ++word[depth - 1];
      --depth;
      continue;
    }
    prefix[depth + 1] = closed_loops[word[depth]] * prefix[depth];
    ++depth;
  }
  return best;
}

}  // namespace switchstab
