#pragma once

#include "switchstab/model.hpp"

#include <optional>
#include <vector>

namespace switchstab {

// Trajectory of x_{k+1} = A_{i(k)} x_k. Mode indices in `sequence` are
// 0-based positions into the closed-loop list (display layers may 1-base
// them). `lyapunov` holds V(x_k) = x_k^T P x_k when a P was supplied.
struct SwitchingTrace {
  std::vector<int> sequence;  // length = horizon
  std::vector<RVec> states;   // length = horizon + 1
  std::vector<double> lyapunov;
  double decay_rate = 0.0;  // fitted geometric rate of ||x_k||
};

struct SwitchingSource {
  enum class Kind { explicit_list, random, periodic, adversarial } kind =
      Kind::random;
  std::vector<int> sequence;       // explicit_list: i(k), 0-based
  unsigned seed = defaults::seed;  // random
  int period = 1;                  // periodic: hold each mode `period` steps

  static SwitchingSource explicit_list(std::vector<int> seq) {
    return {Kind::explicit_list, std::move(seq), 0, 1};
  }
  static SwitchingSource random(unsigned seed) {
    return {Kind::random, {}, seed, 1};
  }
  static SwitchingSource periodic(int period = 1) {
    return {Kind::periodic, {}, 0, period};
  }
  static SwitchingSource adversarial() {
    return {Kind::adversarial, {}, 0, 1};
  }
};

SwitchingTrace rollout(const std::vector<RMat>& closed_loops, const RVec& x0,
                       const SwitchingSource& switching,
                       int horizon = defaults::horizon,
                       const RMat* P = nullptr);

// Greedy adversary: at each step pick the mode maximizing x_{k+1}^T P x_{k+1}
// (or ||x_{k+1}||^2 when P is absent); ties resolve to the lowest index.
SwitchingTrace adversarial_switch(const std::vector<RMat>& closed_loops,
                                  const RVec& x0,
                                  int horizon = defaults::horizon,
                                  const RMat* P = nullptr);

enum class ProductMeasure { spectral_radius, spectral_norm };

// max over all length-H mode words of rho(A_{w_H} ... A_{w_1})^{1/H}
// (a joint-spectral-radius lower bound). Errors when N^H exceeds max_words.
double product_radius_lower_bound(
    const std::vector<RMat>& closed_loops, int horizon,
    std::size_t max_words = (std::size_t{1} << 20),
    ProductMeasure measure = ProductMeasure::spectral_radius);

// Default initial state: normalized all-ones vector of length n.
RVec default_x0(int n);

}  // namespace switchstab
