#pragma once

#include "switchstab/model.hpp"

namespace switchstab::examples {

// Two-mode 3-state benchmark (symmetric A1, dense A2).
SwitchedSystemSpec pair3();

// Two-mode 2-state family parameterized by the coupling alpha; the design
// problem is feasible for small alpha and infeasible from alpha = 1.5 up.
SwitchedSystemSpec coupled2(double alpha);

// pair3() extended by a third, indefinite mode driven through the first
// state only — completes a design but admits no common quadratic certificate.
SwitchedSystemSpec triple3();

}  // namespace switchstab::examples
