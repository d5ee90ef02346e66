#include "switchstab/examples.hpp"

namespace switchstab::examples {

namespace {

Mat real3(std::initializer_list<double> rows) {
  Mat M(3, 3);
  int k = 0;
  for (double x : rows) {
    M(k / 3, k % 3) = Complex(x, 0.0);
    ++k;
  }
  return M;
}

Mat col3(double a, double b, double c) {
  Mat B(3, 1);
  B(0, 0) = Complex(a, 0.0);
  B(1, 0) = Complex(b, 0.0);
  B(2, 0) = Complex(c, 0.0);
  return B;
}

SubsystemPair mode1() {
  return {real3({0.574, 0.074, 0.089,
                 0.074, 0.572, -0.091,
                 0.089, -0.091, 0.538}),
          col3(-0.038, 0.327, 0.175), 1};
}

SubsystemPair mode2() {
  return {real3({-0.737, 0.386, -1.680,
                 1.351, 0.638, 0.035,
                 1.071, -1.295, -0.936}),
          col3(0.0, 0.114, 1.067), 2};
}

SubsystemPair mode3() {
  return {real3({0.352, 0.159, -1.129,
                 0.159, 0.0, 0.262,
                 -1.129, 0.262, -0.705}),
          col3(-0.433, 0.0, 0.0), 3};
}

}  // namespace

SwitchedSystemSpec pair3() { return {{mode1(), mode2()}}; }

SwitchedSystemSpec coupled2(double alpha) {
  Mat A1(2, 2), B1(2, 1), A2(2, 2), B2(2, 1);
  A1 << Complex(0.5), Complex(alpha), Complex(0.0), Complex(0.5);
  B1 << Complex(0.0), Complex(1.0);
  A2 << Complex(0.5), Complex(0.0), Complex(alpha), Complex(0.5);
  B2 << Complex(1.0), Complex(0.0);
  return {{{A1, B1, 1}, {A2, B2, 2}}};
}

SwitchedSystemSpec triple3() { return {{mode1(), mode2(), mode3()}}; }

}  // namespace switchstab::examples
