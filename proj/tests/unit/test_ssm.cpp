#include <cmath>
#include <vector>

#include "doctest.h"
#include "sass/error.hpp"
#include "sass/rng.hpp"
#include "sass/ssm_reference.hpp"

using namespace sass;
using namespace sass::ssm;

namespace {

StateSpaceParams scalar_system(double a, double b, double c, double delta) {
  StateSpaceParams p;
  p.a = Matrix(1, 1);
  p.b = Matrix(1, 1);
  p.c = Matrix(1, 1);
  p.a(0, 0) = a;
  p.b(0, 0) = b;
  p.c(0, 0) = c;
  p.delta = delta;
  return p;
}

}  // namespace

TEST_CASE("scalar discretization") {
  DiscreteSSM d = discretize(scalar_system(0.0, 1.0, 1.0, 0.7));
  CHECK(d.a_bar(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(d.b_bar(0, 0) == doctest::Approx(0.7).epsilon(1e-15));
  CHECK(d.c_bar(0, 0) == 1.0);

  d = discretize(scalar_system(-1.0, 1.0, 1.0, 0.5));
  CHECK(d.a_bar(0, 0) == doctest::Approx(0.6).epsilon(1e-14));
  CHECK(d.b_bar(0, 0) == doctest::Approx(0.4).epsilon(1e-14));

  CHECK_THROWS_AS(discretize(scalar_system(2.0 / 0.5, 1.0, 1.0, 0.5)),
                  SingularDiscretizationError);
}

TEST_CASE("kernel unrolling") {
  DiscreteSSM d = discretize(scalar_system(-1.0, 1.0, 1.0, 0.5));
  KernelVec k = unroll_kernel(d, 3);
  REQUIRE(k.size() == 3);
  CHECK(k.values[0] == doctest::Approx(0.4).epsilon(1e-14));
  CHECK(k.values[1] == doctest::Approx(0.24).epsilon(1e-14));
  CHECK(k.values[2] == doctest::Approx(0.144).epsilon(1e-14));

  DiscreteSSM nil;
  nil.a_bar = Matrix(1, 1);
  nil.b_bar = Matrix(1, 1);
  nil.c_bar = Matrix(1, 1);
  nil.b_bar(0, 0) = 3.0;
  nil.c_bar(0, 0) = 2.0;
  KernelVec kn = unroll_kernel(nil, 3);
  CHECK(kn.values == std::vector<double>{6.0, 0.0, 0.0});
  CHECK(unroll_kernel(nil, 1).values == std::vector<double>{6.0});
}

TEST_CASE("impulse response of the scan is the kernel") {
  Rng rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    DiscreteSSM d = discretize(random_stable_system(rng, 1 + rng.below(8)));
    const std::size_t len = 1 + rng.below(100);
    std::vector<double> delta(len, 0.0);
    delta[0] = 1.0;
    std::vector<double> y = scan_recurrent(d, delta);
    KernelVec k = unroll_kernel(d, len);
    for (std::size_t i = 0; i < len; ++i) CHECK(std::abs(y[i] - k.values[i]) < 1e-12);
    std::vector<double> zeros(len, 0.0);
    for (double v : scan_recurrent(d, zeros)) CHECK(v == 0.0);
  }
}

TEST_CASE("scan matches causal convolution with the unrolled kernel") {
  Rng rng(8);
  DiscreteSSM d = discretize(random_stable_system(rng, 4));
  REQUIRE(is_stable(d));
  std::vector<double> u(64);
  for (auto& v : u) v = rng.normal();
  std::vector<double> y = scan_recurrent(d, u);
  std::vector<double> c = causal_convolution(unroll_kernel(d, 64).values, u);
  for (std::size_t i = 0; i < 64; ++i) CHECK(std::abs(y[i] - c[i]) < 1e-10);
}

TEST_CASE("direct convolutions on small inputs") {
  std::vector<double> k{1, 2, 3};
  std::vector<double> u{1, 0, -1};
  CHECK(causal_convolution(k, u) == std::vector<double>{1, 2, 2});
  // Circular wraps the tail of the linear result: y0 gets k1*u2 + k2*u1.
  CHECK(circular_convolution(k, u) == std::vector<double>{1 - 2, 2 - 3, 2});
  CHECK_THROWS_AS(causal_convolution(k, std::vector<double>{1, 2}), ShapeError);
}

TEST_CASE("random stable systems are stable") {
  Rng rng(15);
  for (int i = 0; i < 20; ++i) {
    DiscreteSSM d = discretize(random_stable_system(rng, 1 + rng.below(8)));
    CHECK(is_stable(d));
    CHECK(spectral_radius_bound(d.a_bar) < 0.99);
  }
}
