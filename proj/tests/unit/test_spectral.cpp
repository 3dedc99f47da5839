#include <cmath>
#include <vector>

#include "doctest.h"
#include "sass/numerics.hpp"
#include "sass/rng.hpp"
#include "sass/spectral.hpp"
#include "sass/ssm_reference.hpp"
#include "sass/verify.hpp"

using namespace sass;
using namespace sass::spectral;

namespace {

Tensor random_input(std::size_t len, std::size_t channels, Rng& rng) {
  Tensor u({len, channels});
  for (auto& v : u.values()) v = rng.normal();
  return u;
}

PulseGateParams random_gate(std::size_t len, Rng& rng) {
  PulseGateParams p = PulseGateParams::zeros(len);
  for (auto& w : p.weight) w = rng.normal() / static_cast<double>(len);
  for (auto& b : p.bias) b = 0.1 * rng.normal();
  return p;
}

}  // namespace

TEST_CASE("sigmoid stays strictly inside (0, 1)") {
  CHECK(sigmoid(0.0) == 0.5);
  for (double z : {-1e6, -800.0, -40.0, 40.0, 800.0, 1e6}) {
    const double s = sigmoid(z);
    CHECK(s > 0.0);
    CHECK(s < 1.0);
  }
  CHECK(sigmoid(3.0) == doctest::Approx(0.9525741268224334).epsilon(1e-15));
}

TEST_CASE("padded lengths") {
  CHECK(padded_length(64, ConvMode::Circular) == 64);
  CHECK(padded_length(64, ConvMode::CausalPadded) == 128);
  CHECK(padded_length(1, ConvMode::CausalPadded) == 1);
  CHECK(padded_length(100, ConvMode::CausalPadded) == 256);
}

TEST_CASE("pulse gate hand example") {
  PulseGateParams p = PulseGateParams::zeros(2);
  p.weight = {1, 0, 0, 1};
  ComplexVec u({3, 0}, {4, 0});
  PulseGateOutput g = pulse_gate(u, p.view());
  CHECK(g.magnitude[0] == 5.0);
  CHECK(g.magnitude[1] == 0.0);
  CHECK(g.gate[0] == doctest::Approx(0.9933071490757153).epsilon(1e-14));
  CHECK(g.gate[1] == 0.5);
  CHECK(g.out.re[0] == doctest::Approx(2.9799214472271459).epsilon(1e-14));
  CHECK(g.out.im[0] == doctest::Approx(3.9732285963028612).epsilon(1e-14));
  CHECK(g.out.re[1] == 0.0);
}

TEST_CASE("pulse gate with zero weights halves the spectrum") {
  Rng rng(2);
  ComplexVec u(16);
  for (std::size_t i = 0; i < 16; ++i) {
    u.re[i] = rng.normal();
    u.im[i] = rng.normal();
  }
  PulseGateParams p = PulseGateParams::zeros(16);
  PulseGateOutput g = pulse_gate(u, p.view());
  for (std::size_t i = 0; i < 16; ++i) {
    CHECK(g.out.re[i] == 0.5 * u.re[i]);
    CHECK(g.out.im[i] == 0.5 * u.im[i]);
  }
  for (auto& b : p.bias) b = 20.0;
  g = pulse_gate(u, p.view());
  for (std::size_t i = 0; i < 16; ++i) {
    CHECK(g.gate[i] > 0.99999);
    CHECK(std::abs(g.out.re[i] - u.re[i]) <= 1e-4 * std::abs(u.re[i]));
  }
}

TEST_CASE("sagu hand examples") {
  SaguParams s = SaguParams::zeros(1);
  s.w1_re = {2.0};
  s.w2_re = {3.0};
  ComplexVec v({1.0}, {0.0});
  ComplexVec out = sagu(v, s.view());
  CHECK(out.re[0] == doctest::Approx(1.90514825).epsilon(1e-8));
  CHECK(out.im[0] == 0.0);

  SaguParams id = SaguParams::identity(8);
  Rng rng(6);
  ComplexVec x(8);
  for (std::size_t i = 0; i < 8; ++i) {
    x.re[i] = rng.normal();
    x.im[i] = rng.normal();
  }
  ComplexVec half = sagu(x, id.view());
  for (std::size_t i = 0; i < 8; ++i) {
    CHECK(half.re[i] == doctest::Approx(0.5 * x.re[i]).epsilon(1e-15));
    CHECK(half.im[i] == doctest::Approx(0.5 * x.im[i]).epsilon(1e-15));
  }
  ComplexVec zero = sagu(ComplexVec(8), id.view());
  for (double r : zero.re) CHECK(r == 0.0);
}

TEST_CASE("sass_forward of zero input is zero") {
  Rng rng(3);
  const std::size_t len = 12, ch = 3;
  SpectralKernel k = SpectralKernel::gaussian(ch, len, 0.5, rng);
  PulseGateParams p = random_gate(len, rng);
  SaguParams s = SaguParams::identity(len);
  for (ConvMode mode : {ConvMode::Circular, ConvMode::CausalPadded}) {
    SassOptions o;
    o.conv_mode = mode;
    SassForward f = sass_forward(Tensor({len, ch}), k.view(), p.view(), s.view(), o);
    for (double v : f.y.values()) CHECK(v == 0.0);
  }
}

TEST_CASE("saturated gates reduce the layer to the convolution oracle") {
  Rng rng(7);
  const std::size_t len = 32, ch = 2;
  SpectralKernel k = SpectralKernel::gaussian(ch, len, 1.0, rng);
  PulseGateParams p = PulseGateParams::zeros(len);
  for (auto& b : p.bias) b = 40.0;
  SaguParams s = SaguParams::identity(len);
  Tensor u = random_input(len, ch, rng);
  SassForward f = sass_forward(u, k.view(), p.view(), s.view(), SassOptions{});
  for (std::size_t h = 0; h < ch; ++h) {
    std::vector<double> col(len);
    for (std::size_t l = 0; l < len; ++l) col[l] = u(l, h);
    ComplexVec ref = ssm::circular_convolution(k.effective(h), col);
    for (std::size_t l = 0; l < len; ++l) {
      // Identity SAGU contributes the factor 1/2.
      CHECK(std::abs(2.0 * f.y(l, h) - ref.re[l]) < 1e-10);
    }
  }
}

TEST_CASE("backward of a zero upstream gradient is zero") {
  Rng rng(10);
  const std::size_t len = 8, ch = 2;
  SpectralKernel k = SpectralKernel::gaussian(ch, len, 0.5, rng);
  PulseGateParams p = random_gate(len, rng);
  SaguParams s = SaguParams::identity(len);
  Tensor u = random_input(len, ch, rng);
  SassForward f = sass_forward(u, k.view(), p.view(), s.view(), SassOptions{});
  SassGrads g = sass_backward(Tensor({len, ch}), f.state, k.view(), p.view(), s.view());
  for (double v : g.input.values()) CHECK(v == 0.0);
  for (double v : g.kernel.psi_re) CHECK(v == 0.0);
  for (double v : g.pulse.weight) CHECK(v == 0.0);
  for (double v : g.sagu.w2_re) CHECK(v == 0.0);
}

TEST_CASE("saturated gate bias has vanishing gradient") {
  Rng rng(12);
  const std::size_t len = 8, ch = 1;
  SpectralKernel k = SpectralKernel::gaussian(ch, len, 0.5, rng);
  PulseGateParams p = PulseGateParams::zeros(len);
  for (auto& b : p.bias) b = 20.0;
  SaguParams s = SaguParams::identity(len);
  Tensor u = random_input(len, ch, rng);
  SassForward f = sass_forward(u, k.view(), p.view(), s.view(), SassOptions{});
  Tensor gy({len, ch});
  for (auto& v : gy.values()) v = rng.normal();
  SassGrads g = sass_backward(gy, f.state, k.view(), p.view(), s.view());
  for (double v : g.pulse.bias) CHECK(std::abs(v) < 1e-6);
}

TEST_CASE("kernel fitting reaches any SSM kernel") {
  Rng rng(13);
  ssm::DiscreteSSM d = ssm::discretize(ssm::random_stable_system(rng, 1));
  ssm::KernelVec target = ssm::unroll_kernel(d, 128);

  SpectralKernel exact = assign_exact(target);
  CHECK(kernel_l2_error(exact, target) == 0.0);

  KernelFit same = fit_kernel(target, exact, 5, 0.1);
  CHECK(same.initial_error == 0.0);

  KernelFit fit = fit_kernel(target, SpectralKernel::gaussian(1, 128, 0.02, rng), 500, 0.1);
  CHECK(fit.final_error < 1e-6);
  for (std::size_t i = 1; i < fit.loss_history.size(); ++i) {
    CHECK(fit.loss_history[i] <= fit.loss_history[i - 1]);
  }
}

TEST_CASE("gate invariant suites") {
  for (const auto& r : {verify::gate_range_suite(50), verify::gate_phase_suite(50),
                        verify::gate_shift_suite(50)}) {
    CHECK_MESSAGE(r.passed, verify::format_result(r));
  }
}
