#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "sass/autodiff.hpp"
#include "sass/tensor.hpp"

// Self-check suites: the fast paths against their slow references, and every
// hand-written backward pass against finite differences.
namespace sass::verify {

struct SuiteResult {
  std::string name;
  bool passed = false;
  double max_error = 0.0;
  double tolerance = 0.0;
  std::size_t cases = 0;
  std::string detail;
};

std::string format_result(const SuiteResult& r);

// X_k = sum_n x_n exp(-2 pi i nk / L), angles reduced as (n k mod L) / L.
ComplexVec direct_dft(const ComplexVec& x);

// fft vs direct_dft for L in 1..64 and {100, 196, 500, 1000}.
SuiteResult fft_oracle_suite(std::uint64_t seed = 0, double tol = 1e-10);
// ifft(fft(x)) vs x on the same lengths.
SuiteResult fft_roundtrip_suite(std::uint64_t seed = 0, double tol = 1e-12);
// Spectral products (kernel_spectrum x padded input spectrum) vs direct
// circular and causal convolution with complex kernels.
SuiteResult convolution_suite(std::size_t cases = 100, std::size_t max_length = 512,
                              std::uint64_t seed = 0, double tol = 1e-10);
// Recurrent scan vs direct and FFT convolution with the unrolled kernel.
SuiteResult scan_kernel_suite(std::size_t systems = 100, std::size_t max_state = 8,
                              std::size_t max_length = 512, std::uint64_t seed = 0,
                              double tol = 1e-9);
// Exact assignment (error must be 0) and gradient fitting of SSM kernels.
SuiteResult kernel_exact_suite(std::size_t targets = 50, std::size_t length = 128,
                                 std::uint64_t seed = 0);
SuiteResult kernel_fit_suite(std::size_t targets = 50, std::size_t length = 128,
                               std::size_t steps = 2000, double lr = 0.1,
                               std::uint64_t seed = 0, double tol = 1e-3);

// Gate range, phase preservation and cyclic-shift invariance of the gate.
SuiteResult gate_range_suite(std::size_t cases = 200, std::uint64_t seed = 0);
SuiteResult gate_phase_suite(std::size_t cases = 200, std::uint64_t seed = 0,
                             double tol = 1e-12);
SuiteResult gate_shift_suite(std::size_t cases = 200, std::uint64_t seed = 0,
                             double tol = 1e-10);

// One differentiable op with a randomized instance per seed.
struct GradCase {
  std::string name;
  std::function<autodiff::GradCheckReport(std::uint64_t seed, double tol, double h)> run;
};

const std::vector<GradCase>& gradient_registry();

SuiteResult run_grad_case(const GradCase& c, std::size_t seeds = 20, double tol = 1e-4,
                          double h = 1e-5);

}  // namespace sass::verify
