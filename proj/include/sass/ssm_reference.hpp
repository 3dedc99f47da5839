#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sass/rng.hpp"
#include "sass/tensor.hpp"

// Classical state space model: continuous (A, B, C, delta), its bilinear
// discretization, the unrolled convolution kernel, the sequential scan, and
// direct O(L^2) convolutions. Everything here is deliberately simple; it is
// the reference that the spectral path is checked against.
namespace sass::ssm {

// Small dense row-major matrix.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
  static Matrix identity(std::size_t n);

  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
};

struct StateSpaceParams {
  Matrix a;  // N x N
  Matrix b;  // N x 1
  Matrix c;  // 1 x N
  double delta = 1.0;

  std::size_t state_dim() const { return a.rows; }
  void validate() const;
};

struct DiscreteSSM {
  Matrix a_bar;  // N x N
  Matrix b_bar;  // N x 1
  Matrix c_bar;  // 1 x N

  std::size_t state_dim() const { return a_bar.rows; }
};

struct KernelVec {
  std::vector<double> values;
  std::size_t size() const { return values.size(); }
};

// Condition numbers of (I - delta/2 A) above this are rejected.
inline constexpr double kMaxDiscretizationCondition = 1e12;

// A_bar = (I - delta/2 A)^-1 (I + delta/2 A), B_bar = (I - delta/2 A)^-1 delta B,
// C_bar = C, via one LU factorization. Throws SingularDiscretizationError
// when the resolvent is singular or its 1-norm condition exceeds 1e12.
DiscreteSSM discretize(const StateSpaceParams& p);

// K_l = C_bar A_bar^l B_bar by repeated propagation v <- A_bar v.
KernelVec unroll_kernel(const DiscreteSSM& d, std::size_t length);

// x_l = A_bar x_{l-1} + B_bar u_l, y_l = C_bar x_l, with x_{-1} = 0.
std::vector<double> scan_recurrent(const DiscreteSSM& d, std::span<const double> u);

// y_l = sum_{m<=l} k_m u_{l-m}
std::vector<double> causal_convolution(std::span<const double> k, std::span<const double> u);
// y_l = sum_m k_m u_{(l-m) mod L}
std::vector<double> circular_convolution(std::span<const double> k,
                                         std::span<const double> u);

// Complex-kernel variants used as oracles for the spectral layer.
ComplexVec causal_convolution(const ComplexVec& k, std::span<const double> u);
ComplexVec circular_convolution(const ComplexVec& k, std::span<const double> u);

// Upper bound on the spectral radius via Gelfand's formula, ||M^k||_F^(1/k)
// with k = 2^squarings. Always >= the true spectral radius.
double spectral_radius_bound(const Matrix& m, int squarings = 12);

bool is_stable(const DiscreteSSM& d, double max_radius = 0.99);

// Random stable system: A = M - c I with M ~ N(0, 1/N), c = ||M||_F + 0.5,
// B, C ~ N(0, 1), delta ~ U[0.1, 1]. Draws are rejected until the discretized
// spectral radius bound is below max_radius.
StateSpaceParams random_stable_system(Rng& rng, std::size_t state_dim,
                                      double max_radius = 0.99);

}  // namespace sass::ssm
