#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "sass/tensor.hpp"

namespace sass {

// Discrete Fourier transform of a fixed length.
//
// Convention: forward is unnormalized, X_k = sum_n x_n exp(-2 pi i nk/L);
// inverse carries the 1/L. Powers of two run an iterative radix-2
// decimation-in-time transform; other lengths go through Bluestein's chirp-z
// reduction to a power-of-two circular convolution of length >= 2L-1.
// A plan is immutable once constructed and may be shared across threads.
class FftPlan {
 public:
  explicit FftPlan(std::size_t n);
  ~FftPlan();
  FftPlan(const FftPlan&) = delete;
  FftPlan& operator=(const FftPlan&) = delete;

  std::size_t size() const { return n_; }
  bool is_power_of_two() const { return bluestein_ == nullptr; }

  void forward(std::span<double> re, std::span<double> im) const;
  void inverse(std::span<double> re, std::span<double> im) const;

 private:
  struct Bluestein;

  void radix2(double* re, double* im, bool inverse) const;
  void chirp_z(double* re, double* im) const;
  void bitrev_blocked(double* x) const;

  std::size_t n_;
  std::size_t bits_ = 0;
  std::vector<std::size_t> bitrev_;
  // Reversal of the middle index bits; filled for large n only.
  std::vector<std::size_t> bitrev_mid_;
  // Per-stage twiddles: stage with half-width h occupies [h-1, 2h-1).
  std::vector<double> fwd_re_, fwd_im_, inv_re_, inv_im_;
  std::unique_ptr<Bluestein> bluestein_;
};

// Plan cache private to the calling thread.
const FftPlan& fft_plan(std::size_t n);

std::size_t next_power_of_two(std::size_t n);

ComplexVec fft(const ComplexVec& x);
ComplexVec ifft(const ComplexVec& x);

ComplexVec pointwise_mul(const ComplexVec& a, const ComplexVec& b);
std::vector<double> magnitude(const ComplexVec& x);

// Backward passes. Complex gradients are dl/dre + i dl/dim of a real loss.
// y = fft(x)  =>  dl/dx = L * ifft(dl/dy)
ComplexVec fft_backward(const ComplexVec& grad_y);
// y = ifft(x)  =>  dl/dx = fft(dl/dy) / L
ComplexVec ifft_backward(const ComplexVec& grad_y);

struct MulGrads {
  ComplexVec a;
  ComplexVec b;
};
// y = a * b  =>  dl/da = dl/dy * conj(b), dl/db = dl/dy * conj(a)
MulGrads pointwise_mul_backward(const ComplexVec& a, const ComplexVec& b,
                                const ComplexVec& grad_y);
// m = |x|  =>  dl/dx = dl/dm * x / |x|, taken as 0 where x = 0.
ComplexVec magnitude_backward(const ComplexVec& x, std::span<const double> grad_m);

}  // namespace sass
