#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sass/rng.hpp"
#include "sass/ssm_reference.hpp"
#include "sass/tensor.hpp"

// Spectral adaptive state space (SASS) layer.
//
// Per channel h of a real input u (L x H):
//   u_hat = F(pad(u[:, h]))                       input spectrum
//   g     = sigmoid(|u_hat| W_g + b_g)            pulse gate (real, per bin)
//   v     = (g * u_hat) . K_hat_h                 gated spectrum times kernel
//   w     = (v W1) . sigmoid(|v| W2)              SAGU
//   y     = Re(F^-1(w))[0, L)
// K_h = psi_re[h] + i psi_im[h] is learned directly; no (A, B, C) state.
//
// In CausalPadded mode every transform runs at P = next_pow2(2L - 1), which
// turns the circular product into a linear (causal) convolution. The L x L
// gate and SAGU matrices then act on bins [0, L) and bins [L, P) pass
// through unchanged.
namespace sass::spectral {

enum class ConvMode { Circular, CausalPadded };

// How SAGU turns |v| W2 into a real gate argument. RealWeights uses W2_re
// only; ComplexModulus uses |(|v| (W2_re + i W2_im))|.
enum class SaguGate { RealWeights, ComplexModulus };

struct SassOptions {
  ConvMode conv_mode = ConvMode::Circular;
  bool gating_enabled = true;
  // Apply SAGU to the input spectrum before gating and the kernel product.
  bool sagu_first = false;
  SaguGate sagu_gate = SaguGate::RealWeights;
};

std::size_t padded_length(std::size_t length, ConvMode mode);

// Sigmoid kept strictly inside (0, 1) for every finite argument.
double sigmoid(double z);

struct KernelView {
  std::size_t channels = 0;
  std::size_t length = 0;
  std::span<const double> psi_re;  // channels x length
  std::span<const double> psi_im;
  std::span<const double> scale;  // per-channel multiplier; empty when fixed

  bool learnable_scale() const { return !scale.empty(); }
  void validate() const;
};

struct SpectralKernel {
  std::size_t channels = 0;
  std::size_t length = 0;
  double sigma_init = 0.02;
  std::vector<double> psi_re;
  std::vector<double> psi_im;
  std::vector<double> scale;

  // psi_re then psi_im, row by row, each entry sigma * rng.normal(). With
  // learnable_scale the entries are standard normal and scale starts at sigma.
  static SpectralKernel gaussian(std::size_t channels, std::size_t length, double sigma,
                                 Rng& rng, bool learnable_scale = false);
  static SpectralKernel zeros(std::size_t channels, std::size_t length);

  ComplexVec effective(std::size_t channel) const;
  KernelView view() const {
    return {channels, length, psi_re, psi_im, scale};
  }
};

struct PulseGateView {
  std::size_t length = 0;
  std::span<const double> weight;  // length x length; weight[k * L + j] maps bin k to gate j
  std::span<const double> bias;    // length
  void validate() const;
};

struct PulseGateParams {
  std::size_t length = 0;
  std::vector<double> weight;
  std::vector<double> bias;

  static PulseGateParams zeros(std::size_t length);
  PulseGateView view() const { return {length, weight, bias}; }
};

struct SaguView {
  std::size_t length = 0;
  std::span<const double> w1_re, w1_im;  // length x length
  std::span<const double> w2_re, w2_im;
  void validate() const;
};

struct SaguParams {
  std::size_t length = 0;
  std::vector<double> w1_re, w1_im, w2_re, w2_im;

  static SaguParams zeros(std::size_t length);
  // W1 = I, W2 = 0: output is half the input.
  static SaguParams identity(std::size_t length);
  SaguView view() const { return {length, w1_re, w1_im, w2_re, w2_im}; }
};

// F(K_h), zero-padded to padded_length(L, mode).
ComplexVec kernel_spectrum(const KernelView& k, std::size_t channel, ConvMode mode);

struct PulseGateOutput {
  std::vector<double> magnitude;  // |u_hat| on gated bins
  std::vector<double> gate;       // one entry per bin; 1 on pass-through bins
  ComplexVec out;
};

PulseGateOutput pulse_gate(const ComplexVec& u_hat, const PulseGateView& p);

struct SaguOutput {
  std::vector<double> magnitude;  // |v| on gated bins
  ComplexVec linear;              // v W1 on gated bins
  ComplexVec gate_arg;            // |v| W2 before the modulus / real part
  std::vector<double> gate;
  ComplexVec out;
};

SaguOutput sagu_forward(const ComplexVec& v, const SaguView& s,
                        SaguGate mode = SaguGate::RealWeights);
inline ComplexVec sagu(const ComplexVec& v, const SaguView& s,
                       SaguGate mode = SaguGate::RealWeights) {
  return sagu_forward(v, s, mode).out;
}

// Gradient sinks. Backward passes add into these; they never overwrite.
// Complex gradients follow dl/dre + i dl/dim.
struct PulseGateGradRefs {
  std::span<double> weight, bias;
};
struct SaguGradRefs {
  std::span<double> w1_re, w1_im, w2_re, w2_im;
};
struct KernelGradRefs {
  std::span<double> psi_re, psi_im, scale;
};

ComplexVec pulse_gate_backward(const ComplexVec& u_hat, const PulseGateView& p,
                               const PulseGateOutput& fwd, const ComplexVec& grad_out,
                               const PulseGateGradRefs& grads);

ComplexVec sagu_backward(const ComplexVec& v, const SaguView& s, SaguGate mode,
                         const SaguOutput& fwd, const ComplexVec& grad_out,
                         const SaguGradRefs& grads);

// Gradient of a real loss w.r.t. the time-domain kernel of one channel,
// given the gradient w.r.t. its spectrum.
void kernel_spectrum_backward(const KernelView& k, std::size_t channel,
                              const ComplexVec& grad_spectrum, const KernelGradRefs& grads);

struct SassState {
  struct Channel {
    ComplexVec u_hat;
    ComplexVec k_hat;
    ComplexVec gate_in, kernel_in, sagu_in;
    PulseGateOutput gate;
    SaguOutput sagu;
  };

  bool valid = false;
  SassOptions options;
  std::size_t length = 0;
  std::size_t padded = 0;
  std::vector<Channel> channels;
};

struct SassForward {
  Tensor y;  // L x H
  SassState state;
};

SassForward sass_forward(const Tensor& u, const KernelView& k, const PulseGateView& p,
                         const SaguView& s, const SassOptions& options);

struct SassGradRefs {
  KernelGradRefs kernel;
  PulseGateGradRefs pulse;
  SaguGradRefs sagu;
};

// Accumulates parameter gradients into `grads` and returns dl/du (L x H).
Tensor sass_backward_into(const Tensor& grad_y, const SassState& state, const KernelView& k,
                          const PulseGateView& p, const SaguView& s,
                          const SassGradRefs& grads);

struct SassGrads {
  Tensor input;
  SpectralKernel kernel;  // psi_re / psi_im / scale hold gradients
  PulseGateParams pulse;
  SaguParams sagu;
};

SassGrads sass_backward(const Tensor& grad_y, const SassState& state, const KernelView& k,
                        const PulseGateView& p, const SaguView& s);

// Universal kernel approximation witness: any kernel generated by (A, B, C)
// is a point of C^L, reachable by a direct copy or by gradient descent on
// ||K_learn - K_target||^2.
struct KernelFit {
  SpectralKernel kernel;
  double initial_error = 0.0;
  double final_error = 0.0;
  std::vector<double> loss_history;  // squared error before each step
};

double kernel_l2_error(const SpectralKernel& k, const ssm::KernelVec& target);

KernelFit fit_kernel(const ssm::KernelVec& target, SpectralKernel init, std::size_t steps,
                     double lr);

SpectralKernel assign_exact(const ssm::KernelVec& target);

}  // namespace sass::spectral
