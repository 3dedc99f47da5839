#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "sass/autodiff.hpp"
#include "sass/spectral.hpp"
#include "sass/tensor.hpp"

namespace sass::model {

enum class InputKind { Signal, Image };

struct ModelConfig {
  InputKind input = InputKind::Image;
  std::size_t length = 64;      // tokens L
  std::size_t embed_dim = 64;   // D
  std::size_t state_dim = 96;   // H, SASS channels
  std::size_t gate_dim = 96;    // M
  std::size_t depth = 4;
  std::size_t ffn_ratio = 4;
  std::size_t num_classes = 10;
  std::size_t patch_size = 4;   // image patch side, or samples per token for signals
  std::size_t image_side = 32;
  spectral::SassOptions sass;
  double sigma_init = 0.02;
  bool learnable_sigma = false;

  // Values per token before the embedding projection.
  std::size_t patch_dim() const;
  // Raw input values per example.
  std::size_t input_size() const;
  void validate() const;
};

inline constexpr autodiff::ParamId kNoParam = std::numeric_limits<std::size_t>::max();

// ---------------------------------------------------------------------------
// Primitive layers. Backward functions add into gradient spans.

double gelu(double x);
double gelu_grad(double x);

// y = x W + b; x is rows x in, W is in x out. b may be empty.
Tensor linear_forward(const Tensor& x, std::span<const double> w, std::span<const double> b,
                      std::size_t out);
// Returns dl/dx; accumulates dl/dW and dl/db (skipped when the span is empty).
Tensor linear_backward(const Tensor& x, std::span<const double> w, const Tensor& grad_y,
                       std::span<double> grad_w, std::span<double> grad_b);

struct LayerNormForward {
  Tensor y;
  Tensor x_hat;
  std::vector<double> rstd;
};

inline constexpr double kLayerNormEps = 1e-5;

// Normalizes each row over its last dimension.
LayerNormForward layer_norm(const Tensor& x, std::span<const double> gamma,
                            std::span<const double> beta);
Tensor layer_norm_backward(const LayerNormForward& fwd, std::span<const double> gamma,
                           const Tensor& grad_y, std::span<double> grad_gamma,
                           std::span<double> grad_beta);

// ---------------------------------------------------------------------------
// HSS layer:
//   U = gelu(X W_u + b_u)      L x H
//   V = gelu(X W_v + b_v)      L x M
//   Y = SASS(U)                L x H
//   O = (Y W_y + b_y) . V      L x M
//   Z = O W_o                  L x D

struct HssLayerParams {
  std::size_t embed_dim = 0, state_dim = 0, gate_dim = 0;
  std::span<const double> w_u, b_u, w_v, b_v, w_y, b_y, w_o;
  spectral::KernelView kernel;
  spectral::PulseGateView gate;
  spectral::SaguView sagu;
};

struct HssGradRefs {
  std::span<double> w_u, b_u, w_v, b_v, w_y, b_y, w_o;
  spectral::SassGradRefs sass;
};

struct HssForward {
  Tensor z;
  Tensor u_pre, u, v_pre, v, y, y_proj, o;
  spectral::SassState sass;
};

HssForward hss_forward(const Tensor& x, const HssLayerParams& p,
                       const spectral::SassOptions& options);
Tensor hss_backward(const Tensor& x, const HssForward& fwd, const HssLayerParams& p,
                    const Tensor& grad_z, const HssGradRefs& grads);

// Feed-forward: F = gelu(X W1 + b1) W2 + b2.
struct FfnParams {
  std::size_t embed_dim = 0, hidden_dim = 0;
  std::span<const double> w1, b1, w2, b2;
};
struct FfnGradRefs {
  std::span<double> w1, b1, w2, b2;
};
struct FfnForward {
  Tensor out;
  Tensor pre, hidden;
};

FfnForward ffn_forward(const Tensor& x, const FfnParams& p);
Tensor ffn_backward(const Tensor& x, const FfnForward& fwd, const FfnParams& p,
                    const Tensor& grad_out, const FfnGradRefs& grads);

// Pre-norm residual block: X1 = X + HSS(LN1(X)); out = X1 + FFN(LN2(X1)).
struct BlockParams {
  std::span<const double> norm1_gamma, norm1_beta, norm2_gamma, norm2_beta;
  HssLayerParams hss;
  FfnParams ffn;
};
struct BlockGradRefs {
  std::span<double> norm1_gamma, norm1_beta, norm2_gamma, norm2_beta;
  HssGradRefs hss;
  FfnGradRefs ffn;
};
struct BlockForward {
  Tensor out;
  LayerNormForward norm1, norm2;
  HssForward hss;
  Tensor mid;
  FfnForward ffn;
};

BlockForward block_forward(const Tensor& x, const BlockParams& p,
                           const spectral::SassOptions& options);
Tensor block_backward(const Tensor& x, const BlockForward& fwd, const BlockParams& p,
                      const Tensor& grad_out, const BlockGradRefs& grads);

// Splits the input into non-overlapping patches (L x patch_dim) and
// projects them: tokens = patches W + b.
Tensor extract_patches(std::span<const double> input, const ModelConfig& cfg);
Tensor patch_embed(std::span<const double> input, const ModelConfig& cfg,
                   std::span<const double> w, std::span<const double> b);

// Mean over tokens followed by a linear head.
std::vector<double> classify(const Tensor& tokens, std::span<const double> w,
                             std::span<const double> b);
// Returns dl/dtokens.
Tensor classify_backward(const Tensor& tokens, std::span<const double> w,
                         std::span<const double> grad_logits, std::span<double> grad_w,
                         std::span<double> grad_b);

struct CrossEntropy {
  double loss = 0.0;
  std::vector<double> grad;  // dl/dlogits
  std::size_t predicted = 0;
};
CrossEntropy softmax_cross_entropy(std::span<const double> logits, std::size_t label);

// ---------------------------------------------------------------------------
// Full network with parameters held in a ParamStore.

struct HssIds {
  autodiff::ParamId w_u, b_u, w_v, b_v, w_y, b_y, w_o;
  autodiff::ParamId psi_re, psi_im, kernel_scale = kNoParam;
  autodiff::ParamId gate_w = kNoParam, gate_b = kNoParam;
  autodiff::ParamId w1_re, w1_im, w2_re, w2_im;
};
struct BlockIds {
  autodiff::ParamId norm1_gamma, norm1_beta, norm2_gamma, norm2_beta;
  HssIds hss;
  autodiff::ParamId ffn_w1, ffn_b1, ffn_w2, ffn_b2;
};

// Registers one HSS layer's parameters under `prefix` and initializes them:
// projections N(0, 1/fan_in), zero biases, Gaussian kernel, W_g ~ N(0, 1/L^2),
// W1 = I, W2 ~ N(0, 1/L^2).
HssIds register_hss(autodiff::ParamStore& store, const std::string& prefix,
                    const ModelConfig& cfg, Rng& rng);
HssLayerParams hss_params(const autodiff::ParamStore& store, const HssIds& ids,
                          const ModelConfig& cfg);
HssGradRefs hss_grads(autodiff::GradSet& grads, const HssIds& ids);

class Model {
 public:
  struct Cache {
    std::vector<double> input;
    Tensor patches;
    std::vector<Tensor> block_inputs;
    std::vector<BlockForward> blocks;
    LayerNormForward final_norm;
    std::vector<double> logits;
  };

  Model(const ModelConfig& cfg, std::uint64_t seed);
  // Adopts an existing store (e.g. from a checkpoint); names and shapes must
  // match what the config would register.
  Model(const ModelConfig& cfg, autodiff::ParamStore store);

  const ModelConfig& config() const { return cfg_; }
  autodiff::ParamStore& params() { return store_; }
  const autodiff::ParamStore& params() const { return store_; }

  std::vector<double> forward(std::span<const double> input, Cache* cache = nullptr) const;
  // Accumulates parameter gradients of a loss with dl/dlogits = grad_logits.
  void backward(const Cache& cache, std::span<const double> grad_logits,
                autodiff::GradSet& grads) const;

  // Forward, cross-entropy and backward for one example.
  CrossEntropy loss_and_grad(std::span<const double> input, std::size_t label,
                             autodiff::GradSet& grads) const;

  BlockParams block_params(std::size_t i) const;
  BlockGradRefs block_grads(autodiff::GradSet& grads, std::size_t i) const;

 private:
  void register_all(Rng& rng);

  ModelConfig cfg_;
  autodiff::ParamStore store_;
  autodiff::ParamId embed_w_ = 0, embed_b_ = 0;
  std::vector<BlockIds> blocks_;
  autodiff::ParamId final_gamma_ = 0, final_beta_ = 0, head_w_ = 0, head_b_ = 0;
};

}  // namespace sass::model
