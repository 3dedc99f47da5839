#include "sass/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "sass/error.hpp"
#include "sass/simd/kernels.hpp"

namespace sass::model {

using autodiff::GradSet;
using autodiff::ParamId;
using autodiff::ParamStore;

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw ShapeError(msg);
}

std::span<double> grad_or_empty(GradSet& g, ParamId id) {
  return id == kNoParam ? std::span<double>{} : g[id];
}

std::span<const double> value_or_empty(const ParamStore& s, ParamId id) {
  return id == kNoParam ? std::span<const double>{} : s.value(id);
}

Tensor gelu_map(const Tensor& x) {
  Tensor y = x;
  for (double& v : y.values()) v = gelu(v);
  return y;
}

// grad_pre = grad_post * gelu'(pre)
Tensor gelu_back(const Tensor& pre, const Tensor& grad_post) {
  Tensor g = grad_post;
  for (std::size_t i = 0; i < g.size(); ++i) g[i] *= gelu_grad(pre[i]);
  return g;
}

}  // namespace

std::size_t ModelConfig::patch_dim() const {
  return input == InputKind::Image ? patch_size * patch_size : patch_size;
}

std::size_t ModelConfig::input_size() const {
  return input == InputKind::Image ? image_side * image_side : length * patch_size;
}

void ModelConfig::validate() const {
  auto positive = [](std::size_t v, const char* name) {
    if (v == 0) throw ConfigError(std::string("ModelConfig: ") + name + " must be >= 1");
  };
  positive(length, "L");
  positive(embed_dim, "D");
  positive(state_dim, "H");
  positive(gate_dim, "M");
  positive(ffn_ratio, "ffn_ratio");
  positive(num_classes, "num_classes");
  positive(patch_size, "patch_size");
  if (input == InputKind::Image) {
    positive(image_side, "image_side");
    if (image_side % patch_size != 0) {
      throw ConfigError("ModelConfig: image_side " + std::to_string(image_side) +
                        " is not divisible by patch_size " + std::to_string(patch_size));
    }
    const std::size_t per_side = image_side / patch_size;
    if (length != per_side * per_side) {
      throw ConfigError("ModelConfig: L must equal (image_side / patch_size)^2 = " +
                        std::to_string(per_side * per_side));
    }
  }
  if (!(sigma_init > 0.0)) throw ConfigError("ModelConfig: sigma_init must be positive");
}

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x / std::numbers::sqrt2)); }

double gelu_grad(double x) {
  const double cdf = 0.5 * (1.0 + std::erf(x / std::numbers::sqrt2));
  const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
  return cdf + x * pdf;
}

Tensor linear_forward(const Tensor& x, std::span<const double> w, std::span<const double> b,
                      std::size_t out) {
  const std::size_t rows = x.rows();
  const std::size_t in = x.cols();
  require(w.size() == in * out, "linear: weight shape mismatch");
  require(b.empty() || b.size() == out, "linear: bias shape mismatch");
  const auto& k = simd::active();
  Tensor y({rows, out});
  for (std::size_t r = 0; r < rows; ++r) {
    double* yr = y.row(r).data();
    if (!b.empty()) std::copy(b.begin(), b.end(), yr);
    for (std::size_t i = 0; i < in; ++i) {
      const double xi = x(r, i);
      if (xi != 0.0) k.axpy(xi, w.data() + i * out, yr, out);
    }
  }
  return y;
}

Tensor linear_backward(const Tensor& x, std::span<const double> w, const Tensor& grad_y,
                       std::span<double> grad_w, std::span<double> grad_b) {
  const std::size_t rows = x.rows();
  const std::size_t in = x.cols();
  const std::size_t out = grad_y.cols();
  const auto& k = simd::active();
  Tensor gx({rows, in});
  for (std::size_t r = 0; r < rows; ++r) {
    const double* gy = grad_y.row(r).data();
    if (!grad_b.empty()) k.axpy(1.0, gy, grad_b.data(), out);
    for (std::size_t i = 0; i < in; ++i) {
      gx(r, i) = k.dot(w.data() + i * out, gy, out);
      const double xi = x(r, i);
      if (xi != 0.0) k.axpy(xi, gy, grad_w.data() + i * out, out);
    }
  }
  return gx;
}

LayerNormForward layer_norm(const Tensor& x, std::span<const double> gamma,
                            std::span<const double> beta) {
  const std::size_t rows = x.rows();
  const std::size_t d = x.cols();
  require(gamma.size() == d && beta.size() == d, "layer_norm: parameter shape mismatch");
  LayerNormForward f{Tensor({rows, d}), Tensor({rows, d}), std::vector<double>(rows)};
  for (std::size_t r = 0; r < rows; ++r) {
    double mean = 0.0;
    for (std::size_t j = 0; j < d; ++j) mean += x(r, j);
    mean /= static_cast<double>(d);
    double var = 0.0;
    for (std::size_t j = 0; j < d; ++j) var += (x(r, j) - mean) * (x(r, j) - mean);
    var /= static_cast<double>(d);
    const double rstd = 1.0 / std::sqrt(var + kLayerNormEps);
    f.rstd[r] = rstd;
    for (std::size_t j = 0; j < d; ++j) {
      const double xh = (x(r, j) - mean) * rstd;
      f.x_hat(r, j) = xh;
      f.y(r, j) = gamma[j] * xh + beta[j];
    }
  }
  return f;
}

Tensor layer_norm_backward(const LayerNormForward& fwd, std::span<const double> gamma,
                           const Tensor& grad_y, std::span<double> grad_gamma,
                           std::span<double> grad_beta) {
  const std::size_t rows = fwd.x_hat.rows();
  const std::size_t d = fwd.x_hat.cols();
  const double inv_d = 1.0 / static_cast<double>(d);
  Tensor gx({rows, d});
  std::vector<double> gxh(d);
  for (std::size_t r = 0; r < rows; ++r) {
    double sum_g = 0.0;
    double sum_gx = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      const double g = grad_y(r, j);
      const double xh = fwd.x_hat(r, j);
      grad_gamma[j] += g * xh;
      grad_beta[j] += g;
      gxh[j] = g * gamma[j];
      sum_g += gxh[j];
      sum_gx += gxh[j] * xh;
    }
    for (std::size_t j = 0; j < d; ++j) {
      gx(r, j) = fwd.rstd[r] * (gxh[j] - inv_d * sum_g - fwd.x_hat(r, j) * inv_d * sum_gx);
    }
  }
  return gx;
}

HssForward hss_forward(const Tensor& x, const HssLayerParams& p,
                       const spectral::SassOptions& options) {
  require(x.rank() == 2 && x.cols() == p.embed_dim, "hss_forward: input must be L x D");
  HssForward f;
  f.u_pre = linear_forward(x, p.w_u, p.b_u, p.state_dim);
  f.u = gelu_map(f.u_pre);
  f.v_pre = linear_forward(x, p.w_v, p.b_v, p.gate_dim);
  f.v = gelu_map(f.v_pre);
  auto sass = spectral::sass_forward(f.u, p.kernel, p.gate, p.sagu, options);
  f.y = std::move(sass.y);
  f.sass = std::move(sass.state);
  f.y_proj = linear_forward(f.y, p.w_y, p.b_y, p.gate_dim);
  f.o = f.y_proj;
  for (std::size_t i = 0; i < f.o.size(); ++i) f.o[i] *= f.v[i];
  f.z = linear_forward(f.o, p.w_o, {}, p.embed_dim);
  return f;
}

Tensor hss_backward(const Tensor& x, const HssForward& f, const HssLayerParams& p,
                    const Tensor& grad_z, const HssGradRefs& g) {
  Tensor g_o = linear_backward(f.o, p.w_o, grad_z, g.w_o, {});
  Tensor g_yproj = g_o;
  Tensor g_v = g_o;
  for (std::size_t i = 0; i < g_o.size(); ++i) {
    g_yproj[i] *= f.v[i];
    g_v[i] *= f.y_proj[i];
  }
  Tensor g_y = linear_backward(f.y, p.w_y, g_yproj, g.w_y, g.b_y);
  Tensor g_u = spectral::sass_backward_into(g_y, f.sass, p.kernel, p.gate, p.sagu, g.sass);
  Tensor gx = linear_backward(x, p.w_u, gelu_back(f.u_pre, g_u), g.w_u, g.b_u);
  Tensor gx_v = linear_backward(x, p.w_v, gelu_back(f.v_pre, g_v), g.w_v, g.b_v);
  for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += gx_v[i];
  return gx;
}

FfnForward ffn_forward(const Tensor& x, const FfnParams& p) {
  require(x.rank() == 2 && x.cols() == p.embed_dim, "ffn_forward: input must be L x D");
  FfnForward f;
  f.pre = linear_forward(x, p.w1, p.b1, p.hidden_dim);
  f.hidden = gelu_map(f.pre);
  f.out = linear_forward(f.hidden, p.w2, p.b2, p.embed_dim);
  return f;
}

Tensor ffn_backward(const Tensor& x, const FfnForward& f, const FfnParams& p,
                    const Tensor& grad_out, const FfnGradRefs& g) {
  Tensor g_hidden = linear_backward(f.hidden, p.w2, grad_out, g.w2, g.b2);
  return linear_backward(x, p.w1, gelu_back(f.pre, g_hidden), g.w1, g.b1);
}

BlockForward block_forward(const Tensor& x, const BlockParams& p,
                           const spectral::SassOptions& options) {
  BlockForward f;
  f.norm1 = layer_norm(x, p.norm1_gamma, p.norm1_beta);
  f.hss = hss_forward(f.norm1.y, p.hss, options);
  f.mid = x;
  for (std::size_t i = 0; i < f.mid.size(); ++i) f.mid[i] += f.hss.z[i];
  f.norm2 = layer_norm(f.mid, p.norm2_gamma, p.norm2_beta);
  f.ffn = ffn_forward(f.norm2.y, p.ffn);
  f.out = f.mid;
  for (std::size_t i = 0; i < f.out.size(); ++i) f.out[i] += f.ffn.out[i];
  return f;
}

Tensor block_backward(const Tensor& x, const BlockForward& f, const BlockParams& p,
                      const Tensor& grad_out, const BlockGradRefs& g) {
  (void)x;
  Tensor g_mid = grad_out;
  Tensor g_n2 = ffn_backward(f.norm2.y, f.ffn, p.ffn, grad_out, g.ffn);
  Tensor g_from_n2 = layer_norm_backward(f.norm2, p.norm2_gamma, g_n2, g.norm2_gamma,
                                         g.norm2_beta);
  for (std::size_t i = 0; i < g_mid.size(); ++i) g_mid[i] += g_from_n2[i];
  Tensor g_x = g_mid;
  Tensor g_n1 = hss_backward(f.norm1.y, f.hss, p.hss, g_mid, g.hss);
  Tensor g_from_n1 = layer_norm_backward(f.norm1, p.norm1_gamma, g_n1, g.norm1_gamma,
                                         g.norm1_beta);
  for (std::size_t i = 0; i < g_x.size(); ++i) g_x[i] += g_from_n1[i];
  return g_x;
}

Tensor extract_patches(std::span<const double> input, const ModelConfig& cfg) {
  require(input.size() == cfg.input_size(), "patch_embed: input has " +
                                                std::to_string(input.size()) +
                                                " values, expected " +
                                                std::to_string(cfg.input_size()));
  const std::size_t pd = cfg.patch_dim();
  if (cfg.input == InputKind::Signal) {
    return Tensor({cfg.length, pd}, std::vector<double>(input.begin(), input.end()));
  }
  const std::size_t side = cfg.image_side;
  const std::size_t ps = cfg.patch_size;
  if (side % ps != 0) {
    throw ShapeError("patch_embed: image side " + std::to_string(side) +
                     " not divisible by patch " + std::to_string(ps));
  }
  const std::size_t per_side = side / ps;
  Tensor patches({per_side * per_side, pd});
  for (std::size_t pr = 0; pr < per_side; ++pr) {
    for (std::size_t pc = 0; pc < per_side; ++pc) {
      const std::size_t token = pr * per_side + pc;
      for (std::size_t i = 0; i < ps; ++i) {
        for (std::size_t j = 0; j < ps; ++j) {
          patches(token, i * ps + j) = input[(pr * ps + i) * side + pc * ps + j];
        }
      }
    }
  }
  return patches;
}

Tensor patch_embed(std::span<const double> input, const ModelConfig& cfg,
                   std::span<const double> w, std::span<const double> b) {
  return linear_forward(extract_patches(input, cfg), w, b, cfg.embed_dim);
}

std::vector<double> classify(const Tensor& tokens, std::span<const double> w,
                             std::span<const double> b) {
  const std::size_t rows = tokens.rows();
  const std::size_t d = tokens.cols();
  const std::size_t classes = b.size();
  require(w.size() == d * classes, "classify: head shape mismatch");
  std::vector<double> pooled(d, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t j = 0; j < d; ++j) pooled[j] += tokens(r, j);
  }
  for (double& v : pooled) v /= static_cast<double>(rows);
  std::vector<double> logits(b.begin(), b.end());
  const auto& k = simd::active();
  for (std::size_t j = 0; j < d; ++j) k.axpy(pooled[j], w.data() + j * classes, logits.data(), classes);
  return logits;
}

Tensor classify_backward(const Tensor& tokens, std::span<const double> w,
                         std::span<const double> grad_logits, std::span<double> grad_w,
                         std::span<double> grad_b) {
  const std::size_t rows = tokens.rows();
  const std::size_t d = tokens.cols();
  const std::size_t classes = grad_logits.size();
  const auto& k = simd::active();
  std::vector<double> pooled(d, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t j = 0; j < d; ++j) pooled[j] += tokens(r, j);
  }
  for (double& v : pooled) v /= static_cast<double>(rows);
  for (std::size_t c = 0; c < classes; ++c) grad_b[c] += grad_logits[c];
  Tensor g({rows, d});
  const double inv_rows = 1.0 / static_cast<double>(rows);
  for (std::size_t j = 0; j < d; ++j) {
    k.axpy(pooled[j], grad_logits.data(), grad_w.data() + j * classes, classes);
    const double gp = k.dot(w.data() + j * classes, grad_logits.data(), classes) * inv_rows;
    for (std::size_t r = 0; r < rows; ++r) g(r, j) = gp;
  }
  return g;
}

CrossEntropy softmax_cross_entropy(std::span<const double> logits, std::size_t label) {
  require(label < logits.size(), "softmax_cross_entropy: label out of range");
  CrossEntropy ce;
  const double mx = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  ce.grad.resize(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) {
    ce.grad[i] = std::exp(logits[i] - mx);
    sum += ce.grad[i];
  }
  for (double& g : ce.grad) g /= sum;
  ce.loss = -(logits[label] - mx - std::log(sum));
  ce.predicted = static_cast<std::size_t>(
      std::max_element(logits.begin(), logits.end()) - logits.begin());
  ce.grad[label] -= 1.0;
  return ce;
}

namespace {

Tensor normal_tensor(std::vector<std::size_t> shape, double stddev, Rng& rng) {
  Tensor t(std::move(shape));
  for (double& v : t.values()) v = rng.normal(0.0, stddev);
  return t;
}

Tensor filled(std::vector<std::size_t> shape, double value) {
  Tensor t(std::move(shape));
  t.fill(value);
  return t;
}

double fan_in_std(std::size_t fan_in) { return 1.0 / std::sqrt(static_cast<double>(fan_in)); }

}  // namespace

HssIds register_hss(ParamStore& store, const std::string& prefix, const ModelConfig& cfg,
                    Rng& rng) {
  const std::size_t d = cfg.embed_dim;
  const std::size_t h = cfg.state_dim;
  const std::size_t m = cfg.gate_dim;
  const std::size_t l = cfg.length;
  const double gate_std = 1.0 / static_cast<double>(l);
  HssIds ids{};
  ids.w_u = store.add(prefix + "w_u", normal_tensor({d, h}, fan_in_std(d), rng));
  ids.b_u = store.add(prefix + "b_u", Tensor({h}), true, false);
  ids.w_v = store.add(prefix + "w_v", normal_tensor({d, m}, fan_in_std(d), rng));
  ids.b_v = store.add(prefix + "b_v", Tensor({m}), true, false);
  ids.w_y = store.add(prefix + "w_y", normal_tensor({h, m}, fan_in_std(h), rng));
  ids.b_y = store.add(prefix + "b_y", Tensor({m}), true, false);
  ids.w_o = store.add(prefix + "w_o", normal_tensor({m, d}, fan_in_std(m), rng));

  auto kernel = spectral::SpectralKernel::gaussian(h, l, cfg.sigma_init, rng, cfg.learnable_sigma);
  ids.psi_re = store.add(prefix + "psi_re", Tensor({h, l}, kernel.psi_re));
  ids.psi_im = store.add(prefix + "psi_im", Tensor({h, l}, kernel.psi_im));
  if (cfg.learnable_sigma) {
    ids.kernel_scale = store.add(prefix + "kernel_scale", Tensor({h}, kernel.scale), true, false);
  }
  if (cfg.sass.gating_enabled) {
    ids.gate_w = store.add(prefix + "gate_w", normal_tensor({l, l}, gate_std, rng));
    ids.gate_b = store.add(prefix + "gate_b", Tensor({l}), true, false);
  }
  Tensor w1({l, l});
  for (std::size_t i = 0; i < l; ++i) w1(i, i) = 1.0;
  ids.w1_re = store.add(prefix + "sagu_w1_re", std::move(w1));
  ids.w1_im = store.add(prefix + "sagu_w1_im", Tensor({l, l}));
  ids.w2_re = store.add(prefix + "sagu_w2_re", normal_tensor({l, l}, gate_std, rng));
  const bool modulus = cfg.sass.sagu_gate == spectral::SaguGate::ComplexModulus;
  ids.w2_im = store.add(prefix + "sagu_w2_im",
                        modulus ? normal_tensor({l, l}, gate_std, rng) : Tensor({l, l}), modulus);
  return ids;
}

HssLayerParams hss_params(const ParamStore& s, const HssIds& ids, const ModelConfig& cfg) {
  HssLayerParams p;
  p.embed_dim = cfg.embed_dim;
  p.state_dim = cfg.state_dim;
  p.gate_dim = cfg.gate_dim;
  p.w_u = s.value(ids.w_u);
  p.b_u = s.value(ids.b_u);
  p.w_v = s.value(ids.w_v);
  p.b_v = s.value(ids.b_v);
  p.w_y = s.value(ids.w_y);
  p.b_y = s.value(ids.b_y);
  p.w_o = s.value(ids.w_o);
  p.kernel = {cfg.state_dim, cfg.length, s.value(ids.psi_re), s.value(ids.psi_im),
              value_or_empty(s, ids.kernel_scale)};
  p.gate = {cfg.length, value_or_empty(s, ids.gate_w), value_or_empty(s, ids.gate_b)};
  p.sagu = {cfg.length, s.value(ids.w1_re), s.value(ids.w1_im), s.value(ids.w2_re),
            s.value(ids.w2_im)};
  return p;
}

HssGradRefs hss_grads(GradSet& g, const HssIds& ids) {
  HssGradRefs r;
  r.w_u = g[ids.w_u];
  r.b_u = g[ids.b_u];
  r.w_v = g[ids.w_v];
  r.b_v = g[ids.b_v];
  r.w_y = g[ids.w_y];
  r.b_y = g[ids.b_y];
  r.w_o = g[ids.w_o];
  r.sass.kernel = {g[ids.psi_re], g[ids.psi_im], grad_or_empty(g, ids.kernel_scale)};
  r.sass.pulse = {grad_or_empty(g, ids.gate_w), grad_or_empty(g, ids.gate_b)};
  r.sass.sagu = {g[ids.w1_re], g[ids.w1_im], g[ids.w2_re], g[ids.w2_im]};
  return r;
}

Model::Model(const ModelConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
  cfg_.validate();
  Rng rng(seed);
  register_all(rng);
}

Model::Model(const ModelConfig& cfg, ParamStore store) : cfg_(cfg) {
  cfg_.validate();
  Rng rng(0);
  register_all(rng);
  if (store.size() != store_.size()) {
    throw FormatError("Model: parameter count " + std::to_string(store.size()) +
                      " does not match config (" + std::to_string(store_.size()) + ")");
  }
  for (std::size_t i = 0; i < store.size(); ++i) {
    const auto& want = store_.param(i);
    const auto& got = store.param(i);
    if (want.name != got.name || want.value.shape() != got.value.shape()) {
      throw FormatError("Model: parameter '" + got.name + "' does not match config layout");
    }
    store.param(i).trainable = want.trainable;
    store.param(i).decay = want.decay;
  }
  store_ = std::move(store);
}

void Model::register_all(Rng& rng) {
  const std::size_t d = cfg_.embed_dim;
  const std::size_t pd = cfg_.patch_dim();
  embed_w_ = store_.add("embed.w", normal_tensor({pd, d}, fan_in_std(pd), rng));
  // A rank-one signal embedding with zero bias would make every normalized
  // token +/- the same vector, so the bias starts random.
  embed_b_ = store_.add("embed.b", normal_tensor({d}, 1.0, rng), true, false);
  blocks_.clear();
  for (std::size_t i = 0; i < cfg_.depth; ++i) {
    const std::string prefix = "block" + std::to_string(i) + ".";
    BlockIds b{};
    b.norm1_gamma = store_.add(prefix + "norm1.gamma", filled({d}, 1.0), true, false);
    b.norm1_beta = store_.add(prefix + "norm1.beta", Tensor({d}), true, false);
    b.hss = register_hss(store_, prefix + "hss.", cfg_, rng);
    b.norm2_gamma = store_.add(prefix + "norm2.gamma", filled({d}, 1.0), true, false);
    b.norm2_beta = store_.add(prefix + "norm2.beta", Tensor({d}), true, false);
    const std::size_t hidden = d * cfg_.ffn_ratio;
    b.ffn_w1 = store_.add(prefix + "ffn.w1", normal_tensor({d, hidden}, fan_in_std(d), rng));
    b.ffn_b1 = store_.add(prefix + "ffn.b1", Tensor({hidden}), true, false);
    b.ffn_w2 = store_.add(prefix + "ffn.w2", normal_tensor({hidden, d}, fan_in_std(hidden), rng));
    b.ffn_b2 = store_.add(prefix + "ffn.b2", Tensor({d}), true, false);
    blocks_.push_back(b);
  }
  final_gamma_ = store_.add("final_norm.gamma", filled({d}, 1.0), true, false);
  final_beta_ = store_.add("final_norm.beta", Tensor({d}), true, false);
  head_w_ = store_.add("head.w", normal_tensor({d, cfg_.num_classes}, fan_in_std(d), rng));
  head_b_ = store_.add("head.b", Tensor({cfg_.num_classes}), true, false);
}

BlockParams Model::block_params(std::size_t i) const {
  const BlockIds& b = blocks_.at(i);
  BlockParams p;
  p.norm1_gamma = store_.value(b.norm1_gamma);
  p.norm1_beta = store_.value(b.norm1_beta);
  p.norm2_gamma = store_.value(b.norm2_gamma);
  p.norm2_beta = store_.value(b.norm2_beta);
  p.hss = hss_params(store_, b.hss, cfg_);
  p.ffn = {cfg_.embed_dim, cfg_.embed_dim * cfg_.ffn_ratio, store_.value(b.ffn_w1),
           store_.value(b.ffn_b1), store_.value(b.ffn_w2), store_.value(b.ffn_b2)};
  return p;
}

BlockGradRefs Model::block_grads(GradSet& g, std::size_t i) const {
  const BlockIds& b = blocks_.at(i);
  BlockGradRefs r;
  r.norm1_gamma = g[b.norm1_gamma];
  r.norm1_beta = g[b.norm1_beta];
  r.norm2_gamma = g[b.norm2_gamma];
  r.norm2_beta = g[b.norm2_beta];
  r.hss = hss_grads(g, b.hss);
  r.ffn = {g[b.ffn_w1], g[b.ffn_b1], g[b.ffn_w2], g[b.ffn_b2]};
  return r;
}

std::vector<double> Model::forward(std::span<const double> input, Cache* cache) const {
  Cache local;
  Cache& c = cache != nullptr ? *cache : local;
  c.input.assign(input.begin(), input.end());
  c.patches = extract_patches(input, cfg_);
  Tensor x = linear_forward(c.patches, store_.value(embed_w_), store_.value(embed_b_),
                            cfg_.embed_dim);
  c.block_inputs.clear();
  c.blocks.clear();
  for (std::size_t i = 0; i < cfg_.depth; ++i) {
    c.block_inputs.push_back(x);
    c.blocks.push_back(block_forward(x, block_params(i), cfg_.sass));
    x = c.blocks.back().out;
  }
  c.final_norm = layer_norm(x, store_.value(final_gamma_), store_.value(final_beta_));
  c.logits = classify(c.final_norm.y, store_.value(head_w_), store_.value(head_b_));
  return c.logits;
}

void Model::backward(const Cache& c, std::span<const double> grad_logits, GradSet& g) const {
  Tensor gx = classify_backward(c.final_norm.y, store_.value(head_w_), grad_logits, g[head_w_],
                                g[head_b_]);
  gx = layer_norm_backward(c.final_norm, store_.value(final_gamma_), gx, g[final_gamma_],
                           g[final_beta_]);
  for (std::size_t i = cfg_.depth; i-- > 0;) {
    gx = block_backward(c.block_inputs[i], c.blocks[i], block_params(i), gx, block_grads(g, i));
  }
  linear_backward(c.patches, store_.value(embed_w_), gx, g[embed_w_], g[embed_b_]);
}

CrossEntropy Model::loss_and_grad(std::span<const double> input, std::size_t label,
                                  GradSet& grads) const {
  Cache cache;
  const auto logits = forward(input, &cache);
  CrossEntropy ce = softmax_cross_entropy(logits, label);
  backward(cache, ce.grad, grads);
  return ce;
}

}  // namespace sass::model
