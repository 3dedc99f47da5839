#include <cmath>
#include <vector>

#include "doctest.h"
#include "sass/autodiff.hpp"
#include "sass/error.hpp"
#include "sass/model.hpp"
#include "sass/rng.hpp"

using namespace sass;
using namespace sass::model;

namespace {

ModelConfig tiny_signal(std::size_t depth = 1) {
  ModelConfig c;
  c.input = InputKind::Signal;
  c.length = 8;
  c.patch_size = 1;
  c.embed_dim = 4;
  c.state_dim = 4;
  c.gate_dim = 4;
  c.depth = depth;
  c.ffn_ratio = 2;
  c.num_classes = 3;
  c.sigma_init = 0.3;
  return c;
}

std::vector<double> randn(std::size_t n, Rng& rng, double scale = 1.0) {
  std::vector<double> v(n);
  for (auto& x : v) x = scale * rng.normal();
  return v;
}

Tensor rand_tensor(std::size_t r, std::size_t c, Rng& rng) {
  return Tensor({r, c}, randn(r * c, rng));
}

}  // namespace

TEST_CASE("gelu values") {
  CHECK(gelu(0.0) == 0.0);
  CHECK(gelu(1.0) == doctest::Approx(0.8413447460685429).epsilon(1e-14));
  CHECK(gelu(-1.0) == doctest::Approx(-0.15865525393145707).epsilon(1e-14));
  for (double x : {-2.0, -0.3, 0.0, 0.7, 3.0}) {
    const double h = 1e-6;
    CHECK(gelu_grad(x) == doctest::Approx((gelu(x + h) - gelu(x - h)) / (2 * h)).epsilon(1e-8));
  }
}

TEST_CASE("layer norm output has zero mean and unit variance") {
  Rng rng(1);
  Tensor x = rand_tensor(5, 6, rng);
  std::vector<double> gamma(6, 1.0), beta(6, 0.0);
  LayerNormForward f = layer_norm(x, gamma, beta);
  for (std::size_t r = 0; r < 5; ++r) {
    double mean = 0.0, var = 0.0;
    for (double v : f.y.row(r)) mean += v;
    mean /= 6.0;
    for (double v : f.y.row(r)) var += (v - mean) * (v - mean);
    var /= 6.0;
    CHECK(std::abs(mean) < 1e-12);
    CHECK(var == doctest::Approx(1.0).epsilon(1e-4));
  }
}

TEST_CASE("hss layer with zero weights outputs zero") {
  Rng rng(2);
  ModelConfig cfg = tiny_signal();
  autodiff::ParamStore store;
  HssIds ids = register_hss(store, "hss.", cfg, rng);
  for (std::size_t i = 0; i < store.size(); ++i) {
    for (double& v : store.value(i)) v = 0.0;
  }
  HssLayerParams p = hss_params(store, ids, cfg);
  HssForward f = hss_forward(rand_tensor(8, 4, rng), p, cfg.sass);
  for (double v : f.z.values()) CHECK(v == 0.0);

  autodiff::ParamStore store2;
  HssIds ids2 = register_hss(store2, "hss.", cfg, rng);
  HssForward f2 = hss_forward(Tensor({8, 4}), hss_params(store2, ids2, cfg), cfg.sass);
  for (double v : f2.z.values()) CHECK(v == 0.0);
}

TEST_CASE("hss layer matches a straight-line evaluation") {
  Rng rng(3);
  ModelConfig cfg = tiny_signal();
  autodiff::ParamStore store;
  HssIds ids = register_hss(store, "hss.", cfg, rng);
  for (std::size_t i = 0; i < store.size(); ++i) {
    for (double& v : store.value(i)) v += 0.1 * rng.normal();
  }
  HssLayerParams p = hss_params(store, ids, cfg);
  const std::size_t L = 8, D = 4, H = 4, M = 4;
  Tensor x = rand_tensor(L, D, rng);

  auto dense = [](const Tensor& in, std::span<const double> w, std::span<const double> b,
                  std::size_t out, bool act) {
    Tensor y({in.rows(), out});
    for (std::size_t r = 0; r < in.rows(); ++r) {
      for (std::size_t o = 0; o < out; ++o) {
        double s = b.empty() ? 0.0 : b[o];
        for (std::size_t i = 0; i < in.cols(); ++i) s += in(r, i) * w[i * out + o];
        y(r, o) = act ? gelu(s) : s;
      }
    }
    return y;
  };
  Tensor u = dense(x, p.w_u, p.b_u, H, true);
  Tensor v = dense(x, p.w_v, p.b_v, M, true);
  Tensor y = spectral::sass_forward(u, p.kernel, p.gate, p.sagu, cfg.sass).y;
  Tensor o = dense(y, p.w_y, p.b_y, M, false);
  for (std::size_t i = 0; i < o.size(); ++i) o[i] *= v[i];
  Tensor z = dense(o, p.w_o, {}, D, false);

  HssForward f = hss_forward(x, p, cfg.sass);
  for (std::size_t i = 0; i < z.size(); ++i) CHECK(std::abs(f.z[i] - z[i]) < 1e-12);
}

TEST_CASE("block with zero sublayers is the identity") {
  Rng rng(4);
  ModelConfig cfg = tiny_signal();
  Model m(cfg, 5);
  BlockParams bp = m.block_params(0);
  std::vector<double> zeros_w(4 * 4, 0.0), zeros_ffn2(8 * 4, 0.0), zeros_b(4, 0.0);
  bp.hss.w_o = zeros_w;
  bp.ffn.w2 = zeros_ffn2;
  bp.ffn.b2 = zeros_b;
  Tensor x = rand_tensor(8, 4, rng);
  BlockForward f = block_forward(x, bp, cfg.sass);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(f.out[i] == x[i]);
}

TEST_CASE("depth-0 model classifies the normalized embedding") {
  Rng rng(6);
  ModelConfig cfg = tiny_signal(0);
  Model m(cfg, 1);
  std::vector<double> input = randn(cfg.input_size(), rng);
  Model::Cache cache;
  std::vector<double> logits = m.forward(input, &cache);
  CHECK(cache.blocks.empty());
  const auto& ps = m.params();
  Tensor tokens = patch_embed(input, cfg, ps.value(ps.find("embed.w")), ps.value(ps.find("embed.b")));
  LayerNormForward ln = layer_norm(tokens, ps.value(ps.find("final_norm.gamma")),
                                   ps.value(ps.find("final_norm.beta")));
  std::vector<double> want = classify(ln.y, ps.value(ps.find("head.w")), ps.value(ps.find("head.b")));
  CHECK(logits == want);
}

TEST_CASE("patch extraction") {
  ModelConfig img;
  img.input = InputKind::Image;
  img.image_side = 16;
  img.patch_size = 4;
  img.length = 16;
  img.embed_dim = 3;
  CHECK_NOTHROW(img.validate());
  std::vector<double> image(256);
  for (std::size_t i = 0; i < 256; ++i) image[i] = static_cast<double>(i);
  Tensor p = extract_patches(image, img);
  CHECK(p.rows() == 16);
  CHECK(p.cols() == 16);
  // Token 1 is the second patch of the first patch row.
  CHECK(p(1, 0) == 4.0);
  CHECK(p(1, 5) == 16.0 + 5.0);
  CHECK(p(4, 0) == 64.0);

  std::vector<double> w(16 * 3, 0.0), b(3, 0.0);
  Tensor zero = patch_embed(std::vector<double>(256, 0.0), img, w, b);
  for (double v : zero.values()) CHECK(v == 0.0);

  for (std::size_t i = 0; i < 16; ++i) w[i * 3 + 0] = 1.0;
  Tensor c = patch_embed(std::vector<double>(256, 0.5), img, w, b);
  for (std::size_t r = 0; r < 16; ++r) {
    CHECK(c(r, 0) == 8.0);
    CHECK(c(r, 1) == 0.0);
  }

  img.length = 15;
  CHECK_THROWS_AS(img.validate(), ConfigError);
}

TEST_CASE("classify and cross entropy") {
  Rng rng(7);
  Tensor tokens = rand_tensor(5, 3, rng);
  std::vector<double> w(3 * 4, 0.0), b(4, 0.0);
  for (double v : classify(tokens, w, b)) CHECK(v == 0.0);
  std::vector<double> w1(3, 1.0), b1(1, 0.0);
  CHECK(classify(tokens, w1, b1).size() == 1);

  std::vector<double> logits{1.0, 2.0, 3.0};
  CrossEntropy ce = softmax_cross_entropy(logits, 2);
  const double z = std::exp(1.0) + std::exp(2.0) + std::exp(3.0);
  CHECK(ce.loss == doctest::Approx(std::log(z) - 3.0).epsilon(1e-14));
  CHECK(ce.predicted == 2);
  double sum = 0.0;
  for (double g : ce.grad) sum += g;
  CHECK(std::abs(sum) < 1e-15);
}

TEST_CASE("forward shapes over random configurations") {
  Rng rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    ModelConfig c;
    if (rng.below(2) == 0) {
      c.input = InputKind::Signal;
      c.length = 1 + rng.below(16);
      c.patch_size = 1 + rng.below(3);
    } else {
      c.input = InputKind::Image;
      c.patch_size = 2 + rng.below(2);
      c.image_side = c.patch_size * (1 + rng.below(4));
      const std::size_t per = c.image_side / c.patch_size;
      c.length = per * per;
    }
    c.embed_dim = 2 + rng.below(6);
    c.state_dim = 1 + rng.below(6);
    c.gate_dim = 1 + rng.below(6);
    c.depth = rng.below(3);
    c.ffn_ratio = 1 + rng.below(3);
    c.num_classes = 1 + rng.below(5);
    c.sass.conv_mode = rng.below(2) ? spectral::ConvMode::Circular : spectral::ConvMode::CausalPadded;
    c.sass.gating_enabled = rng.below(2) == 0;
    c.sass.sagu_first = rng.below(2) == 0;
    Model m(c, trial);
    std::vector<double> input = randn(c.input_size(), rng);
    Model::Cache cache;
    std::vector<double> logits = m.forward(input, &cache);
    CHECK(logits.size() == c.num_classes);
    CHECK(cache.final_norm.y.rows() == c.length);
    CHECK(cache.final_norm.y.cols() == c.embed_dim);
    for (const auto& b : cache.blocks) {
      CHECK(b.hss.u.cols() == c.state_dim);
      CHECK(b.hss.v.cols() == c.gate_dim);
      CHECK(b.out.rows() == c.length);
    }
    for (double v : logits) CHECK(std::isfinite(v));
    CHECK_THROWS(m.forward(std::vector<double>(c.input_size() + 1, 0.0)));
  }
}

TEST_CASE("full-model gradient check") {
  for (std::size_t depth : {1, 2}) {
    ModelConfig cfg = tiny_signal(depth);
    Model m(cfg, 11);
    Rng rng(12);
    std::vector<double> input = randn(cfg.input_size(), rng);
    autodiff::GradSet g = autodiff::GradSet::zeros_like(m.params());
    m.loss_and_grad(input, 1, g);
    autodiff::copy_into_store(g, m.params());
    auto loss = [&](autodiff::ParamStore&) {
      return softmax_cross_entropy(m.forward(input), 1).loss;
    };
    autodiff::GradCheckReport r = autodiff::grad_check(m.params(), loss);
    CHECK_MESSAGE(r.passed, "depth " << depth << " worst " << r.worst.param << " rel "
                                     << r.max_rel_error);
  }
}

TEST_CASE("model rebuilt from its store gives identical outputs") {
  ModelConfig cfg = tiny_signal(2);
  Model a(cfg, 3);
  Model b(cfg, a.params());
  Rng rng(2);
  std::vector<double> input = randn(cfg.input_size(), rng);
  CHECK(a.forward(input) == b.forward(input));

  ModelConfig other = cfg;
  other.embed_dim = 6;
  CHECK_THROWS_AS(Model(other, a.params()), FormatError);
}
