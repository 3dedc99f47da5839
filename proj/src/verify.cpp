#include "sass/verify.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "sass/error.hpp"
#include "sass/model.hpp"
#include "sass/numerics.hpp"
#include "sass/rng.hpp"
#include "sass/spectral.hpp"
#include "sass/ssm_reference.hpp"

namespace sass::verify {

using autodiff::GradCheckReport;
using autodiff::GradSet;
using autodiff::ParamId;
using autodiff::ParamStore;

std::string format_result(const SuiteResult& r) {
  std::ostringstream o;
  o.precision(3);
  o << (r.passed ? "PASS " : "FAIL ") << r.name << "  max_err=" << std::scientific << r.max_error
    << " tol=" << r.tolerance << "  cases=" << r.cases;
  if (!r.detail.empty()) o << "  " << r.detail;
  return o.str();
}

ComplexVec direct_dft(const ComplexVec& x) {
  const std::size_t n = x.size();
  ComplexVec out(n);
  for (std::size_t k = 0; k < n; ++k) {
    double sr = 0.0, si = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      const double ang = -2.0 * std::numbers::pi * static_cast<double>((t * k) % n) /
                         static_cast<double>(n);
      const double c = std::cos(ang), s = std::sin(ang);
      sr += x.re[t] * c - x.im[t] * s;
      si += x.re[t] * s + x.im[t] * c;
    }
    out.re[k] = sr;
    out.im[k] = si;
  }
  return out;
}

namespace {

std::vector<std::size_t> fft_lengths() {
  std::vector<std::size_t> ls;
  for (std::size_t l = 1; l <= 64; ++l) ls.push_back(l);
  for (std::size_t l : {100, 196, 500, 1000}) ls.push_back(l);
  return ls;
}

ComplexVec random_complex(std::size_t n, Rng& rng, double stddev = 1.0) {
  ComplexVec v(n);
  for (std::size_t i = 0; i < n; ++i) {
    v.re[i] = rng.normal(0.0, stddev);
    v.im[i] = rng.normal(0.0, stddev);
  }
  return v;
}

std::vector<double> random_real(std::size_t n, Rng& rng, double stddev = 1.0) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.normal(0.0, stddev);
  return v;
}

double max_abs_diff(const ComplexVec& a, const ComplexVec& b, std::size_t n) {
  double e = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    e = std::max(e, std::hypot(a.re[i] - b.re[i], a.im[i] - b.im[i]));
  }
  return e;
}

SuiteResult finish(SuiteResult r) {
  r.passed = r.max_error < r.tolerance;
  return r;
}

}  // namespace

SuiteResult fft_oracle_suite(std::uint64_t seed, double tol) {
  SuiteResult r{"fft_vs_direct_dft", false, 0.0, tol, 0, ""};
  Rng rng(seed);
  std::size_t worst = 0;
  for (std::size_t l : fft_lengths()) {
    ComplexVec x(l);
    for (std::size_t i = 0; i < l; ++i) {
      x.re[i] = rng.uniform(-1.0, 1.0);
      x.im[i] = rng.uniform(-1.0, 1.0);
    }
    const double e = max_abs_diff(fft(x), direct_dft(x), l);
    if (e > r.max_error) {
      r.max_error = e;
      worst = l;
    }
    ++r.cases;
  }
  r.detail = "worst_L=" + std::to_string(worst);
  return finish(r);
}

SuiteResult fft_roundtrip_suite(std::uint64_t seed, double tol) {
  SuiteResult r{"fft_roundtrip", false, 0.0, tol, 0, ""};
  Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::size_t worst = 0;
  for (std::size_t l : fft_lengths()) {
    ComplexVec x(l);
    for (std::size_t i = 0; i < l; ++i) {
      x.re[i] = rng.uniform(-1.0, 1.0);
      x.im[i] = rng.uniform(-1.0, 1.0);
    }
    const double e = max_abs_diff(ifft(fft(x)), x, l);
    if (e > r.max_error) {
      r.max_error = e;
      worst = l;
    }
    ++r.cases;
  }
  r.detail = "worst_L=" + std::to_string(worst);
  return finish(r);
}

SuiteResult convolution_suite(std::size_t cases, std::size_t max_length, std::uint64_t seed,
                              double tol) {
  using spectral::ConvMode;
  SuiteResult r{"spectral_vs_direct_convolution", false, 0.0, tol, 0, ""};
  Rng rng(seed);
  double err_circ = 0.0, err_causal = 0.0, err_layer = 0.0;
  for (std::size_t c = 0; c < cases; ++c) {
    const std::size_t l = 1 + rng.below(max_length);
    const ComplexVec k = random_complex(l, rng);
    const auto u = random_real(l, rng);
    const spectral::KernelView kv{1, l, k.re, k.im, {}};

    for (ConvMode mode : {ConvMode::Circular, ConvMode::CausalPadded}) {
      const std::size_t p = spectral::padded_length(l, mode);
      ComplexVec u_pad(p);
      std::copy(u.begin(), u.end(), u_pad.re.begin());
      const ComplexVec y = ifft(pointwise_mul(fft(u_pad), spectral::kernel_spectrum(kv, 0, mode)));
      const ComplexVec ref = mode == ConvMode::Circular ? ssm::circular_convolution(k, u)
                                                        : ssm::causal_convolution(k, u);
      double& slot = mode == ConvMode::Circular ? err_circ : err_causal;
      slot = std::max(slot, max_abs_diff(y, ref, l));

      // Same product through the full layer with gating off and an identity
      // SAGU, which halves every bin in circular mode: y_layer = Re(ref) / 2.
      if (mode == ConvMode::Circular && l <= 256) {
        const auto sagu = spectral::SaguParams::identity(l);
        spectral::SassOptions opt;
        opt.conv_mode = mode;
        opt.gating_enabled = false;
        const auto fwd = spectral::sass_forward(Tensor({l, 1}, u), kv, {}, sagu.view(), opt);
        for (std::size_t i = 0; i < l; ++i) {
          err_layer = std::max(err_layer, std::abs(2.0 * fwd.y(i, 0) - ref.re[i]));
        }
      }
    }
    ++r.cases;
  }
  r.max_error = std::max({err_circ, err_causal, err_layer});
  std::ostringstream d;
  d.precision(3);
  d << std::scientific << "circular=" << err_circ << " causal=" << err_causal
    << " layer=" << err_layer;
  r.detail = d.str();
  return finish(r);
}

SuiteResult scan_kernel_suite(std::size_t systems, std::size_t max_state, std::size_t max_length,
                              std::uint64_t seed, double tol) {
  SuiteResult r{"scan_vs_kernel_convolution", false, 0.0, tol, 0, ""};
  Rng rng(seed);
  double err_direct = 0.0, err_fft = 0.0;
  for (std::size_t s = 0; s < systems; ++s) {
    const std::size_t n = 1 + rng.below(max_state);
    const std::size_t l = 1 + rng.below(max_length);
    const auto sys = ssm::random_stable_system(rng, n);
    const auto d = ssm::discretize(sys);
    const auto k = ssm::unroll_kernel(d, l);
    const auto u = random_real(l, rng);
    const auto y_scan = ssm::scan_recurrent(d, u);
    const auto y_conv = ssm::causal_convolution(k.values, u);
    const auto kernel = spectral::assign_exact(k);
    const std::size_t p = spectral::padded_length(l, spectral::ConvMode::CausalPadded);
    ComplexVec u_pad(p);
    std::copy(u.begin(), u.end(), u_pad.re.begin());
    const ComplexVec y_fft = ifft(pointwise_mul(
        fft(u_pad), spectral::kernel_spectrum(kernel.view(), 0, spectral::ConvMode::CausalPadded)));
    for (std::size_t i = 0; i < l; ++i) {
      err_direct = std::max(err_direct, std::abs(y_scan[i] - y_conv[i]));
      err_fft = std::max(err_fft, std::abs(y_scan[i] - y_fft.re[i]));
    }
    ++r.cases;
  }
  r.max_error = std::max(err_direct, err_fft);
  std::ostringstream d;
  d.precision(3);
  d << std::scientific << "direct=" << err_direct << " fft=" << err_fft;
  r.detail = d.str();
  return finish(r);
}

namespace {

ssm::KernelVec random_ssm_kernel(Rng& rng, std::size_t length) {
  const std::size_t n = 1 + rng.below(8);
  return ssm::unroll_kernel(ssm::discretize(ssm::random_stable_system(rng, n)), length);
}

}  // namespace

SuiteResult kernel_exact_suite(std::size_t targets, std::size_t length, std::uint64_t seed) {
  SuiteResult r{"kernel_assign_exact", false, 0.0, 0.0, 0, ""};
  Rng rng(seed);
  for (std::size_t t = 0; t < targets; ++t) {
    const auto target = random_ssm_kernel(rng, length);
    r.max_error = std::max(r.max_error, spectral::kernel_l2_error(spectral::assign_exact(target), target));
    ++r.cases;
  }
  r.passed = r.max_error == 0.0;
  r.detail = "required exactly 0";
  return r;
}

SuiteResult kernel_fit_suite(std::size_t targets, std::size_t length, std::size_t steps,
                               double lr, std::uint64_t seed, double tol) {
  SuiteResult r{"kernel_gradient_fit", false, 0.0, tol, 0, ""};
  Rng rng(seed);
  bool monotone = true;
  double worst_initial = 0.0;
  for (std::size_t t = 0; t < targets; ++t) {
    const auto target = random_ssm_kernel(rng, length);
    auto init = spectral::SpectralKernel::gaussian(1, length, 0.02, rng);
    const auto fit = spectral::fit_kernel(target, std::move(init), steps, lr);
    for (std::size_t i = 1; i < fit.loss_history.size(); ++i) {
      monotone = monotone && fit.loss_history[i] <= fit.loss_history[i - 1];
    }
    r.max_error = std::max(r.max_error, fit.final_error);
    worst_initial = std::max(worst_initial, fit.initial_error);
    ++r.cases;
  }
  std::ostringstream d;
  d.precision(3);
  d << std::scientific << "max_initial=" << worst_initial
    << " monotone=" << (monotone ? "yes" : "no");
  r.detail = d.str();
  r.passed = r.max_error < tol && monotone;
  return r;
}

SuiteResult gate_range_suite(std::size_t cases, std::uint64_t seed) {
  SuiteResult r{"gate_range_open_unit_interval", false, 0.0, 0.0, 0, ""};
  Rng rng(seed);
  std::size_t violations = 0, gates = 0;
  for (std::size_t c = 0; c < cases; ++c) {
    const std::size_t l = 1 + rng.below(48);
    // Scales span well past sigmoid saturation in both directions.
    const double scale = std::pow(10.0, rng.uniform(-3.0, 4.0));
    const ComplexVec u_hat = fft(ComplexVec::from_real(random_real(l, rng, scale)));
    const auto w = random_real(l * l, rng, scale);
    const auto b = random_real(l, rng, scale);
    const auto g = spectral::pulse_gate(u_hat, {l, w, b}).gate;
    const auto w1r = random_real(l * l, rng), w1i = random_real(l * l, rng);
    const auto w2r = random_real(l * l, rng, scale), w2i = random_real(l * l, rng, scale);
    const auto sr = spectral::sagu_forward(u_hat, {l, w1r, w1i, w2r, w2i},
                                           spectral::SaguGate::RealWeights).gate;
    const auto sm = spectral::sagu_forward(u_hat, {l, w1r, w1i, w2r, w2i},
                                           spectral::SaguGate::ComplexModulus).gate;
    for (const auto* v : {&g, &sr, &sm}) {
      for (double x : *v) {
        ++gates;
        if (!(x > 0.0 && x < 1.0)) ++violations;
      }
    }
    ++r.cases;
  }
  r.max_error = static_cast<double>(violations);
  r.passed = violations == 0;
  r.detail = "gates_checked=" + std::to_string(gates) + " outside=" + std::to_string(violations);
  return r;
}

SuiteResult gate_phase_suite(std::size_t cases, std::uint64_t seed, double tol) {
  SuiteResult r{"gate_phase_preservation", false, 0.0, tol, 0, ""};
  Rng rng(seed);
  for (std::size_t c = 0; c < cases; ++c) {
    const std::size_t l = 1 + rng.below(64);
    const ComplexVec u_hat = random_complex(l, rng);
    const auto w = random_real(l * l, rng, 1.0 / std::sqrt(static_cast<double>(l)));
    const auto b = random_real(l, rng);
    const auto out = spectral::pulse_gate(u_hat, {l, w, b}).out;
    for (std::size_t i = 0; i < l; ++i) {
      double d = std::atan2(out.im[i], out.re[i]) - std::atan2(u_hat.im[i], u_hat.re[i]);
      d = std::remainder(d, 2.0 * std::numbers::pi);
      r.max_error = std::max(r.max_error, std::abs(d));
    }
    ++r.cases;
  }
  return finish(r);
}

SuiteResult gate_shift_suite(std::size_t cases, std::uint64_t seed, double tol) {
  SuiteResult r{"gate_cyclic_shift_invariance", false, 0.0, tol, 0, ""};
  Rng rng(seed);
  for (std::size_t c = 0; c < cases; ++c) {
    const std::size_t l = 2 + rng.below(63);
    const std::size_t shift = 1 + rng.below(l - 1);
    const auto u = random_real(l, rng);
    std::vector<double> shifted(l);
    for (std::size_t i = 0; i < l; ++i) shifted[(i + shift) % l] = u[i];
    const auto w = random_real(l * l, rng, 1.0 / static_cast<double>(l));
    const auto b = random_real(l, rng);
    const auto g0 = spectral::pulse_gate(fft(ComplexVec::from_real(u)), {l, w, b}).gate;
    const auto g1 = spectral::pulse_gate(fft(ComplexVec::from_real(shifted)), {l, w, b}).gate;
    for (std::size_t i = 0; i < l; ++i) r.max_error = std::max(r.max_error, std::abs(g0[i] - g1[i]));
    ++r.cases;
  }
  return finish(r);
}

// ---------------------------------------------------------------------------
// Gradient registry. Each case draws a random instance from its seed, forms
// the loss l = <R, op(params)> for a fixed random R (or the op's own loss),
// and compares the op's backward pass with central differences.

namespace {

using Eval = std::function<double(ParamStore&, GradSet&)>;

GradCheckReport check(ParamStore& store, const Eval& eval, std::uint64_t seed, double tol,
                      double h) {
  autodiff::LossFn fn = [&](ParamStore& s) {
    GradSet g = GradSet::zeros_like(s);
    const double v = eval(s, g);
    autodiff::copy_into_store(g, s);
    return v;
  };
  return autodiff::grad_check(store, fn, tol, h, 64, seed);
}

Tensor randn(std::vector<std::size_t> shape, Rng& rng, double stddev = 1.0, double mean = 0.0) {
  Tensor t(std::move(shape));
  for (double& v : t.values()) v = rng.normal(mean, stddev);
  return t;
}

ComplexVec complex_param(const ParamStore& s, ParamId re, ParamId im) {
  const auto r = s.value(re);
  const auto i = s.value(im);
  return ComplexVec({r.begin(), r.end()}, {i.begin(), i.end()});
}

double project(const ComplexVec& y, const ComplexVec& r) {
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) s += r.re[i] * y.re[i] + r.im[i] * y.im[i];
  return s;
}

double project(std::span<const double> y, std::span<const double> r) {
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) s += r[i] * y[i];
  return s;
}

void add_into(std::span<double> dst, std::span<const double> src) {
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

GradCase fft_case(bool inverse) {
  return {inverse ? "ifft" : "fft", [inverse](std::uint64_t seed, double tol, double h) {
            Rng rng(seed);
            const std::size_t l = 1 + rng.below(24);
            ParamStore s;
            const ParamId xr = s.add("x_re", randn({l}, rng));
            const ParamId xi = s.add("x_im", randn({l}, rng));
            const ComplexVec r = random_complex(l, rng);
            return check(s, [&](ParamStore& st, GradSet& g) {
              const ComplexVec x = complex_param(st, xr, xi);
              const ComplexVec y = inverse ? ifft(x) : fft(x);
              const ComplexVec gx = inverse ? ifft_backward(r) : fft_backward(r);
              add_into(g[xr], gx.re);
              add_into(g[xi], gx.im);
              return project(y, r);
            }, seed, tol, h);
          }};
}

GradCase pointwise_mul_case() {
  return {"pointwise_mul", [](std::uint64_t seed, double tol, double h) {
            Rng rng(seed);
            const std::size_t l = 1 + rng.below(16);
            ParamStore s;
            const ParamId ar = s.add("a_re", randn({l}, rng));
            const ParamId ai = s.add("a_im", randn({l}, rng));
            const ParamId br = s.add("b_re", randn({l}, rng));
            const ParamId bi = s.add("b_im", randn({l}, rng));
            const ComplexVec r = random_complex(l, rng);
            return check(s, [&](ParamStore& st, GradSet& g) {
              const ComplexVec a = complex_param(st, ar, ai);
              const ComplexVec b = complex_param(st, br, bi);
              const auto gr = pointwise_mul_backward(a, b, r);
              add_into(g[ar], gr.a.re);
              add_into(g[ai], gr.a.im);
              add_into(g[br], gr.b.re);
              add_into(g[bi], gr.b.im);
              return project(pointwise_mul(a, b), r);
            }, seed, tol, h);
          }};
}

GradCase magnitude_case() {
  return {"magnitude", [](std::uint64_t seed, double tol, double h) {
            Rng rng(seed);
            const std::size_t l = 1 + rng.below(16);
            ParamStore s;
            const ParamId xr = s.add("x_re", randn({l}, rng));
            const ParamId xi = s.add("x_im", randn({l}, rng));
            const auto r = random_real(l, rng);
            return check(s, [&](ParamStore& st, GradSet& g) {
              const ComplexVec x = complex_param(st, xr, xi);
              const ComplexVec gx = magnitude_backward(x, r);
              add_into(g[xr], gx.re);
              add_into(g[xi], gx.im);
              return project(magnitude(x), r);
            }, seed, tol, h);
          }};
}

GradCase pulse_gate_case() {
  return {"pulse_gate", [](std::uint64_t seed, double tol, double h) {
            Rng rng(seed);
            const std::size_t l = 1 + rng.below(8);
            const std::size_t p = l + rng.below(l + 1);  // trailing bins pass through
            ParamStore s;
            const ParamId ur = s.add("u_re", randn({p}, rng));
            const ParamId ui = s.add("u_im", randn({p}, rng));
            const ParamId w = s.add("w_g", randn({l, l}, rng, 0.5));
            const ParamId b = s.add("b_g", randn({l}, rng, 0.5));
            const ComplexVec r = random_complex(p, rng);
            return check(s, [&](ParamStore& st, GradSet& g) {
              const ComplexVec u = complex_param(st, ur, ui);
              const spectral::PulseGateView view{l, st.value(w), st.value(b)};
              const auto fwd = spectral::pulse_gate(u, view);
              const ComplexVec gu = spectral::pulse_gate_backward(u, view, fwd, r, {g[w], g[b]});
              add_into(g[ur], gu.re);
              add_into(g[ui], gu.im);
              return project(fwd.out, r);
            }, seed, tol, h);
          }};
}

GradCase sagu_case(spectral::SaguGate mode) {
  const bool modulus = mode == spectral::SaguGate::ComplexModulus;
  return {modulus ? "sagu/complex_modulus" : "sagu/real_weights",
          [mode](std::uint64_t seed, double tol, double h) {
            Rng rng(seed);
            const std::size_t l = 1 + rng.below(8);
            const std::size_t p = l + rng.below(l + 1);
            ParamStore s;
            const ParamId vr = s.add("v_re", randn({p}, rng));
            const ParamId vi = s.add("v_im", randn({p}, rng));
            const ParamId w1r = s.add("w1_re", randn({l, l}, rng, 0.5));
            const ParamId w1i = s.add("w1_im", randn({l, l}, rng, 0.5));
            const ParamId w2r = s.add("w2_re", randn({l, l}, rng, 0.5));
            const ParamId w2i = s.add("w2_im", randn({l, l}, rng, 0.5));
            const ComplexVec r = random_complex(p, rng);
            return check(s, [&](ParamStore& st, GradSet& g) {
              const ComplexVec v = complex_param(st, vr, vi);
              const spectral::SaguView view{l, st.value(w1r), st.value(w1i), st.value(w2r),
                                            st.value(w2i)};
              const auto fwd = spectral::sagu_forward(v, view, mode);
              const ComplexVec gv = spectral::sagu_backward(v, view, mode, fwd, r,
                                                            {g[w1r], g[w1i], g[w2r], g[w2i]});
              add_into(g[vr], gv.re);
              add_into(g[vi], gv.im);
              return project(fwd.out, r);
            }, seed, tol, h);
          }};
}

GradCase kernel_spectrum_case(bool learnable_scale) {
  return {learnable_scale ? "kernel_spectrum/learnable_scale" : "kernel_spectrum",
          [learnable_scale](std::uint64_t seed, double tol, double h) {
            Rng rng(seed);
            const std::size_t ch = 1 + rng.below(3);
            const std::size_t l = 1 + rng.below(10);
            const auto mode = rng.below(2) == 0 ? spectral::ConvMode::Circular
                                                : spectral::ConvMode::CausalPadded;
            const std::size_t p = spectral::padded_length(l, mode);
            ParamStore s;
            const ParamId pr = s.add("psi_re", randn({ch, l}, rng));
            const ParamId pi = s.add("psi_im", randn({ch, l}, rng));
            ParamId sc = model::kNoParam;
            if (learnable_scale) sc = s.add("scale", randn({ch}, rng, 0.3, 1.0));
            std::vector<ComplexVec> r;
            for (std::size_t c = 0; c < ch; ++c) r.push_back(random_complex(p, rng));
            return check(s, [&](ParamStore& st, GradSet& g) {
              const spectral::KernelView kv{
                  ch, l, st.value(pr), st.value(pi),
                  learnable_scale ? st.value(sc) : std::span<const double>{}};
              const spectral::KernelGradRefs refs{
                  g[pr], g[pi], learnable_scale ? g[sc] : std::span<double>{}};
              double loss = 0.0;
              for (std::size_t c = 0; c < ch; ++c) {
                loss += project(spectral::kernel_spectrum(kv, c, mode), r[c]);
                spectral::kernel_spectrum_backward(kv, c, r[c], refs);
              }
              return loss;
            }, seed, tol, h);
          }};
}

GradCase sass_case(std::string name, spectral::SassOptions opt, bool learnable_scale) {
  return {std::move(name), [opt, learnable_scale](std::uint64_t seed, double tol, double h) {
            Rng rng(seed);
            const std::size_t l = 1 + rng.below(6);
            const std::size_t ch = 1 + rng.below(3);
            ParamStore s;
            const ParamId u = s.add("u", randn({l, ch}, rng));
            const ParamId pr = s.add("psi_re", randn({ch, l}, rng, 0.5));
            const ParamId pi = s.add("psi_im", randn({ch, l}, rng, 0.5));
            ParamId sc = model::kNoParam, gw = model::kNoParam, gb = model::kNoParam;
            if (learnable_scale) sc = s.add("scale", randn({ch}, rng, 0.3, 1.0));
            if (opt.gating_enabled) {
              gw = s.add("gate_w", randn({l, l}, rng, 0.5));
              gb = s.add("gate_b", randn({l}, rng, 0.5));
            }
            const ParamId w1r = s.add("w1_re", randn({l, l}, rng, 0.5));
            const ParamId w1i = s.add("w1_im", randn({l, l}, rng, 0.5));
            const ParamId w2r = s.add("w2_re", randn({l, l}, rng, 0.5));
            const ParamId w2i = s.add("w2_im", randn({l, l}, rng, 0.5));
            const Tensor r = randn({l, ch}, rng);
            auto opt_span = [](const ParamStore& st, ParamId id) {
              return id == model::kNoParam ? std::span<const double>{} : st.value(id);
            };
            auto opt_grad = [](GradSet& g, ParamId id) {
              return id == model::kNoParam ? std::span<double>{} : g[id];
            };
            return check(s, [&](ParamStore& st, GradSet& g) {
              const Tensor x({l, ch}, std::vector<double>(st.value(u).begin(), st.value(u).end()));
              const spectral::KernelView kv{ch, l, st.value(pr), st.value(pi), opt_span(st, sc)};
              const spectral::PulseGateView pv{l, opt_span(st, gw), opt_span(st, gb)};
              const spectral::SaguView sv{l, st.value(w1r), st.value(w1i), st.value(w2r),
                                          st.value(w2i)};
              const auto fwd = spectral::sass_forward(x, kv, pv, sv, opt);
              const spectral::SassGradRefs refs{{g[pr], g[pi], opt_grad(g, sc)},
                                                {opt_grad(g, gw), opt_grad(g, gb)},
                                                {g[w1r], g[w1i], g[w2r], g[w2i]}};
              const Tensor gu = spectral::sass_backward_into(r, fwd.state, kv, pv, sv, refs);
              add_into(g[u], gu.values());
              return project(fwd.y.values(), r.values());
            }, seed, tol, h);
          }};
}

GradCase layer_norm_case() {
  return {"layer_norm", [](std::uint64_t seed, double tol, double h) {
            Rng rng(seed);
            const std::size_t rows = 1 + rng.below(4);
            const std::size_t d = 2 + rng.below(6);
            ParamStore s;
            const ParamId x = s.add("x", randn({rows, d}, rng));
            const ParamId gm = s.add("gamma", randn({d}, rng, 0.3, 1.0));
            const ParamId bt = s.add("beta", randn({d}, rng, 0.3));
            const Tensor r = randn({rows, d}, rng);
            return check(s, [&](ParamStore& st, GradSet& g) {
              const Tensor xt({rows, d}, std::vector<double>(st.value(x).begin(), st.value(x).end()));
              const auto f = model::layer_norm(xt, st.value(gm), st.value(bt));
              const Tensor gx = model::layer_norm_backward(f, st.value(gm), r, g[gm], g[bt]);
              add_into(g[x], gx.values());
              return project(f.y.values(), r.values());
            }, seed, tol, h);
          }};
}

GradCase gelu_case() {
  return {"gelu", [](std::uint64_t seed, double tol, double h) {
            Rng rng(seed);
            const std::size_t n = 1 + rng.below(16);
            ParamStore s;
            const ParamId x = s.add("x", randn({n}, rng, 2.0));
            const auto r = random_real(n, rng);
            return check(s, [&](ParamStore& st, GradSet& g) {
              double loss = 0.0;
              for (std::size_t i = 0; i < n; ++i) {
                const double xi = st.value(x)[i];
                loss += r[i] * model::gelu(xi);
                g[x][i] += r[i] * model::gelu_grad(xi);
              }
              return loss;
            }, seed, tol, h);
          }};
}

GradCase linear_case() {
  return {"linear", [](std::uint64_t seed, double tol, double h) {
            Rng rng(seed);
            const std::size_t rows = 1 + rng.below(4);
            const std::size_t in = 1 + rng.below(5);
            const std::size_t out = 1 + rng.below(5);
            ParamStore s;
            const ParamId x = s.add("x", randn({rows, in}, rng));
            const ParamId w = s.add("w", randn({in, out}, rng));
            const ParamId b = s.add("b", randn({out}, rng));
            const Tensor r = randn({rows, out}, rng);
            return check(s, [&](ParamStore& st, GradSet& g) {
              const Tensor xt({rows, in}, std::vector<double>(st.value(x).begin(), st.value(x).end()));
              const Tensor y = model::linear_forward(xt, st.value(w), st.value(b), out);
              const Tensor gx = model::linear_backward(xt, st.value(w), r, g[w], g[b]);
              add_into(g[x], gx.values());
              return project(y.values(), r.values());
            }, seed, tol, h);
          }};
}

model::ModelConfig random_small_config(Rng& rng, std::size_t depth, bool image) {
  model::ModelConfig cfg;
  if (image) {
    cfg.input = model::InputKind::Image;
    cfg.patch_size = 2;
    cfg.image_side = rng.below(2) == 0 ? 4 : 8;
    cfg.length = (cfg.image_side / 2) * (cfg.image_side / 2);
  } else {
    cfg.input = model::InputKind::Signal;
    cfg.patch_size = 1 + rng.below(2);
    cfg.length = 2 + rng.below(7);
  }
  cfg.embed_dim = 4 + rng.below(5);
  cfg.state_dim = 1 + rng.below(3);
  cfg.gate_dim = 1 + rng.below(3);
  cfg.ffn_ratio = 1 + rng.below(2);
  cfg.depth = depth;
  cfg.num_classes = 2 + rng.below(3);
  cfg.sigma_init = 0.3;
  cfg.learnable_sigma = rng.below(2) == 0;
  cfg.sass.conv_mode = rng.below(2) == 0 ? spectral::ConvMode::Circular
                                         : spectral::ConvMode::CausalPadded;
  cfg.sass.gating_enabled = rng.below(4) != 0;
  cfg.sass.sagu_first = rng.below(3) == 0;
  cfg.sass.sagu_gate = rng.below(2) == 0 ? spectral::SaguGate::RealWeights
                                         : spectral::SaguGate::ComplexModulus;
  return cfg;
}

GradCase hss_case() {
  return {"hss_layer", [](std::uint64_t seed, double tol, double h) {
            Rng rng(seed);
            const auto cfg = random_small_config(rng, 1, false);
            ParamStore s;
            const ParamId x = s.add("x", randn({cfg.length, cfg.embed_dim}, rng));
            const auto ids = model::register_hss(s, "hss.", cfg, rng);
            const Tensor r = randn({cfg.length, cfg.embed_dim}, rng);
            return check(s, [&](ParamStore& st, GradSet& g) {
              const auto xv = st.value(x);
              const Tensor xt({cfg.length, cfg.embed_dim}, std::vector<double>(xv.begin(), xv.end()));
              const auto p = model::hss_params(st, ids, cfg);
              const auto f = model::hss_forward(xt, p, cfg.sass);
              const Tensor gx = model::hss_backward(xt, f, p, r, model::hss_grads(g, ids));
              add_into(g[x], gx.values());
              return project(f.z.values(), r.values());
            }, seed, tol, h);
          }};
}

GradCase ffn_case() {
  return {"ffn", [](std::uint64_t seed, double tol, double h) {
            Rng rng(seed);
            const std::size_t l = 1 + rng.below(5);
            const std::size_t d = 1 + rng.below(5);
            const std::size_t hid = d * (1 + rng.below(3));
            ParamStore s;
            const ParamId x = s.add("x", randn({l, d}, rng));
            const ParamId w1 = s.add("w1", randn({d, hid}, rng));
            const ParamId b1 = s.add("b1", randn({hid}, rng));
            const ParamId w2 = s.add("w2", randn({hid, d}, rng));
            const ParamId b2 = s.add("b2", randn({d}, rng));
            const Tensor r = randn({l, d}, rng);
            return check(s, [&](ParamStore& st, GradSet& g) {
              const Tensor xt({l, d}, std::vector<double>(st.value(x).begin(), st.value(x).end()));
              const model::FfnParams p{d, hid, st.value(w1), st.value(b1), st.value(w2), st.value(b2)};
              const auto f = model::ffn_forward(xt, p);
              const Tensor gx = model::ffn_backward(xt, f, p, r, {g[w1], g[b1], g[w2], g[b2]});
              add_into(g[x], gx.values());
              return project(f.out.values(), r.values());
            }, seed, tol, h);
          }};
}

GradCase block_case() {
  return {"block", [](std::uint64_t seed, double tol, double h) {
            Rng rng(seed);
            const auto cfg = random_small_config(rng, 1, false);
            model::Model net(cfg, seed);
            ParamStore& s = net.params();
            const ParamId x = s.add("x", randn({cfg.length, cfg.embed_dim}, rng));
            const Tensor r = randn({cfg.length, cfg.embed_dim}, rng);
            return check(s, [&](ParamStore& st, GradSet& g) {
              const auto xv = st.value(x);
              const Tensor xt({cfg.length, cfg.embed_dim}, std::vector<double>(xv.begin(), xv.end()));
              const auto p = net.block_params(0);
              const auto f = model::block_forward(xt, p, cfg.sass);
              const Tensor gx = model::block_backward(xt, f, p, r, net.block_grads(g, 0));
              add_into(g[x], gx.values());
              return project(f.out.values(), r.values());
            }, seed, tol, h);
          }};
}

GradCase patch_embed_case(bool image) {
  return {image ? "patch_embed/image" : "patch_embed/signal",
          [image](std::uint64_t seed, double tol, double h) {
            Rng rng(seed);
            const auto cfg = random_small_config(rng, 0, image);
            const auto input = random_real(cfg.input_size(), rng);
            ParamStore s;
            const ParamId w = s.add("w", randn({cfg.patch_dim(), cfg.embed_dim}, rng));
            const ParamId b = s.add("b", randn({cfg.embed_dim}, rng));
            const Tensor r = randn({cfg.length, cfg.embed_dim}, rng);
            return check(s, [&](ParamStore& st, GradSet& g) {
              const Tensor tokens = model::patch_embed(input, cfg, st.value(w), st.value(b));
              model::linear_backward(model::extract_patches(input, cfg), st.value(w), r, g[w], g[b]);
              return project(tokens.values(), r.values());
            }, seed, tol, h);
          }};
}

GradCase classify_case() {
  return {"classify_cross_entropy", [](std::uint64_t seed, double tol, double h) {
            Rng rng(seed);
            const std::size_t l = 1 + rng.below(5);
            const std::size_t d = 1 + rng.below(5);
            const std::size_t c = 1 + rng.below(4);
            const std::size_t label = rng.below(c);
            ParamStore s;
            const ParamId t = s.add("tokens", randn({l, d}, rng));
            const ParamId w = s.add("w", randn({d, c}, rng));
            const ParamId b = s.add("b", randn({c}, rng));
            return check(s, [&](ParamStore& st, GradSet& g) {
              const Tensor tk({l, d}, std::vector<double>(st.value(t).begin(), st.value(t).end()));
              const auto logits = model::classify(tk, st.value(w), st.value(b));
              const auto ce = model::softmax_cross_entropy(logits, label);
              const Tensor gt = model::classify_backward(tk, st.value(w), ce.grad, g[w], g[b]);
              add_into(g[t], gt.values());
              return ce.loss;
            }, seed, tol, h);
          }};
}

GradCase model_case(std::size_t depth) {
  return {"model/depth" + std::to_string(depth), [depth](std::uint64_t seed, double tol, double h) {
            Rng rng(seed);
            const auto cfg = random_small_config(rng, depth, rng.below(2) == 0);
            model::Model net(cfg, seed);
            const auto input = random_real(cfg.input_size(), rng);
            const std::size_t label = rng.below(cfg.num_classes);
            return check(net.params(), [&](ParamStore&, GradSet& g) {
              return net.loss_and_grad(input, label, g).loss;
            }, seed, tol, h);
          }};
}

}  // namespace

const std::vector<GradCase>& gradient_registry() {
  static const std::vector<GradCase> cases = [] {
    using spectral::ConvMode;
    std::vector<GradCase> v;
    v.push_back(fft_case(false));
    v.push_back(fft_case(true));
    v.push_back(pointwise_mul_case());
    v.push_back(magnitude_case());
    v.push_back(pulse_gate_case());
    v.push_back(sagu_case(spectral::SaguGate::RealWeights));
    v.push_back(sagu_case(spectral::SaguGate::ComplexModulus));
    v.push_back(kernel_spectrum_case(false));
    v.push_back(kernel_spectrum_case(true));
    spectral::SassOptions o;
    v.push_back(sass_case("sass/circular", o, false));
    o.conv_mode = ConvMode::CausalPadded;
    v.push_back(sass_case("sass/causal", o, false));
    o.sagu_first = true;
    v.push_back(sass_case("sass/causal_sagu_first", o, false));
    o = {};
    o.sagu_first = true;
    v.push_back(sass_case("sass/circular_sagu_first", o, false));
    o = {};
    v.push_back(sass_case("sass/learnable_scale", o, true));
    o.gating_enabled = false;
    v.push_back(sass_case("sass/no_gating", o, false));
    o = {};
    o.sagu_gate = spectral::SaguGate::ComplexModulus;
    v.push_back(sass_case("sass/complex_modulus", o, false));
    v.push_back(layer_norm_case());
    v.push_back(gelu_case());
    v.push_back(linear_case());
    v.push_back(hss_case());
    v.push_back(ffn_case());
    v.push_back(block_case());
    v.push_back(patch_embed_case(true));
    v.push_back(patch_embed_case(false));
    v.push_back(classify_case());
    v.push_back(model_case(1));
    v.push_back(model_case(2));
    return v;
  }();
  return cases;
}

SuiteResult run_grad_case(const GradCase& c, std::size_t seeds, double tol, double h) {
  SuiteResult r{"grad/" + c.name, false, 0.0, tol, 0, ""};
  GradCheckReport worst;
  std::uint64_t worst_seed = 0;
  for (std::uint64_t seed = 0; seed < seeds; ++seed) {
    const auto rep = c.run(seed, tol, h);
    if (rep.max_rel_error >= r.max_error) {
      r.max_error = rep.max_rel_error;
      worst = rep;
      worst_seed = seed;
    }
    ++r.cases;
  }
  std::ostringstream d;
  d.precision(3);
  d << "worst: seed=" << worst_seed << " " << worst.worst.param << "[" << worst.worst.index
    << "] analytic=" << std::scientific << worst.worst.analytic
    << " numeric=" << worst.worst.numeric;
  r.detail = d.str();
  return finish(r);
}

}  // namespace sass::verify
