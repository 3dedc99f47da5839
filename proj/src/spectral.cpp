#include "sass/spectral.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "sass/error.hpp"
#include "sass/numerics.hpp"
#include "sass/simd/kernels.hpp"

namespace sass::spectral {

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw ShapeError(msg);
}

void require_size(std::span<const double> s, std::size_t n, const char* what) {
  require(s.size() == n, std::string(what) + ": expected " + std::to_string(n) +
                             " entries, got " + std::to_string(s.size()));
}

constexpr double kGateCeil = 1.0 - 0x1.0p-53;

// out[j] += sum_k x[k] * w[k * cols + j] over the first rows entries of x
void row_times_matrix(std::span<const double> x, std::span<const double> w, std::size_t rows,
                      std::size_t cols, double* out) {
  const auto& k = simd::active();
  for (std::size_t r = 0; r < rows; ++r) {
    if (x[r] != 0.0) k.axpy(x[r], w.data() + r * cols, out, cols);
  }
}

}  // namespace

std::size_t padded_length(std::size_t length, ConvMode mode) {
  if (length == 0) throw EmptyInputError("padded_length: length must be >= 1");
  return mode == ConvMode::Circular ? length : next_power_of_two(2 * length - 1);
}

double sigmoid(double z) {
  double s;
  if (z >= 0.0) {
    s = 1.0 / (1.0 + std::exp(-z));
  } else {
    const double e = std::exp(z);
    s = e / (1.0 + e);
  }
  return std::clamp(s, std::numeric_limits<double>::denorm_min(), kGateCeil);
}

void KernelView::validate() const {
  require(channels >= 1 && length >= 1, "SpectralKernel: channels and length must be >= 1");
  require_size(psi_re, channels * length, "SpectralKernel psi_re");
  require_size(psi_im, channels * length, "SpectralKernel psi_im");
  if (!scale.empty()) require_size(scale, channels, "SpectralKernel scale");
}

SpectralKernel SpectralKernel::gaussian(std::size_t channels, std::size_t length,
                                        double sigma, Rng& rng, bool learnable_scale) {
  if (!(sigma > 0.0)) throw ConfigError("SpectralKernel: sigma_init must be positive");
  SpectralKernel k = zeros(channels, length);
  k.sigma_init = sigma;
  const double entry_std = learnable_scale ? 1.0 : sigma;
  for (double& v : k.psi_re) v = rng.normal(0.0, entry_std);
  for (double& v : k.psi_im) v = rng.normal(0.0, entry_std);
  if (learnable_scale) k.scale.assign(channels, sigma);
  return k;
}

SpectralKernel SpectralKernel::zeros(std::size_t channels, std::size_t length) {
  require(channels >= 1 && length >= 1, "SpectralKernel: channels and length must be >= 1");
  SpectralKernel k;
  k.channels = channels;
  k.length = length;
  k.psi_re.assign(channels * length, 0.0);
  k.psi_im.assign(channels * length, 0.0);
  return k;
}

ComplexVec SpectralKernel::effective(std::size_t channel) const {
  if (channel >= channels) throw ShapeError("SpectralKernel: channel out of range");
  const double s = scale.empty() ? 1.0 : scale[channel];
  ComplexVec out(length);
  for (std::size_t i = 0; i < length; ++i) {
    out.re[i] = s * psi_re[channel * length + i];
    out.im[i] = s * psi_im[channel * length + i];
  }
  return out;
}

void PulseGateView::validate() const {
  require(length >= 1, "PulseGateParams: length must be >= 1");
  require_size(weight, length * length, "PulseGateParams weight");
  require_size(bias, length, "PulseGateParams bias");
}

PulseGateParams PulseGateParams::zeros(std::size_t length) {
  PulseGateParams p;
  p.length = length;
  p.weight.assign(length * length, 0.0);
  p.bias.assign(length, 0.0);
  return p;
}

void SaguView::validate() const {
  require(length >= 1, "SaguParams: length must be >= 1");
  for (auto s : {w1_re, w1_im, w2_re, w2_im}) require_size(s, length * length, "SaguParams");
}

SaguParams SaguParams::zeros(std::size_t length) {
  SaguParams s;
  s.length = length;
  s.w1_re.assign(length * length, 0.0);
  s.w1_im = s.w1_re;
  s.w2_re = s.w1_re;
  s.w2_im = s.w1_re;
  return s;
}

SaguParams SaguParams::identity(std::size_t length) {
  SaguParams s = zeros(length);
  for (std::size_t i = 0; i < length; ++i) s.w1_re[i * length + i] = 1.0;
  return s;
}

ComplexVec kernel_spectrum(const KernelView& k, std::size_t channel, ConvMode mode) {
  k.validate();
  if (channel >= k.channels) {
    throw ShapeError("kernel_spectrum: channel " + std::to_string(channel) + " >= " +
                     std::to_string(k.channels));
  }
  const std::size_t p = padded_length(k.length, mode);
  const double s = k.learnable_scale() ? k.scale[channel] : 1.0;
  ComplexVec out(p);
  for (std::size_t i = 0; i < k.length; ++i) {
    out.re[i] = s * k.psi_re[channel * k.length + i];
    out.im[i] = s * k.psi_im[channel * k.length + i];
  }
  fft_plan(p).forward(out.re, out.im);
  return out;
}

void kernel_spectrum_backward(const KernelView& k, std::size_t channel,
                              const ComplexVec& grad_spectrum, const KernelGradRefs& grads) {
  // For K_hat = F(K), dl/dK = P * F^-1(dl/dK_hat).
  const std::size_t p = grad_spectrum.size();
  ComplexVec g = grad_spectrum;
  fft_plan(p).inverse(g.re, g.im);
  const double pd = static_cast<double>(p);
  const double s = k.learnable_scale() ? k.scale[channel] : 1.0;
  const std::size_t base = channel * k.length;
  double gscale = 0.0;
  for (std::size_t i = 0; i < k.length; ++i) {
    const double gr = pd * g.re[i];
    const double gi = pd * g.im[i];
    grads.psi_re[base + i] += s * gr;
    grads.psi_im[base + i] += s * gi;
    gscale += k.psi_re[base + i] * gr + k.psi_im[base + i] * gi;
  }
  if (k.learnable_scale()) grads.scale[channel] += gscale;
}

PulseGateOutput pulse_gate(const ComplexVec& u_hat, const PulseGateView& p) {
  p.validate();
  const std::size_t n = p.length;
  require(u_hat.size() >= n, "pulse_gate: spectrum shorter than gate length");
  PulseGateOutput out;
  out.magnitude.resize(n);
  simd::active().magnitude(u_hat.re.data(), u_hat.im.data(), out.magnitude.data(), n);
  std::vector<double> z(p.bias.begin(), p.bias.end());
  row_times_matrix(out.magnitude, p.weight, n, n, z.data());
  out.gate.assign(u_hat.size(), 1.0);
  for (std::size_t j = 0; j < n; ++j) out.gate[j] = sigmoid(z[j]);
  out.out = u_hat;
  for (std::size_t j = 0; j < n; ++j) {
    out.out.re[j] *= out.gate[j];
    out.out.im[j] *= out.gate[j];
  }
  return out;
}

ComplexVec pulse_gate_backward(const ComplexVec& u_hat, const PulseGateView& p,
                               const PulseGateOutput& fwd, const ComplexVec& grad_out,
                               const PulseGateGradRefs& grads) {
  const std::size_t n = p.length;
  const auto& k = simd::active();
  ComplexVec grad_in = grad_out;
  std::vector<double> gz(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double g = fwd.gate[j];
    grad_in.re[j] = g * grad_out.re[j];
    grad_in.im[j] = g * grad_out.im[j];
    const double dg = u_hat.re[j] * grad_out.re[j] + u_hat.im[j] * grad_out.im[j];
    gz[j] = dg * g * (1.0 - g);
  }
  k.axpy(1.0, gz.data(), grads.bias.data(), n);
  for (std::size_t r = 0; r < n; ++r) {
    const double a = fwd.magnitude[r];
    if (a != 0.0) k.axpy(a, gz.data(), grads.weight.data() + r * n, n);
    const double ga = k.dot(p.weight.data() + r * n, gz.data(), n);
    if (a > 0.0) {
      grad_in.re[r] += ga * u_hat.re[r] / a;
      grad_in.im[r] += ga * u_hat.im[r] / a;
    }
  }
  return grad_in;
}

SaguOutput sagu_forward(const ComplexVec& v, const SaguView& s, SaguGate mode) {
  s.validate();
  const std::size_t n = s.length;
  require(v.size() >= n, "sagu: spectrum shorter than SAGU length");
  const auto& k = simd::active();
  SaguOutput out;
  out.magnitude.resize(n);
  k.magnitude(v.re.data(), v.im.data(), out.magnitude.data(), n);

  out.linear = ComplexVec(n);
  for (std::size_t r = 0; r < n; ++r) {
    const double vr = v.re[r];
    const double vi = v.im[r];
    const double* w1r = s.w1_re.data() + r * n;
    const double* w1i = s.w1_im.data() + r * n;
    k.axpy(vr, w1r, out.linear.re.data(), n);
    k.axpy(-vi, w1i, out.linear.re.data(), n);
    k.axpy(vr, w1i, out.linear.im.data(), n);
    k.axpy(vi, w1r, out.linear.im.data(), n);
  }

  out.gate_arg = ComplexVec(n);
  row_times_matrix(out.magnitude, s.w2_re, n, n, out.gate_arg.re.data());
  if (mode == SaguGate::ComplexModulus) {
    row_times_matrix(out.magnitude, s.w2_im, n, n, out.gate_arg.im.data());
  }
  out.gate.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double arg = mode == SaguGate::ComplexModulus
                           ? std::sqrt(out.gate_arg.re[j] * out.gate_arg.re[j] +
                                       out.gate_arg.im[j] * out.gate_arg.im[j])
                           : out.gate_arg.re[j];
    out.gate[j] = sigmoid(arg);
  }

  out.out = v;
  for (std::size_t j = 0; j < n; ++j) {
    out.out.re[j] = out.linear.re[j] * out.gate[j];
    out.out.im[j] = out.linear.im[j] * out.gate[j];
  }
  return out;
}

ComplexVec sagu_backward(const ComplexVec& v, const SaguView& s, SaguGate mode,
                         const SaguOutput& fwd, const ComplexVec& grad_out,
                         const SaguGradRefs& grads) {
  const std::size_t n = s.length;
  const auto& k = simd::active();
  ComplexVec grad_in = grad_out;  // pass-through bins keep their gradient

  ComplexVec g_lin(n);
  std::vector<double> g_arg(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double gate = fwd.gate[j];
    g_lin.re[j] = gate * grad_out.re[j];
    g_lin.im[j] = gate * grad_out.im[j];
    const double dgate = fwd.linear.re[j] * grad_out.re[j] + fwd.linear.im[j] * grad_out.im[j];
    g_arg[j] = dgate * gate * (1.0 - gate);
  }

  // Gate path: d/d|v| and d/dW2.
  std::vector<double> g_mag(n, 0.0);
  if (mode == SaguGate::ComplexModulus) {
    std::vector<double> gq_re(n, 0.0), gq_im(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      const double qr = fwd.gate_arg.re[j];
      const double qi = fwd.gate_arg.im[j];
      const double m = std::sqrt(qr * qr + qi * qi);
      if (m > 0.0) {
        gq_re[j] = g_arg[j] * qr / m;
        gq_im[j] = g_arg[j] * qi / m;
      }
    }
    for (std::size_t r = 0; r < n; ++r) {
      const double a = fwd.magnitude[r];
      k.axpy(a, gq_re.data(), grads.w2_re.data() + r * n, n);
      k.axpy(a, gq_im.data(), grads.w2_im.data() + r * n, n);
      g_mag[r] = k.dot(s.w2_re.data() + r * n, gq_re.data(), n) +
                 k.dot(s.w2_im.data() + r * n, gq_im.data(), n);
    }
  } else {
    for (std::size_t r = 0; r < n; ++r) {
      const double a = fwd.magnitude[r];
      if (a != 0.0) k.axpy(a, g_arg.data(), grads.w2_re.data() + r * n, n);
      g_mag[r] = k.dot(s.w2_re.data() + r * n, g_arg.data(), n);
    }
  }

  // Linear path: l_j = sum_r v_r W1[r, j] is holomorphic in v and W1, so
  // dl/dv_r = sum_j g_j conj(W1[r, j]) and dl/dW1[r, j] = g_j conj(v_r).
  for (std::size_t r = 0; r < n; ++r) {
    const double* w1r = s.w1_re.data() + r * n;
    const double* w1i = s.w1_im.data() + r * n;
    const double vr = v.re[r];
    const double vi = v.im[r];
    double gr = k.dot(g_lin.re.data(), w1r, n) + k.dot(g_lin.im.data(), w1i, n);
    double gi = k.dot(g_lin.im.data(), w1r, n) - k.dot(g_lin.re.data(), w1i, n);
    k.axpy(vr, g_lin.re.data(), grads.w1_re.data() + r * n, n);
    k.axpy(vi, g_lin.im.data(), grads.w1_re.data() + r * n, n);
    k.axpy(vr, g_lin.im.data(), grads.w1_im.data() + r * n, n);
    k.axpy(-vi, g_lin.re.data(), grads.w1_im.data() + r * n, n);
    const double a = fwd.magnitude[r];
    if (a > 0.0) {
      gr += g_mag[r] * vr / a;
      gi += g_mag[r] * vi / a;
    }
    grad_in.re[r] = gr;
    grad_in.im[r] = gi;
  }
  return grad_in;
}

namespace {

enum class Stage { Gate, Kernel, Sagu };

std::array<Stage, 3> stage_order(const SassOptions& o) {
  if (o.sagu_first) return {Stage::Sagu, Stage::Gate, Stage::Kernel};
  return {Stage::Gate, Stage::Kernel, Stage::Sagu};
}

void check_sass_shapes(const Tensor& u, const KernelView& k, const PulseGateView& p,
                       const SaguView& s, const SassOptions& options) {
  require(u.rank() == 2, "sass_forward: input must be L x H");
  const std::size_t length = u.dim(0);
  const std::size_t channels = u.dim(1);
  k.validate();
  s.validate();
  require(k.length == length && k.channels == channels,
          "sass_forward: kernel shape does not match input");
  require(s.length == length, "sass_forward: SAGU length does not match input");
  if (options.gating_enabled) {
    p.validate();
    require(p.length == length, "sass_forward: gate length does not match input");
  }
}

}  // namespace

SassForward sass_forward(const Tensor& u, const KernelView& k, const PulseGateView& p,
                         const SaguView& s, const SassOptions& options) {
  check_sass_shapes(u, k, p, s, options);
  const std::size_t length = u.dim(0);
  const std::size_t channels = u.dim(1);
  const std::size_t padded = padded_length(length, options.conv_mode);
  const FftPlan& plan = fft_plan(padded);
  const auto& kern = simd::active();

  SassForward out{Tensor({length, channels}), {}};
  SassState& st = out.state;
  st.options = options;
  st.length = length;
  st.padded = padded;
  st.channels.resize(channels);

  for (std::size_t h = 0; h < channels; ++h) {
    SassState::Channel& ch = st.channels[h];
    ch.u_hat = ComplexVec(padded);
    for (std::size_t l = 0; l < length; ++l) ch.u_hat.re[l] = u(l, h);
    plan.forward(ch.u_hat.re, ch.u_hat.im);
    ch.k_hat = kernel_spectrum(k, h, options.conv_mode);

    ComplexVec c = ch.u_hat;
    for (Stage stage : stage_order(options)) {
      switch (stage) {
        case Stage::Gate:
          if (!options.gating_enabled) break;
          ch.gate_in = c;
          ch.gate = pulse_gate(c, p);
          c = ch.gate.out;
          break;
        case Stage::Kernel:
          ch.kernel_in = c;
          kern.cmul(c.re.data(), c.im.data(), ch.k_hat.re.data(), ch.k_hat.im.data(),
                    c.re.data(), c.im.data(), padded);
          break;
        case Stage::Sagu:
          ch.sagu_in = c;
          ch.sagu = sagu_forward(c, s, options.sagu_gate);
          c = ch.sagu.out;
          break;
      }
    }
    plan.inverse(c.re, c.im);
    for (std::size_t l = 0; l < length; ++l) out.y(l, h) = c.re[l];
  }
  st.valid = true;
  return out;
}

Tensor sass_backward_into(const Tensor& grad_y, const SassState& state, const KernelView& k,
                          const PulseGateView& p, const SaguView& s,
                          const SassGradRefs& grads) {
  if (!state.valid) {
    throw ContractViolation("sass_backward: forward state was not saved");
  }
  const std::size_t length = state.length;
  const std::size_t channels = state.channels.size();
  require(grad_y.rank() == 2 && grad_y.dim(0) == length && grad_y.dim(1) == channels,
          "sass_backward: gradient shape does not match forward output");
  const std::size_t padded = state.padded;
  const double pd = static_cast<double>(padded);
  const FftPlan& plan = fft_plan(padded);
  const auto& kern = simd::active();
  const SassOptions& options = state.options;
  auto order = stage_order(options);

  Tensor grad_u({length, channels});
  for (std::size_t h = 0; h < channels; ++h) {
    const SassState::Channel& ch = state.channels[h];
    // y = Re(F^-1(w))[0, L)  =>  dl/dw = F(pad(dl/dy)) / P
    ComplexVec g(padded);
    for (std::size_t l = 0; l < length; ++l) g.re[l] = grad_y(l, h);
    plan.forward(g.re, g.im);
    for (std::size_t i = 0; i < padded; ++i) {
      g.re[i] /= pd;
      g.im[i] /= pd;
    }

    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      switch (*it) {
        case Stage::Gate:
          if (!options.gating_enabled) break;
          g = pulse_gate_backward(ch.gate_in, p, ch.gate, g, grads.pulse);
          break;
        case Stage::Kernel: {
          ComplexVec g_k(padded);
          kern.cmul_conj(g.re.data(), g.im.data(), ch.kernel_in.re.data(),
                         ch.kernel_in.im.data(), g_k.re.data(), g_k.im.data(), padded);
          kernel_spectrum_backward(k, h, g_k, grads.kernel);
          kern.cmul_conj(g.re.data(), g.im.data(), ch.k_hat.re.data(), ch.k_hat.im.data(),
                         g.re.data(), g.im.data(), padded);
          break;
        }
        case Stage::Sagu:
          g = sagu_backward(ch.sagu_in, s, options.sagu_gate, ch.sagu, g, grads.sagu);
          break;
      }
    }
    // u_hat = F(pad(u))  =>  dl/du = P * Re(F^-1(dl/du_hat))[0, L)
    plan.inverse(g.re, g.im);
    for (std::size_t l = 0; l < length; ++l) grad_u(l, h) = pd * g.re[l];
  }
  return grad_u;
}

SassGrads sass_backward(const Tensor& grad_y, const SassState& state, const KernelView& k,
                        const PulseGateView& p, const SaguView& s) {
  if (!state.valid) {
    throw ContractViolation("sass_backward: forward state was not saved");
  }
  const std::size_t length = state.length;
  SassGrads out;
  out.kernel = SpectralKernel::zeros(k.channels, k.length);
  if (k.learnable_scale()) out.kernel.scale.assign(k.channels, 0.0);
  out.pulse = PulseGateParams::zeros(length);
  out.sagu = SaguParams::zeros(length);
  SassGradRefs refs{{out.kernel.psi_re, out.kernel.psi_im, out.kernel.scale},
                    {out.pulse.weight, out.pulse.bias},
                    {out.sagu.w1_re, out.sagu.w1_im, out.sagu.w2_re, out.sagu.w2_im}};
  out.input = sass_backward_into(grad_y, state, k, p, s, refs);
  return out;
}

double kernel_l2_error(const SpectralKernel& k, const ssm::KernelVec& target) {
  if (k.channels != 1 || k.length != target.size()) {
    throw ShapeError("kernel_l2_error: kernel must be 1 x L with L == target length");
  }
  const ComplexVec eff = k.effective(0);
  double s = 0.0;
  for (std::size_t i = 0; i < k.length; ++i) {
    const double dr = eff.re[i] - target.values[i];
    const double di = eff.im[i];
    s += dr * dr + di * di;
  }
  return std::sqrt(s);
}

KernelFit fit_kernel(const ssm::KernelVec& target, SpectralKernel init, std::size_t steps,
                     double lr) {
  KernelFit fit;
  fit.initial_error = kernel_l2_error(init, target);
  fit.kernel = std::move(init);
  SpectralKernel& k = fit.kernel;
  const double s = k.scale.empty() ? 1.0 : k.scale[0];
  fit.loss_history.reserve(steps);
  for (std::size_t step = 0; step < steps; ++step) {
    // f = ||s psi - t||^2, df/dpsi = 2 s (s psi - t); scale held fixed.
    double loss = 0.0;
    for (std::size_t i = 0; i < k.length; ++i) {
      const double rr = s * k.psi_re[i] - target.values[i];
      const double ri = s * k.psi_im[i];
      loss += rr * rr + ri * ri;
      k.psi_re[i] -= lr * 2.0 * s * rr;
      k.psi_im[i] -= lr * 2.0 * s * ri;
    }
    fit.loss_history.push_back(loss);
  }
  fit.final_error = kernel_l2_error(k, target);
  return fit;
}

SpectralKernel assign_exact(const ssm::KernelVec& target) {
  SpectralKernel k = SpectralKernel::zeros(1, target.size());
  k.psi_re = target.values;
  return k;
}

}  // namespace sass::spectral
