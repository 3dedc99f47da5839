#include "sass/numerics.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <unordered_map>

#include "sass/error.hpp"
#include "sass/simd/kernels.hpp"

namespace sass {

struct FftPlan::Bluestein {
  std::size_t m = 0;
  const FftPlan* inner = nullptr;
  std::unique_ptr<FftPlan> owned_inner;
  std::vector<double> chirp_re, chirp_im;  // exp(-pi i n^2 / N)
  std::vector<double> filt_re, filt_im;    // FFT_m of the conjugate chirp
};

std::size_t next_power_of_two(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

FftPlan::FftPlan(std::size_t n) : n_(n) {
  if (n == 0) throw EmptyInputError("FftPlan: length must be at least 1");
  if ((n & (n - 1)) == 0) {
    std::size_t bits = 0;
    while ((std::size_t{1} << bits) < n) ++bits;
    bitrev_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t r = 0;
      for (std::size_t b = 0; b < bits; ++b) r |= ((i >> b) & 1U) << (bits - 1 - b);
      bitrev_[i] = r;
    }
    bits_ = bits;
    if (bits >= 12) {
      bitrev_mid_.resize(n >> 6);
      for (std::size_t m = 0; m < bitrev_mid_.size(); ++m) {
        bitrev_mid_[m] = (bitrev_[m << 3] >> 3) & (bitrev_mid_.size() - 1);
      }
    }
    const std::size_t total = n > 1 ? n - 1 : 0;
    fwd_re_.resize(total);
    fwd_im_.resize(total);
    inv_re_.resize(total);
    inv_im_.resize(total);
    for (std::size_t h = 1; h < n; h <<= 1) {
      for (std::size_t j = 0; j < h; ++j) {
        const double angle = std::numbers::pi * static_cast<double>(j) / static_cast<double>(h);
        const double c = std::cos(angle);
        const double s = std::sin(angle);
        fwd_re_[h - 1 + j] = c;
        fwd_im_[h - 1 + j] = -s;
        inv_re_[h - 1 + j] = c;
        inv_im_[h - 1 + j] = s;
      }
    }
    return;
  }

  auto bs = std::make_unique<Bluestein>();
  bs->m = next_power_of_two(2 * n - 1);
  bs->owned_inner = std::make_unique<FftPlan>(bs->m);
  bs->inner = bs->owned_inner.get();
  bs->chirp_re.resize(n);
  bs->chirp_im.resize(n);
  const std::uint64_t two_n = 2 * static_cast<std::uint64_t>(n);
  for (std::size_t i = 0; i < n; ++i) {
    // n^2 mod 2N keeps the angle argument small and exact.
    const std::uint64_t k = (static_cast<std::uint64_t>(i) * i) % two_n;
    const double angle = std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
    bs->chirp_re[i] = std::cos(angle);
    bs->chirp_im[i] = -std::sin(angle);
  }
  bs->filt_re.assign(bs->m, 0.0);
  bs->filt_im.assign(bs->m, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    bs->filt_re[i] = bs->chirp_re[i];
    bs->filt_im[i] = -bs->chirp_im[i];
    if (i > 0) {
      bs->filt_re[bs->m - i] = bs->chirp_re[i];
      bs->filt_im[bs->m - i] = -bs->chirp_im[i];
    }
  }
  bs->inner->forward(bs->filt_re, bs->filt_im);
  bluestein_ = std::move(bs);
}

FftPlan::~FftPlan() = default;

// Index bits split as (top, mid, low) with 3-bit top and low fields; the
// reversal maps tile (mid) to tile (rev mid) with top and low swapped, so
// each swap pass touches whole cache lines.
void FftPlan::bitrev_blocked(double* x) const {
  constexpr std::size_t kRev3[8] = {0, 4, 2, 6, 1, 5, 3, 7};
  const std::size_t top_shift = bits_ - 3;
  for (std::size_t m = 0; m < bitrev_mid_.size(); ++m) {
    const std::size_t mr = bitrev_mid_[m];
    if (m > mr) continue;
    for (std::size_t a = 0; a < 8; ++a) {
      for (std::size_t c = 0; c < 8; ++c) {
        const std::size_t i = (a << top_shift) | (m << 3) | c;
        const std::size_t j = (kRev3[c] << top_shift) | (mr << 3) | kRev3[a];
        if (m < mr || i < j) std::swap(x[i], x[j]);
      }
    }
  }
}

void FftPlan::radix2(double* re, double* im, bool inverse) const {
  if (bitrev_mid_.empty()) {
    for (std::size_t i = 0; i < n_; ++i) {
      const std::size_t j = bitrev_[i];
      if (i < j) {
        std::swap(re[i], re[j]);
        std::swap(im[i], im[j]);
      }
    }
  } else {
    bitrev_blocked(re);
    bitrev_blocked(im);
  }
  const auto& k = simd::active();
  const double* wr = inverse ? inv_re_.data() : fwd_re_.data();
  const double* wi = inverse ? inv_im_.data() : fwd_im_.data();
  // First stage has unit twiddles.
  for (std::size_t i = 0; i + 1 < n_; i += 2) {
    const double ar = re[i], ai = im[i], br = re[i + 1], bi = im[i + 1];
    re[i] = ar + br;
    im[i] = ai + bi;
    re[i + 1] = ar - br;
    im[i + 1] = ai - bi;
  }
  auto stage = [&](std::size_t h, std::size_t begin, std::size_t end) {
    for (std::size_t start = begin; start < end; start += 2 * h) {
      k.butterfly(re + start, im + start, re + start + h, im + start + h, wr + h - 1,
                  wi + h - 1, h);
    }
  };
  // Stages that stay inside a block run block by block so the data stays in L1.
  constexpr std::size_t kBlock = 1024;
  const std::size_t block = std::min(n_, kBlock);
  std::size_t h = 2;
  for (std::size_t begin = 0; begin < n_; begin += block) {
    for (std::size_t hb = 2; hb < block; hb <<= 1) stage(hb, begin, begin + block);
  }
  while (h < block) h <<= 1;
  for (; h < n_; h <<= 1) stage(h, 0, n_);
}

void FftPlan::chirp_z(double* re, double* im) const {
  const Bluestein& bs = *bluestein_;
  const auto& k = simd::active();
  std::vector<double> ar(bs.m, 0.0), ai(bs.m, 0.0);
  k.cmul(re, im, bs.chirp_re.data(), bs.chirp_im.data(), ar.data(), ai.data(), n_);
  bs.inner->forward(ar, ai);
  k.cmul(ar.data(), ai.data(), bs.filt_re.data(), bs.filt_im.data(), ar.data(), ai.data(),
         bs.m);
  bs.inner->inverse(ar, ai);
  k.cmul(ar.data(), ai.data(), bs.chirp_re.data(), bs.chirp_im.data(), re, im, n_);
}

void FftPlan::forward(std::span<double> re, std::span<double> im) const {
  if (re.size() != n_ || im.size() != n_) {
    throw ShapeError("FftPlan::forward: expected length " + std::to_string(n_));
  }
  if (bluestein_) {
    chirp_z(re.data(), im.data());
  } else {
    radix2(re.data(), im.data(), false);
  }
}

void FftPlan::inverse(std::span<double> re, std::span<double> im) const {
  if (re.size() != n_ || im.size() != n_) {
    throw ShapeError("FftPlan::inverse: expected length " + std::to_string(n_));
  }
  if (bluestein_) {
    // ifft(X) = conj(fft(conj(X))) / N
    for (double& v : im) v = -v;
    chirp_z(re.data(), im.data());
    for (double& v : im) v = -v;
  } else {
    radix2(re.data(), im.data(), true);
  }
  const double scale = 1.0 / static_cast<double>(n_);
  for (std::size_t i = 0; i < n_; ++i) {
    re[i] *= scale;
    im[i] *= scale;
  }
}

const FftPlan& fft_plan(std::size_t n) {
  thread_local std::unordered_map<std::size_t, std::unique_ptr<FftPlan>> cache;
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, std::make_unique<FftPlan>(n)).first;
  return *it->second;
}

ComplexVec fft(const ComplexVec& x) {
  if (x.empty()) throw EmptyInputError("fft: empty input");
  ComplexVec out = x;
  fft_plan(x.size()).forward(out.re, out.im);
  return out;
}

ComplexVec ifft(const ComplexVec& x) {
  if (x.empty()) throw EmptyInputError("ifft: empty input");
  ComplexVec out = x;
  fft_plan(x.size()).inverse(out.re, out.im);
  return out;
}

ComplexVec pointwise_mul(const ComplexVec& a, const ComplexVec& b) {
  if (a.size() != b.size()) {
    throw ShapeError("pointwise_mul: lengths " + std::to_string(a.size()) + " and " +
                     std::to_string(b.size()));
  }
  ComplexVec out(a.size());
  simd::active().cmul(a.re.data(), a.im.data(), b.re.data(), b.im.data(), out.re.data(),
                      out.im.data(), a.size());
  return out;
}

std::vector<double> magnitude(const ComplexVec& x) {
  std::vector<double> out(x.size());
  simd::active().magnitude(x.re.data(), x.im.data(), out.data(), x.size());
  return out;
}

ComplexVec fft_backward(const ComplexVec& grad_y) {
  ComplexVec g = ifft(grad_y);
  const double n = static_cast<double>(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    g.re[i] *= n;
    g.im[i] *= n;
  }
  return g;
}

ComplexVec ifft_backward(const ComplexVec& grad_y) {
  ComplexVec g = fft(grad_y);
  const double n = static_cast<double>(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    g.re[i] /= n;
    g.im[i] /= n;
  }
  return g;
}

MulGrads pointwise_mul_backward(const ComplexVec& a, const ComplexVec& b,
                                const ComplexVec& grad_y) {
  if (a.size() != b.size() || a.size() != grad_y.size()) {
    throw ShapeError("pointwise_mul_backward: length mismatch");
  }
  const std::size_t n = a.size();
  const auto& k = simd::active();
  MulGrads g{ComplexVec(n), ComplexVec(n)};
  k.cmul_conj(grad_y.re.data(), grad_y.im.data(), b.re.data(), b.im.data(), g.a.re.data(),
              g.a.im.data(), n);
  k.cmul_conj(grad_y.re.data(), grad_y.im.data(), a.re.data(), a.im.data(), g.b.re.data(),
              g.b.im.data(), n);
  return g;
}

ComplexVec magnitude_backward(const ComplexVec& x, std::span<const double> grad_m) {
  if (grad_m.size() != x.size()) throw ShapeError("magnitude_backward: length mismatch");
  ComplexVec g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double m = std::hypot(x.re[i], x.im[i]);
    if (m == 0.0) continue;
    g.re[i] = grad_m[i] * x.re[i] / m;
    g.im[i] = grad_m[i] * x.im[i] / m;
  }
  return g;
}

}  // namespace sass
