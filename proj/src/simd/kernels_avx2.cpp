// Compiled with -mavx2 only; callers reach these through avx2_kernels(),
// which checks the CPU first. No FMA: products and sums stay separately
// rounded so element-wise results match the scalar kernels exactly.
#include <immintrin.h>

#include <cmath>

#include "sass/simd/kernels.hpp"

namespace sass::simd::avx2 {
namespace {

void axpy(double a, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d vy = _mm256_loadu_pd(y + i);
    const __m256d vx = _mm256_loadu_pd(x + i);
    _mm256_storeu_pd(y + i, _mm256_add_pd(vy, _mm256_mul_pd(va, vx)));
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

double dot(const double* x, const double* y, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    acc1 = _mm256_add_pd(acc1, _mm256_mul_pd(_mm256_loadu_pd(x + i + 4),
                                             _mm256_loadu_pd(y + i + 4)));
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  const __m256d acc = _mm256_add_pd(acc0, acc1);
  const __m128d lo = _mm256_castpd256_pd128(acc);
  const __m128d hi = _mm256_extractf128_pd(acc, 1);
  const __m128d pair = _mm_add_pd(lo, hi);
  double s = _mm_cvtsd_f64(_mm_add_sd(pair, _mm_unpackhi_pd(pair, pair)));
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

void cmul(const double* ar, const double* ai, const double* br, const double* bi,
          double* out_r, double* out_i, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d a_r = _mm256_loadu_pd(ar + i);
    const __m256d a_i = _mm256_loadu_pd(ai + i);
    const __m256d b_r = _mm256_loadu_pd(br + i);
    const __m256d b_i = _mm256_loadu_pd(bi + i);
    const __m256d re = _mm256_sub_pd(_mm256_mul_pd(a_r, b_r), _mm256_mul_pd(a_i, b_i));
    const __m256d im = _mm256_add_pd(_mm256_mul_pd(a_r, b_i), _mm256_mul_pd(a_i, b_r));
    _mm256_storeu_pd(out_r + i, re);
    _mm256_storeu_pd(out_i + i, im);
  }
  for (; i < n; ++i) {
    const double re = ar[i] * br[i] - ai[i] * bi[i];
    const double im = ar[i] * bi[i] + ai[i] * br[i];
    out_r[i] = re;
    out_i[i] = im;
  }
}

void cmul_conj(const double* ar, const double* ai, const double* br,
               const double* bi, double* out_r, double* out_i, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d a_r = _mm256_loadu_pd(ar + i);
    const __m256d a_i = _mm256_loadu_pd(ai + i);
    const __m256d b_r = _mm256_loadu_pd(br + i);
    const __m256d b_i = _mm256_loadu_pd(bi + i);
    const __m256d re = _mm256_add_pd(_mm256_mul_pd(a_r, b_r), _mm256_mul_pd(a_i, b_i));
    const __m256d im = _mm256_sub_pd(_mm256_mul_pd(a_i, b_r), _mm256_mul_pd(a_r, b_i));
    _mm256_storeu_pd(out_r + i, re);
    _mm256_storeu_pd(out_i + i, im);
  }
  for (; i < n; ++i) {
    const double re = ar[i] * br[i] + ai[i] * bi[i];
    const double im = ai[i] * br[i] - ar[i] * bi[i];
    out_r[i] = re;
    out_i[i] = im;
  }
}

void magnitude(const double* re, const double* im, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d r = _mm256_loadu_pd(re + i);
    const __m256d m = _mm256_loadu_pd(im + i);
    const __m256d sq = _mm256_add_pd(_mm256_mul_pd(r, r), _mm256_mul_pd(m, m));
    _mm256_storeu_pd(out + i, _mm256_sqrt_pd(sq));
  }
  for (; i < n; ++i) out[i] = std::sqrt(re[i] * re[i] + im[i] * im[i]);
}

void butterfly(double* ar, double* ai, double* br, double* bi, const double* wr,
               const double* wi, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d w_r = _mm256_loadu_pd(wr + i);
    const __m256d w_i = _mm256_loadu_pd(wi + i);
    const __m256d b_r = _mm256_loadu_pd(br + i);
    const __m256d b_i = _mm256_loadu_pd(bi + i);
    const __m256d a_r = _mm256_loadu_pd(ar + i);
    const __m256d a_i = _mm256_loadu_pd(ai + i);
    const __m256d tr = _mm256_sub_pd(_mm256_mul_pd(w_r, b_r), _mm256_mul_pd(w_i, b_i));
    const __m256d ti = _mm256_add_pd(_mm256_mul_pd(w_r, b_i), _mm256_mul_pd(w_i, b_r));
    _mm256_storeu_pd(br + i, _mm256_sub_pd(a_r, tr));
    _mm256_storeu_pd(bi + i, _mm256_sub_pd(a_i, ti));
    _mm256_storeu_pd(ar + i, _mm256_add_pd(a_r, tr));
    _mm256_storeu_pd(ai + i, _mm256_add_pd(a_i, ti));
  }
  for (; i < n; ++i) {
    const double tr = wr[i] * br[i] - wi[i] * bi[i];
    const double ti = wr[i] * bi[i] + wi[i] * br[i];
    br[i] = ar[i] - tr;
    bi[i] = ai[i] - ti;
    ar[i] = ar[i] + tr;
    ai[i] = ai[i] + ti;
  }
}

}  // namespace

extern const Kernels kKernels{"avx2", axpy, dot, cmul, cmul_conj, magnitude, butterfly};

}  // namespace sass::simd::avx2
