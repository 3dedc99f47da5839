#include <cmath>

#include "sass/simd/kernels.hpp"

namespace sass::simd {
namespace {

void axpy(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

double dot(const double* x, const double* y, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
  return s;
}

void cmul(const double* ar, const double* ai, const double* br, const double* bi,
          double* out_r, double* out_i, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double re = ar[i] * br[i] - ai[i] * bi[i];
    const double im = ar[i] * bi[i] + ai[i] * br[i];
    out_r[i] = re;
    out_i[i] = im;
  }
}

void cmul_conj(const double* ar, const double* ai, const double* br,
               const double* bi, double* out_r, double* out_i, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double re = ar[i] * br[i] + ai[i] * bi[i];
    const double im = ai[i] * br[i] - ar[i] * bi[i];
    out_r[i] = re;
    out_i[i] = im;
  }
}

void magnitude(const double* re, const double* im, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = std::sqrt(re[i] * re[i] + im[i] * im[i]);
}

void butterfly(double* ar, double* ai, double* br, double* bi, const double* wr,
               const double* wi, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double tr = wr[i] * br[i] - wi[i] * bi[i];
    const double ti = wr[i] * bi[i] + wi[i] * br[i];
    br[i] = ar[i] - tr;
    bi[i] = ai[i] - ti;
    ar[i] = ar[i] + tr;
    ai[i] = ai[i] + ti;
  }
}

constexpr Kernels kScalar{"scalar", axpy, dot, cmul, cmul_conj, magnitude, butterfly};

}  // namespace

const Kernels& scalar_kernels() { return kScalar; }

}  // namespace sass::simd
