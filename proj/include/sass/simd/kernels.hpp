#pragma once

#include <cstddef>

// Inner-loop kernels with a scalar reference and optional SIMD variants.
//
// Every element-wise kernel (axpy, cmul, cmul_conj, magnitude, butterfly)
// performs the same IEEE operations in the same order in every variant, so
// results are bit-identical across variants. `dot` reassociates its sum and
// only agrees to rounding.
namespace sass::simd {

struct Kernels {
  const char* name;

  // y[i] += a * x[i]
  void (*axpy)(double a, const double* x, double* y, std::size_t n);

  // sum x[i] * y[i]
  double (*dot)(const double* x, const double* y, std::size_t n);

  // out = a * b (complex, split layout). Outputs may alias inputs.
  void (*cmul)(const double* ar, const double* ai, const double* br,
               const double* bi, double* out_r, double* out_i, std::size_t n);

  // out = a * conj(b)
  void (*cmul_conj)(const double* ar, const double* ai, const double* br,
                    const double* bi, double* out_r, double* out_i,
                    std::size_t n);

  // out[i] = sqrt(re[i]^2 + im[i]^2)
  void (*magnitude)(const double* re, const double* im, double* out,
                    std::size_t n);

  // Radix-2 butterfly over n pairs: t = w * b; b = a - t; a = a + t.
  void (*butterfly)(double* ar, double* ai, double* br, double* bi,
                    const double* wr, const double* wi, std::size_t n);
};

const Kernels& scalar_kernels();

// nullptr when the variant was not compiled in or the CPU lacks the ISA.
const Kernels* avx2_kernels();

// Chosen once per process: the widest supported variant, unless the
// SASS_SIMD environment variable names one ("scalar" or "avx2").
const Kernels& active();

}  // namespace sass::simd
