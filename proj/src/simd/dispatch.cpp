#include <cstdlib>
#include <cstring>

#include "sass/simd/kernels.hpp"

namespace sass::simd {

#if defined(SASS_BUILD_AVX2)
namespace avx2 {
extern const Kernels kKernels;
}
#endif

const Kernels* avx2_kernels() {
#if defined(SASS_BUILD_AVX2)
  static const bool supported = __builtin_cpu_supports("avx2");
  return supported ? &avx2::kKernels : nullptr;
#else
  return nullptr;
#endif
}

namespace {

const Kernels& select() {
  const char* forced = std::getenv("SASS_SIMD");
  if (forced != nullptr && std::strcmp(forced, "scalar") == 0) return scalar_kernels();
  if (const Kernels* k = avx2_kernels()) return *k;
  return scalar_kernels();
}

}  // namespace

const Kernels& active() {
  static const Kernels& chosen = select();
  return chosen;
}

}  // namespace sass::simd
