#include <cmath>
#include <vector>

#include "doctest.h"
#include "sass/rng.hpp"
#include "sass/simd/kernels.hpp"

using namespace sass;

namespace {

std::vector<double> randn(std::size_t n, Rng& rng) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.normal();
  return v;
}

}  // namespace

TEST_CASE("simd variants agree with the scalar kernels") {
  const simd::Kernels& s = simd::scalar_kernels();
  const simd::Kernels* v = simd::avx2_kernels();
  if (v == nullptr) {
    MESSAGE("avx2 variant unavailable; skipping");
    return;
  }
  Rng rng(21);
  // Odd sizes exercise the tails.
  for (std::size_t n : {0, 1, 3, 4, 7, 16, 33, 1000}) {
    auto ar = randn(n, rng), ai = randn(n, rng), br = randn(n, rng), bi = randn(n, rng);

    auto y1 = br, y2 = br;
    s.axpy(0.37, ar.data(), y1.data(), n);
    v->axpy(0.37, ar.data(), y2.data(), n);
    CHECK(y1 == y2);

    const double d1 = s.dot(ar.data(), br.data(), n);
    const double d2 = v->dot(ar.data(), br.data(), n);
    CHECK(std::abs(d1 - d2) <= 1e-13 * (1.0 + std::abs(d1)) * static_cast<double>(n + 1));

    std::vector<double> r1(n), i1(n), r2(n), i2(n);
    s.cmul(ar.data(), ai.data(), br.data(), bi.data(), r1.data(), i1.data(), n);
    v->cmul(ar.data(), ai.data(), br.data(), bi.data(), r2.data(), i2.data(), n);
    CHECK(r1 == r2);
    CHECK(i1 == i2);

    s.cmul_conj(ar.data(), ai.data(), br.data(), bi.data(), r1.data(), i1.data(), n);
    v->cmul_conj(ar.data(), ai.data(), br.data(), bi.data(), r2.data(), i2.data(), n);
    CHECK(r1 == r2);
    CHECK(i1 == i2);

    s.magnitude(ar.data(), ai.data(), r1.data(), n);
    v->magnitude(ar.data(), ai.data(), r2.data(), n);
    CHECK(r1 == r2);

    auto wr = randn(n, rng), wi = randn(n, rng);
    auto a1r = ar, a1i = ai, b1r = br, b1i = bi;
    auto a2r = ar, a2i = ai, b2r = br, b2i = bi;
    s.butterfly(a1r.data(), a1i.data(), b1r.data(), b1i.data(), wr.data(), wi.data(), n);
    v->butterfly(a2r.data(), a2i.data(), b2r.data(), b2i.data(), wr.data(), wi.data(), n);
    CHECK(a1r == a2r);
    CHECK(a1i == a2i);
    CHECK(b1r == b2r);
    CHECK(b1i == b2i);
  }
}

TEST_CASE("cmul allows aliasing the output with an input") {
  const simd::Kernels& k = simd::active();
  std::vector<double> ar{1, 2, 3, 4, 5}, ai{0, 1, 0, 1, 0};
  std::vector<double> br{2, 2, 2, 2, 2}, bi{1, 1, 1, 1, 1};
  std::vector<double> wr(5), wi(5);
  k.cmul(ar.data(), ai.data(), br.data(), bi.data(), wr.data(), wi.data(), 5);
  k.cmul(ar.data(), ai.data(), br.data(), bi.data(), ar.data(), ai.data(), 5);
  CHECK(ar == wr);
  CHECK(ai == wi);
}

TEST_CASE("active kernel set has a name") {
  const std::string name = simd::active().name;
  CHECK((name == "scalar" || name == "avx2"));
}
