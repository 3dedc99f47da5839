#include <cmath>
#include <vector>

#include "doctest.h"
#include "sass/bench.hpp"
#include "sass/error.hpp"

using namespace sass;
using namespace sass::bench;

namespace {

std::vector<BenchRecord> synthetic(double power) {
  std::vector<BenchRecord> r;
  for (std::size_t l = 256; l <= 8192; l *= 2) {
    BenchRecord b;
    b.path = BenchPath::DirectConv;
    b.length = l;
    b.channels = 1;
    b.repeats = 5;
    b.median_ns = 3.0 * std::pow(static_cast<double>(l), power);
    b.p10_ns = b.median_ns;
    b.p90_ns = b.median_ns;
    r.push_back(b);
  }
  return r;
}

}  // namespace

TEST_CASE("slope of exact power laws") {
  CHECK(fit_loglog_slope(synthetic(2.0)) == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(fit_loglog_slope(synthetic(1.0)) == doctest::Approx(1.0).epsilon(1e-9));
  std::vector<BenchRecord> one = synthetic(1.0);
  one.resize(1);
  CHECK_THROWS_AS(fit_loglog_slope(one), EmptyInputError);
}

TEST_CASE("percentiles") {
  std::vector<double> s{5, 1, 4, 2, 3};
  CHECK(percentile(s, 0.5) == 3.0);
  CHECK(percentile(s, 0.0) == 1.0);
  CHECK(percentile(s, 1.0) == 5.0);
}

TEST_CASE("path names") {
  for (BenchPath p : {BenchPath::Spectral, BenchPath::DirectConv, BenchPath::RecurrentScan}) {
    CHECK(parse_path(path_name(p)) == p);
  }
  CHECK(path_name(BenchPath::DirectConv) == "direct_conv");
  CHECK_THROWS_AS(parse_path("nope"), ConfigError);
}

TEST_CASE("csv round trip") {
  std::vector<BenchRecord> r = synthetic(1.37);
  r[2].path = BenchPath::Spectral;
  r[3].median_ns = 0.1 + 0.2;
  const std::string text = to_csv(r);
  CHECK(text.rfind(std::string(kCsvHeader) + "\n", 0) == 0);
  CHECK(parse_csv(text) == r);
  CHECK_THROWS_AS(parse_csv("path,L\nspectral,1\n"), FormatError);
}

TEST_CASE("empty length list gives no records") {
  std::vector<std::size_t> none;
  std::vector<BenchPath> paths{BenchPath::Spectral};
  CHECK(run_scaling(none, paths).empty());
}

TEST_CASE("small scaling run produces one record per path and length") {
  std::vector<std::size_t> ls{64, 128};
  std::vector<BenchPath> paths{BenchPath::Spectral, BenchPath::DirectConv,
                               BenchPath::RecurrentScan};
  BenchOptions o;
  o.repeats = 5;
  o.warmup = 1;
  o.min_sample_ns = 1e5;
  std::vector<BenchRecord> r = run_scaling(ls, paths, o);
  REQUIRE(r.size() == 6);
  for (const auto& b : r) {
    CHECK(b.median_ns > 0.0);
    CHECK(b.p10_ns <= b.median_ns);
    CHECK(b.median_ns <= b.p90_ns);
    CHECK(b.channels == o.channels);
  }
}
