#include <filesystem>
#include <vector>

#include "doctest.h"
#include "sass/binary_io.hpp"
#include "sass/data.hpp"
#include "sass/error.hpp"

using namespace sass;
using namespace sass::data;

namespace {

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("sass_unit_" + name);
}

}  // namespace

TEST_CASE("default bands are disjoint and below Nyquist") {
  std::vector<Band> b = default_bands(64, 3);
  REQUIRE(b.size() == 3);
  CHECK(b[0] == Band{1, 9});
  CHECK(b[1] == Band{11, 19});
  CHECK(b[2] == Band{21, 29});
  CHECK_THROWS_AS(default_bands(8, 3), ConfigError);
}

TEST_CASE("frequency task determinism and balance") {
  FreqTaskSpec spec;
  spec.samples_per_class = 20;
  spec.seed = 4;
  spec.noise_sigma = 0.1;
  Dataset a = gen_freq_task(spec);
  Dataset b = gen_freq_task(spec);
  CHECK(a == b);
  CHECK(a.size() == 60);
  CHECK(a.length == 64);
  std::vector<std::size_t> counts(3, 0);
  for (auto y : a.labels) ++counts[y];
  CHECK(counts == std::vector<std::size_t>{20, 20, 20});

  spec.seed = 5;
  CHECK_FALSE(gen_freq_task(spec) == a);

  spec.samples_per_class = 0;
  Dataset empty = gen_freq_task(spec);
  CHECK(empty.size() == 0);
  CHECK(empty.values.empty());
}

TEST_CASE("band energy oracle is perfect on noise-free data") {
  FreqTaskSpec spec;
  spec.num_classes = 2;
  spec.bands = {{3, 3}, {7, 7}};
  spec.length = 32;
  spec.samples_per_class = 50;
  spec.seed = 1;
  Dataset ds = gen_freq_task(spec);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    CHECK(band_energy_classify(ds.sample(i), spec.bands) == ds.labels[i]);
  }

  FreqTaskSpec gated;
  gated.gating_required = true;
  gated.samples_per_class = 50;
  gated.seed = 2;
  Dataset g = gen_freq_task(gated);
  const auto bands = gated.resolved_bands();
  for (std::size_t i = 0; i < g.size(); ++i) {
    CHECK(band_energy_classify(g.sample(i), bands) == g.labels[i]);
    // Every band carries a tone in the gating variant.
    for (double e : band_energies(g.sample(i), bands)) CHECK(e > 0.0);
  }
}

TEST_CASE("frequency task validation") {
  FreqTaskSpec spec;
  spec.bands = {{1, 5}, {5, 9}, {11, 12}};
  CHECK_THROWS_AS(spec.validate(), ConfigError);
  spec.bands = {{1, 5}, {6, 40}, {41, 42}};
  CHECK_THROWS_AS(spec.validate(), ConfigError);
  FreqTaskSpec ok;
  CHECK_NOTHROW(ok.validate());
}

TEST_CASE("shape images and template oracle") {
  ShapeImageSpec spec;
  spec.samples_per_class = 30;
  spec.seed = 3;
  Dataset a = gen_shape_images(spec);
  CHECK(a == gen_shape_images(spec));
  CHECK(a.size() == 120);
  CHECK(a.length == 32 * 32);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    correct += template_classify(a.sample(i), spec) == a.labels[i] ? 1 : 0;
  }
  CHECK(static_cast<double>(correct) / static_cast<double>(a.size()) > 0.95);

  spec.samples_per_class = 0;
  CHECK(gen_shape_images(spec).size() == 0);
  spec.jitter = 10;
  CHECK_THROWS_AS(spec.validate(), ConfigError);
}

TEST_CASE("stratified holdout split") {
  FreqTaskSpec spec;
  spec.samples_per_class = 10;
  Dataset ds = gen_freq_task(spec);
  Split s = split_holdout(ds, 5);
  CHECK(s.train.size() == 24);
  CHECK(s.test.size() == 6);
  std::vector<std::size_t> counts(3, 0);
  for (auto y : s.test.labels) ++counts[y];
  CHECK(counts == std::vector<std::size_t>{2, 2, 2});
}

TEST_CASE("dataset encoding round trip and corruption") {
  FreqTaskSpec spec;
  spec.samples_per_class = 4;
  spec.noise_sigma = 0.3;
  Dataset ds = gen_freq_task(spec);
  std::vector<std::uint8_t> bytes = encode_dataset(ds);
  CHECK(std::string(bytes.begin(), bytes.begin() + 7) == "SASSDS1");
  CHECK(decode_dataset(bytes) == ds);

  const auto path = temp_file("ds.bin");
  write_dataset(path, ds);
  CHECK(read_dataset(path) == ds);
  std::filesystem::remove(path);

  std::vector<std::uint8_t> truncated(bytes.begin(), bytes.end() - 9);
  CHECK_THROWS_AS(decode_dataset(truncated), FormatError);
  CHECK_THROWS_AS(decode_dataset(std::vector<std::uint8_t>(bytes.begin(), bytes.begin() + 3)),
                  FormatError);

  std::vector<std::uint8_t> flipped = bytes;
  flipped[40] ^= 0x10;
  CHECK_THROWS_AS(decode_dataset(flipped), IntegrityError);

  std::vector<std::uint8_t> bad_magic = bytes;
  bad_magic[0] = 'X';
  CHECK_THROWS_AS(decode_dataset(bad_magic), FormatError);

  CHECK_THROWS_AS(read_dataset(temp_file("missing.bin")), IoError);
}

TEST_CASE("crc32 matches the zlib check value") {
  const std::string s = "123456789";
  std::vector<std::uint8_t> v(s.begin(), s.end());
  CHECK(io::crc32(v) == 0xCBF43926U);
}
