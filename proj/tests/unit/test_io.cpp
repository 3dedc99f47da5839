#include <filesystem>
#include <string>

#include "doctest.h"
#include "sass/binary_io.hpp"
#include "sass/checkpoint.hpp"
#include "sass/config.hpp"
#include "sass/error.hpp"
#include "sass/rng.hpp"

using namespace sass;

TEST_CASE("config parsing") {
  TrainConfig c = parse_config(
      "# comment\n"
      "epochs = 3\n"
      "mode = causal   # trailing comment\n"
      "gating_enabled = false\n"
      "lr = 0.005\n"
      "task = shapes\n");
  CHECK(c.epochs == 3);
  CHECK(c.mode == spectral::ConvMode::CausalPadded);
  CHECK_FALSE(c.gating_enabled);
  CHECK(c.lr == 0.005);
  CHECK(c.task == TaskKind::Shapes);
  CHECK(c.effective_patch_size() == 4);

  TrainConfig d;
  CHECK(d.effective_patch_size() == 1);
  CHECK(d.length == 64);
  CHECK(d.num_classes == 3);
  CHECK(d.samples_per_class == 300);
  CHECK(d.epochs == 30);
}

TEST_CASE("config errors carry the line number") {
  try {
    parse_config("epochs = 2\nbogus_key = 1\n", "my.cfg");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("my.cfg:2:") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config("epochs = two\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("epochs\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("mode = sideways\n"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/dir/cfg.txt"), IoError);
}

TEST_CASE("config text round trip") {
  TrainConfig c;
  c.epochs = 7;
  c.sagu_first = true;
  c.sagu_gate = spectral::SaguGate::ComplexModulus;
  c.weight_decay = 0.1 + 0.2;
  c.seed = 123456789012345ULL;
  const std::string text = to_text(c);
  CHECK(to_text(parse_config(text)) == text);
  TrainConfig back = parse_config(text);
  CHECK(back.weight_decay == c.weight_decay);
  CHECK(back.seed == c.seed);
}

TEST_CASE("checkpoint round trip is byte identical") {
  Checkpoint ck;
  ck.config_text = to_text(TrainConfig{});
  ck.epoch = 4;
  Rng rng(3);
  ck.params.add("a", Tensor({2, 3}, {1, 2, 3, 4, 5, 6}));
  ck.params.add("b", Tensor({4}, {0.1, -0.2, 1e-300, 7}), true, false);
  ck.rng_state = rng.state();
  ck.opt_step = 17;
  ck.opt_m = {{0.1, 0.2, 0.3, 0.4, 0.5, 0.6}, {1, 2, 3, 4}};
  ck.opt_v = {{1, 1, 1, 1, 1, 1}, {0, 0, 0, 0}};

  std::vector<std::uint8_t> bytes = encode_checkpoint(ck);
  CHECK(std::string(bytes.begin(), bytes.begin() + 8) == "SASSCKPT");
  Checkpoint back = decode_checkpoint(bytes);
  CHECK(back.epoch == 4);
  CHECK(back.params.size() == 2);
  CHECK(back.params.param(1).name == "b");
  CHECK(back.params.param(0).value == ck.params.param(0).value);
  CHECK(back.opt_m == ck.opt_m);
  CHECK(encode_checkpoint(back) == bytes);

  const auto path = std::filesystem::temp_directory_path() / "sass_unit_ckpt.bin";
  write_checkpoint(path, ck);
  Checkpoint from_disk = read_checkpoint(path);
  const auto path2 = std::filesystem::temp_directory_path() / "sass_unit_ckpt2.bin";
  write_checkpoint(path2, from_disk);
  CHECK(io::read_file(path) == io::read_file(path2));
  std::filesystem::remove(path);
  std::filesystem::remove(path2);

  std::vector<std::uint8_t> wrong_version = bytes;
  wrong_version[8] = 2;
  CHECK_THROWS_AS(decode_checkpoint(wrong_version), FormatError);
  std::vector<std::uint8_t> truncated(bytes.begin(), bytes.end() - 20);
  CHECK_THROWS_AS(decode_checkpoint(truncated), FormatError);
  std::vector<std::uint8_t> flipped = bytes;
  flipped[bytes.size() / 2] ^= 1;
  CHECK_THROWS_AS(decode_checkpoint(flipped), Error);
}

TEST_CASE("byte reader bounds") {
  io::ByteWriter w;
  w.u32(7);
  w.str("hi");
  io::ByteReader r(w.bytes(), "test");
  CHECK(r.u32() == 7);
  CHECK(r.str() == "hi");
  CHECK(r.remaining() == 0);
  CHECK_THROWS_AS(r.u32(), FormatError);
}

TEST_CASE("rng state round trip and stream splitting") {
  Rng a(42);
  for (int i = 0; i < 5; ++i) a.next_u64();
  Rng b = Rng::restore(a.state());
  for (int i = 0; i < 10; ++i) CHECK(a.next_u64() == b.next_u64());
  Rng s1 = Rng(1).split(7), s2 = Rng(1).split(7), s3 = Rng(1).split(8);
  const auto x = s1.next_u64();
  CHECK(x == s2.next_u64());
  CHECK(x != s3.next_u64());
  Rng u(9);
  for (int i = 0; i < 1000; ++i) {
    const double v = u.uniform();
    CHECK(v >= 0.0);
    CHECK(v < 1.0);
    CHECK(u.below(5) < 5);
  }
}
