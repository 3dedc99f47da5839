#include "sass/checkpoint.hpp"

#include <algorithm>

#include "sass/binary_io.hpp"
#include "sass/error.hpp"

namespace sass {

namespace {

constexpr std::string_view kMagic = "SASSCKPT";

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& c) {
  const std::size_t n = c.params.size();
  if (c.opt_m.size() != c.opt_v.size() || (!c.opt_m.empty() && c.opt_m.size() != n)) {
    throw ShapeError("checkpoint: optimizer moments do not match parameters");
  }
  io::ByteWriter w;
  w.raw(kMagic);
  w.u32(kCheckpointVersion);
  w.str(c.config_text);
  w.u32(c.epoch);
  w.u32(static_cast<std::uint32_t>(n));
  for (const auto& p : c.params.params()) {
    w.str(p.name);
    w.u32(static_cast<std::uint32_t>(p.value.rank()));
    for (std::size_t d : p.value.shape()) w.u32(static_cast<std::uint32_t>(d));
    w.f64s(p.value.values());
  }
  w.str(c.rng_state);
  w.u64(c.opt_step);
  w.u32(static_cast<std::uint32_t>(c.opt_m.size()));
  for (std::size_t i = 0; i < c.opt_m.size(); ++i) {
    const std::size_t len = c.params.param(i).value.size();
    if (c.opt_m[i].size() != len || c.opt_v[i].size() != len) {
      throw ShapeError("checkpoint: moment size mismatch for '" + c.params.param(i).name + "'");
    }
    w.f64s(c.opt_m[i]);
    w.f64s(c.opt_v[i]);
  }
  io::append_crc(w.bytes());
  return std::move(w.bytes());
}

Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes) {
  const std::string what = "checkpoint";
  if (bytes.size() < kMagic.size() ||
      !std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) {
    throw FormatError("checkpoint: missing SASSCKPT header");
  }
  {
    io::ByteReader head(bytes, what);
    head.raw(kMagic.size());
    const std::uint32_t version = head.u32();
    if (version != kCheckpointVersion) {
      throw FormatError("checkpoint: unsupported version " + std::to_string(version) +
                        " (expected " + std::to_string(kCheckpointVersion) + ")");
    }
  }
  // Parse the structure first so truncation is reported as a format error,
  // then check the CRC.
  if (bytes.size() < kMagic.size() + 8) throw FormatError("checkpoint: truncated header");
  io::ByteReader r(bytes.first(bytes.size() - 4), what);
  r.raw(kMagic.size());
  r.u32();
  Checkpoint c;
  c.config_text = r.str();
  c.epoch = r.u32();
  const std::uint32_t n = r.u32();
  for (std::uint32_t i = 0; i < n; ++i) {
    std::string name = r.str();
    const std::uint32_t rank = r.u32();
    if (rank < 1 || rank > 3) throw FormatError("checkpoint: bad rank for '" + name + "'");
    std::vector<std::size_t> shape;
    std::size_t count = 1;
    for (std::uint32_t d = 0; d < rank; ++d) {
      shape.push_back(r.u32());
      if (shape.back() == 0 || shape.back() > r.remaining()) {
        throw FormatError("checkpoint: bad shape for '" + name + "'");
      }
      count *= shape.back();
    }
    if (count * 8 > r.remaining()) throw FormatError("checkpoint: truncated values for '" + name + "'");
    std::vector<double> values(count);
    r.f64s(values);
    c.params.add(std::move(name), Tensor(std::move(shape), std::move(values)));
  }
  c.rng_state = r.str();
  c.opt_step = r.u64();
  const std::uint32_t moments = r.u32();
  if (moments != 0 && moments != n) throw FormatError("checkpoint: bad optimizer moment count");
  for (std::uint32_t i = 0; i < moments; ++i) {
    const std::size_t len = c.params.param(i).value.size();
    c.opt_m.emplace_back(len);
    c.opt_v.emplace_back(len);
    r.f64s(c.opt_m.back());
    r.f64s(c.opt_v.back());
  }
  if (r.remaining() != 0) throw FormatError("checkpoint: trailing bytes before checksum");
  io::verify_crc(bytes, what);
  return c;
}

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  io::write_file(path, encode_checkpoint(ckpt));
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  return decode_checkpoint(io::read_file(path));
}

}  // namespace sass
