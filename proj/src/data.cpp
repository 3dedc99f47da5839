#include "sass/data.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "sass/binary_io.hpp"
#include "sass/error.hpp"
#include "sass/numerics.hpp"
#include "sass/rng.hpp"

namespace sass::data {

namespace {

constexpr char kMagic[] = "SASSDS1";
constexpr std::size_t kMagicLen = 7;

}  // namespace

void Dataset::validate() const {
  if (values.size() != labels.size() * length) {
    throw ShapeError("dataset: " + std::to_string(values.size()) + " values for " +
                     std::to_string(labels.size()) + " samples of length " +
                     std::to_string(length));
  }
  for (std::uint32_t y : labels) {
    if (y >= num_classes) {
      throw FormatError("dataset: label " + std::to_string(y) + " out of range for " +
                        std::to_string(num_classes) + " classes");
    }
  }
}

std::vector<Band> default_bands(std::size_t length, std::size_t num_classes) {
  if (num_classes == 0) throw ConfigError("freq task: num_classes must be >= 1");
  const std::size_t available = length / 2 > 1 ? length / 2 - 1 : 0;
  if (available < 2 * num_classes - 1) {
    throw ConfigError("freq task: L = " + std::to_string(length) + " has too few bins for " +
                      std::to_string(num_classes) + " bands");
  }
  const std::size_t width = (available - (num_classes - 1)) / num_classes;
  std::vector<Band> bands;
  for (std::size_t c = 0; c < num_classes; ++c) {
    const std::size_t low = 1 + c * (width + 1);
    bands.push_back({low, low + width - 1});
  }
  return bands;
}

std::vector<Band> FreqTaskSpec::resolved_bands() const {
  return bands.empty() ? default_bands(length, num_classes) : bands;
}

void FreqTaskSpec::validate() const {
  if (length == 0) throw ConfigError("freq task: L must be >= 1");
  if (num_classes == 0) throw ConfigError("freq task: num_classes must be >= 1");
  if (!(noise_sigma >= 0.0)) throw ConfigError("freq task: noise_sigma must be >= 0");
  if (!(amp_lo > 0.0 && amp_hi >= amp_lo)) throw ConfigError("freq task: bad amplitude range");
  if (!(distractor_ratio >= 0.0 && distractor_ratio < 1.0)) {
    throw ConfigError("freq task: distractor_ratio must be in [0, 1)");
  }
  const auto b = resolved_bands();
  if (b.size() != num_classes) {
    throw ConfigError("freq task: " + std::to_string(b.size()) + " bands for " +
                      std::to_string(num_classes) + " classes");
  }
  for (std::size_t i = 0; i < b.size(); ++i) {
    if (b[i].low > b[i].high || 2 * b[i].high >= length) {
      throw ConfigError("freq task: band " + std::to_string(i) + " must satisfy low <= high < L/2");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (b[i].low <= b[j].high && b[j].low <= b[i].high) {
        throw ConfigError("freq task: bands " + std::to_string(j) + " and " +
                          std::to_string(i) + " overlap");
      }
    }
  }
}

Dataset gen_freq_task(const FreqTaskSpec& spec) {
  spec.validate();
  const auto bands = spec.resolved_bands();
  const std::size_t l = spec.length;
  const std::size_t c = spec.num_classes;
  const std::size_t n = c * spec.samples_per_class;
  Dataset ds{l, c, std::vector<double>(n * l, 0.0), std::vector<std::uint32_t>(n)};
  Rng rng(spec.seed);

  auto add_tone = [&](double* x, const Band& band, double amp) {
    const std::size_t bin = band.low + rng.below(band.high - band.low + 1);
    const double phase = 2.0 * std::numbers::pi * rng.uniform();
    for (std::size_t t = 0; t < l; ++t) {
      const std::size_t m = (bin * t) % l;
      x[t] += amp * std::cos(2.0 * std::numbers::pi * static_cast<double>(m) /
                                 static_cast<double>(l) + phase);
    }
  };

  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t label = i % c;
    ds.labels[i] = static_cast<std::uint32_t>(label);
    double* x = ds.values.data() + i * l;
    if (spec.gating_required) {
      const double amp = rng.uniform(spec.amp_lo, spec.amp_hi);
      for (std::size_t b = 0; b < c; ++b) {
        add_tone(x, bands[b], b == label ? amp : amp * spec.distractor_ratio);
      }
    } else {
      add_tone(x, bands[label], 1.0);
    }
    if (spec.noise_sigma > 0.0) {
      for (std::size_t t = 0; t < l; ++t) x[t] += rng.normal(0.0, spec.noise_sigma);
    }
  }
  return ds;
}

std::vector<double> band_energies(std::span<const double> signal, const std::vector<Band>& bands) {
  const ComplexVec spec = fft(ComplexVec::from_real(signal));
  std::vector<double> e;
  for (const Band& b : bands) {
    double s = 0.0;
    for (std::size_t k = b.low; k <= b.high && k < spec.size(); ++k) {
      s += spec.re[k] * spec.re[k] + spec.im[k] * spec.im[k];
    }
    e.push_back(s);
  }
  return e;
}

std::size_t band_energy_classify(std::span<const double> signal, const std::vector<Band>& bands) {
  const auto e = band_energies(signal, bands);
  return static_cast<std::size_t>(std::max_element(e.begin(), e.end()) - e.begin());
}

void ShapeImageSpec::validate() const {
  if (side < 16) throw ConfigError("shape images: side must be >= 16");
  if (num_classes == 0 || num_classes > kShapeCount) {
    throw ConfigError("shape images: num_classes must be in [1, " + std::to_string(kShapeCount) +
                      "]");
  }
  if (jitter >= side / 8) throw ConfigError("shape images: jitter must be < side / 8");
  if (!(noise_sigma >= 0.0)) throw ConfigError("shape images: noise_sigma must be >= 0");
}

std::vector<double> shape_template(Shape shape, std::size_t side) {
  std::vector<double> img(side * side, 0.0);
  const long s = static_cast<long>(side);
  const long c = s / 2;
  const long half = s / 4;                    // half-extent of bars and boxes
  const long thick = std::max(1L, s / 32);    // half-thickness of strokes
  const long radius = s / 5;
  for (long i = 0; i < s; ++i) {
    for (long j = 0; j < s; ++j) {
      const long di = i - c;
      const long dj = j - c;
      bool on = false;
      const bool hbar = std::abs(di) <= thick && dj >= -half && dj < half;
      const bool vbar = std::abs(dj) <= thick && di >= -half && di < half;
      switch (shape) {
        case Shape::HBar: on = hbar; break;
        case Shape::VBar: on = vbar; break;
        case Shape::Disk: on = di * di + dj * dj <= radius * radius; break;
        case Shape::Cross: on = hbar || vbar; break;
        case Shape::Ring: {
          const long m = std::max(std::abs(di), std::abs(dj));
          on = m <= half - 1 && m >= half - 1 - thick;
          break;
        }
        case Shape::Diagonal:
          on = std::abs(di - dj) <= thick && di >= -half && di < half;
          break;
      }
      if (on) img[static_cast<std::size_t>(i * s + j)] = 1.0;
    }
  }
  return img;
}

namespace {

// out[i][j] = img[i - dy][j - dx], zero outside the canvas.
void shift_into(const std::vector<double>& img, std::size_t side, long dy, long dx,
                std::vector<double>& out) {
  const long s = static_cast<long>(side);
  std::fill(out.begin(), out.end(), 0.0);
  for (long i = 0; i < s; ++i) {
    const long si = i - dy;
    if (si < 0 || si >= s) continue;
    for (long j = 0; j < s; ++j) {
      const long sj = j - dx;
      if (sj < 0 || sj >= s) continue;
      out[static_cast<std::size_t>(i * s + j)] = img[static_cast<std::size_t>(si * s + sj)];
    }
  }
}

}  // namespace

Dataset gen_shape_images(const ShapeImageSpec& spec) {
  spec.validate();
  const std::size_t px = spec.side * spec.side;
  const std::size_t c = spec.num_classes;
  const std::size_t n = c * spec.samples_per_class;
  Dataset ds{px, c, std::vector<double>(n * px, 0.0), std::vector<std::uint32_t>(n)};
  std::vector<std::vector<double>> templates;
  for (std::size_t k = 0; k < c; ++k) {
    templates.push_back(shape_template(static_cast<Shape>(k), spec.side));
  }
  Rng rng(spec.seed);
  std::vector<double> shifted(px);
  const long j = static_cast<long>(spec.jitter);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t label = i % c;
    ds.labels[i] = static_cast<std::uint32_t>(label);
    const long dy = static_cast<long>(rng.below(2 * spec.jitter + 1)) - j;
    const long dx = static_cast<long>(rng.below(2 * spec.jitter + 1)) - j;
    shift_into(templates[label], spec.side, dy, dx, shifted);
    double* x = ds.values.data() + i * px;
    for (std::size_t p = 0; p < px; ++p) {
      x[p] = shifted[p] + (spec.noise_sigma > 0.0 ? rng.normal(0.0, spec.noise_sigma) : 0.0);
    }
  }
  return ds;
}

std::size_t template_classify(std::span<const double> image, const ShapeImageSpec& spec) {
  if (image.size() != spec.side * spec.side) throw ShapeError("template_classify: image size");
  double img_norm = 0.0;
  for (double v : image) img_norm += v * v;
  img_norm = std::sqrt(img_norm);
  std::vector<double> shifted(image.size());
  std::size_t best = 0;
  double best_score = -2.0;
  const long j = static_cast<long>(spec.jitter);
  for (std::size_t k = 0; k < spec.num_classes; ++k) {
    const auto t = shape_template(static_cast<Shape>(k), spec.side);
    for (long dy = -j; dy <= j; ++dy) {
      for (long dx = -j; dx <= j; ++dx) {
        shift_into(t, spec.side, dy, dx, shifted);
        double dot = 0.0;
        double tn = 0.0;
        for (std::size_t p = 0; p < image.size(); ++p) {
          dot += image[p] * shifted[p];
          tn += shifted[p] * shifted[p];
        }
        const double score = dot / (std::sqrt(tn) * img_norm + 1e-300);
        if (score > best_score) {
          best_score = score;
          best = k;
        }
      }
    }
  }
  return best;
}

Dataset subset(const Dataset& ds, std::span<const std::size_t> indices) {
  Dataset out{ds.length, ds.num_classes, {}, {}};
  out.values.reserve(indices.size() * ds.length);
  for (std::size_t i : indices) {
    const auto s = ds.sample(i);
    out.values.insert(out.values.end(), s.begin(), s.end());
    out.labels.push_back(ds.labels.at(i));
  }
  return out;
}

Split split_holdout(const Dataset& ds, std::size_t every) {
  if (every < 2) throw ConfigError("split: hold-out period must be >= 2");
  std::vector<std::size_t> seen(ds.num_classes, 0);
  std::vector<std::size_t> train, test;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const std::size_t k = seen[ds.labels[i]]++;
    (k % every == every - 1 ? test : train).push_back(i);
  }
  return {subset(ds, train), subset(ds, test)};
}

std::vector<std::uint8_t> encode_dataset(const Dataset& ds) {
  ds.validate();
  io::ByteWriter w;
  w.raw(std::string_view(kMagic, kMagicLen));
  w.u32(static_cast<std::uint32_t>(ds.size()));
  w.u32(static_cast<std::uint32_t>(ds.length));
  w.u32(static_cast<std::uint32_t>(ds.num_classes));
  for (std::uint32_t y : ds.labels) w.u32(y);
  w.f64s(ds.values);
  io::append_crc(w.bytes());
  return std::move(w.bytes());
}

Dataset decode_dataset(std::span<const std::uint8_t> bytes) {
  const std::string what = "dataset";
  if (bytes.size() < kMagicLen ||
      !std::equal(bytes.begin(), bytes.begin() + kMagicLen, kMagic)) {
    throw FormatError("dataset: missing SASSDS1 header");
  }
  // Sizes are checked before the checksum so truncation reads as a format
  // error rather than a corrupted file.
  io::ByteReader head(bytes, what);
  head.raw(kMagicLen);
  Dataset ds;
  const std::size_t count = head.u32();
  ds.length = head.u32();
  ds.num_classes = head.u32();
  const std::size_t expect = 4 * count + 8 * count * ds.length + 4;
  if (head.remaining() != expect) {
    throw FormatError("dataset: " + std::to_string(head.remaining()) +
                      " bytes after header, expected " + std::to_string(expect));
  }
  const auto body = io::verify_crc(bytes, what);
  io::ByteReader r(body, what);
  r.raw(kMagicLen + 12);
  ds.labels.resize(count);
  for (auto& y : ds.labels) y = r.u32();
  ds.values.resize(count * ds.length);
  r.f64s(ds.values);
  ds.validate();
  return ds;
}

void write_dataset(const std::filesystem::path& path, const Dataset& ds) {
  io::write_file(path, encode_dataset(ds));
}

Dataset read_dataset(const std::filesystem::path& path) {
  return decode_dataset(io::read_file(path));
}

}  // namespace sass::data
