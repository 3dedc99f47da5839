#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

// Deterministic synthetic classification datasets and their file format.
namespace sass::data {

struct Dataset {
  std::size_t length = 0;  // values per sample (L, or side^2 for images)
  std::size_t num_classes = 0;
  std::vector<double> values;  // samples x length, row-major
  std::vector<std::uint32_t> labels;

  std::size_t size() const { return labels.size(); }
  std::span<const double> sample(std::size_t i) const {
    return std::span<const double>(values).subspan(i * length, length);
  }
  void validate() const;
  bool operator==(const Dataset&) const = default;
};

// Inclusive range of DFT bins.
struct Band {
  std::size_t low = 0;
  std::size_t high = 0;
  bool operator==(const Band&) const = default;
};

struct FreqTaskSpec {
  std::size_t length = 64;
  std::size_t num_classes = 3;
  std::vector<Band> bands;  // one per class; empty selects default_bands()
  double noise_sigma = 0.0;
  std::size_t samples_per_class = 300;
  std::uint64_t seed = 0;
  // Every sample carries a tone in every band. The labelled band has
  // amplitude a, the others a * distractor_ratio, with a ~ U[amp_lo, amp_hi]
  // per sample. Only the ratio of band energies identifies the class.
  bool gating_required = false;
  double distractor_ratio = 0.5;
  double amp_lo = 0.5;
  double amp_hi = 2.0;

  std::vector<Band> resolved_bands() const;
  void validate() const;
};

// Splits bins [1, L/2) into num_classes equal bands separated by one-bin gaps.
std::vector<Band> default_bands(std::size_t length, std::size_t num_classes);

// Samples are interleaved by class (sample i has label i mod C). Each band
// contributes one cosine at a uniformly drawn bin with a uniform phase.
Dataset gen_freq_task(const FreqTaskSpec& spec);

// Sum of |X_k|^2 over each band's bins.
std::vector<double> band_energies(std::span<const double> signal, const std::vector<Band>& bands);
std::size_t band_energy_classify(std::span<const double> signal, const std::vector<Band>& bands);

enum class Shape : std::uint32_t { HBar, VBar, Disk, Cross, Ring, Diagonal };
inline constexpr std::size_t kShapeCount = 6;

struct ShapeImageSpec {
  std::size_t side = 32;
  std::size_t num_classes = 4;  // first num_classes entries of Shape
  std::size_t jitter = 3;       // max shift in pixels along each axis
  double noise_sigma = 0.0;
  std::size_t samples_per_class = 100;
  std::uint64_t seed = 0;

  void validate() const;
};

// Centered template of a shape on a side x side canvas, values in {0, 1}.
std::vector<double> shape_template(Shape shape, std::size_t side);
Dataset gen_shape_images(const ShapeImageSpec& spec);
// Argmax over classes and shifts within +-jitter of the normalized
// correlation between the image and a shifted template.
std::size_t template_classify(std::span<const double> image, const ShapeImageSpec& spec);

struct Split {
  Dataset train;
  Dataset test;
};

// Stratified hold-out: the k-th sample of each class goes to test when
// k % every == every - 1, so every = 5 holds out 20%.
Split split_holdout(const Dataset& ds, std::size_t every = 5);

Dataset subset(const Dataset& ds, std::span<const std::size_t> indices);

// File format, little-endian:
//   "SASSDS1" | u32 count | u32 length | u32 classes | u32 labels[count]
//   | f64 values[count * length] | u32 CRC32 of all preceding bytes
std::vector<std::uint8_t> encode_dataset(const Dataset& ds);
Dataset decode_dataset(std::span<const std::uint8_t> bytes);
void write_dataset(const std::filesystem::path& path, const Dataset& ds);
Dataset read_dataset(const std::filesystem::path& path);

}  // namespace sass::data
