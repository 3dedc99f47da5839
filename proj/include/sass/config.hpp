#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "sass/data.hpp"
#include "sass/model.hpp"

namespace sass {

enum class TaskKind { Freq, Shapes };

// Everything a training run depends on. The text form is `key = value`
// lines with `#` comments; to_text() writes every key in a fixed order, so
// the echo stored in checkpoints is canonical.
struct TrainConfig {
  // data
  TaskKind task = TaskKind::Freq;
  std::string dataset;  // file to load instead of generating
  std::size_t length = 64;
  std::size_t num_classes = 3;
  std::size_t samples_per_class = 300;
  double noise_sigma = 0.1;
  bool gating_required = true;
  double distractor_ratio = 0.5;
  std::uint64_t data_seed = 1;
  std::size_t image_side = 32;
  std::size_t jitter = 3;
  std::size_t holdout_every = 5;

  // model
  std::size_t patch_size = 0;  // 0: 1 sample per token (freq) or 4x4 patches (shapes)
  std::size_t embed_dim = 16;
  std::size_t state_dim = 16;
  std::size_t gate_dim = 16;
  std::size_t depth = 1;
  std::size_t ffn_ratio = 2;
  spectral::ConvMode mode = spectral::ConvMode::Circular;
  double sigma_init = 0.02;
  bool learnable_sigma = false;
  bool sagu_first = false;
  bool gating_enabled = true;
  spectral::SaguGate sagu_gate = spectral::SaguGate::RealWeights;

  // optimization
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.05;
  double warmup_fraction = 0.1;
  double grad_clip = 0.0;  // 0 disables clipping
  std::size_t epochs = 30;
  std::size_t batch_size = 16;
  std::uint64_t seed = 0;
  std::size_t threads = 1;

  void validate() const;

  std::size_t effective_patch_size() const;
  // Model shape for this config; num_classes and sizes come from the data.
  model::ModelConfig model_config(const data::Dataset& ds) const;
  data::FreqTaskSpec freq_spec() const;
  data::ShapeImageSpec shape_spec() const;
};

// Sets one key from its text value. Throws ConfigError naming the key.
void apply_setting(TrainConfig& cfg, std::string_view key, std::string_view value);

// `source` names the input in error messages.
TrainConfig parse_config(std::string_view text, const std::string& source = "config");
TrainConfig load_config(const std::filesystem::path& path);
std::string to_text(const TrainConfig& cfg);

}  // namespace sass
