#pragma once

#include <cstddef>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "sass/checkpoint.hpp"
#include "sass/config.hpp"
#include "sass/data.hpp"
#include "sass/model.hpp"

namespace sass {

struct EpochMetrics {
  std::size_t epoch = 0;
  std::string split;  // "train" or "test"
  double loss = 0.0;
  double accuracy = 0.0;
};

inline constexpr const char* kMetricsHeader = "epoch,split,loss,accuracy";
std::string format_metrics(const EpochMetrics& m);

struct EvalResult {
  double loss = 0.0;
  double accuracy = 0.0;
  std::vector<std::vector<std::size_t>> confusion;  // [true][predicted]
};

EvalResult evaluate(const model::Model& m, const data::Dataset& ds, std::size_t threads = 1);
// CSV with header true_class,pred_0,...,pred_{C-1}.
std::string confusion_csv(const EvalResult& r);

// Reads cfg.dataset when set, otherwise generates the configured task.
data::Dataset load_or_generate(const TrainConfig& cfg);

struct TrainResult {
  std::vector<EpochMetrics> history;
  Checkpoint checkpoint;
  double final_test_accuracy = 0.0;
  double best_test_accuracy = 0.0;
};

// Called with each metrics row as soon as it is available.
using MetricsSink = std::function<void(const EpochMetrics&)>;

// Mini-batch AdamW with linear warmup and cosine decay. Per-sample
// gradients are summed in sample order, so results do not depend on
// cfg.threads.
TrainResult train(const TrainConfig& cfg, const MetricsSink& sink = {});

// Rebuilds the model stored in a checkpoint.
model::Model model_from_checkpoint(const Checkpoint& ckpt, const data::Dataset& ds);

}  // namespace sass
