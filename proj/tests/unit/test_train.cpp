#include <cmath>
#include <string>

#include "doctest.h"
#include "sass/checkpoint.hpp"
#include "sass/config.hpp"
#include "sass/train.hpp"

using namespace sass;

namespace {

TrainConfig small_config() {
  TrainConfig c;
  c.samples_per_class = 10;
  c.length = 32;
  c.embed_dim = 8;
  c.state_dim = 4;
  c.gate_dim = 4;
  c.epochs = 2;
  c.batch_size = 4;
  return c;
}

}  // namespace

TEST_CASE("metrics formatting") {
  EpochMetrics m{3, "test", 0.5, 0.75};
  CHECK(format_metrics(m) == "3,test,0.5,0.75");
  CHECK(std::string(kMetricsHeader) == "epoch,split,loss,accuracy");
}

TEST_CASE("one epoch on a tiny task") {
  TrainConfig c = small_config();
  c.samples_per_class = 3;
  c.holdout_every = 3;
  c.epochs = 1;
  TrainResult r = train(c);
  REQUIRE(r.history.size() == 2);
  CHECK(r.history[0].split == "train");
  CHECK(r.history[1].split == "test");
  CHECK(std::isfinite(r.history[0].loss));
  CHECK(r.checkpoint.epoch == 1);
}

TEST_CASE("training is deterministic and independent of thread count") {
  TrainConfig c = small_config();
  TrainResult a = train(c);
  TrainResult b = train(c);
  c.threads = 3;
  TrainResult t = train(c);
  REQUIRE(a.history.size() == b.history.size());
  for (std::size_t i = 0; i < a.history.size(); ++i) {
    CHECK(format_metrics(a.history[i]) == format_metrics(b.history[i]));
    CHECK(format_metrics(a.history[i]) == format_metrics(t.history[i]));
  }
  CHECK(encode_checkpoint(a.checkpoint) == encode_checkpoint(b.checkpoint));
  // The stored config differs in the threads key only.
  t.checkpoint.config_text = a.checkpoint.config_text;
  CHECK(encode_checkpoint(a.checkpoint) == encode_checkpoint(t.checkpoint));
}

TEST_CASE("checkpointed model reproduces the final test metrics") {
  TrainConfig c = small_config();
  TrainResult r = train(c);
  data::Dataset ds = load_or_generate(c);
  model::Model m = model_from_checkpoint(r.checkpoint, ds);
  data::Split s = data::split_holdout(ds, c.holdout_every);
  EvalResult ev = evaluate(m, s.test);
  CHECK(ev.accuracy == r.history.back().accuracy);
  CHECK(ev.loss == r.history.back().loss);
  std::size_t total = 0;
  for (const auto& row : ev.confusion) {
    for (std::size_t v : row) total += v;
  }
  CHECK(total == s.test.size());
  CHECK(confusion_csv(ev).rfind("true_class,pred_0,pred_1,pred_2\n", 0) == 0);
}
