#include "sass/train.hpp"

#include <charconv>
#include <cmath>
#include <numeric>
#include <thread>

#include "sass/autodiff.hpp"
#include "sass/error.hpp"
#include "sass/rng.hpp"

namespace sass {

namespace {

std::string fmt(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

// Runs fn(i) for i in [0, n) on up to `threads` workers, contiguous chunks.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t threads, Fn&& fn) {
  threads = std::max<std::size_t>(1, std::min(threads, n));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(threads);
  const std::size_t chunk = (n + threads - 1) / threads;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        const std::size_t end = std::min(n, (t + 1) * chunk);
        for (std::size_t i = t * chunk; i < end; ++i) fn(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

std::string format_metrics(const EpochMetrics& m) {
  return std::to_string(m.epoch) + ',' + m.split + ',' + fmt(m.loss) + ',' + fmt(m.accuracy);
}

EvalResult evaluate(const model::Model& m, const data::Dataset& ds, std::size_t threads) {
  const std::size_t n = ds.size();
  const std::size_t c = m.config().num_classes;
  if (ds.num_classes > c) {
    throw ShapeError("evaluate: dataset has " + std::to_string(ds.num_classes) +
                     " classes, model has " + std::to_string(c));
  }
  std::vector<double> losses(n);
  std::vector<std::size_t> preds(n);
  parallel_for(n, threads, [&](std::size_t i) {
    const auto logits = m.forward(ds.sample(i));
    const auto ce = model::softmax_cross_entropy(logits, ds.labels[i]);
    losses[i] = ce.loss;
    preds[i] = ce.predicted;
  });
  EvalResult r;
  r.confusion.assign(c, std::vector<std::size_t>(c, 0));
  std::size_t correct = 0;
  for (std::size_t i = 0; i < n; ++i) {
    r.loss += losses[i];
    ++r.confusion[ds.labels[i]][preds[i]];
    correct += preds[i] == ds.labels[i];
  }
  if (n > 0) {
    r.loss /= static_cast<double>(n);
    r.accuracy = static_cast<double>(correct) / static_cast<double>(n);
  }
  return r;
}

std::string confusion_csv(const EvalResult& r) {
  std::string s = "true_class";
  for (std::size_t j = 0; j < r.confusion.size(); ++j) s += ",pred_" + std::to_string(j);
  s += '\n';
  for (std::size_t i = 0; i < r.confusion.size(); ++i) {
    s += std::to_string(i);
    for (std::size_t v : r.confusion[i]) s += ',' + std::to_string(v);
    s += '\n';
  }
  return s;
}

data::Dataset load_or_generate(const TrainConfig& cfg) {
  if (!cfg.dataset.empty()) return data::read_dataset(cfg.dataset);
  return cfg.task == TaskKind::Freq ? data::gen_freq_task(cfg.freq_spec())
                                    : data::gen_shape_images(cfg.shape_spec());
}

model::Model model_from_checkpoint(const Checkpoint& ckpt, const data::Dataset& ds) {
  const TrainConfig cfg = parse_config(ckpt.config_text, "checkpoint config");
  return model::Model(cfg.model_config(ds), ckpt.params);
}

TrainResult train(const TrainConfig& cfg, const MetricsSink& sink) {
  cfg.validate();
  const data::Dataset all = load_or_generate(cfg);
  const data::Split split = data::split_holdout(all, cfg.holdout_every);
  if (split.train.size() == 0) throw EmptyInputError("train: no training samples");

  model::Model net(cfg.model_config(all), cfg.seed);
  autodiff::ParamStore& store = net.params();
  autodiff::AdamW opt;
  opt.lr = cfg.lr;
  opt.beta1 = cfg.beta1;
  opt.beta2 = cfg.beta2;
  opt.eps = cfg.eps;
  opt.weight_decay = cfg.weight_decay;
  opt.init(store);

  const Rng order_rng = Rng(cfg.seed).split(0x5348554646ULL);
  const std::size_t n = split.train.size();
  const std::size_t steps_per_epoch = (n + cfg.batch_size - 1) / cfg.batch_size;
  const std::size_t total_steps = steps_per_epoch * cfg.epochs;
  const auto warmup_steps = static_cast<std::size_t>(
      std::llround(cfg.warmup_fraction * static_cast<double>(total_steps)));

  std::vector<autodiff::GradSet> per_sample(cfg.batch_size, autodiff::GradSet::zeros_like(store));
  autodiff::GradSet total = autodiff::GradSet::zeros_like(store);
  std::vector<double> losses(cfg.batch_size);
  std::vector<std::size_t> hits(cfg.batch_size);

  TrainResult result;
  std::size_t step = 0;
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    // Fisher-Yates with a stream that depends only on (seed, epoch).
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng shuffle = order_rng.split(epoch);
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[shuffle.below(i)]);

    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      const std::size_t b = std::min(cfg.batch_size, n - start);
      parallel_for(b, cfg.threads, [&](std::size_t j) {
        per_sample[j].zero();
        const std::size_t idx = order[start + j];
        const auto ce = net.loss_and_grad(split.train.sample(idx), split.train.labels[idx],
                                          per_sample[j]);
        losses[j] = ce.loss;
        hits[j] = ce.predicted == split.train.labels[idx];
      });
      total.zero();
      for (std::size_t j = 0; j < b; ++j) {
        total.add(per_sample[j]);
        loss_sum += losses[j];
        correct += hits[j];
      }
      if (!std::isfinite(loss_sum)) {
        throw InstabilityError("train: non-finite loss in epoch " + std::to_string(epoch));
      }
      const double inv_b = 1.0 / static_cast<double>(b);
      for (auto& buf : total.buffers) {
        for (double& g : buf) g *= inv_b;
      }
      autodiff::copy_into_store(total, store);
      if (cfg.grad_clip > 0.0) autodiff::clip_grad_norm(store, cfg.grad_clip);
      ++step;
      autodiff::adamw_step(store, opt,
                           autodiff::lr_schedule(step, total_steps, warmup_steps, cfg.lr));
    }

    EpochMetrics tr{epoch, "train", loss_sum / static_cast<double>(n),
                    static_cast<double>(correct) / static_cast<double>(n)};
    result.history.push_back(tr);
    if (sink) sink(tr);
    if (split.test.size() > 0) {
      const EvalResult ev = evaluate(net, split.test, cfg.threads);
      EpochMetrics te{epoch, "test", ev.loss, ev.accuracy};
      result.history.push_back(te);
      if (sink) sink(te);
      result.final_test_accuracy = ev.accuracy;
      result.best_test_accuracy = std::max(result.best_test_accuracy, ev.accuracy);
    }
  }

  Checkpoint& ck = result.checkpoint;
  ck.config_text = to_text(cfg);
  ck.epoch = static_cast<std::uint32_t>(cfg.epochs);
  ck.params = store;
  ck.rng_state = order_rng.state();
  ck.opt_step = opt.step;
  ck.opt_m = opt.m;
  ck.opt_v = opt.v;
  return result;
}

}  // namespace sass
