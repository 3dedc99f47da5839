#include "sass/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "sass/error.hpp"
#include "sass/rng.hpp"

namespace sass::autodiff {

ParamId ParamStore::add(std::string name, Tensor value, bool trainable, bool decay) {
  for (const Param& p : params_) {
    if (p.name == name) throw ConfigError("ParamStore: duplicate parameter name '" + name + "'");
  }
  Tensor grad(value.shape());
  params_.push_back(Param{std::move(name), std::move(value), std::move(grad), trainable, decay});
  return params_.size() - 1;
}

ParamId ParamStore::find(const std::string& name) const {
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (params_[i].name == name) return i;
  }
  throw ConfigError("ParamStore: no parameter named '" + name + "'");
}

void ParamStore::zero_grads() {
  for (Param& p : params_) p.grad.fill(0.0);
}

std::size_t ParamStore::total_values() const {
  std::size_t n = 0;
  for (const Param& p : params_) n += p.value.size();
  return n;
}

GradSet GradSet::zeros_like(const ParamStore& store) {
  GradSet g;
  g.buffers.reserve(store.size());
  for (const Param& p : store.params()) g.buffers.emplace_back(p.value.size(), 0.0);
  return g;
}

void GradSet::zero() {
  for (auto& b : buffers) std::fill(b.begin(), b.end(), 0.0);
}

void GradSet::add(const GradSet& other) {
  for (std::size_t i = 0; i < buffers.size(); ++i) {
    auto& dst = buffers[i];
    const auto& src = other.buffers[i];
    for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += src[j];
  }
}

void copy_into_store(const GradSet& grads, ParamStore& store) {
  for (std::size_t i = 0; i < store.size(); ++i) {
    auto dst = store.grad(i);
    std::copy(grads.buffers[i].begin(), grads.buffers[i].end(), dst.begin());
  }
}

double relative_error(double analytic, double numeric, double floor) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / denom;
}

GradCheckReport grad_check(ParamStore& store, const LossFn& fn, double tol, double h,
                           std::size_t sample_per_tensor, std::uint64_t seed) {
  auto eval = [&]() {
    const double v = fn(store);
    if (!std::isfinite(v)) throw InstabilityError("grad_check: loss is not finite");
    return v;
  };
  // Central differences carry roundoff of about eps * |f| / h, so the floor
  // under the relative error scales with the loss.
  const double floor = 1e-6 * std::max(1.0, std::abs(eval()));
  std::vector<std::vector<double>> analytic;
  for (std::size_t i = 0; i < store.size(); ++i) {
    auto g = store.grad(i);
    analytic.emplace_back(g.begin(), g.end());
  }

  Rng rng(seed);
  GradCheckReport report;
  for (std::size_t pid = 0; pid < store.size(); ++pid) {
    if (!store.param(pid).trainable) continue;
    auto values = store.value(pid);
    std::vector<std::size_t> coords(values.size());
    std::iota(coords.begin(), coords.end(), std::size_t{0});
    if (coords.size() > sample_per_tensor) {
      // Partial Fisher-Yates for a deterministic sample.
      for (std::size_t i = 0; i < sample_per_tensor; ++i) {
        std::swap(coords[i], coords[i + rng.below(coords.size() - i)]);
      }
      coords.resize(sample_per_tensor);
    }
    for (std::size_t idx : coords) {
      const double saved = values[idx];
      values[idx] = saved + h;
      const double up = eval();
      values[idx] = saved - h;
      const double down = eval();
      values[idx] = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double a = analytic[pid][idx];
      const double rel = relative_error(a, numeric, floor);
      ++report.checked;
      if (rel >= report.max_rel_error) {
        report.max_rel_error = rel;
        report.worst = {store.param(pid).name, idx, a, numeric, rel};
      }
    }
  }
  // Leave the store holding the analytic gradient at the unperturbed point.
  for (std::size_t i = 0; i < store.size(); ++i) {
    auto g = store.grad(i);
    std::copy(analytic[i].begin(), analytic[i].end(), g.begin());
  }
  report.passed = report.max_rel_error < tol;
  return report;
}

void AdamW::init(const ParamStore& store) {
  m.clear();
  v.clear();
  for (const Param& p : store.params()) {
    m.emplace_back(p.value.size(), 0.0);
    v.emplace_back(p.value.size(), 0.0);
  }
  step = 0;
}

void adamw_step(ParamStore& store, AdamW& opt, double lr) {
  if (opt.m.size() != store.size()) opt.init(store);
  ++opt.step;
  const double t = static_cast<double>(opt.step);
  const double bc1 = 1.0 - std::pow(opt.beta1, t);
  const double bc2 = 1.0 - std::pow(opt.beta2, t);
  for (std::size_t pid = 0; pid < store.size(); ++pid) {
    Param& p = store.param(pid);
    if (!p.trainable) continue;
    auto theta = p.value.values();
    auto grad = p.grad.values();
    auto& m = opt.m[pid];
    auto& v = opt.v[pid];
    const double decay = p.decay ? lr * opt.weight_decay : 0.0;
    for (std::size_t i = 0; i < theta.size(); ++i) {
      const double g = grad[i];
      m[i] = opt.beta1 * m[i] + (1.0 - opt.beta1) * g;
      v[i] = opt.beta2 * v[i] + (1.0 - opt.beta2) * g * g;
      const double m_hat = m[i] / bc1;
      const double v_hat = v[i] / bc2;
      theta[i] -= decay * theta[i];
      theta[i] -= lr * m_hat / (std::sqrt(v_hat) + opt.eps);
    }
  }
}

double lr_schedule(std::size_t step, std::size_t total_steps, std::size_t warmup_steps,
                   double base_lr) {
  if (step < warmup_steps) {
    return base_lr * static_cast<double>(step) / static_cast<double>(warmup_steps);
  }
  if (total_steps <= warmup_steps) return base_lr;
  const double progress = std::min(
      1.0, static_cast<double>(step - warmup_steps) / static_cast<double>(total_steps - warmup_steps));
  return base_lr * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

double clip_grad_norm(ParamStore& store, double max_norm) {
  double sq = 0.0;
  for (std::size_t pid = 0; pid < store.size(); ++pid) {
    if (!store.param(pid).trainable) continue;
    for (double g : store.grad(pid)) sq += g * g;
  }
  const double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0.0) {
    const double f = max_norm / norm;
    for (std::size_t pid = 0; pid < store.size(); ++pid) {
      if (!store.param(pid).trainable) continue;
      for (double& g : store.grad(pid)) g *= f;
    }
  }
  return norm;
}

}  // namespace sass::autodiff
