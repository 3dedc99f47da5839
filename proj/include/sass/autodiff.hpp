#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "sass/tensor.hpp"

namespace sass::autodiff {

using ParamId = std::size_t;

struct Param {
  std::string name;
  Tensor value;
  Tensor grad;
  bool trainable = true;
  bool decay = true;  // subject to decoupled weight decay
};

// Named parameters with matching gradient buffers, in registration order.
class ParamStore {
 public:
  ParamId add(std::string name, Tensor value, bool trainable = true, bool decay = true);

  std::size_t size() const { return params_.size(); }
  const Param& param(ParamId id) const { return params_.at(id); }
  Param& param(ParamId id) { return params_.at(id); }
  ParamId find(const std::string& name) const;

  std::span<double> value(ParamId id) { return params_.at(id).value.values(); }
  std::span<const double> value(ParamId id) const { return params_.at(id).value.values(); }
  std::span<double> grad(ParamId id) { return params_.at(id).grad.values(); }

  void zero_grads();
  std::size_t total_values() const;
  const std::vector<Param>& params() const { return params_; }

 private:
  std::vector<Param> params_;
};

// Gradient buffers shaped like a store, for per-sample accumulation.
struct GradSet {
  std::vector<std::vector<double>> buffers;

  static GradSet zeros_like(const ParamStore& store);
  std::span<double> operator[](ParamId id) { return buffers[id]; }
  void zero();
  // this += other, parameter by parameter in registration order
  void add(const GradSet& other);
};

void copy_into_store(const GradSet& grads, ParamStore& store);

// A loss over the store. It must overwrite store gradients with the analytic
// gradient of the value it returns.
using LossFn = std::function<double(ParamStore&)>;

struct GradCheckEntry {
  std::string param;
  std::size_t index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  double rel_error = 0.0;
};

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  bool passed = false;
  GradCheckEntry worst;
};

// Relative error |a - n| / max(|a|, |n|, floor).
double relative_error(double analytic, double numeric, double floor = 1e-6);

// Central differences (f(x + h) - f(x - h)) / 2h on every coordinate of
// tensors with at most `sample_per_tensor` entries, and on that many
// coordinates drawn with `seed` otherwise. Errors use
// relative_error(a, n, 1e-6 * max(1, |f|)). Throws InstabilityError on a
// non-finite loss.
GradCheckReport grad_check(ParamStore& store, const LossFn& fn, double tol = 1e-4,
                           double h = 1e-5, std::size_t sample_per_tensor = 64,
                           std::uint64_t seed = 0);

struct AdamW {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.05;
  std::uint64_t step = 0;
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;

  void init(const ParamStore& store);
};

// One decoupled-weight-decay Adam update using store gradients at `lr`:
//   theta <- theta - lr * wd * theta - lr * m_hat / (sqrt(v_hat) + eps)
void adamw_step(ParamStore& store, AdamW& opt, double lr);
inline void adamw_step(ParamStore& store, AdamW& opt) { adamw_step(store, opt, opt.lr); }

// Linear warmup from 0 to base_lr over warmup_steps, then cosine decay to 0
// at total_steps.
double lr_schedule(std::size_t step, std::size_t total_steps, std::size_t warmup_steps,
                   double base_lr);

// Rescales trainable gradients so their global L2 norm is at most max_norm.
// Returns the norm before clipping.
double clip_grad_norm(ParamStore& store, double max_norm);

}  // namespace sass::autodiff
