#include <cmath>
#include <string>

#include "doctest.h"
#include "sass/autodiff.hpp"
#include "sass/error.hpp"
#include "sass/rng.hpp"
#include "sass/verify.hpp"

using namespace sass;
using namespace sass::autodiff;

namespace {

ParamStore scalar_store(double theta) {
  ParamStore s;
  s.add("theta", Tensor({1}, {theta}));
  return s;
}

}  // namespace

TEST_CASE("param store naming") {
  ParamStore s;
  const ParamId a = s.add("a", Tensor({2, 3}));
  const ParamId b = s.add("b", Tensor({4}), false, false);
  CHECK(s.find("a") == a);
  CHECK(s.find("b") == b);
  CHECK(s.total_values() == 10);
  CHECK_THROWS_AS(s.add("a", Tensor({1})), ConfigError);
  CHECK_THROWS_AS(s.find("missing"), ConfigError);
}

TEST_CASE("grad_check on a quadratic") {
  Rng rng(1);
  ParamStore s;
  const ParamId id = s.add("w", Tensor({50}));
  for (auto& v : s.value(id)) v = rng.normal();
  auto half_sq = [id](ParamStore& st) {
    double f = 0.0;
    for (double v : st.value(id)) f += 0.5 * v * v;
    return f;
  };
  auto g = s.grad(id);
  auto w = s.value(id);
  for (std::size_t i = 0; i < w.size(); ++i) g[i] = w[i];
  // Central differences are exact on a quadratic, so a wide step only
  // shrinks the roundoff.
  GradCheckReport r = grad_check(s, half_sq, 1e-10, 1e-3);
  CHECK(r.passed);
  CHECK(r.checked == 50);
  CHECK(r.max_rel_error < 1e-10);

  s.zero_grads();
  GradCheckReport c = grad_check(s, [](ParamStore&) { return 3.0; }, 1e-10, 1e-5);
  CHECK(c.passed);
  CHECK(c.max_rel_error == 0.0);
}

TEST_CASE("grad_check catches a wrong gradient") {
  ParamStore s = scalar_store(2.0);
  s.grad(0)[0] = 1.0;  // true gradient of theta^2 is 4
  GradCheckReport r = grad_check(s, [](ParamStore& st) { return st.value(0)[0] * st.value(0)[0]; });
  CHECK_FALSE(r.passed);
  CHECK(r.worst.param == "theta");
  CHECK(r.worst.numeric == doctest::Approx(4.0).epsilon(1e-8));
}

TEST_CASE("grad_check samples at most the requested coordinates") {
  ParamStore s;
  s.add("big", Tensor({1000}));
  std::size_t calls = 0;
  GradCheckReport r = grad_check(
      s,
      [&](ParamStore&) {
        ++calls;
        return 0.0;
      },
      1e-4, 1e-5, 64);
  CHECK(r.checked == 64);
  CHECK(calls == 1 + 2 * 64);
}

TEST_CASE("adamw first step is roughly a sign update") {
  ParamStore s = scalar_store(1.0);
  AdamW opt;
  opt.lr = 0.1;
  opt.weight_decay = 0.0;
  s.grad(0)[0] = 1.0;  // d/dtheta theta^2 / 2 at theta = 1
  adamw_step(s, opt);
  const double theta = s.value(0)[0];
  CHECK(theta < 1.0);
  CHECK(std::abs(theta - 0.9) < 0.02);
}

TEST_CASE("adamw with zero gradient") {
  ParamStore s = scalar_store(1.5);
  AdamW opt;
  opt.weight_decay = 0.0;
  adamw_step(s, opt);
  CHECK(s.value(0)[0] == 1.5);

  ParamStore d = scalar_store(2.0);
  AdamW decay;
  decay.lr = 1e-3;
  decay.weight_decay = 0.05;
  adamw_step(d, decay);
  CHECK(d.value(0)[0] == doctest::Approx(2.0 * (1.0 - 5e-5)).epsilon(1e-15));

  ParamStore nd;
  nd.add("b", Tensor({1}, {2.0}), true, false);
  AdamW no_decay;
  adamw_step(nd, no_decay);
  CHECK(nd.value(0)[0] == 2.0);
}

TEST_CASE("adamw trajectories are deterministic") {
  auto run = [] {
    Rng rng(3);
    ParamStore s;
    s.add("w", Tensor({10}));
    for (auto& v : s.value(0)) v = rng.normal();
    AdamW opt;
    for (int step = 0; step < 20; ++step) {
      auto g = s.grad(0);
      auto w = s.value(0);
      for (std::size_t i = 0; i < w.size(); ++i) g[i] = std::sin(w[i]) + 0.1 * w[i];
      adamw_step(s, opt);
    }
    return std::vector<double>(s.value(0).begin(), s.value(0).end());
  };
  CHECK(run() == run());
}

TEST_CASE("lr schedule endpoints") {
  CHECK(lr_schedule(0, 100, 10, 0.01) == 0.0);
  CHECK(lr_schedule(10, 100, 10, 0.01) == doctest::Approx(0.01).epsilon(1e-15));
  CHECK(std::abs(lr_schedule(100, 100, 10, 0.01)) < 1e-12);
  CHECK(lr_schedule(55, 100, 10, 0.01) == doctest::Approx(0.005).epsilon(1e-12));
  double prev = lr_schedule(10, 100, 10, 1.0);
  for (std::size_t t = 11; t <= 100; ++t) {
    const double lr = lr_schedule(t, 100, 10, 1.0);
    CHECK(lr <= prev);
    prev = lr;
  }
}

TEST_CASE("gradient clipping") {
  ParamStore s;
  s.add("w", Tensor({2}));
  s.grad(0)[0] = 3.0;
  s.grad(0)[1] = 4.0;
  CHECK(clip_grad_norm(s, 1.0) == doctest::Approx(5.0));
  CHECK(s.grad(0)[0] == doctest::Approx(0.6));
  CHECK(s.grad(0)[1] == doctest::Approx(0.8));
}

TEST_CASE("relative error floor") {
  CHECK(relative_error(1.0, 1.0) == 0.0);
  CHECK(relative_error(2.0, 1.0) == doctest::Approx(0.5));
  CHECK(relative_error(1e-12, 0.0) == doctest::Approx(1e-6));
}

TEST_CASE("every registered op passes the gradient check") {
  // Fewer seeds than the acceptance run; enough to catch a broken backward.
  for (const auto& c : verify::gradient_registry()) {
    verify::SuiteResult r = verify::run_grad_case(c, 3);
    CHECK_MESSAGE(r.passed, verify::format_result(r));
  }
}
