// Runs every acceptance criterion and prints one PASS/FAIL line for each.
// Exit status is nonzero when any criterion fails.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "sass/bench.hpp"
#include "sass/binary_io.hpp"
#include "sass/config.hpp"
#include "sass/train.hpp"
#include "sass/verify.hpp"

namespace fs = std::filesystem;
using namespace sass;

namespace {

struct Outcome {
  bool passed = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double budget_s;  // 0 means no runtime bound
  std::function<Outcome()> run;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

Outcome from_suites(const std::vector<verify::SuiteResult>& suites) {
  Outcome o{true, ""};
  for (const auto& s : suites) {
    o.passed = o.passed && s.passed;
    if (!o.detail.empty()) o.detail += "; ";
    o.detail += s.name + (s.passed ? " ok" : " FAILED") + " err=" + fmt(s.max_error) +
                " tol=" + fmt(s.tolerance);
  }
  return o;
}

Outcome fft_oracle() {
  return from_suites({verify::fft_oracle_suite(), verify::fft_roundtrip_suite()});
}

Outcome convolution() { return from_suites({verify::convolution_suite(100, 512)}); }

Outcome scan_kernel() { return from_suites({verify::scan_kernel_suite(100, 8, 512)}); }

Outcome kernel_representation() {
  return from_suites(
      {verify::kernel_exact_suite(50, 128), verify::kernel_fit_suite(50, 128, 2000)});
}

Outcome gradients() {
  Outcome o{true, ""};
  double worst = 0.0;
  std::string worst_name;
  std::size_t ops = 0;
  for (const auto& c : verify::gradient_registry()) {
    verify::SuiteResult r = verify::run_grad_case(c, 20, 1e-4, 1e-5);
    ++ops;
    if (!r.passed) {
      o.passed = false;
      o.detail += "failed " + r.name + " err=" + fmt(r.max_error) + "; ";
    }
    if (r.max_error > worst) {
      worst = r.max_error;
      worst_name = r.name;
    }
  }
  o.detail += std::to_string(ops) + " ops x 20 seeds, worst " + worst_name + " rel=" + fmt(worst);
  return o;
}

Outcome gates() {
  return from_suites({verify::gate_range_suite(), verify::gate_phase_suite(),
                      verify::gate_shift_suite()});
}

Outcome scaling() {
  std::vector<std::size_t> ls;
  for (std::size_t l = 256; l <= 8192; l *= 2) ls.push_back(l);
  std::vector<bench::BenchPath> paths{bench::BenchPath::Spectral, bench::BenchPath::DirectConv};
  auto records = bench::run_scaling(ls, paths);
  std::vector<bench::BenchRecord> spec, direct;
  for (const auto& r : records) (r.path == bench::BenchPath::Spectral ? spec : direct).push_back(r);
  const double s = bench::fit_loglog_slope(spec);
  const double d = bench::fit_loglog_slope(direct);
  Outcome o;
  o.passed = s <= 1.3 && d >= 1.7 && d - s >= 0.3;
  o.detail = "spectral slope=" + fmt(s) + " direct slope=" + fmt(d) + " separation=" + fmt(d - s);
  return o;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

Outcome desk_training() {
  std::vector<double> gated, ungated, gated_loss, ungated_loss;
  Outcome o{true, ""};
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    TrainConfig cfg;
    cfg.seed = seed;
    TrainResult r = train(cfg);
    gated.push_back(r.final_test_accuracy);
    gated_loss.push_back(r.history.back().loss);
    if (seed == 0) {
      std::size_t first = 0;
      for (const auto& m : r.history) {
        if (m.split == "test" && m.accuracy >= 0.95) {
          first = m.epoch;
          break;
        }
      }
      const bool ok = r.final_test_accuracy >= 0.95 && r.history.back().epoch <= 30;
      o.passed = o.passed && ok;
      o.detail = "default run final=" + fmt(r.final_test_accuracy) +
                 " first epoch >= 0.95: " + (first == 0 ? "none" : std::to_string(first));
    }
    cfg.gating_enabled = false;
    TrainResult u = train(cfg);
    ungated.push_back(u.final_test_accuracy);
    ungated_loss.push_back(u.history.back().loss);
  }
  const double mg = median(gated);
  const double mu = median(ungated);
  o.passed = o.passed && mg >= mu;
  o.detail += "; median accuracy gated=" + fmt(mg) + " ungated=" + fmt(mu) +
              " (test loss " + fmt(median(gated_loss)) + " vs " + fmt(median(ungated_loss)) + ")";
  return o;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(SASS_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "sass_acceptance_determinism";
  fs::remove_all(root);
  fs::create_directories(root);
  {
    std::ofstream cfg(root / "run.cfg");
    cfg << "epochs = 4\nseed = 7\n";
  }
  Outcome o{true, ""};
  for (const char* run : {"a", "b"}) {
    const int code = run_cli("train --config " + (root / "run.cfg").string() + " --out " +
                             (root / run).string());
    if (code != 0) {
      o.passed = false;
      o.detail += std::string("run ") + run + " exited " + std::to_string(code) + "; ";
    }
  }
  if (!o.passed) return o;
  for (const char* file : {"metrics.csv", "checkpoint.bin"}) {
    const auto a = io::read_file(root / "a" / file);
    const auto b = io::read_file(root / "b" / file);
    const bool same = a == b && !a.empty();
    o.passed = o.passed && same;
    o.detail += std::string(file) + (same ? " identical (" : " DIFFER (") +
                std::to_string(a.size()) + " bytes); ";
  }
  fs::remove_all(root);
  return o;
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "fft_oracle", 10, fft_oracle},
      {2, "convolution_theorem", 30, convolution},
      {3, "scan_kernel_equivalence", 60, scan_kernel},
      {4, "kernel_representation", 120, kernel_representation},
      {5, "gradient_suite", 300, gradients},
      {6, "gate_invariants", 0, gates},
      {7, "scaling_slopes", 300, scaling},
      {8, "desk_training", 600, desk_training},
      {9, "determinism", 0, determinism},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool ok = o.passed;
    std::string timing = fmt(secs) + "s";
    if (c.budget_s > 0) {
      timing += " (limit " + fmt(c.budget_s) + "s)";
      if (secs >= c.budget_s) ok = false;
    }
    if (!ok) ++failures;
    std::printf("%s criterion %d %s: %s [%s]\n", ok ? "PASS" : "FAIL", c.id, c.name.c_str(),
                o.detail.c_str(), timing.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
              criteria.size());
  return failures == 0 ? 0 : 1;
}
