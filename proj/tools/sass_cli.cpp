// Command-line front end: training, evaluation, self-checks and benchmarks.
//
// Exit codes: 0 ok, 1 a check or suite failed, 2 usage, config or I/O error.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "sass/bench.hpp"
#include "sass/checkpoint.hpp"
#include "sass/config.hpp"
#include "sass/data.hpp"
#include "sass/error.hpp"
#include "sass/simd/kernels.hpp"
#include "sass/spectral.hpp"
#include "sass/ssm_reference.hpp"
#include "sass/train.hpp"
#include "sass/verify.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kOk = 0;
constexpr int kFailed = 1;
constexpr int kUsage = 2;

sass::TrainConfig load_with_overrides(const std::string& path,
                                      const std::vector<std::string>& sets) {
  sass::TrainConfig cfg = path.empty() ? sass::TrainConfig{} : sass::load_config(path);
  for (const auto& s : sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw sass::ConfigError("--set expects key=value, got '" + s + "'");
    sass::apply_setting(cfg, s.substr(0, eq), s.substr(eq + 1));
  }
  cfg.validate();
  return cfg;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw sass::IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw sass::IoError("write failed for '" + path.string() + "'");
}

int report(const std::vector<sass::verify::SuiteResult>& results) {
  bool ok = true;
  for (const auto& r : results) {
    std::cout << sass::verify::format_result(r) << '\n';
    ok = ok && r.passed;
  }
  std::cout << (ok ? "all passed" : "FAILURES") << std::endl;
  return ok ? kOk : kFailed;
}

template <typename T>
std::vector<T> split_list(const std::string& text, T (*convert)(const std::string&)) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(convert(item));
  }
  return out;
}

std::size_t to_size(const std::string& s) {
  std::size_t pos = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(s, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != s.size()) throw sass::ConfigError("expected an integer, got '" + s + "'");
  return static_cast<std::size_t>(v);
}

sass::bench::BenchPath to_path(const std::string& s) { return sass::bench::parse_path(s); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral state space layer: training, checks and benchmarks"};
  app.require_subcommand(1);

  // train
  auto* train = app.add_subcommand("train", "Train a classifier and write metrics and a checkpoint");
  std::string config_path;
  std::string out_dir = ".";
  std::vector<std::string> sets;
  train->add_option("--config", config_path, "key = value config file")->required();
  train->add_option("--out", out_dir, "Directory for metrics.csv and checkpoint.bin");
  train->add_option("--set", sets, "Override a config key (key=value), repeatable");

  // eval
  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on a dataset file");
  std::string ckpt_path, dataset_path;
  eval->add_option("--checkpoint", ckpt_path)->required();
  eval->add_option("--dataset", dataset_path)->required();

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "Write the configured synthetic dataset to a file");
  std::string gen_config, gen_out;
  std::vector<std::string> gen_sets;
  gen->add_option("--config", gen_config, "Config file (defaults apply when omitted)");
  gen->add_option("--set", gen_sets, "Override a config key (key=value), repeatable");
  gen->add_option("--out", gen_out)->required();

  // gradcheck
  auto* grad = app.add_subcommand("gradcheck", "Finite-difference check of every backward pass");
  std::size_t grad_seeds = 20;
  std::string grad_filter;
  grad->add_option("--seeds", grad_seeds, "Random instances per op");
  grad->add_option("--filter", grad_filter, "Only ops whose name contains this text");

  // oracle
  auto* oracle = app.add_subcommand("oracle", "Spectral paths against the direct references");

  // kernel-fit
  auto* fit = app.add_subcommand("kernel-fit", "Fit a learned kernel to a random SSM kernel");
  std::size_t fit_n = 4, fit_l = 128, fit_steps = 2000;
  double fit_lr = 0.1, fit_tol = 1e-3;
  std::uint64_t fit_seed = 0;
  fit->add_option("--N", fit_n, "State dimension of the target system");
  fit->add_option("--L", fit_l, "Kernel length");
  fit->add_option("--steps", fit_steps, "Gradient steps");
  fit->add_option("--lr", fit_lr, "Step size");
  fit->add_option("--seed", fit_seed);
  fit->add_option("--tol", fit_tol, "Final L2 error required for success");

  // bench
  auto* bench = app.add_subcommand("bench", "Time the evaluation paths over sequence lengths");
  std::string bench_paths = "spectral,direct_conv,recurrent_scan";
  std::string bench_ls = "256,512,1024,2048,4096,8192";
  std::string bench_out;
  sass::bench::BenchOptions bench_opt;
  bench->add_option("--paths", bench_paths, "Comma-separated: spectral,direct_conv,recurrent_scan");
  bench->add_option("--Ls", bench_ls, "Comma-separated sequence lengths");
  bench->add_option("--out", bench_out, "CSV output file")->required();
  bench->add_option("--repeats", bench_opt.repeats, "Timed samples per configuration (>= 5)");
  bench->add_option("--H", bench_opt.channels, "Channels");
  bench->add_option("--seed", bench_opt.seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*train) {
      const auto cfg = load_with_overrides(config_path, sets);
      fs::create_directories(out_dir);
      const fs::path metrics_path = fs::path(out_dir) / "metrics.csv";
      std::ofstream metrics(metrics_path, std::ios::binary | std::ios::trunc);
      if (!metrics) throw sass::IoError("cannot open '" + metrics_path.string() + "'");
      std::cout << sass::kMetricsHeader << '\n';
      metrics << sass::kMetricsHeader << '\n';
      const auto result = sass::train(cfg, [&](const sass::EpochMetrics& m) {
        const std::string line = sass::format_metrics(m);
        std::cout << line << std::endl;
        metrics << line << '\n';
      });
      metrics.close();
      if (!metrics) throw sass::IoError("write failed for '" + metrics_path.string() + "'");
      sass::write_checkpoint(fs::path(out_dir) / "checkpoint.bin", result.checkpoint);
      return kOk;
    }
    if (*eval) {
      const auto ckpt = sass::read_checkpoint(ckpt_path);
      const auto ds = sass::data::read_dataset(dataset_path);
      const auto net = sass::model_from_checkpoint(ckpt, ds);
      const auto r = sass::evaluate(net, ds);
      std::cout << "samples," << ds.size() << "\naccuracy," << r.accuracy << "\nloss," << r.loss
                << '\n'
                << sass::confusion_csv(r);
      return kOk;
    }
    if (*gen) {
      const auto cfg = load_with_overrides(gen_config, gen_sets);
      sass::data::write_dataset(gen_out, sass::load_or_generate(cfg));
      return kOk;
    }
    if (*grad) {
      std::cout << "simd: " << sass::simd::active().name << '\n';
      std::vector<sass::verify::SuiteResult> results;
      for (const auto& c : sass::verify::gradient_registry()) {
        if (!grad_filter.empty() && c.name.find(grad_filter) == std::string::npos) continue;
        results.push_back(sass::verify::run_grad_case(c, grad_seeds));
        std::cout << sass::verify::format_result(results.back()) << std::endl;
      }
      if (results.empty()) throw sass::ConfigError("no op matches filter '" + grad_filter + "'");
      bool ok = true;
      for (const auto& r : results) ok = ok && r.passed;
      std::cout << (ok ? "all passed" : "FAILURES") << std::endl;
      return ok ? kOk : kFailed;
    }
    if (*oracle) {
      namespace v = sass::verify;
      return report({v::fft_oracle_suite(), v::fft_roundtrip_suite(), v::convolution_suite(),
                     v::scan_kernel_suite(), v::kernel_exact_suite(), v::kernel_fit_suite(),
                     v::gate_range_suite(), v::gate_phase_suite(), v::gate_shift_suite()});
    }
    if (*fit) {
      sass::Rng rng(fit_seed);
      const auto sys = sass::ssm::random_stable_system(rng, fit_n);
      const auto target = sass::ssm::unroll_kernel(sass::ssm::discretize(sys), fit_l);
      auto init = sass::spectral::SpectralKernel::gaussian(1, fit_l, 0.02, rng);
      const auto r = sass::spectral::fit_kernel(target, std::move(init), fit_steps, fit_lr);
      const double exact = sass::spectral::kernel_l2_error(sass::spectral::assign_exact(target), target);
      std::printf("N=%zu L=%zu steps=%zu lr=%g\n", fit_n, fit_l, fit_steps, fit_lr);
      std::printf("initial_l2_error=%.6e\nfinal_l2_error=%.6e\nexact_assign_error=%.6e\n",
                  r.initial_error, r.final_error, exact);
      return r.final_error < fit_tol && exact == 0.0 ? kOk : kFailed;
    }
    if (*bench) {
      const auto paths = split_list<sass::bench::BenchPath>(bench_paths, to_path);
      const auto ls = split_list<std::size_t>(bench_ls, to_size);
      const auto records = sass::bench::run_scaling(ls, paths, bench_opt);
      write_text(bench_out, sass::bench::to_csv(records));
      std::cout << sass::bench::to_csv(records);
      for (auto p : paths) {
        std::vector<sass::bench::BenchRecord> sel;
        for (const auto& r : records) {
          if (r.path == p) sel.push_back(r);
        }
        std::set<std::size_t> distinct;
        for (const auto& r : sel) distinct.insert(r.length);
        if (distinct.size() >= 2) {
          std::printf("slope,%s,%.4f\n", std::string(sass::bench::path_name(p)).c_str(),
                      sass::bench::fit_loglog_slope(sel));
        }
      }
      return kOk;
    }
  } catch (const sass::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kUsage;
  } catch (const sass::IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kUsage;
  } catch (const sass::FormatError& e) {
    std::cerr << "format error: " << e.what() << '\n';
    return kUsage;
  } catch (const sass::IntegrityError& e) {
    std::cerr << "integrity error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kUsage;
  } catch (const sass::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailed;
  }
  return kUsage;
}
