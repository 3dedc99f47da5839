#include "sass/bench.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <functional>
#include <sstream>

#include "sass/error.hpp"
#include "sass/numerics.hpp"
#include "sass/rng.hpp"
#include "sass/simd/kernels.hpp"
#include "sass/ssm_reference.hpp"

namespace sass::bench {

std::string_view path_name(BenchPath p) {
  switch (p) {
    case BenchPath::Spectral: return "spectral";
    case BenchPath::DirectConv: return "direct_conv";
    case BenchPath::RecurrentScan: return "recurrent_scan";
  }
  return "?";
}

BenchPath parse_path(std::string_view name) {
  for (BenchPath p : {BenchPath::Spectral, BenchPath::DirectConv, BenchPath::RecurrentScan}) {
    if (name == path_name(p)) return p;
  }
  throw ConfigError("unknown bench path '" + std::string(name) +
                    "' (expected spectral, direct_conv or recurrent_scan)");
}

namespace {

using Clock = std::chrono::steady_clock;

// Inputs and scratch for one (path, L) configuration. The timed call writes
// into `sink` so the work cannot be optimized away.
class Workload {
 public:
  Workload(BenchPath path, std::size_t length, const BenchOptions& opt)
      : path_(path), length_(length), channels_(opt.channels) {
    Rng rng(opt.seed);
    u_.resize(channels_ * length_);
    k_.resize(channels_ * length_);
    for (double& v : u_) v = rng.normal();
    for (double& v : k_) v = rng.normal(0.0, 0.02);
    if (path_ == BenchPath::Spectral) {
      padded_ = next_power_of_two(2 * length_ - 1);
      plan_ = &fft_plan(padded_);
      for (auto* b : {&ur_, &ui_, &kr_, &ki_}) b->assign(padded_, 0.0);
    }
    if (path_ == BenchPath::RecurrentScan) {
      for (std::size_t h = 0; h < channels_; ++h) {
        systems_.push_back(ssm::discretize(ssm::random_stable_system(rng, opt.state_dim)));
      }
    }
  }

  void run() {
    const std::span<const double> all_u(u_);
    const std::span<const double> all_k(k_);
    for (std::size_t h = 0; h < channels_; ++h) {
      const auto u = all_u.subspan(h * length_, length_);
      const auto k = all_k.subspan(h * length_, length_);
      switch (path_) {
        case BenchPath::Spectral: spectral(u, k); break;
        case BenchPath::DirectConv: sink_ += ssm::causal_convolution(k, u).back(); break;
        case BenchPath::RecurrentScan: sink_ += ssm::scan_recurrent(systems_[h], u).back(); break;
      }
    }
  }

  double sink() const { return sink_; }

 private:
  void spectral(std::span<const double> u, std::span<const double> k) {
    std::copy(u.begin(), u.end(), ur_.begin());
    std::copy(k.begin(), k.end(), kr_.begin());
    std::fill(ur_.begin() + static_cast<long>(length_), ur_.end(), 0.0);
    std::fill(kr_.begin() + static_cast<long>(length_), kr_.end(), 0.0);
    std::fill(ui_.begin(), ui_.end(), 0.0);
    std::fill(ki_.begin(), ki_.end(), 0.0);
    plan_->forward(ur_, ui_);
    plan_->forward(kr_, ki_);
    simd::active().cmul(ur_.data(), ui_.data(), kr_.data(), ki_.data(), ur_.data(), ui_.data(),
                        padded_);
    plan_->inverse(ur_, ui_);
    sink_ += ur_[length_ - 1];
  }

  BenchPath path_;
  std::size_t length_;
  std::size_t channels_;
  std::size_t padded_ = 0;
  const FftPlan* plan_ = nullptr;
  std::vector<double> u_, k_, ur_, ui_, kr_, ki_;
  std::vector<ssm::DiscreteSSM> systems_;
  double sink_ = 0.0;
};

double elapsed_ns(Clock::time_point a, Clock::time_point b) {
  return std::chrono::duration<double, std::nano>(b - a).count();
}

}  // namespace

double percentile(std::vector<double> samples, double q) {
  if (samples.empty()) throw EmptyInputError("percentile of no samples");
  std::sort(samples.begin(), samples.end());
  const double rank = std::ceil(q * static_cast<double>(samples.size()));
  const std::size_t idx = rank < 1.0 ? 0 : static_cast<std::size_t>(rank) - 1;
  return samples[std::min(idx, samples.size() - 1)];
}

std::vector<BenchRecord> run_scaling(std::span<const std::size_t> lengths,
                                     std::span<const BenchPath> paths,
                                     const BenchOptions& opt) {
  if (opt.repeats < 5) throw ConfigError("bench: repeats must be >= 5");
  if (opt.channels == 0) throw ConfigError("bench: H must be >= 1");
  std::vector<BenchRecord> out;
  volatile double guard = 0.0;
  for (BenchPath path : paths) {
    for (std::size_t l : lengths) {
      if (l == 0) throw EmptyInputError("bench: L must be >= 1");
      Workload w(path, l, opt);
      for (std::size_t i = 0; i < opt.warmup; ++i) w.run();

      // Grow the batch until one timed sample is long enough to trust.
      std::size_t inner = 1;
      for (;;) {
        const auto t0 = Clock::now();
        for (std::size_t i = 0; i < inner; ++i) w.run();
        const double ns = elapsed_ns(t0, Clock::now());
        if (ns >= opt.min_sample_ns || inner >= (1u << 20)) break;
        const double factor = ns > 0.0 ? opt.min_sample_ns / ns : 16.0;
        inner = std::max(inner * 2, static_cast<std::size_t>(
                                        std::ceil(static_cast<double>(inner) * factor * 1.1)));
      }

      std::vector<double> samples;
      for (std::size_t r = 0; r < opt.repeats; ++r) {
        const auto t0 = Clock::now();
        for (std::size_t i = 0; i < inner; ++i) w.run();
        samples.push_back(elapsed_ns(t0, Clock::now()) / static_cast<double>(inner));
      }
      guard = guard + w.sink();
      BenchRecord rec;
      rec.path = path;
      rec.length = l;
      rec.channels = opt.channels;
      rec.repeats = opt.repeats;
      rec.median_ns = percentile(samples, 0.5);
      rec.p10_ns = percentile(samples, 0.1);
      rec.p90_ns = percentile(samples, 0.9);
      rec.inner_iterations = inner;
      out.push_back(rec);
    }
  }
  return out;
}

double fit_loglog_slope(std::span<const BenchRecord> records) {
  const double n = static_cast<double>(records.size());
  double sx = 0.0, sy = 0.0;
  for (const auto& r : records) {
    if (!(r.median_ns > 0.0) || r.length == 0) {
      throw ConfigError("fit_loglog_slope: L and median_ns must be positive");
    }
    sx += std::log(static_cast<double>(r.length));
    sy += std::log(r.median_ns);
  }
  const double mx = sx / n;
  const double my = sy / n;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& r : records) {
    const double dx = std::log(static_cast<double>(r.length)) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(r.median_ns) - my);
  }
  if (records.size() < 2 || sxx == 0.0) {
    throw EmptyInputError("fit_loglog_slope: need at least two distinct L");
  }
  return sxy / sxx;
}

namespace {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

template <typename T>
T parse_number(std::string_view field, std::size_t line) {
  T v{};
  const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
  if (res.ec != std::errc{} || res.ptr != field.data() + field.size()) {
    throw FormatError("bench csv line " + std::to_string(line) + ": bad number '" +
                      std::string(field) + "'");
  }
  return v;
}

}  // namespace

std::string to_csv(std::span<const BenchRecord> records) {
  std::string s(kCsvHeader);
  s += '\n';
  for (const auto& r : records) {
    s += std::string(path_name(r.path)) + ',' + std::to_string(r.length) + ',' +
         std::to_string(r.channels) + ',' + std::to_string(r.repeats) + ',' +
         format_double(r.median_ns) + ',' + format_double(r.p10_ns) + ',' +
         format_double(r.p90_ns) + '\n';
  }
  return s;
}

std::vector<BenchRecord> parse_csv(std::string_view text) {
  std::vector<BenchRecord> out;
  std::size_t line_no = 0;
  bool header = false;
  while (!text.empty()) {
    const std::size_t nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (!header) {
      if (line != kCsvHeader) throw FormatError("bench csv: unexpected header '" + std::string(line) + "'");
      header = true;
      continue;
    }
    std::vector<std::string_view> f;
    std::size_t start = 0;
    for (;;) {
      const std::size_t comma = line.find(',', start);
      f.push_back(line.substr(start, comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (f.size() != 7) {
      throw FormatError("bench csv line " + std::to_string(line_no) + ": expected 7 fields");
    }
    BenchRecord r;
    try {
      r.path = parse_path(f[0]);
    } catch (const ConfigError& e) {
      throw FormatError("bench csv line " + std::to_string(line_no) + ": " + e.what());
    }
    r.length = parse_number<std::size_t>(f[1], line_no);
    r.channels = parse_number<std::size_t>(f[2], line_no);
    r.repeats = parse_number<std::size_t>(f[3], line_no);
    r.median_ns = parse_number<double>(f[4], line_no);
    r.p10_ns = parse_number<double>(f[5], line_no);
    r.p90_ns = parse_number<double>(f[6], line_no);
    out.push_back(r);
  }
  if (!header) throw FormatError("bench csv: missing header");
  return out;
}

}  // namespace sass::bench
