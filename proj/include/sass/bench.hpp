#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

// Wall-clock scaling harness for the three ways of evaluating an SSM layer
// over a length-L sequence with H channels.
namespace sass::bench {

enum class BenchPath {
  Spectral,       // FFT, spectral product, inverse FFT per channel
  DirectConv,     // O(L^2) causal convolution per channel
  RecurrentScan,  // sequential state recurrence per channel
};

std::string_view path_name(BenchPath p);
// Accepts the names printed by path_name; throws ConfigError otherwise.
BenchPath parse_path(std::string_view name);

struct BenchRecord {
  BenchPath path = BenchPath::Spectral;
  std::size_t length = 0;
  std::size_t channels = 0;
  std::size_t repeats = 0;
  double median_ns = 0.0;  // per call
  double p10_ns = 0.0;
  double p90_ns = 0.0;
  // Calls per timed sample. Above 1 when a single call is too short to time
  // reliably. Not part of the CSV.
  std::size_t inner_iterations = 1;

  bool operator==(const BenchRecord& o) const {
    return path == o.path && length == o.length && channels == o.channels &&
           repeats == o.repeats && median_ns == o.median_ns && p10_ns == o.p10_ns &&
           p90_ns == o.p90_ns;
  }
};

struct BenchOptions {
  std::size_t channels = 4;
  std::size_t repeats = 11;  // must be >= 5
  std::size_t warmup = 2;
  double min_sample_ns = 5e6;
  std::size_t state_dim = 8;  // N for the recurrent scan
  std::uint64_t seed = 0;
};

std::vector<BenchRecord> run_scaling(std::span<const std::size_t> lengths,
                                     std::span<const BenchPath> paths,
                                     const BenchOptions& options = {});

// Nearest-rank percentile of unsorted samples, q in [0, 1].
double percentile(std::vector<double> samples, double q);

// OLS slope of ln(median_ns) against ln(L). Needs two distinct lengths.
double fit_loglog_slope(std::span<const BenchRecord> records);

inline constexpr std::string_view kCsvHeader = "path,L,H,repeats,median_ns,p10_ns,p90_ns";

std::string to_csv(std::span<const BenchRecord> records);
std::vector<BenchRecord> parse_csv(std::string_view text);

}  // namespace sass::bench
