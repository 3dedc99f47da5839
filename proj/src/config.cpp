#include "sass/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "sass/error.hpp"

namespace sass {

namespace {

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, const char* expected) {
  throw ConfigError("config key '" + std::string(key) + "': expected " + expected + ", got '" +
                    std::string(value) + "'");
}

std::size_t to_size(std::string_view key, std::string_view v) {
  std::size_t out = 0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc{} || r.ptr != v.data() + v.size()) bad_value(key, v, "an unsigned integer");
  return out;
}

std::uint64_t to_u64(std::string_view key, std::string_view v) {
  std::uint64_t out = 0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc{} || r.ptr != v.data() + v.size()) bad_value(key, v, "an unsigned integer");
  return out;
}

double to_double(std::string_view key, std::string_view v) {
  double out = 0.0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc{} || r.ptr != v.data() + v.size() || !std::isfinite(out)) {
    bad_value(key, v, "a finite number");
  }
  return out;
}

bool to_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  bad_value(key, v, "true or false");
}

std::string fmt(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

const char* fmt(bool b) { return b ? "true" : "false"; }

using Setter = std::function<void(TrainConfig&, std::string_view, std::string_view)>;

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = [] {
    std::map<std::string, Setter, std::less<>> t;
#define SIZE_KEY(name) t[#name] = [](TrainConfig& c, auto k, auto v) { c.name = to_size(k, v); }
#define DOUBLE_KEY(name) t[#name] = [](TrainConfig& c, auto k, auto v) { c.name = to_double(k, v); }
#define BOOL_KEY(name) t[#name] = [](TrainConfig& c, auto k, auto v) { c.name = to_bool(k, v); }
#define U64_KEY(name) t[#name] = [](TrainConfig& c, auto k, auto v) { c.name = to_u64(k, v); }
    t["task"] = [](TrainConfig& c, auto k, auto v) {
      if (v == "freq") c.task = TaskKind::Freq;
      else if (v == "shapes") c.task = TaskKind::Shapes;
      else bad_value(k, v, "freq or shapes");
    };
    t["dataset"] = [](TrainConfig& c, auto, auto v) { c.dataset = std::string(v); };
    SIZE_KEY(length);
    SIZE_KEY(num_classes);
    SIZE_KEY(samples_per_class);
    DOUBLE_KEY(noise_sigma);
    BOOL_KEY(gating_required);
    DOUBLE_KEY(distractor_ratio);
    U64_KEY(data_seed);
    SIZE_KEY(image_side);
    SIZE_KEY(jitter);
    SIZE_KEY(holdout_every);
    SIZE_KEY(patch_size);
    SIZE_KEY(embed_dim);
    SIZE_KEY(state_dim);
    SIZE_KEY(gate_dim);
    SIZE_KEY(depth);
    SIZE_KEY(ffn_ratio);
    t["mode"] = [](TrainConfig& c, auto k, auto v) {
      if (v == "circular") c.mode = spectral::ConvMode::Circular;
      else if (v == "causal") c.mode = spectral::ConvMode::CausalPadded;
      else bad_value(k, v, "circular or causal");
    };
    DOUBLE_KEY(sigma_init);
    BOOL_KEY(learnable_sigma);
    BOOL_KEY(sagu_first);
    BOOL_KEY(gating_enabled);
    t["sagu_gate"] = [](TrainConfig& c, auto k, auto v) {
      if (v == "real") c.sagu_gate = spectral::SaguGate::RealWeights;
      else if (v == "modulus") c.sagu_gate = spectral::SaguGate::ComplexModulus;
      else bad_value(k, v, "real or modulus");
    };
    DOUBLE_KEY(lr);
    DOUBLE_KEY(beta1);
    DOUBLE_KEY(beta2);
    DOUBLE_KEY(eps);
    DOUBLE_KEY(weight_decay);
    DOUBLE_KEY(warmup_fraction);
    DOUBLE_KEY(grad_clip);
    SIZE_KEY(epochs);
    SIZE_KEY(batch_size);
    U64_KEY(seed);
    SIZE_KEY(threads);
#undef SIZE_KEY
#undef DOUBLE_KEY
#undef BOOL_KEY
#undef U64_KEY
    return t;
  }();
  return table;
}

}  // namespace

void TrainConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError("config: " + msg); };
  if (epochs < 1) fail("epochs must be >= 1");
  if (batch_size < 1) fail("batch_size must be >= 1");
  if (!(lr > 0.0)) fail("lr must be > 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) fail("betas must be in [0, 1)");
  if (!(eps > 0.0)) fail("eps must be > 0");
  if (!(weight_decay >= 0.0)) fail("weight_decay must be >= 0");
  if (!(warmup_fraction >= 0.0 && warmup_fraction <= 1.0)) fail("warmup_fraction must be in [0, 1]");
  if (!(grad_clip >= 0.0)) fail("grad_clip must be >= 0");
  if (threads < 1) fail("threads must be >= 1");
  if (holdout_every < 2) fail("holdout_every must be >= 2");
  if (embed_dim < 1 || state_dim < 1 || gate_dim < 1 || ffn_ratio < 1) fail("model dims must be >= 1");
  if (!(sigma_init > 0.0)) fail("sigma_init must be > 0");
}

std::size_t TrainConfig::effective_patch_size() const {
  if (patch_size != 0) return patch_size;
  return task == TaskKind::Freq ? 1 : 4;
}

model::ModelConfig TrainConfig::model_config(const data::Dataset& ds) const {
  model::ModelConfig m;
  m.patch_size = effective_patch_size();
  if (task == TaskKind::Freq) {
    m.input = model::InputKind::Signal;
    if (ds.length % m.patch_size != 0) {
      throw ConfigError("config: signal length " + std::to_string(ds.length) +
                        " not divisible by patch_size " + std::to_string(m.patch_size));
    }
    m.length = ds.length / m.patch_size;
  } else {
    m.input = model::InputKind::Image;
    const auto side = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(ds.length))));
    if (side * side != ds.length) {
      throw ConfigError("config: image dataset samples are not square (" +
                        std::to_string(ds.length) + " values)");
    }
    m.image_side = side;
    if (side % m.patch_size != 0) {
      throw ConfigError("config: image side " + std::to_string(side) +
                        " not divisible by patch_size " + std::to_string(m.patch_size));
    }
    const std::size_t per = side / m.patch_size;
    m.length = per * per;
  }
  m.embed_dim = embed_dim;
  m.state_dim = state_dim;
  m.gate_dim = gate_dim;
  m.depth = depth;
  m.ffn_ratio = ffn_ratio;
  m.num_classes = ds.num_classes;
  m.sass.conv_mode = mode;
  m.sass.gating_enabled = gating_enabled;
  m.sass.sagu_first = sagu_first;
  m.sass.sagu_gate = sagu_gate;
  m.sigma_init = sigma_init;
  m.learnable_sigma = learnable_sigma;
  m.validate();
  return m;
}

data::FreqTaskSpec TrainConfig::freq_spec() const {
  data::FreqTaskSpec s;
  s.length = length;
  s.num_classes = num_classes;
  s.noise_sigma = noise_sigma;
  s.samples_per_class = samples_per_class;
  s.seed = data_seed;
  s.gating_required = gating_required;
  s.distractor_ratio = distractor_ratio;
  return s;
}

data::ShapeImageSpec TrainConfig::shape_spec() const {
  data::ShapeImageSpec s;
  s.side = image_side;
  s.num_classes = num_classes;
  s.jitter = jitter;
  s.noise_sigma = noise_sigma;
  s.samples_per_class = samples_per_class;
  s.seed = data_seed;
  return s;
}

void apply_setting(TrainConfig& cfg, std::string_view key, std::string_view value) {
  const auto& table = setters();
  const auto it = table.find(key);
  if (it == table.end()) throw ConfigError("unknown config key '" + std::string(key) + "'");
  it->second(cfg, key, value);
}

TrainConfig parse_config(std::string_view text, const std::string& source) {
  TrainConfig cfg;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const std::size_t nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(source + ":" + std::to_string(line_no) + ": expected 'key = value'");
    }
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    try {
      apply_setting(cfg, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(source + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  cfg.validate();
  return cfg;
}

TrainConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string());
}

std::string to_text(const TrainConfig& c) {
  std::ostringstream o;
  o << "task = " << (c.task == TaskKind::Freq ? "freq" : "shapes") << '\n'
    << "dataset = " << c.dataset << '\n'
    << "length = " << c.length << '\n'
    << "num_classes = " << c.num_classes << '\n'
    << "samples_per_class = " << c.samples_per_class << '\n'
    << "noise_sigma = " << fmt(c.noise_sigma) << '\n'
    << "gating_required = " << fmt(c.gating_required) << '\n'
    << "distractor_ratio = " << fmt(c.distractor_ratio) << '\n'
    << "data_seed = " << c.data_seed << '\n'
    << "image_side = " << c.image_side << '\n'
    << "jitter = " << c.jitter << '\n'
    << "holdout_every = " << c.holdout_every << '\n'
    << "patch_size = " << c.patch_size << '\n'
    << "embed_dim = " << c.embed_dim << '\n'
    << "state_dim = " << c.state_dim << '\n'
    << "gate_dim = " << c.gate_dim << '\n'
    << "depth = " << c.depth << '\n'
    << "ffn_ratio = " << c.ffn_ratio << '\n'
    << "mode = " << (c.mode == spectral::ConvMode::Circular ? "circular" : "causal") << '\n'
    << "sigma_init = " << fmt(c.sigma_init) << '\n'
    << "learnable_sigma = " << fmt(c.learnable_sigma) << '\n'
    << "sagu_first = " << fmt(c.sagu_first) << '\n'
    << "gating_enabled = " << fmt(c.gating_enabled) << '\n'
    << "sagu_gate = " << (c.sagu_gate == spectral::SaguGate::RealWeights ? "real" : "modulus") << '\n'
    << "lr = " << fmt(c.lr) << '\n'
    << "beta1 = " << fmt(c.beta1) << '\n'
    << "beta2 = " << fmt(c.beta2) << '\n'
    << "eps = " << fmt(c.eps) << '\n'
    << "weight_decay = " << fmt(c.weight_decay) << '\n'
    << "warmup_fraction = " << fmt(c.warmup_fraction) << '\n'
    << "grad_clip = " << fmt(c.grad_clip) << '\n'
    << "epochs = " << c.epochs << '\n'
    << "batch_size = " << c.batch_size << '\n'
    << "seed = " << c.seed << '\n'
    << "threads = " << c.threads << '\n';
  return o.str();
}

}  // namespace sass
