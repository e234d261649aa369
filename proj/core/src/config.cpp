#include "fingermi/config.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace fingermi {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <typename T>
T parse_number(std::string_view key, const std::string& text) {
  T value{};
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last) {
    throw ConfigError("config key '" + std::string(key) + "': cannot parse '" + text + "' as a number");
  }
  return value;
}

}  // namespace

Config Config::parse(std::istream& in, const std::string& source) {
  Config c;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(source + ":" + std::to_string(lineno) + ": expected 'key = value'");
    }
    const std::string key = trim(std::string_view(t).substr(0, eq));
    std::string value = trim(std::string_view(t).substr(eq + 1));
    if (const auto hash = value.find(" #"); hash != std::string::npos) value = trim(value.substr(0, hash));
    if (key.empty()) throw ConfigError(source + ":" + std::to_string(lineno) + ": empty key");
    c.values_[key] = value;
  }
  return c;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  return parse(in, path.string());
}

std::optional<std::string> Config::get(std::string_view key) const {
  const auto it = values_.find(std::string(key));
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::string Config::get_string(std::string_view key, std::string fallback) const {
  return get(key).value_or(std::move(fallback));
}

double Config::get_double(std::string_view key, double fallback) const {
  const auto v = get(key);
  return v ? parse_number<double>(key, *v) : fallback;
}

std::size_t Config::get_size(std::string_view key, std::size_t fallback) const {
  const auto v = get(key);
  return v ? parse_number<std::size_t>(key, *v) : fallback;
}

std::uint64_t Config::get_u64(std::string_view key, std::uint64_t fallback) const {
  const auto v = get(key);
  return v ? parse_number<std::uint64_t>(key, *v) : fallback;
}

bool Config::get_bool(std::string_view key, bool fallback) const {
  const auto v = get(key);
  if (!v) return fallback;
  if (*v == "true" || *v == "1" || *v == "yes" || *v == "on") return true;
  if (*v == "false" || *v == "0" || *v == "no" || *v == "off") return false;
  throw ConfigError("config key '" + std::string(key) + "': expected a boolean, got '" + *v + "'");
}

std::vector<double> Config::get_doubles(std::string_view key, std::vector<double> fallback) const {
  const auto v = get(key);
  if (!v) return fallback;
  std::vector<double> out;
  for (const auto& item : split_list(*v)) out.push_back(parse_number<double>(key, item));
  return out;
}

std::vector<std::size_t> Config::get_sizes(std::string_view key, std::vector<std::size_t> fallback) const {
  const auto v = get(key);
  if (!v) return fallback;
  std::vector<std::size_t> out;
  for (const auto& item : split_list(*v)) out.push_back(parse_number<std::size_t>(key, item));
  return out;
}

std::vector<std::string> Config::get_strings(std::string_view key, std::vector<std::string> fallback) const {
  const auto v = get(key);
  return v ? split_list(*v) : fallback;
}

std::optional<double> Config::get_optional_double(std::string_view key, std::optional<double> fallback) const {
  const auto v = get(key);
  if (!v) return fallback;
  if (*v == "none") return std::nullopt;
  return parse_number<double>(key, *v);
}

void Config::require_known(const std::set<std::string>& known) const {
  for (const auto& [key, value] : values_) {
    if (!known.contains(key)) throw ConfigError("unknown config key '" + key + "'");
  }
}

const std::set<std::string>& known_config_keys() {
  static const std::set<std::string> keys{
      "seed",
      "synth.preset", "synth.trials_per_class", "synth.channels", "synth.fs", "synth.duration", "synth.snr",
      "synth.frequency", "synth.envelope", "synth.class_latency", "synth.class_gain",
      "synth.class_channels.0", "synth.class_channels.1", "synth.class_channels.2", "synth.class_channels.3",
      "synth.class_channels.4",
      "train.epochs", "train.batch_size", "train.lr", "train.beta1", "train.beta2", "train.epsilon",
      "train.shuffle", "train.loss", "train.weights",
      "model.channels", "model.samples", "model.f1", "model.depth_multiplier", "model.f2",
      "model.temporal_kernel", "model.separable_kernel", "model.pool1", "model.pool2", "model.dropout",
      "model.max_norm_depthwise", "model.max_norm_dense", "model.max_norm_conv", "model.deep_filters",
      "model.deep_kernel", "model.deep_pool", "model.filters", "model.kernel", "model.pool",
      "preprocess.notch_hz", "preprocess.notch_q", "preprocess.decimate", "preprocess.channels",
      "preprocess.epoch_start", "preprocess.epoch_duration", "preprocess.zscore",
      "cv.k", "cv.threads",
      "sweep.rounds", "sweep.step", "sweep.lower", "sweep.upper", "sweep.tolerance",
  };
  return keys;
}

std::uint64_t resolve_seed(std::optional<std::uint64_t> flag, const Config& config, std::uint64_t fallback) {
  if (flag) return *flag;
  if (config.has("seed")) return config.get_u64("seed", fallback);
  if (const char* env = std::getenv("FINGERMI_SEED"); env != nullptr && *env != '\0') {
    return parse_number<std::uint64_t>("FINGERMI_SEED", env);
  }
  return fallback;
}

SynthSpec synth_spec_from(const Config& c, std::uint64_t seed) {
  SynthSpec s = synth_preset(c.get_string("synth.preset", "default"), seed);
  s.n_trials_per_class = c.get_size("synth.trials_per_class", s.n_trials_per_class);
  s.n_channels = c.get_size("synth.channels", s.n_channels);
  s.fs = c.get_double("synth.fs", s.fs);
  s.duration = c.get_double("synth.duration", s.duration);
  s.snr = c.get_double("synth.snr", s.snr);
  s.frequency = c.get_double("synth.frequency", s.frequency);
  s.envelope = c.get_double("synth.envelope", s.envelope);
  s.class_latency = c.get_doubles("synth.class_latency", s.class_latency);
  s.class_gain = c.get_doubles("synth.class_gain", s.class_gain);
  for (std::size_t k = 0; k < s.class_channel_map.size(); ++k) {
    s.class_channel_map[k] = c.get_sizes("synth.class_channels." + std::to_string(k), s.class_channel_map[k]);
  }
  s.validate();
  return s;
}

TrainConfig train_config_from(const Config& c, std::uint64_t seed) {
  TrainConfig t;
  t.seed = seed;
  t.epochs = c.get_size("train.epochs", t.epochs);
  t.batch_size = c.get_size("train.batch_size", t.batch_size);
  t.adam.lr = c.get_double("train.lr", t.adam.lr);
  t.adam.beta1 = c.get_double("train.beta1", t.adam.beta1);
  t.adam.beta2 = c.get_double("train.beta2", t.adam.beta2);
  t.adam.epsilon = c.get_double("train.epsilon", t.adam.epsilon);
  t.shuffle = c.get_bool("train.shuffle", t.shuffle);
  const LossKind kind = parse_loss_kind(c.get_string("train.loss", "ce"));
  switch (kind) {
    case LossKind::CE:
      if (c.has("train.weights")) throw ConfigError("train.weights is not used with train.loss = ce");
      t.loss = LossSpec::cross_entropy();
      break;
    case LossKind::WCE:
      t.loss = LossSpec{LossKind::WCE, c.get_doubles("train.weights", {})};
      break;
    case LossKind::BWCE:
      t.loss = LossSpec::bias_weighted(c.get_doubles("train.weights", std::vector<double>(kNumClasses, 1.0)));
      break;
  }
  t.validate();
  return t;
}

ModelSpec model_spec_from(const Config& c, std::string_view model) {
  InputGeometry input;
  input.channels = c.get_size("model.channels", input.channels);
  input.samples = c.get_size("model.samples", input.samples);
  auto front = [&] {
    EegNetConfig e;
    e.input = input;
    e.f1 = c.get_size("model.f1", e.f1);
    e.depth_multiplier = c.get_size("model.depth_multiplier", e.depth_multiplier);
    e.f2 = c.get_size("model.f2", e.f2);
    e.temporal_kernel = c.get_size("model.temporal_kernel", e.temporal_kernel);
    e.separable_kernel = c.get_size("model.separable_kernel", e.separable_kernel);
    e.pool1 = c.get_size("model.pool1", e.pool1);
    e.pool2 = c.get_size("model.pool2", e.pool2);
    e.dropout = c.get_double("model.dropout", e.dropout);
    e.max_norm_depthwise = c.get_optional_double("model.max_norm_depthwise", e.max_norm_depthwise);
    e.max_norm_dense = c.get_optional_double("model.max_norm_dense", e.max_norm_dense);
    return e;
  };
  if (model == "eegnet") return eegnet_spec(front());
  if (model == "fingernet") {
    FingerNetConfig f;
    f.front = front();
    f.deep_filters = c.get_sizes("model.deep_filters", f.deep_filters);
    f.deep_kernel = c.get_size("model.deep_kernel", f.deep_kernel);
    f.deep_pool = c.get_size("model.deep_pool", f.deep_pool);
    return fingernet_spec(f);
  }
  if (model == "deepconvnet") {
    DeepConvNetConfig d;
    d.input = input;
    d.filters = c.get_sizes("model.filters", d.filters);
    d.temporal_kernel = c.get_size("model.kernel", d.temporal_kernel);
    d.pool = c.get_size("model.pool", d.pool);
    d.dropout = c.get_double("model.dropout", d.dropout);
    d.max_norm_conv = c.get_optional_double("model.max_norm_conv", d.max_norm_conv);
    d.max_norm_dense = c.get_optional_double("model.max_norm_dense", d.max_norm_dense);
    return deepconvnet_spec(d);
  }
  throw ConfigError("unknown model '" + std::string(model) + "' (expected fingernet, eegnet or deepconvnet)");
}

PreprocessOptions preprocess_options_from(const Config& c) {
  PreprocessOptions p;
  p.notch_hz = c.get_double("preprocess.notch_hz", p.notch_hz);
  p.notch_q = c.get_double("preprocess.notch_q", p.notch_q);
  p.decimate_factor = c.get_size("preprocess.decimate", p.decimate_factor);
  p.channels = c.get_strings("preprocess.channels", p.channels);
  p.epoch_start = c.get_double("preprocess.epoch_start", p.epoch_start);
  p.epoch_duration = c.get_double("preprocess.epoch_duration", p.epoch_duration);
  p.zscore = c.get_bool("preprocess.zscore", p.zscore);
  return p;
}

CvOptions cv_options_from(const Config& c) {
  CvOptions o;
  o.k = c.get_size("cv.k", o.k);
  o.threads = c.get_size("cv.threads", o.threads);
  if (o.threads == 0) throw ConfigError("cv.threads must be at least 1");
  return o;
}

AdjustOptions adjust_options_from(const Config& c) {
  AdjustOptions a;
  a.step = c.get_double("sweep.step", a.step);
  a.lower = c.get_double("sweep.lower", a.lower);
  a.upper = c.get_double("sweep.upper", a.upper);
  a.tolerance = c.get_double("sweep.tolerance", a.tolerance);
  if (!(a.step > 0.0) || !(a.lower > 0.0) || !(a.lower <= a.upper) || !(a.tolerance >= 0.0)) {
    throw ConfigError("sweep options need step > 0, 0 < lower <= upper and tolerance >= 0");
  }
  return a;
}

std::vector<std::string> model_names() { return {"fingernet", "eegnet", "deepconvnet"}; }

}  // namespace fingermi
