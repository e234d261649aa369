#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "fingermi/cv.hpp"
#include "fingermi/layers.hpp"
#include "fingermi/losses.hpp"
#include "fingermi/signal.hpp"
#include "fingermi/synth.hpp"
#include "fingermi/train.hpp"

namespace fingermi {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Flat `key = value` configuration. Lines starting with '#' and blank lines
/// are ignored; keys are dotted (e.g. `train.epochs`). Later assignments of
/// the same key override earlier ones.
class Config {
 public:
  static Config parse(std::istream& in, const std::string& source = "<config>");
  static Config load(const std::filesystem::path& path);

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  bool has(std::string_view key) const { return values_.find(std::string(key)) != values_.end(); }
  std::optional<std::string> get(std::string_view key) const;

  std::string get_string(std::string_view key, std::string fallback) const;
  double get_double(std::string_view key, double fallback) const;
  std::size_t get_size(std::string_view key, std::size_t fallback) const;
  std::uint64_t get_u64(std::string_view key, std::uint64_t fallback) const;
  bool get_bool(std::string_view key, bool fallback) const;
  std::vector<double> get_doubles(std::string_view key, std::vector<double> fallback) const;
  std::vector<std::size_t> get_sizes(std::string_view key, std::vector<std::size_t> fallback) const;
  std::vector<std::string> get_strings(std::string_view key, std::vector<std::string> fallback) const;
  /// A number, or "none" to disable.
  std::optional<double> get_optional_double(std::string_view key, std::optional<double> fallback) const;

  /// Throws ConfigError naming the first key outside `known`.
  void require_known(const std::set<std::string>& known) const;
  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

/// Every key the builders below understand.
const std::set<std::string>& known_config_keys();

/// Seed precedence: explicit flag, then the `seed` key, then the
/// FINGERMI_SEED environment variable, then `fallback`.
std::uint64_t resolve_seed(std::optional<std::uint64_t> flag, const Config& config, std::uint64_t fallback = 0);

SynthSpec synth_spec_from(const Config& config, std::uint64_t seed);
TrainConfig train_config_from(const Config& config, std::uint64_t seed);
ModelSpec model_spec_from(const Config& config, std::string_view model);
PreprocessOptions preprocess_options_from(const Config& config);
CvOptions cv_options_from(const Config& config);
AdjustOptions adjust_options_from(const Config& config);

std::vector<std::string> model_names();

}  // namespace fingermi
