#include "fingermi/synth.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <numbers>

#include "fingermi/error.hpp"

namespace fingermi {

namespace {

std::mutex fftw_planner_mutex;  // FFTW planning is not thread-safe

struct FftwBuffers {
  double* real = nullptr;
  fftw_complex* spec = nullptr;
  fftw_plan forward = nullptr;
  fftw_plan inverse = nullptr;

  explicit FftwBuffers(std::size_t n) {
    const int len = static_cast<int>(n);
    real = fftw_alloc_real(n);
    spec = fftw_alloc_complex(n / 2 + 1);
    std::lock_guard lock(fftw_planner_mutex);
    forward = fftw_plan_dft_r2c_1d(len, real, spec, FFTW_ESTIMATE);
    inverse = fftw_plan_dft_c2r_1d(len, spec, real, FFTW_ESTIMATE);
  }
  ~FftwBuffers() {
    std::lock_guard lock(fftw_planner_mutex);
    fftw_destroy_plan(forward);
    fftw_destroy_plan(inverse);
    fftw_free(real);
    fftw_free(spec);
  }
  FftwBuffers(const FftwBuffers&) = delete;
  FftwBuffers& operator=(const FftwBuffers&) = delete;
};

void pink_noise_into(std::span<double> out, Pcg32& rng, FftwBuffers& fft) {
  const std::size_t n = out.size();
  for (std::size_t i = 0; i < n; ++i) fft.real[i] = rng.normal();
  fftw_execute(fft.forward);
  fft.spec[0][0] = fft.spec[0][1] = 0.0;
  for (std::size_t k = 1; k <= n / 2; ++k) {
    const double g = 1.0 / std::sqrt(static_cast<double>(k));  // power ~ 1/f
    fft.spec[k][0] *= g;
    fft.spec[k][1] *= g;
  }
  fftw_execute(fft.inverse);
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += fft.real[i];
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (std::size_t i = 0; i < n; ++i) var += (fft.real[i] - mean) * (fft.real[i] - mean);
  const double sd = std::sqrt(var / static_cast<double>(n));
  for (std::size_t i = 0; i < n; ++i) out[i] = sd > 0.0 ? (fft.real[i] - mean) / sd : 0.0;
}

double raised_cosine(double t, double length) {
  if (t < 0.0 || t >= length) return 0.0;
  return 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * t / length));
}

// Adds the class-c burst to `channel` where sample 0 sits at the epoch onset.
void add_burst(std::span<double> channel, std::size_t first, const SynthSpec& spec, std::size_t c,
               double fs, double phase) {
  const double amplitude = spec.snr * spec.class_gain[c];
  if (amplitude == 0.0) return;
  const auto n = static_cast<std::size_t>(std::llround(spec.duration * fs));
  for (std::size_t i = 0; i < n && first + i < channel.size(); ++i) {
    const double t = static_cast<double>(i) / fs;
    const double env = raised_cosine(t - spec.class_latency[c], spec.envelope);
    if (env == 0.0) continue;
    channel[first + i] += amplitude * env * std::sin(2.0 * std::numbers::pi * spec.frequency * t + phase);
  }
}

}  // namespace

std::vector<std::vector<std::size_t>> SynthSpec::default_class_channels() {
  // motor_channels(): F3 F1 Fz F2 F4 | FC3 FC1 FC2 FC4 | C3 C1 Cz C2 C4 | CP3 CP1 CPz CP2 CP4 | P3 P1 Pz P2 P4
  return {
      {9, 10, 5},    // thumb:  C3, C1, FC3
      {10, 11, 6},   // index:  C1, Cz, FC1
      {10, 11, 15},  // middle: C1, Cz, CP1
      {11, 15, 16},  // ring:   Cz, CP1, CPz
      {9, 14, 15},   // little: C3, CP3, CP1
  };
}

std::vector<double> SynthSpec::default_class_latencies() { return {0.4, 0.9, 1.4, 1.9, 2.4}; }

std::size_t SynthSpec::n_samples() const { return static_cast<std::size_t>(std::llround(duration * fs)); }

void SynthSpec::validate() const {
  if (!(fs > 0.0) || !(duration > 0.0) || n_samples() == 0) throw ValueError("synth: fs and duration must be positive");
  if (n_channels == 0) throw ValueError("synth: n_channels must be positive");
  if (!(snr >= 0.0) || !std::isfinite(snr)) throw ValueError("synth: snr must be finite and >= 0");
  if (!(frequency > 0.0) || frequency >= fs / 2.0) throw ValueError("synth: frequency must lie in (0, fs/2)");
  if (!(envelope > 0.0)) throw ValueError("synth: envelope must be positive");
  if (class_channel_map.size() != kNumClasses || class_latency.size() != kNumClasses ||
      class_gain.size() != kNumClasses) {
    throw ValueError("synth: class map, latencies and gains need one entry per class");
  }
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    for (auto ch : class_channel_map[c]) {
      if (ch >= n_channels) {
        throw ValueError("synth: class " + std::to_string(c) + " uses channel " + std::to_string(ch) +
                         " outside [0, " + std::to_string(n_channels) + ")");
      }
    }
    if (!(class_latency[c] >= 0.0 && class_latency[c] < duration)) {
      throw ValueError("synth: class " + std::to_string(c) + " latency must lie in [0, duration)");
    }
    if (!(class_gain[c] >= 0.0) || !std::isfinite(class_gain[c])) {
      throw ValueError("synth: class gains must be finite and >= 0");
    }
  }
}

std::vector<double> pink_noise(std::size_t n, Pcg32& rng) {
  if (n < 2) throw ValueError("pink_noise: need at least 2 samples");
  std::vector<double> out(n);
  FftwBuffers fft(n);
  pink_noise_into(out, rng, fft);
  return out;
}

EpochedDataset synth_dataset(const SynthSpec& spec) {
  spec.validate();
  EpochedDataset d;
  d.fs = spec.fs;
  d.n_samples = spec.n_samples();
  if (d.n_samples < 2) throw ValueError("synth: epochs need at least 2 samples");
  if (spec.n_channels == motor_channels().size()) {
    d.channel_names = motor_channels();
  } else {
    for (std::size_t c = 0; c < spec.n_channels; ++c) d.channel_names.push_back("ch" + std::to_string(c));
  }
  const std::size_t n_trials = spec.n_trials_per_class * kNumClasses;
  d.labels.reserve(n_trials);
  d.epochs.resize(n_trials * d.epoch_size());

  Pcg32 rng(spec.seed);
  FftwBuffers fft(d.n_samples);
  for (std::size_t t = 0; t < n_trials; ++t) {
    const auto label = static_cast<std::uint8_t>(t % kNumClasses);
    d.labels.push_back(label);
    const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    auto trial = d.epoch(t);
    for (std::size_t ch = 0; ch < spec.n_channels; ++ch) {
      pink_noise_into(trial.subspan(ch * d.n_samples, d.n_samples), rng, fft);
    }
    for (auto ch : spec.class_channel_map[label]) {
      add_burst(trial.subspan(ch * d.n_samples, d.n_samples), 0, spec, label, spec.fs, phase);
    }
  }
  return d;
}

std::vector<std::string> synth_preset_names() { return {"default", "separable", "noise", "biased"}; }

SynthSpec synth_preset(std::string_view name, std::uint64_t seed) {
  SynthSpec s;
  s.seed = seed;
  if (name == "default") {
    s.snr = 1.0;
  } else if (name == "separable") {
    s.snr = 5.0;
  } else if (name == "noise") {
    s.snr = 0.0;
  } else if (name == "biased") {
    // Weak classes share channels with a strong class and differ from it only in
    // timing, so a short-trained model leans toward the strong classes yet the
    // weak ones stay learnable once the loss weights shift toward them.
    s.snr = 2.0;
    s.class_gain = {2.0, 2.0, 1.0, 1.0, 1.0};
    s.class_channel_map = {{9, 10, 5}, {11, 15, 16}, {9, 10, 5}, {11, 15, 16}, {9, 10, 5, 11, 15, 16}};
    s.class_latency = {0.5, 0.5, 2.0, 2.0, 1.25};
  } else {
    throw ValueError("unknown synth preset '" + std::string(name) + "' (expected default, separable, noise or biased)");
  }
  return s;
}

EpochedDataset make_biased_fixture(std::uint64_t seed) { return synth_dataset(synth_preset("biased", seed)); }

const std::vector<std::string>& raw_channels() {
  static const std::vector<std::string> names{
      "Fp1", "Fp2", "F7",  "F3",  "Fz",  "F4",  "F8",  "FC5", "FC1", "FC2",  "FC6", "T7",  "C3",
      "Cz",  "C4",  "T8",  "TP9", "CP5", "CP1", "CP2", "CP6", "TP10", "P7", "P3",  "Pz",  "P4",
      "P8",  "PO9", "O1",  "Oz",  "O2",  "PO10", "AF7", "AF3", "AF4", "AF8", "F5",  "F1",  "F2",
      "F6",  "FT9", "FT7", "FC3", "FC4", "FT8", "FT10", "C5", "C1",  "C2",  "C6",  "TP7", "CP3",
      "CPz", "CP4", "TP8", "P5",  "P1",  "P2",  "P6",  "PO7", "PO3", "POz", "PO4", "PO8"};
  return names;
}

void RawSynthSpec::validate() const {
  if (n_trials_per_class == 0) throw ValueError("raw synth: n_trials_per_class must be positive");
  if (!(fs > 0.0)) throw ValueError("raw synth: fs must be positive");
  if (!(cue_offset >= 0.0) || !(trial_period >= cue_offset + signal.duration)) {
    throw ValueError("raw synth: each trial period must contain cue_offset + task duration");
  }
  if (!(mains_amplitude >= 0.0)) throw ValueError("raw synth: mains amplitude must be >= 0");
  if (!(mains_hz > 0.0) || mains_hz >= fs / 2.0) throw ValueError("raw synth: mains frequency must lie in (0, fs/2)");
  if (signal.n_channels != motor_channels().size()) {
    throw ValueError("raw synth: class maps must index the 24 motor channels");
  }
  SynthSpec probe = signal;
  probe.fs = fs;
  probe.validate();
}

Recording synth_recording(const RawSynthSpec& spec) {
  spec.validate();
  Recording rec;
  rec.fs = spec.fs;
  rec.channel_names = raw_channels();
  const std::size_t n_trials = spec.n_trials_per_class * kNumClasses;
  rec.n_samples = static_cast<std::size_t>(std::llround(static_cast<double>(n_trials) * spec.trial_period * spec.fs));
  rec.data.resize(rec.n_channels() * rec.n_samples);

  Pcg32 rng(spec.seed);
  FftwBuffers fft(rec.n_samples);
  for (std::size_t ch = 0; ch < rec.n_channels(); ++ch) {
    auto x = rec.channel(ch);
    pink_noise_into(x, rng, fft);
    const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double w = 2.0 * std::numbers::pi * spec.mains_hz / spec.fs;
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += spec.mains_amplitude * std::sin(w * static_cast<double>(i) + phase);
  }

  std::vector<std::size_t> motor_to_raw;
  for (const auto& name : motor_channels()) {
    motor_to_raw.push_back(static_cast<std::size_t>(
        std::find(rec.channel_names.begin(), rec.channel_names.end(), name) - rec.channel_names.begin()));
  }
  for (std::size_t t = 0; t < n_trials; ++t) {
    const auto label = static_cast<std::uint8_t>(t % kNumClasses);
    const auto cue = static_cast<std::size_t>(
        std::llround((static_cast<double>(t) * spec.trial_period + spec.cue_offset) * spec.fs));
    rec.events.push_back({cue, label});
    const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    for (auto m : spec.signal.class_channel_map[label]) {
      add_burst(rec.channel(motor_to_raw[m]), cue, spec.signal, label, spec.fs, phase);
    }
  }
  return rec;
}

}  // namespace fingermi
