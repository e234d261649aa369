#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "fingermi/random.hpp"
#include "fingermi/signal.hpp"

namespace fingermi {

/// Class-conditional synthetic EEG. Each trial is unit-variance pink noise on
/// every channel plus, on the class's channels, a sinusoid of amplitude
/// snr * class_gain[c] shaped by a raised-cosine envelope that starts at the
/// class latency.
struct SynthSpec {
  std::size_t n_trials_per_class = 25;
  std::size_t n_channels = 24;
  double fs = 250.0;
  double duration = 4.0;
  double snr = 1.0;
  double frequency = 10.0;
  double envelope = 1.5;  // seconds; the envelope is clipped at the epoch end
  std::vector<std::vector<std::size_t>> class_channel_map = default_class_channels();
  std::vector<double> class_latency = default_class_latencies();
  std::vector<double> class_gain = std::vector<double>(kNumClasses, 1.0);
  std::uint64_t seed = 0;

  std::size_t n_samples() const;
  void validate() const;

  /// Overlapping subsets around C3/C1/Cz/CP1 (indices into motor_channels()).
  static std::vector<std::vector<std::size_t>> default_class_channels();
  static std::vector<double> default_class_latencies();
};

/// Trials are emitted class-interleaved (labels 0,1,2,3,4,0,1,...).
EpochedDataset synth_dataset(const SynthSpec& spec);

/// Named presets: "default" (snr 1), "separable" (snr 5), "noise" (snr 0),
/// "biased" (snr 2; classes 0-1 at twice the amplitude of classes 2-4, with
/// classes 2-4 overlapping the channels of 0-1 but arriving later).
SynthSpec synth_preset(std::string_view name, std::uint64_t seed = 0);
std::vector<std::string> synth_preset_names();

/// Balanced dataset whose thumb and index classes carry 2x the signal amplitude
/// of the others, which pulls a plain cross-entropy model toward them.
EpochedDataset make_biased_fixture(std::uint64_t seed);

/// Continuous raw recording in acquisition geometry: 64 electrodes, 1000 Hz,
/// pink noise, mains hum, and class signals on the motor channels. Trial k
/// has its movement cue at k*trial_period + cue_offset.
struct RawSynthSpec {
  std::size_t n_trials_per_class = 25;
  double fs = 1000.0;
  double trial_period = 11.0;  // rest 3 s + fixation 2 s + instruction 2 s + task 4 s
  double cue_offset = 7.0;
  double mains_hz = 60.0;
  double mains_amplitude = 5.0;
  SynthSpec signal{};  // class structure; fs/duration/n_channels are taken from here for the task window only
  std::uint64_t seed = 0;

  void validate() const;
};

/// The 64 electrode labels of the raw recordings (a superset of motor_channels()).
const std::vector<std::string>& raw_channels();

Recording synth_recording(const RawSynthSpec& spec);

/// Unit-variance 1/f noise of length n shaped in the frequency domain.
std::vector<double> pink_noise(std::size_t n, Pcg32& rng);

}  // namespace fingermi
