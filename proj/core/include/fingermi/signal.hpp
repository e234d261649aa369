#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fingermi/tensor.hpp"

namespace fingermi {

inline constexpr std::size_t kNumClasses = 5;  // thumb, index, middle, ring, little

struct Event {
  std::size_t sample = 0;
  std::uint8_t label = 0;
  friend bool operator==(const Event&, const Event&) = default;
};

/// Continuous multichannel EEG, channel-major (each channel's samples are contiguous).
struct Recording {
  double fs = 1000.0;
  std::vector<std::string> channel_names;
  std::size_t n_samples = 0;
  std::vector<double> data;
  std::vector<Event> events;

  std::size_t n_channels() const { return channel_names.size(); }
  std::span<double> channel(std::size_t c) { return std::span(data).subspan(c * n_samples, n_samples); }
  std::span<const double> channel(std::size_t c) const {
    return std::span(data).subspan(c * n_samples, n_samples);
  }
  void validate() const;
};

/// Labelled trials stored trial-major, then channel-major.
struct EpochedDataset {
  double fs = 250.0;
  std::vector<std::string> channel_names;
  std::size_t n_samples = 0;
  std::vector<double> epochs;
  std::vector<std::uint8_t> labels;

  std::size_t n_trials() const { return labels.size(); }
  std::size_t n_channels() const { return channel_names.size(); }
  std::size_t epoch_size() const { return n_channels() * n_samples; }
  std::span<double> epoch(std::size_t i) { return std::span(epochs).subspan(i * epoch_size(), epoch_size()); }
  std::span<const double> epoch(std::size_t i) const {
    return std::span(epochs).subspan(i * epoch_size(), epoch_size());
  }

  /// Trials `indices` as a [N,1,channels,samples] tensor.
  Tensor batch(std::span<const std::size_t> indices) const;
  EpochedDataset subset(std::span<const std::size_t> indices) const;
  std::vector<std::size_t> label_counts(std::size_t n_classes = kNumClasses) const;
  void validate() const;
};

/// The 24 motor-cortex electrodes, in selection order.
const std::vector<std::string>& motor_channels();

/// Second-order section coefficients, normalized so a0 == 1.
struct Biquad {
  std::array<double, 3> b{};
  std::array<double, 3> a{};
};

/// Audio-cookbook notch at f0 with quality factor q.
Biquad design_notch(double f0, double fs, double q);

/// Hamming-windowed sinc low-pass with unit DC gain; `taps` must be odd.
std::vector<double> design_lowpass(double cutoff, double fs, std::size_t taps);

/// Forward-backward biquad filtering (zero phase). Edges use odd reflection
/// of 3x the filter order plus steady-state initial conditions.
std::vector<double> filtfilt(const Biquad& section, std::span<const double> x);

/// Zero-phase (centered) FIR filtering of a symmetric kernel, keeping every
/// `step`-th output sample starting at 0. Edges use odd reflection of 3x the order.
std::vector<double> fir_zero_phase(std::span<const double> taps, std::span<const double> x,
                                   std::size_t step = 1);

/// Zero-phase notch (default 60 Hz, Q = 30) applied to every channel.
Recording notch_filter(const Recording& recording, double f0 = 60.0, double q = 30.0);

/// Anti-alias low-pass (101-tap Hamming sinc, cutoff 0.8 x new Nyquist) then
/// keep every factor-th sample. Event indices are divided by factor (floor).
Recording decimate(const Recording& recording, std::size_t factor = 4);

/// Rows reordered/subset to `names`; throws ValueError listing unknown names.
Recording select_channels(const Recording& recording, const std::vector<std::string>& names);

/// One epoch per event: window [onset + start_s, onset + start_s + duration_s).
EpochedDataset epoch(const Recording& recording, double start_s = 0.0, double duration_s = 4.0);

/// Per-epoch, per-channel standardization (zero mean, unit variance).
void zscore_epochs(EpochedDataset& dataset);

struct PreprocessOptions {
  double notch_hz = 60.0;
  double notch_q = 30.0;
  std::size_t decimate_factor = 4;
  std::vector<std::string> channels = motor_channels();
  double epoch_start = 0.0;
  double epoch_duration = 4.0;
  bool zscore = true;
};

/// notch -> decimate -> select -> epoch -> (optional) z-score.
EpochedDataset preprocess(const Recording& recording, const PreprocessOptions& options = {});

}  // namespace fingermi
