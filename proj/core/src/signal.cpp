#include "fingermi/signal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace fingermi {

void Recording::validate() const {
  if (!(fs > 0.0)) throw ValueError("recording: sampling rate must be positive");
  if (data.size() != channel_names.size() * n_samples) {
    throw ShapeError("recording: data holds " + std::to_string(data.size()) + " values, expected " +
                     std::to_string(channel_names.size()) + " x " + std::to_string(n_samples));
  }
  for (std::size_t i = 0; i < events.size(); ++i) {
    if (events[i].sample >= n_samples) {
      throw ValueError("recording: event " + std::to_string(i) + " at sample " +
                       std::to_string(events[i].sample) + " lies outside " +
                       std::to_string(n_samples) + " samples");
    }
  }
}

Tensor EpochedDataset::batch(std::span<const std::size_t> indices) const {
  if (indices.empty()) throw ValueError("batch: no trials selected");
  const std::size_t es = epoch_size();
  std::vector<double> out(indices.size() * es);
  for (std::size_t b = 0; b < indices.size(); ++b) {
    if (indices[b] >= n_trials()) throw ValueError("batch: trial index out of range");
    auto src = epoch(indices[b]);
    std::copy(src.begin(), src.end(), out.begin() + static_cast<std::ptrdiff_t>(b * es));
  }
  return Tensor(Shape{indices.size(), 1, n_channels(), n_samples}, std::move(out));
}

EpochedDataset EpochedDataset::subset(std::span<const std::size_t> indices) const {
  EpochedDataset out;
  out.fs = fs;
  out.channel_names = channel_names;
  out.n_samples = n_samples;
  out.epochs.reserve(indices.size() * epoch_size());
  for (std::size_t i : indices) {
    if (i >= n_trials()) throw ValueError("subset: trial index out of range");
    auto src = epoch(i);
    out.epochs.insert(out.epochs.end(), src.begin(), src.end());
    out.labels.push_back(labels[i]);
  }
  return out;
}

std::vector<std::size_t> EpochedDataset::label_counts(std::size_t n_classes) const {
  std::vector<std::size_t> counts(n_classes, 0);
  for (auto l : labels) {
    if (l >= n_classes) throw ValueError("label " + std::to_string(l) + " out of range");
    ++counts[l];
  }
  return counts;
}

void EpochedDataset::validate() const {
  if (!(fs > 0.0)) throw ValueError("dataset: sampling rate must be positive");
  if (epochs.size() != labels.size() * epoch_size()) {
    throw ShapeError("dataset: payload does not match trials x channels x samples");
  }
  for (auto l : labels) {
    if (l >= kNumClasses) throw ValueError("dataset: label " + std::to_string(l) + " >= 5");
  }
}

const std::vector<std::string>& motor_channels() {
  static const std::vector<std::string> names{
      "F3",  "F1",  "Fz",  "F2",  "F4",  "FC3", "FC1", "FC2", "FC4", "C3",  "C1", "Cz",
      "C2",  "C4",  "CP3", "CP1", "CPz", "CP2", "CP4", "P3",  "P1",  "Pz",  "P2", "P4"};
  return names;
}

Biquad design_notch(double f0, double fs, double q) {
  if (!(fs > 0.0)) throw ValueError("notch: sampling rate must be positive");
  if (!(f0 > 0.0) || !(f0 < fs / 2.0)) {
    throw ValueError("notch: f0 = " + std::to_string(f0) + " Hz must lie in (0, " +
                     std::to_string(fs / 2.0) + ") Hz");
  }
  if (!(q > 0.0)) throw ValueError("notch: Q must be positive");
  const double w0 = 2.0 * std::numbers::pi * f0 / fs;
  const double alpha = std::sin(w0) / (2.0 * q);
  const double a0 = 1.0 + alpha;
  const double c = -2.0 * std::cos(w0);
  Biquad s;
  s.b = {1.0 / a0, c / a0, 1.0 / a0};
  s.a = {1.0, c / a0, (1.0 - alpha) / a0};
  return s;
}

std::vector<double> design_lowpass(double cutoff, double fs, std::size_t taps) {
  if (taps == 0 || taps % 2 == 0) throw ValueError("lowpass: tap count must be odd");
  if (!(cutoff > 0.0) || !(cutoff < fs / 2.0)) throw ValueError("lowpass: cutoff must lie below Nyquist");
  const double fc = cutoff / fs;
  const double mid = static_cast<double>(taps - 1) / 2.0;
  std::vector<double> h(taps);
  double sum = 0.0;
  for (std::size_t n = 0; n < taps; ++n) {
    const double t = static_cast<double>(n) - mid;
    const double sinc = t == 0.0 ? 2.0 * fc
                                 : std::sin(2.0 * std::numbers::pi * fc * t) / (std::numbers::pi * t);
    const double window =
        taps == 1 ? 1.0
                  : 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(n) /
                                           static_cast<double>(taps - 1));
    h[n] = sinc * window;
    sum += h[n];
  }
  for (auto& v : h) v /= sum;
  return h;
}

namespace {

// Odd reflection about both end points: x[0] - (x[k] - x[0]).
std::vector<double> odd_extend(std::span<const double> x, std::size_t pad) {
  const std::size_t n = x.size();
  std::vector<double> ext(n + 2 * pad);
  for (std::size_t i = 0; i < pad; ++i) ext[i] = 2.0 * x[0] - x[pad - i];
  std::copy(x.begin(), x.end(), ext.begin() + static_cast<std::ptrdiff_t>(pad));
  for (std::size_t i = 0; i < pad; ++i) ext[pad + n + i] = 2.0 * x[n - 1] - x[n - 2 - i];
  return ext;
}

// Direct form II transposed, state initialized to `zi * x0`.
void biquad_run(const Biquad& s, std::vector<double>& x, std::array<double, 2> zi, double x0) {
  double z0 = zi[0] * x0;
  double z1 = zi[1] * x0;
  for (auto& v : x) {
    const double in = v;
    const double y = s.b[0] * in + z0;
    z0 = s.b[1] * in - s.a[1] * y + z1;
    z1 = s.b[2] * in - s.a[2] * y;
    v = y;
  }
}

// Steady-state state vector for a unit step input.
std::array<double, 2> biquad_zi(const Biquad& s) {
  // (I - A^T) zi = b[1:] - a[1:] * b[0], A the companion matrix of a.
  const double m00 = 1.0 + s.a[1], m01 = -1.0, m10 = s.a[2], m11 = 1.0;
  const double r0 = s.b[1] - s.a[1] * s.b[0];
  const double r1 = s.b[2] - s.a[2] * s.b[0];
  const double det = m00 * m11 - m01 * m10;
  return {(r0 * m11 - m01 * r1) / det, (m00 * r1 - m10 * r0) / det};
}

}  // namespace

std::vector<double> filtfilt(const Biquad& section, std::span<const double> x) {
  if (x.empty()) return {};
  if (x.size() == 1) {
    const double dc = (section.b[0] + section.b[1] + section.b[2]) / (1.0 + section.a[1] + section.a[2]);
    return {x[0] * dc * dc};
  }
  constexpr std::size_t kOrder = 2;
  const std::size_t pad = std::min<std::size_t>(3 * kOrder, x.size() - 1);
  std::vector<double> y = odd_extend(x, pad);
  const auto zi = biquad_zi(section);
  biquad_run(section, y, zi, y.front());
  std::reverse(y.begin(), y.end());
  biquad_run(section, y, zi, y.front());
  std::reverse(y.begin(), y.end());
  return {y.begin() + static_cast<std::ptrdiff_t>(pad),
          y.begin() + static_cast<std::ptrdiff_t>(pad + x.size())};
}

std::vector<double> fir_zero_phase(std::span<const double> taps, std::span<const double> x,
                                   std::size_t step) {
  if (taps.empty() || taps.size() % 2 == 0) throw ValueError("fir: tap count must be odd");
  if (step == 0) throw ValueError("fir: step must be >= 1");
  if (x.empty()) return {};
  const std::size_t half = taps.size() / 2;
  const std::size_t order = taps.size() - 1;
  const std::size_t pad = x.size() > 1 ? std::min(3 * order, x.size() - 1) : 0;
  const std::vector<double> ext = odd_extend(x, pad);
  // Samples beyond the reflected border count as zero.
  auto at = [&](std::ptrdiff_t i) -> double {
    return (i < 0 || i >= static_cast<std::ptrdiff_t>(ext.size())) ? 0.0 : ext[static_cast<std::size_t>(i)];
  };
  std::vector<double> out;
  out.reserve((x.size() + step - 1) / step);
  for (std::size_t i = 0; i < x.size(); i += step) {
    const std::ptrdiff_t center = static_cast<std::ptrdiff_t>(pad + i);
    double acc = 0.0;
    for (std::size_t k = 0; k < taps.size(); ++k) {
      acc += taps[k] * at(center + static_cast<std::ptrdiff_t>(k) - static_cast<std::ptrdiff_t>(half));
    }
    out.push_back(acc);
  }
  return out;
}

Recording notch_filter(const Recording& recording, double f0, double q) {
  recording.validate();
  const Biquad section = design_notch(f0, recording.fs, q);
  Recording out = recording;
  for (std::size_t c = 0; c < recording.n_channels(); ++c) {
    const auto y = filtfilt(section, recording.channel(c));
    std::copy(y.begin(), y.end(), out.channel(c).begin());
  }
  return out;
}

Recording decimate(const Recording& recording, std::size_t factor) {
  if (factor < 1) throw ValueError("decimate: factor must be >= 1");
  recording.validate();
  if (factor == 1) return recording;
  constexpr std::size_t kTaps = 101;
  const double new_nyquist = recording.fs / 2.0 / static_cast<double>(factor);
  const auto taps = design_lowpass(0.8 * new_nyquist, recording.fs, kTaps);

  Recording out;
  out.fs = recording.fs / static_cast<double>(factor);
  out.channel_names = recording.channel_names;
  out.n_samples = (recording.n_samples + factor - 1) / factor;
  out.data.reserve(out.n_samples * recording.n_channels());
  for (std::size_t c = 0; c < recording.n_channels(); ++c) {
    const auto y = fir_zero_phase(taps, recording.channel(c), factor);
    out.data.insert(out.data.end(), y.begin(), y.end());
  }
  for (const auto& e : recording.events) out.events.push_back({e.sample / factor, e.label});
  return out;
}

Recording select_channels(const Recording& recording, const std::vector<std::string>& names) {
  recording.validate();
  std::vector<std::size_t> rows;
  std::string missing;
  for (const auto& name : names) {
    auto it = std::find(recording.channel_names.begin(), recording.channel_names.end(), name);
    if (it == recording.channel_names.end()) {
      missing += (missing.empty() ? "" : ", ") + name;
    } else {
      rows.push_back(static_cast<std::size_t>(it - recording.channel_names.begin()));
    }
  }
  if (!missing.empty()) throw ValueError("select_channels: unknown channel(s): " + missing);
  Recording out;
  out.fs = recording.fs;
  out.channel_names = names;
  out.n_samples = recording.n_samples;
  out.events = recording.events;
  out.data.reserve(rows.size() * recording.n_samples);
  for (auto r : rows) {
    auto src = recording.channel(r);
    out.data.insert(out.data.end(), src.begin(), src.end());
  }
  return out;
}

EpochedDataset epoch(const Recording& recording, double start_s, double duration_s) {
  recording.validate();
  if (!(duration_s > 0.0)) throw ValueError("epoch: duration must be positive");
  const auto length = static_cast<std::size_t>(std::llround(duration_s * recording.fs));
  const auto offset = static_cast<std::ptrdiff_t>(std::llround(start_s * recording.fs));
  if (length == 0) throw ValueError("epoch: window shorter than one sample");

  EpochedDataset ds;
  ds.fs = recording.fs;
  ds.channel_names = recording.channel_names;
  ds.n_samples = length;
  ds.epochs.reserve(recording.events.size() * recording.n_channels() * length);
  for (std::size_t i = 0; i < recording.events.size(); ++i) {
    const Event& e = recording.events[i];
    const std::ptrdiff_t begin = static_cast<std::ptrdiff_t>(e.sample) + offset;
    if (begin < 0 || static_cast<std::size_t>(begin) + length > recording.n_samples) {
      throw ValueError("epoch: window of event " + std::to_string(i) + " (sample " +
                       std::to_string(e.sample) + ") exceeds recording of " +
                       std::to_string(recording.n_samples) + " samples");
    }
    if (e.label >= kNumClasses) {
      throw ValueError("epoch: event " + std::to_string(i) + " has label " +
                       std::to_string(e.label) + " >= 5");
    }
    for (std::size_t c = 0; c < recording.n_channels(); ++c) {
      auto src = recording.channel(c).subspan(static_cast<std::size_t>(begin), length);
      ds.epochs.insert(ds.epochs.end(), src.begin(), src.end());
    }
    ds.labels.push_back(e.label);
  }
  return ds;
}

void zscore_epochs(EpochedDataset& dataset) {
  const std::size_t ns = dataset.n_samples;
  if (ns == 0) return;
  for (std::size_t t = 0; t < dataset.n_trials(); ++t) {
    auto ep = dataset.epoch(t);
    for (std::size_t c = 0; c < dataset.n_channels(); ++c) {
      auto row = ep.subspan(c * ns, ns);
      double mean = 0.0;
      for (double v : row) mean += v;
      mean /= static_cast<double>(ns);
      double var = 0.0;
      for (double v : row) var += (v - mean) * (v - mean);
      var /= static_cast<double>(ns);
      const double sd = std::sqrt(var);
      const double scale = sd > 1e-12 ? 1.0 / sd : 1.0;
      for (auto& v : row) v = (v - mean) * scale;
    }
  }
}

EpochedDataset preprocess(const Recording& recording, const PreprocessOptions& options) {
  Recording r = notch_filter(recording, options.notch_hz, options.notch_q);
  r = decimate(r, options.decimate_factor);
  r = select_channels(r, options.channels);
  EpochedDataset ds = epoch(r, options.epoch_start, options.epoch_duration);
  if (options.zscore) zscore_epochs(ds);
  return ds;
}

}  // namespace fingermi
