#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fingermi/error.hpp"
#include "fingermi/signal.hpp"
#include "fingermi/synth.hpp"

using namespace fingermi;

namespace {

Recording sine_recording(std::vector<double> freqs, double fs, std::size_t n, double amplitude = 1.0) {
  Recording r;
  r.fs = fs;
  r.n_samples = n;
  for (std::size_t c = 0; c < freqs.size(); ++c) {
    r.channel_names.push_back("ch" + std::to_string(c));
    for (std::size_t i = 0; i < n; ++i) {
      r.data.push_back(amplitude * std::sin(2.0 * std::numbers::pi * freqs[c] * static_cast<double>(i) / fs));
    }
  }
  return r;
}

// RMS over the central half, away from edge transients.
double central_rms(std::span<const double> x) {
  const std::size_t a = x.size() / 4, b = 3 * x.size() / 4;
  double s = 0.0;
  for (std::size_t i = a; i < b; ++i) s += x[i] * x[i];
  return std::sqrt(s / static_cast<double>(b - a));
}

double db(double ratio) { return 20.0 * std::log10(ratio); }

}  // namespace

TEST_CASE("notch removes mains hum and passes the mu band") {
  const Recording in = sine_recording({60.0, 10.0, 20.0}, 1000.0, 8000);
  const Recording out = notch_filter(in, 60.0, 30.0);
  CHECK(db(central_rms(in.channel(0)) / central_rms(out.channel(0))) >= 30.0);
  CHECK(std::abs(db(central_rms(out.channel(1)) / central_rms(in.channel(1)))) <= 1.0);
  CHECK(std::abs(db(central_rms(out.channel(2)) / central_rms(in.channel(2)))) <= 1.0);
}

TEST_CASE("notch is zero phase in the passband") {
  const Recording in = sine_recording({10.0}, 1000.0, 6000);
  const Recording out = notch_filter(in);
  const auto x = in.channel(0), y = out.channel(0);
  double err = 0.0;
  for (std::size_t i = 1500; i < 4500; ++i) err = std::max(err, std::abs(x[i] - y[i]));
  CHECK(err < 0.01);
}

TEST_CASE("notch design validation") {
  CHECK_THROWS_AS(design_notch(600.0, 1000.0, 30.0), ValueError);
  CHECK_THROWS_AS(design_notch(60.0, 1000.0, 0.0), ValueError);
  CHECK_THROWS_AS(design_notch(60.0, 0.0, 30.0), ValueError);
}

TEST_CASE("decimate by 4 keeps a 10 Hz tone within 1% and suppresses 400 Hz") {
  const Recording in = sine_recording({10.0, 400.0}, 1000.0, 8000);
  const Recording out = decimate(in, 4);
  CHECK(out.fs == 250.0);
  CHECK(out.n_samples == 2000);
  const auto y = out.channel(0);
  double err = 0.0;
  for (std::size_t i = 200; i < 1800; ++i) {
    const double expected = std::sin(2.0 * std::numbers::pi * 10.0 * static_cast<double>(i) / 250.0);
    err = std::max(err, std::abs(y[i] - expected));
  }
  CHECK(err <= 0.01);
  CHECK(central_rms(out.channel(1)) <= 0.01 * central_rms(in.channel(1)));
}

TEST_CASE("decimate preserves DC, is linear, and maps event samples") {
  Recording dc;
  dc.fs = 1000.0;
  dc.n_samples = 1000;
  dc.channel_names = {"a"};
  dc.data.assign(1000, 3.25);
  dc.events = {{400, 1}, {999, 4}};
  const Recording d = decimate(dc, 4);
  for (double v : d.channel(0)) CHECK(v == doctest::Approx(3.25).epsilon(1e-9));
  CHECK(d.events == std::vector<Event>{{100, 1}, {249, 4}});

  const Recording x = sine_recording({7.0}, 1000.0, 2000);
  const Recording y = sine_recording({90.0}, 1000.0, 2000);
  Recording mix = x;
  for (std::size_t i = 0; i < mix.data.size(); ++i) mix.data[i] = 2.0 * x.data[i] - 0.5 * y.data[i];
  const Recording dx = decimate(x, 4), dy = decimate(y, 4), dm = decimate(mix, 4);
  for (std::size_t i = 0; i < dm.data.size(); ++i) {
    CHECK(dm.data[i] == doctest::Approx(2.0 * dx.data[i] - 0.5 * dy.data[i]).epsilon(1e-9).scale(1.0));
  }
  CHECK(decimate(x, 1).data == x.data);
  CHECK_THROWS_AS(decimate(x, 0), ValueError);
}

TEST_CASE("zero-phase FIR commutes with time reversal") {
  const auto taps = design_lowpass(50.0, 1000.0, 31);
  for (std::size_t i = 0; i < taps.size(); ++i) CHECK(taps[i] == doctest::Approx(taps[taps.size() - 1 - i]));
  std::vector<double> x(500);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::sin(0.05 * static_cast<double>(i * i % 97));
  std::vector<double> rev(x.rbegin(), x.rend());
  const auto a = fir_zero_phase(taps, x);
  const auto b = fir_zero_phase(taps, rev);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(b[a.size() - 1 - i]).epsilon(1e-12).scale(1.0));
  CHECK_THROWS_AS(design_lowpass(50.0, 1000.0, 30), ValueError);
  CHECK_THROWS_AS(design_lowpass(600.0, 1000.0, 31), ValueError);
}

TEST_CASE("select_channels reorders by name and reports unknown names") {
  const Recording in = sine_recording({1.0, 2.0, 3.0}, 100.0, 50);
  const Recording out = select_channels(in, {"ch2", "ch0"});
  CHECK(out.channel_names == std::vector<std::string>{"ch2", "ch0"});
  CHECK(std::equal(out.channel(0).begin(), out.channel(0).end(), in.channel(2).begin()));
  CHECK(std::equal(out.channel(1).begin(), out.channel(1).end(), in.channel(0).begin()));
  try {
    select_channels(in, {"ch0", "Cz", "ch9"});
    FAIL("expected ValueError");
  } catch (const ValueError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("Cz") != std::string::npos);
    CHECK(msg.find("ch9") != std::string::npos);
  }
}

TEST_CASE("epoch cuts fixed windows at events") {
  Recording r;
  r.fs = 10.0;
  r.n_samples = 100;
  r.channel_names = {"a", "b"};
  for (std::size_t c = 0; c < 2; ++c)
    for (std::size_t i = 0; i < 100; ++i) r.data.push_back(static_cast<double>(c * 1000 + i));
  r.events = {{10, 0}, {50, 3}};
  const EpochedDataset ds = epoch(r, 0.5, 2.0);
  CHECK(ds.n_trials() == 2);
  CHECK(ds.n_samples == 20);
  CHECK(ds.labels == std::vector<std::uint8_t>{0, 3});
  CHECK(ds.epoch(0)[0] == 15.0);
  CHECK(ds.epoch(1)[20] == 1055.0);
  CHECK_THROWS_AS(epoch(r, 0.0, 0.0), ValueError);
  r.events.push_back({90, 1});
  CHECK_THROWS_AS(epoch(r, 0.0, 2.0), ValueError);
  r.events.back() = {5, 7};
  CHECK_THROWS_AS(epoch(r, 0.0, 2.0), ValueError);
}

TEST_CASE("zscore normalises every epoch channel to population mean 0, SD 1") {
  EpochedDataset ds;
  ds.channel_names = {"a", "b"};
  ds.n_samples = 4;
  ds.epochs = {1, 2, 3, 4, 5, 5, 5, 5};
  ds.labels = {2};
  zscore_epochs(ds);
  const double sd = std::sqrt(1.25);
  CHECK(ds.epochs[0] == doctest::Approx(-1.5 / sd));
  CHECK(ds.epochs[3] == doctest::Approx(1.5 / sd));
  for (std::size_t i = 4; i < 8; ++i) CHECK(ds.epochs[i] == 0.0);  // constant rows map to zero
}

TEST_CASE("full preprocessing of a raw recording yields 125 trials of 24 x 1000") {
  RawSynthSpec spec;
  spec.seed = 3;
  const Recording raw = synth_recording(spec);
  CHECK(raw.fs == 1000.0);
  CHECK(raw.n_channels() == 64);
  CHECK(raw.events.size() == 125);
  const EpochedDataset ds = preprocess(raw);
  CHECK(ds.fs == 250.0);
  CHECK(ds.n_trials() == 125);
  CHECK(ds.n_channels() == 24);
  CHECK(ds.n_samples == 1000);
  CHECK(ds.channel_names == motor_channels());
  CHECK(ds.label_counts() == std::vector<std::size_t>(5, 25));
  for (std::size_t t = 0; t < ds.n_trials(); t += 31) {
    const auto row = ds.epoch(t).subspan(0, 1000);
    double mean = 0.0;
    for (double v : row) mean += v;
    CHECK(std::abs(mean / 1000.0) < 1e-12);
  }
  ds.validate();
}
