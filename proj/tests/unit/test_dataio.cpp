#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>

#include "fingermi/eegf.hpp"
#include "fingermi/error.hpp"
#include "fingermi/folds.hpp"
#include "fingermi/synth.hpp"
#include "helpers.hpp"

using namespace fingermi;
using fingermi::testing::TempDir;

namespace {

EpochedDataset small_dataset(std::uint64_t seed) {
  SynthSpec s;
  s.n_trials_per_class = 3;
  s.n_channels = 4;
  s.duration = 0.2;
  s.class_channel_map = {{0}, {1}, {2}, {3}, {0, 3}};
  s.class_latency = {0.0, 0.0, 0.05, 0.05, 0.1};
  s.seed = seed;
  return synth_dataset(s);
}

std::vector<char> read_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void write_bytes(const std::filesystem::path& p, const std::vector<char>& bytes) {
  std::ofstream out(p, std::ios::binary);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

FormatErrorKind read_error_kind(const std::filesystem::path& p) {
  try {
    read_eegf(p);
  } catch (const FormatError& e) {
    return e.kind();
  }
  FAIL("expected FormatError");
  return FormatErrorKind::Io;
}

// Mean periodogram power over DFT bins [lo, hi).
double band_power(std::span<const double> x, std::size_t lo, std::size_t hi) {
  const double n = static_cast<double>(x.size());
  double total = 0.0;
  for (std::size_t k = lo; k < hi; ++k) {
    double re = 0.0, im = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double a = 2.0 * std::numbers::pi * static_cast<double>(k * i) / n;
      re += x[i] * std::cos(a);
      im -= x[i] * std::sin(a);
    }
    total += re * re + im * im;
  }
  return total / static_cast<double>(hi - lo);
}

}  // namespace

TEST_CASE("EEGF round trip is exact up to f32 storage") {
  TempDir dir("eegf_rt");
  const EpochedDataset d = small_dataset(1);
  write_eegf(d, dir / "d.eegf");
  const EpochedDataset r = read_eegf(dir / "d.eegf");
  CHECK(r.fs == d.fs);
  CHECK(r.channel_names == d.channel_names);
  CHECK(r.n_samples == d.n_samples);
  CHECK(r.labels == d.labels);
  REQUIRE(r.epochs.size() == d.epochs.size());
  for (std::size_t i = 0; i < d.epochs.size(); ++i) {
    CHECK(r.epochs[i] == static_cast<double>(static_cast<float>(d.epochs[i])));
  }
  // Values already representable in f32 survive a second trip bit for bit.
  write_eegf(r, dir / "again.eegf");
  CHECK(read_eegf(dir / "again.eegf").epochs == r.epochs);
  CHECK(read_bytes(dir / "again.eegf") == read_bytes(dir / "d.eegf"));
}

TEST_CASE("EEGF byte layout: header fields, space-padded names, u8 labels") {
  TempDir dir("eegf_layout");
  EpochedDataset d;
  d.fs = 250.0;
  d.channel_names = {"C3", "Cz"};
  d.n_samples = 3;
  d.labels = {4};
  d.epochs = {1, 2, 3, 4, 5, 6};
  write_eegf(d, dir / "l.eegf");
  const auto b = read_bytes(dir / "l.eegf");
  // magic + version + fs + three counts + 2 names + 1 label + 6 samples
  CHECK(b.size() == 4 + 4 + 4 + 12 + 16 + 1 + 24);
  CHECK(std::string(b.begin(), b.begin() + 4) == "EEGF");
  CHECK(b[4] == 1);
  CHECK(std::string(b.begin() + 24, b.begin() + 32) == "C3      ");
  CHECK(b[40] == 4);
}

TEST_CASE("EEGF reader rejects empty, truncated, padded and foreign files") {
  TempDir dir("eegf_bad");
  write_eegf(small_dataset(2), dir / "ok.eegf");
  const auto bytes = read_bytes(dir / "ok.eegf");

  write_bytes(dir / "empty.eegf", {});
  CHECK(read_error_kind(dir / "empty.eegf") == FormatErrorKind::Truncated);

  write_bytes(dir / "short.eegf", {bytes.begin(), bytes.end() - 9});
  CHECK(read_error_kind(dir / "short.eegf") == FormatErrorKind::Truncated);

  auto padded = bytes;
  padded.push_back('\0');
  write_bytes(dir / "padded.eegf", padded);
  CHECK(read_error_kind(dir / "padded.eegf") == FormatErrorKind::SizeMismatch);

  auto magic = bytes;
  magic[0] = 'X';
  write_bytes(dir / "magic.eegf", magic);
  CHECK(read_error_kind(dir / "magic.eegf") == FormatErrorKind::BadMagic);

  CHECK(read_error_kind(dir / "missing.eegf") == FormatErrorKind::Io);
}

TEST_CASE("EEGF writer validates channel names and labels") {
  TempDir dir("eegf_names");
  EpochedDataset d = small_dataset(3);
  d.channel_names[0] = "TOOLONGNAME";
  CHECK_THROWS_AS(write_eegf(d, dir / "a.eegf"), FormatError);
  d = small_dataset(3);
  d.labels[0] = 9;
  CHECK_THROWS(write_eegf(d, dir / "b.eegf"));
}

TEST_CASE("EEGR round trip keeps recordings and events") {
  TempDir dir("eegr");
  Recording r;
  r.fs = 1000.0;
  r.channel_names = {"C3", "Cz"};
  r.n_samples = 5;
  r.data = {1, 2, 3, 4, 5, -1, -2, -3, -4, -5};
  r.events = {{1, 0}, {3, 4}};
  write_eegr(r, dir / "r.eegr");
  const Recording back = read_eegr(dir / "r.eegr");
  CHECK(back.fs == r.fs);
  CHECK(back.channel_names == r.channel_names);
  CHECK(back.data == r.data);
  CHECK(back.events == r.events);
}

TEST_CASE("synthetic datasets are deterministic in the seed") {
  const EpochedDataset a = synth_dataset(synth_preset("default", 11));
  const EpochedDataset b = synth_dataset(synth_preset("default", 11));
  const EpochedDataset c = synth_dataset(synth_preset("default", 12));
  CHECK(a.epochs == b.epochs);
  CHECK(a.labels == b.labels);
  CHECK(a.epochs != c.epochs);
  CHECK(a.n_trials() == 125);
  CHECK(a.n_channels() == 24);
  CHECK(a.n_samples == 1000);
  CHECK(a.fs == 250.0);
  CHECK(a.label_counts() == std::vector<std::size_t>(5, 25));
  for (std::size_t i = 0; i < 10; ++i) CHECK(a.labels[i] == i % 5);
  CHECK(a.channel_names == motor_channels());
}

TEST_CASE("synth presets and validation") {
  CHECK(synth_preset("noise").snr == 0.0);
  CHECK(synth_preset("separable").snr > synth_preset("default").snr);
  const SynthSpec biased = synth_preset("biased");
  CHECK(biased.class_gain == std::vector<double>{2.0, 2.0, 1.0, 1.0, 1.0});
  CHECK_THROWS_AS(synth_preset("loud"), ValueError);
  SynthSpec s;
  s.class_channel_map[0] = {30};
  CHECK_THROWS_AS(synth_dataset(s), ValueError);
  s = SynthSpec{};
  s.snr = -1.0;
  CHECK_THROWS_AS(synth_dataset(s), ValueError);
  const EpochedDataset fixture = make_biased_fixture(5);
  CHECK(fixture.label_counts() == std::vector<std::size_t>(5, 25));
}

TEST_CASE("pink noise has unit variance and a 1/f spectrum") {
  Pcg32 rng(4);
  double low = 0.0, high = 0.0;
  for (int rep = 0; rep < 8; ++rep) {
    const auto x = pink_noise(1024, rng);
    double mean = 0.0, var = 0.0;
    for (double v : x) mean += v;
    mean /= 1024.0;
    for (double v : x) var += (v - mean) * (v - mean);
    CHECK(var / 1024.0 == doctest::Approx(1.0).epsilon(0.05));
    low += band_power(x, 8, 16);
    high += band_power(x, 64, 128);
  }
  // A 1/f spectrum puts 8x more power per bin in bins 8-16 than in bins 64-128.
  const double ratio = low / high;
  CHECK(ratio > 4.0);
  CHECK(ratio < 16.0);
}

TEST_CASE("class signal concentrates 10 Hz power on the class channels") {
  SynthSpec s = synth_preset("separable", 9);
  s.n_trials_per_class = 4;
  const EpochedDataset d = synth_dataset(s);
  const auto& on = s.class_channel_map[0];
  std::size_t off = 0;
  while (std::find(on.begin(), on.end(), off) != on.end()) ++off;
  // Bin 40 of a 1000-sample window at 250 Hz is 10 Hz.
  double p_on = 0.0, p_off = 0.0;
  for (std::size_t t = 0; t < d.n_trials(); ++t) {
    if (d.labels[t] != 0) continue;
    p_on += band_power(d.epoch(t).subspan(on[0] * d.n_samples, d.n_samples), 39, 42);
    p_off += band_power(d.epoch(t).subspan(off * d.n_samples, d.n_samples), 39, 42);
  }
  CHECK(p_on > 10.0 * p_off);
}

TEST_CASE("stratified k-fold partitions every index once and balances classes") {
  std::vector<std::uint8_t> labels;
  for (std::size_t i = 0; i < 125; ++i) labels.push_back(static_cast<std::uint8_t>(i % 5));
  const auto folds = stratified_kfold(labels, 5, 3);
  REQUIRE(folds.size() == 5);
  std::vector<int> seen(125, 0);
  for (const auto& f : folds) {
    CHECK(f.test.size() == 25);
    CHECK(f.train.size() == 100);
    std::vector<int> per_class(5, 0);
    for (auto i : f.test) {
      ++seen[i];
      ++per_class[labels[i]];
    }
    for (int c : per_class) CHECK(c == 5);
    std::set<std::size_t> train(f.train.begin(), f.train.end());
    for (auto i : f.test) CHECK(train.count(i) == 0);
  }
  for (int s : seen) CHECK(s == 1);

  const auto again = stratified_kfold(labels, 5, 3);
  for (std::size_t f = 0; f < 5; ++f) CHECK(again[f].test == folds[f].test);
  const auto other = stratified_kfold(labels, 5, 4);
  bool differs = false;
  for (std::size_t f = 0; f < 5; ++f) differs = differs || other[f].test != folds[f].test;
  CHECK(differs);
}

TEST_CASE("stratified k-fold spreads uneven classes and rejects impossible splits") {
  std::vector<std::uint8_t> labels{0, 0, 0, 1, 1, 1, 1, 2, 2};
  const auto folds = stratified_kfold(labels, 2, 0);
  CHECK(folds[0].test.size() + folds[1].test.size() == labels.size());
  CHECK(std::abs(static_cast<int>(folds[0].test.size()) - static_cast<int>(folds[1].test.size())) <= 1);
  CHECK_THROWS_AS(stratified_kfold(labels, 1, 0), ValueError);
  CHECK_THROWS_AS(stratified_kfold(labels, 3, 0), ValueError);
  CHECK_THROWS_AS(stratified_kfold(std::vector<std::uint8_t>{}, 2, 0), ValueError);
}
