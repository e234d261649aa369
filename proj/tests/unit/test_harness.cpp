#include <doctest.h>

#include <cmath>
#include <numeric>
#include <sstream>

#include "fingermi/cv.hpp"
#include "fingermi/error.hpp"
#include "fingermi/stats.hpp"
#include "fingermi/sweep.hpp"
#include "fingermi/synth.hpp"
#include "fingermi/train.hpp"

using namespace fingermi;

namespace {

// 3 channels x 64 samples at 250 Hz, strong class signals.
EpochedDataset tiny_dataset(std::uint64_t seed, double snr = 3.0) {
  SynthSpec s;
  s.n_trials_per_class = 10;
  s.n_channels = 3;
  s.duration = 64.0 / 250.0;
  s.envelope = 0.2;
  s.snr = snr;
  s.frequency = 20.0;
  s.class_channel_map = {{0}, {1}, {2}, {0, 1}, {1, 2}};
  s.class_latency = {0.0, 0.0, 0.0, 0.0, 0.0};
  s.seed = seed;
  return synth_dataset(s);
}

ModelSpec tiny_model() {
  EegNetConfig c;
  c.input = {3, 64};
  c.f1 = 4;
  c.f2 = 8;
  c.temporal_kernel = 8;
  c.separable_kernel = 4;
  c.pool1 = 2;
  c.pool2 = 2;
  return eegnet_spec(c);
}

TrainConfig tiny_config(std::size_t epochs = 5) {
  TrainConfig t;
  t.epochs = epochs;
  t.batch_size = 8;
  t.adam.lr = 5e-3;
  t.seed = 3;
  return t;
}

PredictionHistogram hist(std::vector<std::size_t> counts) { return PredictionHistogram{std::move(counts)}; }

}  // namespace

TEST_CASE("training is deterministic in the seed") {
  const EpochedDataset d = tiny_dataset(1);
  Network a = init_params(tiny_model(), 2), b = init_params(tiny_model(), 2);
  const auto la = train(a, d, tiny_config());
  const auto lb = train(b, d, tiny_config());
  CHECK(la == lb);
  for (std::size_t p = 0; p < a.params().size(); ++p) CHECK(a.params()[p] == b.params()[p]);
  CHECK(a.mode() == Mode::Eval);

  Network c = init_params(tiny_model(), 2);
  TrainConfig other = tiny_config();
  other.seed = 4;
  CHECK(train(c, d, other) != la);
}

TEST_CASE("training with lr = 0 only applies the max-norm caps") {
  const EpochedDataset d = tiny_dataset(1);
  Network net = init_params(tiny_model(), 2);
  Network capped = net;
  apply_max_norm(capped);
  TrainConfig cfg = tiny_config(2);
  cfg.adam.lr = 0.0;
  const auto losses = train(net, d, cfg);
  CHECK(losses.size() == 2);
  for (std::size_t p = 0; p < net.params().size(); ++p) CHECK(net.params()[p] == capped.params()[p]);
}

TEST_CASE("training reduces the loss on separable data and reports each epoch") {
  const EpochedDataset d = tiny_dataset(5, 5.0);
  Network net = init_params(tiny_model(), 1);
  std::vector<std::size_t> seen;
  const auto losses = train(net, d, tiny_config(50), [&](std::size_t e, double) { seen.push_back(e); });
  CHECK(losses.size() == 50);
  CHECK(seen.size() == 50);
  CHECK(seen.front() == 0);
  CHECK(losses.back() < losses.front());
  CHECK(evaluate(net, d).accuracy > 0.5);
}

TEST_CASE("train validates its inputs") {
  const EpochedDataset d = tiny_dataset(1);
  Network net = init_params(tiny_model(), 0);
  TrainConfig cfg = tiny_config();
  cfg.epochs = 0;
  CHECK_THROWS_AS(train(net, d, cfg), ValueError);
  cfg = tiny_config();
  cfg.batch_size = 0;
  CHECK_THROWS_AS(train(net, d, cfg), ValueError);
  Network big = init_params(eegnet_spec(), 0);
  CHECK_THROWS_AS(train(big, d, tiny_config()), ShapeError);
}

TEST_CASE("score_predictions: accuracy, confusion, histogram") {
  const std::vector<std::uint8_t> labels{0, 1, 2, 3, 4};
  const std::vector<std::size_t> preds{0, 1, 2, 3, 0};
  const Evaluation e = score_predictions(labels, preds);
  CHECK(e.accuracy == 0.8);
  CHECK(e.confusion.at(4, 0) == 1);
  CHECK(e.confusion.correct() == 4);
  CHECK(e.histogram.counts == std::vector<std::size_t>{2, 1, 1, 1, 0});
  CHECK(e.confusion.recall() == std::vector<double>{1, 1, 1, 1, 0});
  CHECK(e.confusion.row_sums() == std::vector<std::size_t>(5, 1));
  CHECK_THROWS_AS(score_predictions(labels, std::vector<std::size_t>{0}), ValueError);
  CHECK_THROWS_AS(score_predictions({}, {}), ValueError);
  CHECK(argmax(std::vector<double>{1.0, 3.0, 3.0}) == 1);

  std::vector<std::uint8_t> balanced;
  for (std::size_t i = 0; i < 125; ++i) balanced.push_back(static_cast<std::uint8_t>(i % 5));
  const Evaluation constant = score_predictions(balanced, std::vector<std::size_t>(125, 2));
  CHECK(constant.accuracy == 0.2);
  CHECK(constant.confusion.row_sums() == std::vector<std::size_t>(5, 25));
  CHECK(constant.histogram.max_share() == 1.0);
}

TEST_CASE("evaluate agrees with the network's argmax") {
  const EpochedDataset d = tiny_dataset(2);
  const Network net = init_params(tiny_model(), 8);
  const Evaluation e = evaluate(net, d);
  const std::vector<std::size_t> idx{0, 1, 2, 3, 4, 5, 6};
  const Tensor logits = forward(net, d.batch(idx));
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const std::size_t p = argmax(logits.data().subspan(i * 5, 5));
    std::size_t hits = 0;
    for (std::size_t c = 0; c < 5; ++c) hits += e.confusion.at(d.labels[i], c) > 0 && c == p;
    CHECK(hits == 1);
  }
  CHECK(e.histogram.total() == d.n_trials());
}

TEST_CASE("cross-validation tests every trial once and is reproducible") {
  const EpochedDataset d = tiny_dataset(3);
  const CvReport r = run_cv(d, tiny_model(), tiny_config(2));
  CHECK(r.folds.size() == 5);
  CHECK(r.pooled.total() == d.n_trials());
  std::vector<int> seen(d.n_trials(), 0);
  for (const auto& f : r.folds)
    for (auto i : f.test_indices) ++seen[i];
  for (int s : seen) CHECK(s == 1);
  const auto acc = r.fold_accuracies();
  CHECK(r.mean_accuracy == doctest::Approx(std::accumulate(acc.begin(), acc.end(), 0.0) / 5.0));
  double var = 0.0;
  for (double a : acc) var += (a - r.mean_accuracy) * (a - r.mean_accuracy);
  CHECK(r.std_accuracy == doctest::Approx(std::sqrt(var / 5.0)));
  CHECK(r.recall == r.pooled.recall());
  CHECK(r.histogram.counts == r.pooled.predictions().counts);

  const CvReport again = run_cv(d, tiny_model(), tiny_config(2));
  CHECK(again.fold_accuracies() == acc);
  CHECK(again.pooled == r.pooled);
  CvOptions threaded;
  threaded.threads = 2;
  const CvReport par = run_cv(d, tiny_model(), tiny_config(2), threaded);
  CHECK(par.fold_accuracies() == acc);
  CHECK(par.pooled == r.pooled);
}

TEST_CASE("Wilcoxon: nine wins give W+ = 45 and p = 1/512") {
  const std::vector<double> a{0.5, 0.6, 0.7, 0.8, 0.9, 1.0, 1.1, 1.2, 1.3};
  const std::vector<double> b{0.4, 0.45, 0.5, 0.55, 0.6, 0.65, 0.7, 0.75, 0.8};
  const WilcoxonResult r = wilcoxon_signed_rank(a, b);
  CHECK(r.n == 9);
  CHECK(r.w_plus == 45.0);
  CHECK(r.w_minus == 0.0);
  CHECK(r.extreme == 1);
  CHECK(r.total == 512);
  CHECK(r.p_value == 1.0 / 512.0);
}

TEST_CASE("Wilcoxon rejects degenerate inputs") {
  const std::vector<double> a(6, 0.3);
  CHECK_THROWS_AS(wilcoxon_signed_rank(a, a), ValueError);
  CHECK_THROWS_AS(wilcoxon_signed_rank(std::vector<double>(4, 1.0), std::vector<double>(4, 0.0)), ValueError);
  CHECK_THROWS_AS(wilcoxon_signed_rank(std::vector<double>(5, 1.0), std::vector<double>(6, 0.0)), ValueError);
  CHECK_THROWS_AS(wilcoxon_signed_rank(std::vector<double>(21, 1.0), std::vector<double>(21, 0.0)), ValueError);
}

TEST_CASE("Wilcoxon matches brute-force enumeration and swaps antisymmetrically") {
  Pcg32 rng(11);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 5 + rng.bounded(6);
    std::vector<double> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      // Quarter steps produce ties and the occasional zero difference.
      a[i] = static_cast<double>(rng.bounded(8)) * 0.25;
      b[i] = static_cast<double>(rng.bounded(8)) * 0.25;
    }
    std::vector<double> d;
    for (std::size_t i = 0; i < n; ++i)
      if (a[i] != b[i]) d.push_back(a[i] - b[i]);
    if (d.empty()) continue;
    // Average ranks by counting: rank = #smaller + (#equal + 1) / 2.
    std::vector<double> rank(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
      double less = 0, equal = 0;
      for (double x : d) {
        less += std::abs(x) < std::abs(d[i]);
        equal += std::abs(x) == std::abs(d[i]);
      }
      rank[i] = less + (equal + 1.0) / 2.0;
    }
    double w_plus = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) w_plus += d[i] > 0 ? rank[i] : 0.0;
    std::uint64_t extreme = 0;
    for (std::uint64_t m = 0; m < (1ull << d.size()); ++m) {
      double s = 0.0;
      for (std::size_t i = 0; i < d.size(); ++i) s += (m >> i & 1u) ? rank[i] : 0.0;
      extreme += s >= w_plus - 1e-9;
    }
    const WilcoxonResult r = wilcoxon_signed_rank(a, b);
    CHECK(r.n == d.size());
    CHECK(r.w_plus == w_plus);
    CHECK(r.extreme == extreme);
    const WilcoxonResult s = wilcoxon_signed_rank(b, a);
    CHECK(s.w_plus == r.w_minus);
    CHECK(s.w_minus == r.w_plus);
    CHECK(r.w_plus + r.w_minus == static_cast<double>(r.n * (r.n + 1)) / 2.0);
  }
}

TEST_CASE("summarize_table: mean, population SD, printed-mean check") {
  const std::vector<TableColumn> cols{{"a", {1, 2, 3, 4}, 2.5002}, {"b", {1, 2, 3, 4}, 2.4}, {"c", {2, 2}, {}}};
  const auto s = summarize_table(cols);
  REQUIRE(s.size() == 3);
  CHECK(s[0].n == 4);
  CHECK(s[0].mean == 2.5);
  CHECK(s[0].sd == doctest::Approx(std::sqrt(1.25)));
  CHECK(s[0].consistent);
  CHECK_FALSE(s[1].consistent);
  CHECK_FALSE(s[1].note.empty());
  CHECK(s[2].sd == 0.0);
  CHECK(s[2].consistent);
  CHECK_THROWS_AS(summarize_table({{"empty", {}, {}}}), ValueError);
}

TEST_CASE("weight sweep drives adjust_weights from each round's histogram") {
  std::vector<std::vector<double>> seen_w;
  std::vector<std::uint64_t> seen_seed;
  const SweepTrainer fake = [&](std::span<const double> w, std::uint64_t seed) {
    seen_w.emplace_back(w.begin(), w.end());
    seen_seed.push_back(seed);
    ConfusionMatrix cm;
    // Predictions always lean toward class 0 and never hit class 4.
    for (std::size_t c = 0; c < 5; ++c) cm.add(c, c == 4 ? 0 : c, 10);
    return TrialOutcome{cm.accuracy(), cm, cm.predictions()};
  };
  const SweepResult r = weight_sweep(fake, 3, 77);
  CHECK(r.complete());
  REQUIRE(r.rounds.size() == 3);
  CHECK(r.rounds[0].round == 1);
  CHECK(r.rounds[0].weights == std::vector<double>(5, 1.0));
  CHECK(r.rounds[1].weights == adjust_weights(r.rounds[0].weights, r.rounds[0].histogram));
  CHECK(r.rounds[2].weights == adjust_weights(r.rounds[1].weights, r.rounds[1].histogram));
  CHECK(r.rounds[1].weights[0] < 1.0);
  CHECK(r.rounds[1].weights[4] > 1.0);
  CHECK(seen_seed == std::vector<std::uint64_t>(3, 77));
  for (const auto& round : r.rounds) CHECK(round.confusion.row_sums() == std::vector<std::size_t>(5, 10));

  const SweepResult one = weight_sweep(fake, 1, 1);
  CHECK(one.rounds.size() == 1);
  CHECK(one.rounds[0].weights == std::vector<double>(5, 1.0));
  CHECK_THROWS_AS(weight_sweep(fake, 0, 1), ValueError);

  std::ostringstream csv;
  write_sweep_csv(csv, r);
  std::string header;
  std::getline(std::istringstream(csv.str()) >> std::ws, header);
  CHECK(header == "round,w1,w2,w3,w4,w5,mean_accuracy,per_class_recall_1,per_class_recall_2,"
                  "per_class_recall_3,per_class_recall_4,per_class_recall_5");
}

TEST_CASE("weight sweep keeps completed rounds when a later round fails") {
  int calls = 0;
  const SweepTrainer flaky = [&](std::span<const double>, std::uint64_t) {
    if (++calls == 3) throw NumericError("diverged");
    ConfusionMatrix cm;
    for (std::size_t c = 0; c < 5; ++c) cm.add(c, c, 2);
    return TrialOutcome{1.0, cm, cm.predictions()};
  };
  const SweepResult r = weight_sweep(flaky, 5, 0);
  CHECK_FALSE(r.complete());
  CHECK(r.rounds.size() == 2);
  REQUIRE(r.failure.has_value());
  CHECK(r.failure->find("round 3") != std::string::npos);
  CHECK(r.failure->find("diverged") != std::string::npos);
}

TEST_CASE("adjust_weights on a balanced histogram is a fixed point of the sweep") {
  const std::vector<double> ones(5, 1.0);
  CHECK(adjust_weights(ones, hist({5, 5, 5, 5, 5})) == ones);
}
