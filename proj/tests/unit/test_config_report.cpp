#include <doctest.h>

#include <cstdlib>
#include <sstream>

#include "fingermi/config.hpp"
#include "fingermi/error.hpp"
#include "fingermi/format.hpp"
#include "fingermi/report.hpp"
#include "fingermi/stats.hpp"
#include "helpers.hpp"

using namespace fingermi;
using fingermi::testing::TempDir;

namespace {

Config parse(const std::string& text) {
  std::istringstream in(text);
  return Config::parse(in);
}

const std::filesystem::path kData{FINGERMI_TEST_DATA_DIR};

CvReport sample_report() {
  CvReport r;
  r.model = "eegnet";
  r.k = 2;
  r.n_trials = 4;
  r.config.epochs = 3;
  r.config.loss = LossSpec::bias_weighted({0.9, 1.1, 1.0, 1.0, 1.05});
  for (std::size_t f = 0; f < 2; ++f) {
    FoldResult fr;
    fr.fold = f;
    fr.test_indices = {f, f + 2};
    fr.confusion.add(f, f);
    fr.confusion.add(f + 2, 0);
    fr.accuracy = fr.confusion.accuracy();
    fr.loss_history = {1.5, 1.25 - 0.1 * static_cast<double>(f), 1.0 / 3.0};
    r.pooled += fr.confusion;
    r.folds.push_back(fr);
  }
  r.mean_accuracy = 0.75;
  r.std_accuracy = 0.25;
  r.recall = r.pooled.recall();
  r.histogram = r.pooled.predictions();
  return r;
}

}  // namespace

TEST_CASE("config parsing: comments, overrides, typed getters") {
  const Config c = parse("# comment\n\ntrain.epochs = 12\nseed=3\ntrain.epochs = 14\nsynth.class_gain = 2, 2, 1\n"
                         "preprocess.zscore = false\nmodel.max_norm_dense = none\nname = fingernet\n");
  CHECK(c.get_size("train.epochs", 0) == 14);
  CHECK(c.get_u64("seed", 0) == 3);
  CHECK(c.get_doubles("synth.class_gain", {}) == std::vector<double>{2, 2, 1});
  CHECK_FALSE(c.get_bool("preprocess.zscore", true));
  CHECK_FALSE(c.get_optional_double("model.max_norm_dense", 0.25).has_value());
  CHECK(c.get_string("name", "") == "fingernet");
  CHECK(c.get_double("missing", 1.5) == 1.5);
  CHECK_FALSE(c.get("missing").has_value());
}

TEST_CASE("config errors name the line or key") {
  CHECK_THROWS_AS(parse("no equals sign\n"), ConfigError);
  CHECK_THROWS_AS(parse(" = 3\n"), ConfigError);
  const Config c = parse("train.epochs = many\nflag = maybe\n");
  CHECK_THROWS_AS(c.get_size("train.epochs", 1), ConfigError);
  CHECK_THROWS_AS(c.get_bool("flag", true), ConfigError);
  CHECK_THROWS_AS(parse("train.epoch = 3\n").require_known(known_config_keys()), ConfigError);
  CHECK_NOTHROW(parse("train.epochs = 3\n").require_known(known_config_keys()));
  CHECK_THROWS_AS(Config::load("/nonexistent/dir/x.cfg"), ConfigError);
}

TEST_CASE("seed precedence: flag, config, environment, fallback") {
  const Config with = parse("seed = 5\n");
  const Config without;
  ::unsetenv("FINGERMI_SEED");
  CHECK(resolve_seed(9, with, 1) == 9);
  CHECK(resolve_seed(std::nullopt, with, 1) == 5);
  CHECK(resolve_seed(std::nullopt, without, 1) == 1);
  ::setenv("FINGERMI_SEED", "77", 1);
  CHECK(resolve_seed(std::nullopt, without, 1) == 77);
  CHECK(resolve_seed(std::nullopt, with, 1) == 5);
  ::unsetenv("FINGERMI_SEED");
}

TEST_CASE("builders map config keys onto specs") {
  const Config c = parse("synth.preset = separable\nsynth.trials_per_class = 4\ntrain.epochs = 7\ntrain.lr = 0.01\n"
                         "train.loss = bwce\ntrain.weights = 1, 1, 1.1, 1, 0.9\nmodel.deep_filters = 4, 8, 16\n"
                         "cv.k = 4\nsweep.step = 0.1\npreprocess.notch_hz = 50\n");
  const SynthSpec s = synth_spec_from(c, 3);
  CHECK(s.snr == synth_preset("separable").snr);
  CHECK(s.n_trials_per_class == 4);
  CHECK(s.seed == 3);
  const TrainConfig t = train_config_from(c, 8);
  CHECK(t.epochs == 7);
  CHECK(t.adam.lr == 0.01);
  CHECK(t.seed == 8);
  CHECK(t.loss.kind == LossKind::BWCE);
  CHECK(t.loss.weights == std::vector<double>{1, 1, 1.1, 1, 0.9});
  const ModelSpec m = model_spec_from(c, "fingernet");
  CHECK(m.layers[5].filters == 4);
  CHECK(m.layers[9].filters == 16);
  CHECK(cv_options_from(c).k == 4);
  CHECK(adjust_options_from(c).step == 0.1);
  CHECK(preprocess_options_from(c).notch_hz == 50.0);
  CHECK_THROWS_AS(model_spec_from(c, "resnet"), ConfigError);
  CHECK_THROWS_AS(train_config_from(parse("train.weights = 1,1,1,1,1\n"), 0), ConfigError);
  CHECK(model_names() == std::vector<std::string>{"fingernet", "eegnet", "deepconvnet"});
}

TEST_CASE("format_number is fixed-point and normalises negative zero") {
  CHECK(format_number(0.25) == "0.250000");
  CHECK(format_number(-0.0000001) == "0.000000");
  CHECK(format_number(-1.5, 2) == "-1.50");
  CHECK(format_number(1.0 / 512.0, 9) == "0.001953125");
}

TEST_CASE("CV report JSON is deterministic and round-trips") {
  const CvReport r = sample_report();
  const std::string a = cv_report_json(r);
  CHECK(a == cv_report_json(r));
  const CvReport back = cv_report_from_json(a);
  CHECK(back.model == r.model);
  CHECK(back.k == r.k);
  CHECK(back.pooled == r.pooled);
  CHECK(back.fold_accuracies() == r.fold_accuracies());
  CHECK(back.folds[1].test_indices == r.folds[1].test_indices);
  CHECK(cv_report_json(back) == a);
  CHECK_THROWS(cv_report_from_json("{not json"));
}

TEST_CASE("CSV writers") {
  const CvReport r = sample_report();
  std::ostringstream cv, conf, recall;
  write_cv_csv(cv, r);
  write_confusion_csv(conf, r.pooled);
  write_recall_csv(recall, r);
  CHECK(cv.str().rfind("fold,n_test,accuracy\n", 0) == 0);
  CHECK(cv.str().find("mean,") != std::string::npos);
  CHECK(cv.str().find("std,") != std::string::npos);
  std::size_t lines = 0;
  for (char ch : conf.str()) lines += ch == '\n';
  CHECK(lines == 6);
  CHECK(recall.str().rfind("class,recall,predicted_share\n", 0) == 0);
  CHECK(recall.str().find("thumb") != std::string::npos);
  CHECK(class_names() == std::vector<std::string>{"thumb", "index", "middle", "ring", "little"});
}

TEST_CASE("score table: reads the accuracy table and flags the EEGNet mean") {
  const ScoreTable t = read_score_table(kData / "subject_accuracy.csv");
  CHECK(t.labelled);
  CHECK(t.names() == std::vector<std::string>{"EEGNet", "DeepConvNet", "FingerNet"});
  CHECK(t.row_labels.size() == 9);
  const auto& finger = t.columns[t.index_of("FingerNet")];
  const auto& eeg = t.columns[t.index_of("EEGNet")];
  const auto w = wilcoxon_signed_rank(finger, eeg);
  CHECK(w.w_plus == 45.0);
  CHECK(w.p_value == 1.0 / 512.0);

  const auto s = summarize_table(t.as_columns());
  REQUIRE(s.size() == 3);
  CHECK(s[0].mean == doctest::Approx(0.246222).epsilon(1e-5));
  CHECK_FALSE(s[0].consistent);
  CHECK(s[1].mean == doctest::Approx(0.253333).epsilon(1e-5));
  CHECK(s[1].consistent);
  CHECK(s[2].mean == doctest::Approx(0.304889).epsilon(1e-5));
  CHECK(s[2].consistent);

  const ScoreTable single = read_score_table(kData / "eegnet.csv");
  CHECK(single.columns[single.index_of("")] == eeg);
  CHECK_THROWS_AS(t.index_of(""), ValueError);
  CHECK_THROWS_AS(t.index_of("ResNet"), ValueError);
}

TEST_CASE("score table rejects malformed files") {
  TempDir dir("table");
  write_text_file(dir / "bad.csv", "subject,A\nS1,abc\n");
  CHECK_THROWS_AS(read_score_table(dir / "bad.csv"), ValueError);
  write_text_file(dir / "ragged.csv", "subject,A,B\nS1,0.1\n");
  CHECK_THROWS_AS(read_score_table(dir / "ragged.csv"), ValueError);
  write_text_file(dir / "empty.csv", "subject,A\n");
  CHECK_THROWS_AS(read_score_table(dir / "empty.csv"), ValueError);
  CHECK_THROWS_AS(read_score_table(dir / "missing.csv"), ValueError);
}

TEST_CASE("summary, wilcoxon and sweep JSON are stable") {
  const auto s = summarize_table({{"a", {0.1, 0.2}, 0.3}});
  CHECK(summary_json(s) == summary_json(s));
  CHECK(summary_json(s).find("\"consistent\": false") != std::string::npos);
  WilcoxonResult w;
  w.n = 9;
  w.w_plus = 45;
  w.extreme = 1;
  w.total = 512;
  w.p_value = 1.0 / 512;
  const std::string wj = wilcoxon_json(w, "FingerNet", "EEGNet");
  CHECK(wj.find("FingerNet") != std::string::npos);
  CHECK(wj.find("\"total_assignments\": 512") != std::string::npos);
  SweepResult sr;
  sr.failure = "round 2: boom";
  CHECK(sweep_json(sr).find("boom") != std::string::npos);
}
