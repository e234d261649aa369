#include "fingermi/cli.hpp"

#include <CLI11.hpp>
#include <fstream>
#include <functional>
#include <filesystem>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fingermi/config.hpp"
#include "fingermi/cv.hpp"
#include "fingermi/eegf.hpp"
#include "fingermi/format.hpp"
#include "fingermi/network.hpp"
#include "fingermi/report.hpp"
#include "fingermi/stats.hpp"
#include "fingermi/sweep.hpp"
#include "fingermi/synth.hpp"
#include "fingermi/train.hpp"

namespace fingermi::cli {

namespace {

namespace fs = std::filesystem;

/// Flags shared by every verb: a config file, `key=value` overrides and a seed.
struct Common {
  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App& app, Common& common) {
  app.add_option("-c,--config", common.config_path, "Config file of key = value lines")->check(CLI::ExistingFile);
  app.add_option("--set", common.overrides, "Override a config key (key=value); repeatable");
  app.add_option("--seed", common.seed, "Seed; wins over the config's seed key and FINGERMI_SEED");
}

Config load_config(const Common& common) {
  Config config = common.config_path.empty() ? Config{} : Config::load(common.config_path);
  for (const auto& kv : common.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("--set expects key=value, got '" + kv + "'");
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t");
      const auto e = s.find_last_not_of(" \t");
      return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    };
    config.set(trim(kv.substr(0, eq)), trim(kv.substr(eq + 1)));
  }
  config.require_known(known_config_keys());
  return config;
}

void write_csv(const fs::path& path, const std::function<void(std::ostream&)>& fill) {
  std::ostringstream s;
  fill(s);
  write_text_file(path, s.str());
}

fs::path prepare_dir(const std::string& dir) {
  fs::path p(dir);
  fs::create_directories(p);
  return p;
}

std::string describe(const EpochedDataset& d) {
  std::string counts;
  for (auto c : d.label_counts()) counts += (counts.empty() ? "" : ",") + std::to_string(c);
  return std::to_string(d.n_trials()) + " epochs x " + std::to_string(d.n_channels()) + " channels x " +
         std::to_string(d.n_samples) + " samples, labels (" + counts + ")";
}

std::string join(const std::vector<double>& v, int digits = 4) {
  std::string s;
  for (double x : v) s += (s.empty() ? "" : " ") + format_number(x, digits);
  return s;
}

// --- synth -----------------------------------------------------------------

struct SynthArgs {
  Common common;
  std::string preset;
  std::string out;
  bool raw = false;
};

int do_synth(const SynthArgs& a, std::ostream& out) {
  Config config = load_config(a.common);
  if (!a.preset.empty()) config.set("synth.preset", a.preset);
  const std::uint64_t seed = resolve_seed(a.common.seed, config);
  const SynthSpec spec = synth_spec_from(config, seed);
  if (a.raw) {
    RawSynthSpec raw;
    raw.n_trials_per_class = spec.n_trials_per_class;
    raw.signal = spec;
    raw.seed = seed;
    const Recording rec = synth_recording(raw);
    write_eegr(rec, a.out);
    out << "wrote raw recording: " << rec.n_channels() << " channels x " << rec.n_samples << " samples at "
        << format_number(rec.fs, 0) << " Hz, " << rec.events.size() << " events -> " << a.out << '\n';
    return kExitOk;
  }
  const EpochedDataset d = synth_dataset(spec);
  write_eegf(d, a.out);
  out << "wrote " << describe(d) << " -> " << a.out << '\n';
  return kExitOk;
}

// --- preprocess --------------------------------------------------------------

struct PreprocessArgs {
  Common common;
  std::string in;
  std::string out;
};

int do_preprocess(const PreprocessArgs& a, std::ostream& out) {
  const Config config = load_config(a.common);
  const Recording rec = read_eegr(a.in);
  const EpochedDataset d = preprocess(rec, preprocess_options_from(config));
  write_eegf(d, a.out);
  out << "wrote " << describe(d) << " -> " << a.out << '\n';
  return kExitOk;
}

// --- train -------------------------------------------------------------------

struct TrainArgs {
  Common common;
  std::string model = "fingernet";
  std::string data;
  std::string test;
  std::string out_dir;
};

int do_train(const TrainArgs& a, std::ostream& out) {
  const Config config = load_config(a.common);
  const std::uint64_t seed = resolve_seed(a.common.seed, config);
  const ModelSpec spec = model_spec_from(config, a.model);
  const TrainConfig tc = train_config_from(config, seed);
  const EpochedDataset train_set = read_eegf(a.data);
  const EpochedDataset test_set = a.test.empty() ? train_set : read_eegf(a.test);

  Network net = init_params(spec, seed);
  const std::vector<double> history = train(net, train_set, tc);
  const Evaluation eval = evaluate(net, test_set);
  const std::string evaluated_on = a.test.empty() ? "training set" : "test set";

  out << a.model << ": trained " << tc.epochs << " epochs on " << train_set.n_trials() << " trials; final loss "
      << format_number(history.back()) << "; " << evaluated_on << " accuracy " << format_number(eval.accuracy)
      << '\n';
  if (!a.out_dir.empty()) {
    const fs::path dir = prepare_dir(a.out_dir);
    write_text_file(dir / "train_report.json", train_report_json(a.model, tc, history, eval, evaluated_on));
    write_csv(dir / "loss_history.csv", [&](std::ostream& s) {
      s << "epoch,loss\n";
      for (std::size_t e = 0; e < history.size(); ++e) s << e + 1 << ',' << format_number(history[e], 9) << '\n';
    });
    write_csv(dir / "confusion.csv", [&](std::ostream& s) { write_confusion_csv(s, eval.confusion); });
  }
  return kExitOk;
}

// --- cv ----------------------------------------------------------------------

struct CvArgs {
  Common common;
  std::string model = "fingernet";
  std::string data;
  std::string out_dir;
};

void write_cv_artifacts(const fs::path& dir, const CvReport& report) {
  write_text_file(dir / "cv_report.json", cv_report_json(report));
  write_csv(dir / "cv_folds.csv", [&](std::ostream& s) { write_cv_csv(s, report); });
  write_csv(dir / "confusion.csv", [&](std::ostream& s) { write_confusion_csv(s, report.pooled); });
  write_csv(dir / "recall.csv", [&](std::ostream& s) { write_recall_csv(s, report); });
}

void print_cv(std::ostream& out, const CvReport& r) {
  out << r.model << ": " << r.k << "-fold CV on " << r.n_trials << " trials, mean accuracy "
      << format_number(r.mean_accuracy, 4) << " (sd " << format_number(r.std_accuracy, 4) << ")\n";
  out << "  fold accuracies: " << join(r.fold_accuracies()) << '\n';
  out << "  per-class recall: " << join(r.recall) << '\n';
  out << "  prediction shares: " << join(r.histogram.shares()) << '\n';
}

int do_cv(const CvArgs& a, std::ostream& out) {
  const Config config = load_config(a.common);
  const std::uint64_t seed = resolve_seed(a.common.seed, config);
  const ModelSpec spec = model_spec_from(config, a.model);
  const TrainConfig tc = train_config_from(config, seed);
  const EpochedDataset d = read_eegf(a.data);
  const CvReport report = run_cv(d, spec, tc, cv_options_from(config));
  print_cv(out, report);
  if (!a.out_dir.empty()) write_cv_artifacts(prepare_dir(a.out_dir), report);
  return kExitOk;
}

// --- sweep -------------------------------------------------------------------

struct SweepArgs {
  Common common;
  std::string model = "fingernet";
  std::string data;
  std::optional<std::size_t> rounds;
  std::string out_dir;
};

int do_sweep(const SweepArgs& a, std::ostream& out) {
  const Config config = load_config(a.common);
  const std::uint64_t seed = resolve_seed(a.common.seed, config);
  const ModelSpec spec = model_spec_from(config, a.model);
  const TrainConfig tc = train_config_from(config, seed);
  const std::size_t rounds = a.rounds ? *a.rounds : config.get_size("sweep.rounds", 4);
  const EpochedDataset d = read_eegf(a.data);

  const SweepTrainer trainer = cv_sweep_trainer(d, spec, tc, cv_options_from(config));
  const SweepTrainer reporting = [&](std::span<const double> w, std::uint64_t s) {
    TrialOutcome o = trainer(w, s);
    out << "  weights " << join({w.begin(), w.end()}, 2) << ": mean accuracy " << format_number(o.mean_accuracy, 4)
        << ", max share " << format_number(o.histogram.max_share(), 4) << ", recall "
        << join(o.confusion.recall()) << '\n';
    out.flush();
    return o;
  };
  out << a.model << ": weight sweep, " << rounds << " rounds\n";
  const SweepResult result = weight_sweep(reporting, rounds, seed, kNumClasses, adjust_options_from(config));

  if (!a.out_dir.empty()) {
    const fs::path dir = prepare_dir(a.out_dir);
    write_text_file(dir / "sweep.json", sweep_json(result));
    write_csv(dir / "sweep.csv", [&](std::ostream& s) { write_sweep_csv(s, result); });
    for (const auto& r : result.rounds) {
      write_csv(dir / ("confusion_round_" + std::to_string(r.round) + ".csv"),
                [&](std::ostream& s) { write_confusion_csv(s, r.confusion); });
    }
  }
  if (!result.complete()) throw std::runtime_error("sweep aborted at " + *result.failure);
  return kExitOk;
}

// --- stats -------------------------------------------------------------------

struct StatsArgs {
  std::string table;
  std::string a;
  std::string b;
  std::string a_column;
  std::string b_column;
  std::string out;
};

struct NamedScores {
  std::string name;
  std::vector<double> values;
};

NamedScores load_scores(const std::string& path, const std::string& column) {
  const ScoreTable t = read_score_table(path);
  const std::size_t i = t.index_of(column);
  return {t.names()[i], t.columns[i]};
}

int do_stats(const StatsArgs& a, std::ostream& out) {
  const std::string path_a = a.a.empty() ? a.table : a.a;
  const std::string path_b = a.b.empty() ? a.table : a.b;
  if (path_a.empty() || path_b.empty()) {
    throw std::invalid_argument("stats needs --a and --b score files, or --table with --a-column/--b-column");
  }
  const NamedScores sa = load_scores(path_a, a.a_column);
  const NamedScores sb = load_scores(path_b, a.b_column);
  const WilcoxonResult r = wilcoxon_signed_rank(sa.values, sb.values);
  out << "Wilcoxon signed-rank (exact, one-sided " << sa.name << " > " << sb.name << "): n = " << r.n
      << ", W+ = " << format_number(r.w_plus, 1) << ", W- = " << format_number(r.w_minus, 1) << ", p = " << r.extreme
      << "/" << r.total << " = " << format_number(r.p_value) << '\n';
  if (!a.out.empty()) write_text_file(a.out, wilcoxon_json(r, sa.name, sb.name));
  return kExitOk;
}

// --- report ------------------------------------------------------------------

struct ReportArgs {
  std::string table;
  std::string cv;
  std::string out_dir;
};

int do_report(const ReportArgs& a, std::ostream& out) {
  if (a.table.empty() && a.cv.empty()) throw std::invalid_argument("report needs --table and/or --cv");
  const std::optional<fs::path> dir = a.out_dir.empty() ? std::nullopt : std::optional(prepare_dir(a.out_dir));
  if (!a.table.empty()) {
    const std::vector<ColumnSummary> summaries = summarize_table(read_score_table(a.table).as_columns());
    for (const auto& s : summaries) {
      out << s.name << ": mean " << format_number(s.mean, 4) << " (sd " << format_number(s.sd, 4) << ", n " << s.n
          << ")";
      if (s.printed_mean) out << ", printed " << format_number(*s.printed_mean, 4);
      out << '\n';
      if (!s.consistent) out << "  note: " << s.note << '\n';
    }
    if (dir) {
      write_text_file(*dir / "summary.json", summary_json(summaries));
      write_csv(*dir / "summary.csv", [&](std::ostream& s) { write_summary_csv(s, summaries); });
    }
  }
  if (!a.cv.empty()) {
    std::ifstream in(a.cv, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + a.cv);
    std::ostringstream text;
    text << in.rdbuf();
    const CvReport report = cv_report_from_json(text.str());
    print_cv(out, report);
    if (dir) {
      write_csv(*dir / "cv_folds.csv", [&](std::ostream& s) { write_cv_csv(s, report); });
      write_csv(*dir / "confusion.csv", [&](std::ostream& s) { write_confusion_csv(s, report.pooled); });
      write_csv(*dir / "recall.csv", [&](std::ostream& s) { write_recall_csv(s, report); });
    }
  }
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Finger motor-imagery EEG decoding toolkit", "fingermi"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic epoched (.eegf) or raw (.eegr) dataset");
  add_common(*synth_cmd, synth.common);
  synth_cmd->add_option("--preset", synth.preset, "Preset name: default, separable, noise, biased");
  synth_cmd->add_option("-o,--out", synth.out, "Output file")->required();
  synth_cmd->add_flag("--raw", synth.raw, "Write a continuous 64-channel 1000 Hz recording instead of epochs");

  PreprocessArgs pre;
  auto* pre_cmd = app.add_subcommand("preprocess", "Notch, decimate, select channels, epoch and z-score a recording");
  add_common(*pre_cmd, pre.common);
  pre_cmd->add_option("-i,--in", pre.in, "Raw recording (.eegr)")->required()->check(CLI::ExistingFile);
  pre_cmd->add_option("-o,--out", pre.out, "Epoched output (.eegf)")->required();

  TrainArgs tr;
  auto* train_cmd = app.add_subcommand("train", "Train one network and evaluate it");
  add_common(*train_cmd, tr.common);
  train_cmd->add_option("-m,--model", tr.model, "fingernet, eegnet or deepconvnet")->capture_default_str();
  train_cmd->add_option("-d,--data", tr.data, "Training set (.eegf)")->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--test", tr.test, "Held-out evaluation set (.eegf); defaults to the training set")
      ->check(CLI::ExistingFile);
  train_cmd->add_option("--out-dir", tr.out_dir, "Directory for train_report.json, loss_history.csv, confusion.csv");

  CvArgs cv;
  auto* cv_cmd = app.add_subcommand("cv", "Stratified k-fold cross-validation of one model");
  add_common(*cv_cmd, cv.common);
  cv_cmd->add_option("-m,--model", cv.model, "fingernet, eegnet or deepconvnet")->capture_default_str();
  cv_cmd->add_option("-d,--data", cv.data, "Dataset (.eegf)")->required()->check(CLI::ExistingFile);
  cv_cmd->add_option("--out-dir", cv.out_dir, "Directory for cv_report.json and CSV tables");

  SweepArgs sw;
  auto* sweep_cmd = app.add_subcommand("sweep", "Bias-weighted cross-entropy weight sweep over CV runs");
  add_common(*sweep_cmd, sw.common);
  sweep_cmd->add_option("-m,--model", sw.model, "fingernet, eegnet or deepconvnet")->capture_default_str();
  sweep_cmd->add_option("-d,--data", sw.data, "Dataset (.eegf)")->required()->check(CLI::ExistingFile);
  sweep_cmd->add_option("--rounds", sw.rounds, "Sweep rounds (default: sweep.rounds, else 4)")
      ->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--out-dir", sw.out_dir, "Directory for sweep.json, sweep.csv and per-round confusions");

  StatsArgs st;
  auto* stats_cmd = app.add_subcommand("stats", "Exact one-sided Wilcoxon signed-rank test of a > b");
  stats_cmd->add_option("--table", st.table, "Score table holding both columns")->check(CLI::ExistingFile);
  stats_cmd->add_option("--a", st.a, "Score file for a")->check(CLI::ExistingFile);
  stats_cmd->add_option("--b", st.b, "Score file for b")->check(CLI::ExistingFile);
  stats_cmd->add_option("--a-column", st.a_column, "Column of a (needed when the file has several)");
  stats_cmd->add_option("--b-column", st.b_column, "Column of b (needed when the file has several)");
  stats_cmd->add_option("-o,--out", st.out, "Write the result as JSON");

  ReportArgs rep;
  auto* report_cmd = app.add_subcommand("report", "Summarize score tables and render saved CV reports");
  report_cmd->add_option("--table", rep.table, "Per-subject score table (CSV)")->check(CLI::ExistingFile);
  report_cmd->add_option("--cv", rep.cv, "Saved cv_report.json")->check(CLI::ExistingFile);
  report_cmd->add_option("--out-dir", rep.out_dir, "Directory for summary and CSV tables");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*synth_cmd) return do_synth(synth, out);
    if (*pre_cmd) return do_preprocess(pre, out);
    if (*train_cmd) return do_train(tr, out);
    if (*cv_cmd) return do_cv(cv, out);
    if (*sweep_cmd) return do_sweep(sw, out);
    if (*stats_cmd) return do_stats(st, out);
    if (*report_cmd) return do_report(rep, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace fingermi::cli
