#include "fingermi/report.hpp"

#include <algorithm>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "fingermi/error.hpp"
#include "fingermi/format.hpp"

namespace fingermi {

namespace {

using Json = nlohmann::ordered_json;

Json confusion_json(const ConfusionMatrix& m) {
  Json rows = Json::array();
  for (std::size_t t = 0; t < m.n_classes(); ++t) {
    Json row = Json::array();
    for (std::size_t p = 0; p < m.n_classes(); ++p) row.push_back(m.at(t, p));
    rows.push_back(std::move(row));
  }
  return rows;
}

ConfusionMatrix confusion_from(const Json& rows) {
  ConfusionMatrix m(rows.size());
  for (std::size_t t = 0; t < rows.size(); ++t) {
    if (rows[t].size() != rows.size()) throw ValueError("report: confusion matrix must be square");
    for (std::size_t p = 0; p < rows.size(); ++p) m.add(t, p, rows[t][p].get<std::size_t>());
  }
  return m;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

Json train_config_json(const TrainConfig& c) {
  Json cfg;
  cfg["epochs"] = c.epochs;
  cfg["batch_size"] = c.batch_size;
  cfg["loss"] = std::string(loss_kind_name(c.loss.kind));
  cfg["loss_weights"] = c.loss.weights;
  cfg["lr"] = c.adam.lr;
  cfg["beta1"] = c.adam.beta1;
  cfg["beta2"] = c.adam.beta2;
  cfg["epsilon"] = c.adam.epsilon;
  cfg["seed"] = c.seed;
  cfg["shuffle"] = c.shuffle;
  return cfg;
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cell += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cell += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(cell);
      cell.clear();
    } else if (c != '\r') {
      cell += c;
    }
  }
  cells.push_back(cell);
  for (auto& s : cells) {
    const auto b = s.find_first_not_of(" \t");
    const auto e = s.find_last_not_of(" \t");
    s = b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
  }
  return cells;
}

std::optional<double> parse_double(const std::string& s) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) return std::nullopt;
    return v;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

}  // namespace

const std::vector<std::string>& class_names() {
  static const std::vector<std::string> names{"thumb", "index", "middle", "ring", "little"};
  return names;
}

std::string cv_report_json(const CvReport& r) {
  Json j;
  j["model"] = r.model;
  j["k"] = r.k;
  j["n_trials"] = r.n_trials;
  j["config"] = train_config_json(r.config);
  Json folds = Json::array();
  for (const auto& f : r.folds) {
    Json fj;
    fj["fold"] = f.fold;
    fj["accuracy"] = f.accuracy;
    fj["test_indices"] = f.test_indices;
    fj["confusion"] = confusion_json(f.confusion);
    fj["loss_history"] = f.loss_history;
    folds.push_back(std::move(fj));
  }
  j["folds"] = std::move(folds);
  j["mean_accuracy"] = r.mean_accuracy;
  j["std_accuracy"] = r.std_accuracy;
  j["pooled_confusion"] = confusion_json(r.pooled);
  j["per_class_recall"] = r.recall;
  j["prediction_histogram"] = r.histogram.counts;
  return dump(j);
}

CvReport cv_report_from_json(std::string_view text) {
  try {
    const Json j = Json::parse(text);
    CvReport r;
    r.model = j.at("model").get<std::string>();
    r.k = j.at("k").get<std::size_t>();
    r.n_trials = j.at("n_trials").get<std::size_t>();
    const Json& cfg = j.at("config");
    r.config.epochs = cfg.at("epochs").get<std::size_t>();
    r.config.batch_size = cfg.at("batch_size").get<std::size_t>();
    r.config.loss.kind = parse_loss_kind(cfg.at("loss").get<std::string>());
    r.config.loss.weights = cfg.at("loss_weights").get<std::vector<double>>();
    r.config.adam.lr = cfg.at("lr").get<double>();
    r.config.adam.beta1 = cfg.at("beta1").get<double>();
    r.config.adam.beta2 = cfg.at("beta2").get<double>();
    r.config.adam.epsilon = cfg.at("epsilon").get<double>();
    r.config.seed = cfg.at("seed").get<std::uint64_t>();
    r.config.shuffle = cfg.at("shuffle").get<bool>();
    for (const auto& fj : j.at("folds")) {
      FoldResult f;
      f.fold = fj.at("fold").get<std::size_t>();
      f.accuracy = fj.at("accuracy").get<double>();
      f.test_indices = fj.at("test_indices").get<std::vector<std::size_t>>();
      f.confusion = confusion_from(fj.at("confusion"));
      f.loss_history = fj.at("loss_history").get<std::vector<double>>();
      r.folds.push_back(std::move(f));
    }
    r.mean_accuracy = j.at("mean_accuracy").get<double>();
    r.std_accuracy = j.at("std_accuracy").get<double>();
    r.pooled = confusion_from(j.at("pooled_confusion"));
    r.recall = j.at("per_class_recall").get<std::vector<double>>();
    r.histogram.counts = j.at("prediction_histogram").get<std::vector<std::size_t>>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ValueError(std::string("malformed CV report JSON: ") + e.what());
  }
}

std::string train_report_json(std::string_view model, const TrainConfig& config,
                              std::span<const double> loss_history, const Evaluation& evaluation,
                              std::string_view evaluated_on) {
  Json j;
  j["model"] = std::string(model);
  j["config"] = train_config_json(config);
  j["loss_history"] = std::vector<double>(loss_history.begin(), loss_history.end());
  j["evaluated_on"] = std::string(evaluated_on);
  j["accuracy"] = evaluation.accuracy;
  j["confusion"] = confusion_json(evaluation.confusion);
  j["per_class_recall"] = evaluation.confusion.recall();
  j["prediction_histogram"] = evaluation.histogram.counts;
  return dump(j);
}

std::string sweep_json(const SweepResult& result) {
  Json j;
  Json rounds = Json::array();
  for (const auto& r : result.rounds) {
    Json rj;
    rj["round"] = r.round;
    rj["weights"] = r.weights;
    rj["mean_accuracy"] = r.mean_accuracy;
    rj["max_prediction_share"] = r.histogram.max_share();
    rj["per_class_recall"] = r.confusion.recall();
    rj["prediction_histogram"] = r.histogram.counts;
    rj["confusion"] = confusion_json(r.confusion);
    rounds.push_back(std::move(rj));
  }
  j["rounds"] = std::move(rounds);
  j["complete"] = result.complete();
  if (result.failure) j["failure"] = *result.failure;
  return dump(j);
}

std::string wilcoxon_json(const WilcoxonResult& r, std::string_view a_name, std::string_view b_name) {
  Json j;
  j["test"] = "wilcoxon_signed_rank_exact_one_sided";
  j["alternative"] = std::string(a_name) + " > " + std::string(b_name);
  j["n"] = r.n;
  j["w_plus"] = r.w_plus;
  j["w_minus"] = r.w_minus;
  j["extreme_assignments"] = r.extreme;
  j["total_assignments"] = r.total;
  j["p_value"] = r.p_value;
  return dump(j);
}

std::string summary_json(const std::vector<ColumnSummary>& summaries) {
  Json arr = Json::array();
  for (const auto& s : summaries) {
    Json j;
    j["model"] = s.name;
    j["n"] = s.n;
    j["mean"] = s.mean;
    j["sd"] = s.sd;
    j["printed_mean"] = s.printed_mean ? Json(*s.printed_mean) : Json(nullptr);
    j["consistent"] = s.consistent;
    if (!s.note.empty()) j["note"] = s.note;
    arr.push_back(std::move(j));
  }
  Json out;
  out["columns"] = std::move(arr);
  return dump(out);
}

void write_cv_csv(std::ostream& out, const CvReport& r) {
  out << "fold,n_test,accuracy\n";
  for (const auto& f : r.folds) out << f.fold << ',' << f.test_indices.size() << ',' << format_number(f.accuracy) << '\n';
  out << "mean," << r.n_trials << ',' << format_number(r.mean_accuracy) << '\n';
  out << "std," << r.n_trials << ',' << format_number(r.std_accuracy) << '\n';
}

void write_confusion_csv(std::ostream& out, const ConfusionMatrix& m) {
  auto name = [&](std::size_t i) { return i < class_names().size() ? class_names()[i] : "class" + std::to_string(i); };
  out << "true\\predicted";
  for (std::size_t p = 0; p < m.n_classes(); ++p) out << ',' << name(p);
  out << '\n';
  for (std::size_t t = 0; t < m.n_classes(); ++t) {
    out << name(t);
    for (std::size_t p = 0; p < m.n_classes(); ++p) out << ',' << m.at(t, p);
    out << '\n';
  }
}

void write_recall_csv(std::ostream& out, const CvReport& r) {
  const auto shares = r.histogram.shares();
  out << "class,recall,predicted_share\n";
  for (std::size_t i = 0; i < r.recall.size(); ++i) {
    const std::string name = i < class_names().size() ? class_names()[i] : "class" + std::to_string(i);
    out << name << ',' << format_number(r.recall[i]) << ',' << format_number(i < shares.size() ? shares[i] : 0.0) << '\n';
  }
}

void write_summary_csv(std::ostream& out, const std::vector<ColumnSummary>& summaries) {
  out << "model,n,mean,sd,printed_mean,consistent,note\n";
  for (const auto& s : summaries) {
    out << csv_field(s.name) << ',' << s.n << ',' << format_number(s.mean) << ',' << format_number(s.sd) << ','
        << (s.printed_mean ? format_number(*s.printed_mean, 4) : std::string{}) << ','
        << (s.consistent ? "true" : "false") << ',' << csv_field(s.note) << '\n';
  }
}

std::vector<std::string> ScoreTable::names() const {
  return {header.begin() + (labelled ? 1 : 0), header.end()};
}

std::size_t ScoreTable::index_of(std::string_view name) const {
  const auto n = names();
  if (name.empty()) {
    if (n.size() != 1) throw ValueError("score table has " + std::to_string(n.size()) + " columns; name one");
    return 0;
  }
  for (std::size_t i = 0; i < n.size(); ++i) {
    if (lower(n[i]) == lower(std::string(name))) return i;
  }
  throw ValueError("score table has no column '" + std::string(name) + "'");
}

std::vector<TableColumn> ScoreTable::as_columns() const {
  std::vector<TableColumn> out;
  const auto n = names();
  for (std::size_t i = 0; i < n.size(); ++i) out.push_back({n[i], columns[i], printed_means[i]});
  return out;
}

ScoreTable read_score_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValueError("cannot open " + path.string());
  ScoreTable t;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos || line.front() == '#') continue;
    auto cells = split_csv_line(line);
    if (t.header.empty()) {
      t.header = std::move(cells);
      continue;
    }
    if (cells.size() != t.header.size()) {
      throw ValueError(path.string() + ":" + std::to_string(lineno) + ": expected " +
                       std::to_string(t.header.size()) + " fields, got " + std::to_string(cells.size()));
    }
    if (t.columns.empty()) {
      t.labelled = !parse_double(cells.front()).has_value();
      const std::size_t n = t.header.size() - (t.labelled ? 1 : 0);
      if (n == 0) throw ValueError(path.string() + ": no score columns");
      t.columns.resize(n);
      t.printed_means.resize(n);
    }
    const std::size_t first = t.labelled ? 1 : 0;
    const std::string label = t.labelled ? cells.front() : std::to_string(t.row_labels.size() + 1);
    const bool is_average = t.labelled && (lower(label) == "average" || lower(label) == "mean");
    for (std::size_t c = first; c < cells.size(); ++c) {
      const auto v = parse_double(cells[c]);
      if (!v) {
        throw ValueError(path.string() + ":" + std::to_string(lineno) + ": '" + cells[c] + "' is not a number");
      }
      if (is_average) {
        t.printed_means[c - first] = *v;
      } else {
        t.columns[c - first].push_back(*v);
      }
    }
    if (!is_average) t.row_labels.push_back(label);
  }
  if (t.header.empty() || t.columns.empty() || t.row_labels.empty()) {
    throw ValueError(path.string() + ": no score rows");
  }
  return t;
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValueError("cannot open " + path.string() + " for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw ValueError("write failed for " + path.string());
}

}  // namespace fingermi
