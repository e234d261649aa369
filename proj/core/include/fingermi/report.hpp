#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "fingermi/cv.hpp"
#include "fingermi/metrics.hpp"
#include "fingermi/stats.hpp"
#include "fingermi/sweep.hpp"
#include "fingermi/train.hpp"

namespace fingermi {

/// thumb, index, middle, ring, little.
const std::vector<std::string>& class_names();

/// Pretty JSON with fixed key order; identical inputs give identical bytes.
std::string cv_report_json(const CvReport& report);
CvReport cv_report_from_json(std::string_view text);
/// One training run: config echo, per-epoch loss and the evaluation of the
/// trained network on the set named by `evaluated_on`.
std::string train_report_json(std::string_view model, const TrainConfig& config,
                              std::span<const double> loss_history, const Evaluation& evaluation,
                              std::string_view evaluated_on);
std::string sweep_json(const SweepResult& result);
std::string wilcoxon_json(const WilcoxonResult& result, std::string_view a_name, std::string_view b_name);
std::string summary_json(const std::vector<ColumnSummary>& summaries);

/// fold,n_test,accuracy rows followed by mean and std rows.
void write_cv_csv(std::ostream& out, const CvReport& report);
/// Rows are true classes, columns predicted classes.
void write_confusion_csv(std::ostream& out, const ConfusionMatrix& confusion);
/// class,recall,predicted_share rows.
void write_recall_csv(std::ostream& out, const CvReport& report);
/// model,mean,sd,n,printed_mean,consistent,note rows.
void write_summary_csv(std::ostream& out, const std::vector<ColumnSummary>& summaries);

/// A CSV file of per-subject scores: a header row, then one row per subject.
/// The first column may be a row label; a row labelled "average" carries a
/// published mean instead of a score.
struct ScoreTable {
  std::vector<std::string> header;
  std::vector<std::string> row_labels;
  std::vector<std::vector<double>> columns;  // one vector per score column
  std::vector<std::optional<double>> printed_means;
  bool labelled = false;

  std::vector<std::string> names() const;
  /// The named column, or the only score column when `name` is empty.
  std::size_t index_of(std::string_view name) const;
  std::vector<TableColumn> as_columns() const;
};

ScoreTable read_score_table(const std::filesystem::path& path);

/// Writes `text` to `path` (binary, truncating), throwing on failure.
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace fingermi
