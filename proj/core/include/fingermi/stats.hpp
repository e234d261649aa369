#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fingermi {

struct WilcoxonResult {
  std::size_t n = 0;      // pairs left after dropping zero differences
  double w_plus = 0.0;    // sum of ranks of positive differences (a > b)
  double w_minus = 0.0;
  std::uint64_t extreme = 0;  // sign assignments with W+ >= observed
  std::uint64_t total = 0;    // 2^n
  double p_value = 0.0;       // extreme / total, one-sided for a > b
};

/// Exact one-sided Wilcoxon signed-rank test of a > b. Zero differences are
/// dropped, tied magnitudes share their average rank, and the null
/// distribution is enumerated over all 2^n sign assignments (n <= 20).
/// Differences closer than 1e-9 count as ties so values parsed from decimal
/// text rank the same way their decimal forms would.
WilcoxonResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b);

struct TableColumn {
  std::string name;
  std::vector<double> values;
  std::optional<double> printed_mean;  // a published average to check against, if any
};

struct ColumnSummary {
  std::string name;
  std::size_t n = 0;
  double mean = 0.0;
  double sd = 0.0;  // population standard deviation
  std::optional<double> printed_mean;
  bool consistent = true;  // false when |printed_mean - mean| exceeds the tolerance
  std::string note;        // explains an inconsistency
};

/// Mean and population standard deviation of each column; a printed mean
/// further than `tolerance` from the computed one is flagged.
std::vector<ColumnSummary> summarize_table(const std::vector<TableColumn>& columns, double tolerance = 5e-4);

}  // namespace fingermi
