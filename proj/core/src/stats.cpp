#include "fingermi/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fingermi/error.hpp"
#include "fingermi/format.hpp"

namespace fingermi {

namespace {

constexpr double kTieTolerance = 1e-9;
constexpr std::size_t kMaxExactPairs = 20;

}  // namespace

WilcoxonResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ValueError("wilcoxon: score lists differ in length");
  if (a.size() < 5) throw ValueError("wilcoxon: need at least 5 pairs, got " + std::to_string(a.size()));
  std::vector<double> d;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!std::isfinite(a[i]) || !std::isfinite(b[i])) throw ValueError("wilcoxon: scores must be finite");
    const double diff = a[i] - b[i];
    if (std::abs(diff) > kTieTolerance) d.push_back(diff);
  }
  if (d.empty()) throw ValueError("wilcoxon: all differences are zero, no test possible");
  if (d.size() > kMaxExactPairs) {
    throw ValueError("wilcoxon: exact enumeration supports at most 20 non-zero pairs");
  }
  std::sort(d.begin(), d.end(), [](double x, double y) { return std::abs(x) < std::abs(y); });

  // Doubled ranks keep average ranks integral: a tie group spanning ranks
  // i+1..j has average (i+1+j)/2.
  const std::size_t n = d.size();
  std::vector<std::uint32_t> rank2(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i + 1;
    while (j < n && std::abs(d[j]) - std::abs(d[i]) <= kTieTolerance) ++j;
    for (std::size_t t = i; t < j; ++t) rank2[t] = static_cast<std::uint32_t>(i + 1 + j);
    i = j;
  }

  WilcoxonResult r;
  r.n = n;
  std::uint64_t observed2 = 0;
  std::uint64_t all2 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    all2 += rank2[i];
    if (d[i] > 0) observed2 += rank2[i];
  }
  r.w_plus = static_cast<double>(observed2) / 2.0;
  r.w_minus = static_cast<double>(all2 - observed2) / 2.0;

  r.total = std::uint64_t{1} << n;
  for (std::uint64_t mask = 0; mask < r.total; ++mask) {
    std::uint64_t s = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask >> i & 1u) s += rank2[i];
    }
    if (s >= observed2) ++r.extreme;
  }
  r.p_value = static_cast<double>(r.extreme) / static_cast<double>(r.total);
  return r;
}

std::vector<ColumnSummary> summarize_table(const std::vector<TableColumn>& columns, double tolerance) {
  std::vector<ColumnSummary> out;
  for (const auto& col : columns) {
    if (col.values.empty()) throw ValueError("summarize_table: column '" + col.name + "' is empty");
    ColumnSummary s;
    s.name = col.name;
    s.n = col.values.size();
    s.mean = std::accumulate(col.values.begin(), col.values.end(), 0.0) / static_cast<double>(s.n);
    double ss = 0.0;
    for (double v : col.values) ss += (v - s.mean) * (v - s.mean);
    s.sd = std::sqrt(ss / static_cast<double>(s.n));
    s.printed_mean = col.printed_mean;
    if (col.printed_mean && std::abs(*col.printed_mean - s.mean) > tolerance) {
      s.consistent = false;
      s.note = "printed mean " + format_number(*col.printed_mean, 4) + " is inconsistent with the column values (computed " +
               format_number(s.mean, 4) + "); the computed value is reported";
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace fingermi
