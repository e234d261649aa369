#include "fingermi/metrics.hpp"

#include <algorithm>
#include <numeric>

#include "fingermi/error.hpp"

namespace fingermi {

std::size_t PredictionHistogram::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::size_t{0});
}

std::vector<double> PredictionHistogram::shares() const {
  const std::size_t n = total();
  std::vector<double> out(counts.size(), 0.0);
  if (n == 0) return out;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    out[i] = static_cast<double>(counts[i]) / static_cast<double>(n);
  }
  return out;
}

double PredictionHistogram::max_share() const {
  const auto s = shares();
  return s.empty() ? 0.0 : *std::max_element(s.begin(), s.end());
}

ConfusionMatrix::ConfusionMatrix(std::size_t n_classes) : k_(n_classes), counts_(n_classes * n_classes, 0) {
  if (n_classes == 0) throw ValueError("confusion matrix needs at least one class");
}

void ConfusionMatrix::add(std::size_t truth, std::size_t predicted, std::size_t count) {
  if (truth >= k_ || predicted >= k_) throw ValueError("confusion matrix: class index out of range");
  counts_[truth * k_ + predicted] += count;
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& other) {
  if (other.k_ != k_) throw ValueError("confusion matrix: class count mismatch");
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
  return *this;
}

std::size_t ConfusionMatrix::total() const {
  return std::accumulate(counts_.begin(), counts_.end(), std::size_t{0});
}

std::size_t ConfusionMatrix::correct() const {
  std::size_t c = 0;
  for (std::size_t i = 0; i < k_; ++i) c += at(i, i);
  return c;
}

double ConfusionMatrix::accuracy() const {
  const std::size_t n = total();
  return n == 0 ? 0.0 : static_cast<double>(correct()) / static_cast<double>(n);
}

std::vector<std::size_t> ConfusionMatrix::row_sums() const {
  std::vector<std::size_t> out(k_, 0);
  for (std::size_t t = 0; t < k_; ++t) {
    for (std::size_t p = 0; p < k_; ++p) out[t] += at(t, p);
  }
  return out;
}

std::vector<double> ConfusionMatrix::recall() const {
  const auto rows = row_sums();
  std::vector<double> out(k_, 0.0);
  for (std::size_t t = 0; t < k_; ++t) {
    if (rows[t]) out[t] = static_cast<double>(at(t, t)) / static_cast<double>(rows[t]);
  }
  return out;
}

PredictionHistogram ConfusionMatrix::predictions() const {
  PredictionHistogram h{std::vector<std::size_t>(k_, 0)};
  for (std::size_t t = 0; t < k_; ++t) {
    for (std::size_t p = 0; p < k_; ++p) h.counts[p] += at(t, p);
  }
  return h;
}

std::size_t argmax(std::span<const double> values) {
  if (values.empty()) throw ValueError("argmax of empty range");
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

}  // namespace fingermi
