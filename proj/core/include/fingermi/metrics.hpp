#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace fingermi {

/// Count of argmax predictions per class over an evaluation set.
struct PredictionHistogram {
  std::vector<std::size_t> counts;

  std::size_t total() const;
  std::vector<double> shares() const;
  double max_share() const;
};

/// K x K counts; rows are true classes, columns predicted classes.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::size_t n_classes = 5);

  std::size_t n_classes() const { return k_; }
  std::size_t at(std::size_t truth, std::size_t predicted) const { return counts_[truth * k_ + predicted]; }
  void add(std::size_t truth, std::size_t predicted, std::size_t count = 1);
  ConfusionMatrix& operator+=(const ConfusionMatrix& other);

  std::size_t total() const;
  std::size_t correct() const;
  double accuracy() const;
  std::vector<std::size_t> row_sums() const;
  /// Recall per true class; 0 for classes without samples.
  std::vector<double> recall() const;
  PredictionHistogram predictions() const;

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

 private:
  std::size_t k_;
  std::vector<std::size_t> counts_;
};

/// Index of the largest value; ties go to the lowest index.
std::size_t argmax(std::span<const double> values);

}  // namespace fingermi
