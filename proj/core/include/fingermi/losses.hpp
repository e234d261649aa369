#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "fingermi/autograd.hpp"
#include "fingermi/metrics.hpp"

namespace fingermi {

enum class LossKind {
  CE,    // plain categorical cross-entropy
  WCE,   // class-frequency weights (reciprocal class counts)
  BWCE,  // heuristic weights tuned against biased predictions
};

std::string_view loss_kind_name(LossKind kind);
LossKind parse_loss_kind(std::string_view name);

struct LossSpec {
  LossKind kind = LossKind::CE;
  std::vector<double> weights = std::vector<double>(5, 1.0);

  static LossSpec cross_entropy(std::size_t n_classes = 5);
  static LossSpec weighted(std::vector<double> alpha);
  static LossSpec bias_weighted(std::vector<double> w);

  /// Throws ValueError unless weights are strictly positive and n_classes long.
  void validate(std::size_t n_classes) const;
};

/// Mean over the batch of -log p(true class).
Var cross_entropy(Var log_probs, std::span<const std::size_t> labels);

/// Mean over the batch of -alpha[true] * log p(true class).
Var weighted_cross_entropy(Var log_probs, std::span<const std::size_t> labels,
                           std::span<const double> alpha);

/// Same functional form as weighted_cross_entropy with heuristic weights.
Var bias_weighted_cross_entropy(Var log_probs, std::span<const std::size_t> labels,
                                std::span<const double> w);

/// Dispatches on spec.kind; CE ignores spec.weights.
Var loss(const LossSpec& spec, Var log_probs, std::span<const std::size_t> labels);

/// alpha_i = 1 / counts_i.
std::vector<double> class_frequency_weights(std::span<const std::size_t> counts);

struct AdjustOptions {
  double step = 0.05;
  double lower = 0.5;
  double upper = 1.5;
  double tolerance = 0.02;  // allowed deviation of a class's prediction share from 1/K
};

/// One round of the heuristic: classes predicted more often than 1/K + tol
/// lose `step`, classes predicted less often than 1/K - tol gain `step`,
/// everything is clamped to [lower, upper].
std::vector<double> adjust_weights(std::span<const double> w, const PredictionHistogram& hist,
                                   const AdjustOptions& options = {});

}  // namespace fingermi
