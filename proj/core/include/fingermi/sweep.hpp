#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "fingermi/cv.hpp"
#include "fingermi/losses.hpp"
#include "fingermi/metrics.hpp"

namespace fingermi {

/// What one sweep round needs back from a full training run.
struct TrialOutcome {
  double mean_accuracy = 0.0;
  ConfusionMatrix confusion;
  PredictionHistogram histogram;
};

using SweepTrainer = std::function<TrialOutcome(std::span<const double> weights, std::uint64_t seed)>;

struct SweepRound {
  std::size_t round = 0;  // 1-based; round 1 is the plain cross-entropy baseline
  std::vector<double> weights;
  double mean_accuracy = 0.0;
  ConfusionMatrix confusion;
  PredictionHistogram histogram;
};

struct SweepResult {
  std::vector<SweepRound> rounds;
  std::optional<std::string> failure;  // set when a round threw; earlier rounds are kept

  bool complete() const { return !failure.has_value(); }
};

/// Runs `rounds` trainer calls. Round 1 uses all-ones weights; each later
/// round's weights come from adjust_weights on the previous round's
/// prediction histogram. Every round uses the same seed, so rounds differ
/// only in their weights.
SweepResult weight_sweep(const SweepTrainer& trainer, std::size_t rounds, std::uint64_t seed,
                         std::size_t n_classes = kNumClasses, const AdjustOptions& adjust = {});

/// Trainer that runs cross-validation with bias-weighted cross-entropy.
SweepTrainer cv_sweep_trainer(const EpochedDataset& dataset, const ModelSpec& spec, const TrainConfig& config,
                              const CvOptions& options = {});

/// CSV: round, w1..wK, mean_accuracy, per_class_recall_1..K.
void write_sweep_csv(std::ostream& out, const SweepResult& result);

}  // namespace fingermi
