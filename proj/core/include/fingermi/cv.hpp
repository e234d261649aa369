#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "fingermi/layers.hpp"
#include "fingermi/metrics.hpp"
#include "fingermi/signal.hpp"
#include "fingermi/train.hpp"

namespace fingermi {

struct FoldResult {
  std::size_t fold = 0;
  std::vector<std::size_t> test_indices;
  double accuracy = 0.0;
  ConfusionMatrix confusion;
  std::vector<double> loss_history;
};

struct CvReport {
  std::string model;
  std::size_t k = 5;
  std::size_t n_trials = 0;
  TrainConfig config;
  std::vector<FoldResult> folds;
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;  // population standard deviation over folds
  ConfusionMatrix pooled;
  std::vector<double> recall;
  PredictionHistogram histogram;

  std::vector<double> fold_accuracies() const;
};

struct CvOptions {
  std::size_t k = 5;
  std::size_t threads = 1;  // folds run concurrently; results merge in fold order
};

/// k-fold cross-validation: stratified split seeded by config.seed; fold f
/// trains a fresh network initialized and trained with seed config.seed + f,
/// then evaluates on its held-out trials. The pooled confusion matrix tests
/// every trial exactly once.
CvReport run_cv(const EpochedDataset& dataset, const ModelSpec& spec, const TrainConfig& config,
                const CvOptions& options = {});

}  // namespace fingermi
