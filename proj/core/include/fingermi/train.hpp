#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "fingermi/adam.hpp"
#include "fingermi/losses.hpp"
#include "fingermi/metrics.hpp"
#include "fingermi/network.hpp"
#include "fingermi/signal.hpp"

namespace fingermi {

struct TrainConfig {
  std::size_t epochs = 100;
  std::size_t batch_size = 16;
  /// For LossKind::WCE an empty weight vector means "reciprocal class counts
  /// of the training split".
  LossSpec loss{};
  AdamOptions adam{};
  std::uint64_t seed = 0;
  bool shuffle = true;

  void validate() const;
};

/// Called after every epoch with (epoch index, mean training loss).
using EpochCallback = std::function<void(std::size_t epoch, double loss)>;

/// Mini-batch Adam training. Each epoch shuffles (seeded), runs the network in
/// training mode, applies the configured loss, backpropagates, steps Adam and
/// re-applies the max-norm caps. Returns the per-epoch mean training loss.
/// A non-finite loss or gradient throws NumericError naming the epoch and batch.
std::vector<double> train(Network& network, const EpochedDataset& dataset, const TrainConfig& config,
                          const EpochCallback& on_epoch = {});

struct Evaluation {
  double accuracy = 0.0;
  ConfusionMatrix confusion;
  PredictionHistogram histogram;
};

/// Eval-mode argmax predictions (ties go to the lowest class index).
Evaluation evaluate(const Network& network, const EpochedDataset& dataset);

/// Builds the evaluation from an explicit prediction list.
Evaluation score_predictions(std::span<const std::uint8_t> labels, std::span<const std::size_t> predictions,
                             std::size_t n_classes = kNumClasses);

}  // namespace fingermi
