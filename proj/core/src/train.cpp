#include "fingermi/train.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "fingermi/error.hpp"
#include "fingermi/ops.hpp"
#include "fingermi/random.hpp"

namespace fingermi {

namespace {

constexpr std::uint64_t kShuffleStream = 0x5348554646ULL;
constexpr std::uint64_t kDropoutStream = 0x44524f50ULL;
constexpr std::size_t kEvalBatch = 32;

void check_geometry(const Network& network, const EpochedDataset& dataset) {
  const auto& in = network.spec().input;
  if (dataset.n_channels() != in.channels || dataset.n_samples != in.samples) {
    throw ShapeError(network.spec().name + " expects trials of " + std::to_string(in.channels) + "x" +
                     std::to_string(in.samples) + ", dataset has " + std::to_string(dataset.n_channels()) +
                     "x" + std::to_string(dataset.n_samples));
  }
}

}  // namespace

void TrainConfig::validate() const {
  if (epochs == 0) throw ValueError("train: epochs must be at least 1");
  if (batch_size == 0) throw ValueError("train: batch_size must be at least 1");
  if (!(adam.lr >= 0.0)) throw ValueError("train: learning rate must be >= 0");
}

std::vector<double> train(Network& network, const EpochedDataset& dataset, const TrainConfig& config,
                          const EpochCallback& on_epoch) {
  config.validate();
  dataset.validate();
  if (dataset.n_trials() == 0) throw ValueError("train: empty dataset");
  check_geometry(network, dataset);
  const std::size_t k = network.spec().n_classes;

  LossSpec loss_spec = config.loss;
  if (loss_spec.kind == LossKind::WCE && loss_spec.weights.empty()) {
    loss_spec.weights = class_frequency_weights(dataset.label_counts(k));
  }
  loss_spec.validate(k);

  Pcg32 order_rng(config.seed, kShuffleStream);
  Pcg32 dropout_rng(config.seed, kDropoutStream);
  AdamState adam = adam_init(network.params(), config.adam);
  std::vector<std::size_t> order(dataset.n_trials());
  std::iota(order.begin(), order.end(), std::size_t{0});

  std::vector<double> history;
  history.reserve(config.epochs);
  network.set_mode(Mode::Training);
  for (std::size_t e = 0; e < config.epochs; ++e) {
    if (config.shuffle) shuffle(std::span(order), order_rng);
    double total = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size, ++batch_index) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      const std::span<const std::size_t> idx(order.data() + start, end - start);
      std::vector<std::size_t> labels;
      labels.reserve(idx.size());
      for (auto i : idx) labels.push_back(dataset.labels[i]);
      try {
        for (auto& p : network.params()) p.zero_grad();
        Tape tape;
        Var logits = forward(network, tape, tape.constant(dataset.batch(idx)), &dropout_rng);
        Var l = loss(loss_spec, log_softmax(logits), labels);
        tape.backprop(l);
        adam_step(adam, network.params());
        apply_max_norm(network);
        total += l.value().item() * static_cast<double>(idx.size());
      } catch (const NumericError& err) {
        network.set_mode(Mode::Eval);
        throw NumericError("training diverged at epoch " + std::to_string(e + 1) + ", batch " +
                           std::to_string(batch_index + 1) + ": " + err.what());
      }
    }
    const double mean = total / static_cast<double>(order.size());
    history.push_back(mean);
    if (on_epoch) on_epoch(e, mean);
  }
  network.set_mode(Mode::Eval);
  for (auto& p : network.params()) p.clear_grad();
  return history;
}

Evaluation score_predictions(std::span<const std::uint8_t> labels, std::span<const std::size_t> predictions,
                             std::size_t n_classes) {
  if (labels.empty()) throw ValueError("evaluate: empty dataset");
  if (labels.size() != predictions.size()) throw ValueError("evaluate: label/prediction count mismatch");
  Evaluation ev{0.0, ConfusionMatrix(n_classes), {}};
  for (std::size_t i = 0; i < labels.size(); ++i) ev.confusion.add(labels[i], predictions[i]);
  ev.accuracy = ev.confusion.accuracy();
  ev.histogram = ev.confusion.predictions();
  return ev;
}

Evaluation evaluate(const Network& network, const EpochedDataset& dataset) {
  dataset.validate();
  if (dataset.n_trials() == 0) throw ValueError("evaluate: empty dataset");
  check_geometry(network, dataset);
  const std::size_t k = network.spec().n_classes;
  std::vector<std::size_t> predictions;
  predictions.reserve(dataset.n_trials());
  std::vector<std::size_t> idx;
  for (std::size_t start = 0; start < dataset.n_trials(); start += kEvalBatch) {
    const std::size_t end = std::min(dataset.n_trials(), start + kEvalBatch);
    idx.resize(end - start);
    std::iota(idx.begin(), idx.end(), start);
    const Tensor logits = forward(network, dataset.batch(idx));
    for (std::size_t r = 0; r < idx.size(); ++r) {
      predictions.push_back(argmax(logits.data().subspan(r * k, k)));
    }
  }
  return score_predictions(dataset.labels, predictions, k);
}

}  // namespace fingermi
