#include "fingermi/cv.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <numeric>
#include <thread>

#include "fingermi/error.hpp"
#include "fingermi/folds.hpp"
#include "fingermi/network.hpp"

namespace fingermi {

std::vector<double> CvReport::fold_accuracies() const {
  std::vector<double> out;
  for (const auto& f : folds) out.push_back(f.accuracy);
  return out;
}

CvReport run_cv(const EpochedDataset& dataset, const ModelSpec& spec, const TrainConfig& config,
                const CvOptions& options) {
  config.validate();
  dataset.validate();
  const auto splits = stratified_kfold(dataset.labels, options.k, config.seed);
  const std::size_t k = spec.n_classes;

  std::vector<FoldResult> results(splits.size());
  std::vector<std::exception_ptr> errors(splits.size());
  auto run_fold = [&](std::size_t f) {
    try {
      const EpochedDataset train_set = dataset.subset(splits[f].train);
      const EpochedDataset test_set = dataset.subset(splits[f].test);
      TrainConfig fold_config = config;
      fold_config.seed = config.seed + f;
      Network net = init_params(spec, fold_config.seed);
      FoldResult r;
      r.fold = f;
      r.test_indices = splits[f].test;
      r.loss_history = train(net, train_set, fold_config);
      Evaluation ev = evaluate(net, test_set);
      r.accuracy = ev.accuracy;
      r.confusion = std::move(ev.confusion);
      results[f] = std::move(r);
    } catch (...) {
      errors[f] = std::current_exception();
    }
  };

  const std::size_t threads = std::max<std::size_t>(1, std::min(options.threads, splits.size()));
  if (threads == 1) {
    for (std::size_t f = 0; f < splits.size(); ++f) run_fold(f);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t f = next++; f < splits.size(); f = next++) run_fold(f);
      });
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  CvReport report;
  report.model = spec.name;
  report.k = options.k;
  report.n_trials = dataset.n_trials();
  report.config = config;
  report.pooled = ConfusionMatrix(k);
  for (auto& r : results) report.pooled += r.confusion;
  report.folds = std::move(results);
  const auto accs = report.fold_accuracies();
  const double n = static_cast<double>(accs.size());
  report.mean_accuracy = std::accumulate(accs.begin(), accs.end(), 0.0) / n;
  double ss = 0.0;
  for (double a : accs) ss += (a - report.mean_accuracy) * (a - report.mean_accuracy);
  report.std_accuracy = std::sqrt(ss / n);
  report.recall = report.pooled.recall();
  report.histogram = report.pooled.predictions();
  return report;
}

}  // namespace fingermi
