#include "fingermi/sweep.hpp"

#include <exception>

#include "fingermi/error.hpp"
#include "fingermi/format.hpp"

namespace fingermi {

SweepResult weight_sweep(const SweepTrainer& trainer, std::size_t rounds, std::uint64_t seed,
                         std::size_t n_classes, const AdjustOptions& adjust) {
  if (rounds == 0) throw ValueError("weight_sweep: rounds must be at least 1");
  if (!trainer) throw ValueError("weight_sweep: no trainer");
  SweepResult result;
  std::vector<double> w(n_classes, 1.0);
  for (std::size_t r = 1; r <= rounds; ++r) {
    if (r > 1) w = adjust_weights(w, result.rounds.back().histogram, adjust);
    try {
      TrialOutcome out = trainer(w, seed);
      result.rounds.push_back({r, w, out.mean_accuracy, std::move(out.confusion), std::move(out.histogram)});
    } catch (const std::exception& e) {
      result.failure = "round " + std::to_string(r) + ": " + e.what();
      break;
    }
  }
  return result;
}

SweepTrainer cv_sweep_trainer(const EpochedDataset& dataset, const ModelSpec& spec, const TrainConfig& config,
                              const CvOptions& options) {
  return [&dataset, spec, config, options](std::span<const double> w, std::uint64_t seed) {
    TrainConfig c = config;
    c.seed = seed;
    c.loss = LossSpec::bias_weighted(std::vector<double>(w.begin(), w.end()));
    CvReport report = run_cv(dataset, spec, c, options);
    return TrialOutcome{report.mean_accuracy, report.pooled, report.histogram};
  };
}

void write_sweep_csv(std::ostream& out, const SweepResult& result) {
  const std::size_t k = result.rounds.empty() ? kNumClasses : result.rounds.front().weights.size();
  out << "round";
  for (std::size_t i = 1; i <= k; ++i) out << ",w" << i;
  out << ",mean_accuracy";
  for (std::size_t i = 1; i <= k; ++i) out << ",per_class_recall_" << i;
  out << '\n';
  for (const auto& r : result.rounds) {
    out << r.round;
    for (double w : r.weights) out << ',' << format_number(w);
    out << ',' << format_number(r.mean_accuracy);
    for (double v : r.confusion.recall()) out << ',' << format_number(v);
    out << '\n';
  }
}

}  // namespace fingermi
