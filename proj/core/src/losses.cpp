#include "fingermi/losses.hpp"

#include <algorithm>
#include <string>

namespace fingermi {

std::string_view loss_kind_name(LossKind kind) {
  switch (kind) {
    case LossKind::CE: return "ce";
    case LossKind::WCE: return "wce";
    case LossKind::BWCE: return "bwce";
  }
  return "?";
}

LossKind parse_loss_kind(std::string_view name) {
  if (name == "ce") return LossKind::CE;
  if (name == "wce") return LossKind::WCE;
  if (name == "bwce") return LossKind::BWCE;
  throw ValueError("unknown loss kind '" + std::string(name) + "' (expected ce, wce or bwce)");
}

LossSpec LossSpec::cross_entropy(std::size_t n_classes) {
  return {LossKind::CE, std::vector<double>(n_classes, 1.0)};
}

LossSpec LossSpec::weighted(std::vector<double> alpha) { return {LossKind::WCE, std::move(alpha)}; }

LossSpec LossSpec::bias_weighted(std::vector<double> w) { return {LossKind::BWCE, std::move(w)}; }

void LossSpec::validate(std::size_t n_classes) const {
  if (weights.size() != n_classes) {
    throw ValueError("loss weights: expected " + std::to_string(n_classes) + " values, got " +
                     std::to_string(weights.size()));
  }
  for (double w : weights) {
    if (!(w > 0.0)) throw ValueError("loss weights must be strictly positive");
  }
}

namespace {

Var weighted_nll(const char* op, Var log_probs, std::span<const std::size_t> labels,
                 std::vector<double> weights) {
  const Tensor& lp = log_probs.value();
  if (lp.rank() != 2) throw ShapeError(std::string(op) + ": log-probabilities must be [N,K]");
  const std::size_t n = lp.dim(0), k = lp.dim(1);
  if (labels.size() != n) {
    throw ShapeError(std::string(op) + ": " + std::to_string(labels.size()) + " labels for " +
                     std::to_string(n) + " rows");
  }
  if (weights.size() != k) throw ValueError(std::string(op) + ": weight count must equal K");
  for (double w : weights) {
    if (!(w > 0.0)) throw ValueError(std::string(op) + ": weights must be strictly positive");
  }
  std::vector<std::size_t> y(labels.begin(), labels.end());
  double total = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    if (y[r] >= k) {
      throw ValueError(std::string(op) + ": label " + std::to_string(y[r]) + " out of range [0," +
                       std::to_string(k) + ")");
    }
    total += -weights[y[r]] * lp[r * k + y[r]];
  }
  const double mean = total / static_cast<double>(n);
  return log_probs.tape().record(
      op, Tensor::scalar(mean), {log_probs},
      [log_probs, y = std::move(y), weights = std::move(weights), n, k](
          Tape& tape, std::span<const double> dout) {
        auto g = tape.grad_of(log_probs);
        const double scale = dout[0] / static_cast<double>(n);
        for (std::size_t r = 0; r < n; ++r) g[r * k + y[r]] -= weights[y[r]] * scale;
      });
}

}  // namespace

Var cross_entropy(Var log_probs, std::span<const std::size_t> labels) {
  const std::size_t k = log_probs.value().rank() == 2 ? log_probs.value().dim(1) : 0;
  return weighted_nll("cross_entropy", log_probs, labels, std::vector<double>(k, 1.0));
}

Var weighted_cross_entropy(Var log_probs, std::span<const std::size_t> labels,
                           std::span<const double> alpha) {
  return weighted_nll("weighted_cross_entropy", log_probs, labels, {alpha.begin(), alpha.end()});
}

Var bias_weighted_cross_entropy(Var log_probs, std::span<const std::size_t> labels,
                                std::span<const double> w) {
  return weighted_nll("bias_weighted_cross_entropy", log_probs, labels, {w.begin(), w.end()});
}

Var loss(const LossSpec& spec, Var log_probs, std::span<const std::size_t> labels) {
  switch (spec.kind) {
    case LossKind::CE: return cross_entropy(log_probs, labels);
    case LossKind::WCE: return weighted_cross_entropy(log_probs, labels, spec.weights);
    case LossKind::BWCE: return bias_weighted_cross_entropy(log_probs, labels, spec.weights);
  }
  throw ValueError("unknown loss kind");
}

std::vector<double> class_frequency_weights(std::span<const std::size_t> counts) {
  std::vector<double> alpha;
  alpha.reserve(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i] == 0) {
      throw ValueError("class_frequency_weights: class " + std::to_string(i) + " has no samples");
    }
    alpha.push_back(1.0 / static_cast<double>(counts[i]));
  }
  return alpha;
}

std::vector<double> adjust_weights(std::span<const double> w, const PredictionHistogram& hist,
                                   const AdjustOptions& options) {
  if (hist.counts.size() != w.size()) {
    throw ValueError("adjust_weights: histogram and weight vector differ in length");
  }
  if (hist.total() == 0) throw ValueError("adjust_weights: empty prediction histogram");
  const auto shares = hist.shares();
  const double uniform = 1.0 / static_cast<double>(w.size());
  std::vector<double> out(w.begin(), w.end());
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (shares[i] > uniform + options.tolerance) {
      out[i] -= options.step;
    } else if (shares[i] < uniform - options.tolerance) {
      out[i] += options.step;
    }
    out[i] = std::clamp(out[i], options.lower, options.upper);
  }
  return out;
}

}  // namespace fingermi
