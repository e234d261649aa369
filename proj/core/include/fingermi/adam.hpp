#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fingermi/tensor.hpp"

namespace fingermi {

struct AdamOptions {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Moment buffers for one parameter set, in parameter order.
struct AdamState {
  AdamOptions options;
  std::size_t step = 0;
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
};

AdamState adam_init(std::span<const Tensor> params, const AdamOptions& options = {});

/// Bias-corrected Adam update using each parameter's gradient buffer
/// (parameters without a buffer count as zero gradient).
void adam_step(AdamState& state, std::span<Tensor> params);

/// Same update with gradients supplied explicitly.
void adam_step(AdamState& state, std::span<Tensor> params,
               std::span<const std::vector<double>> grads);

}  // namespace fingermi
