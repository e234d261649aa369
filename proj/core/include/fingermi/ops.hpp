#pragma once

#include <cstddef>
#include <optional>

#include "fingermi/autograd.hpp"
#include "fingermi/random.hpp"

namespace fingermi {

/// (height, width) pair used for kernels, pool windows and strides.
struct Extent {
  std::size_t h = 1;
  std::size_t w = 1;
  friend bool operator==(const Extent&, const Extent&) = default;
};

/// Zero padding applied to the spatial borders of an NCHW tensor.
struct Padding {
  std::size_t top = 0;
  std::size_t bottom = 0;
  std::size_t left = 0;
  std::size_t right = 0;

  static Padding symmetric(std::size_t ph, std::size_t pw) { return {ph, ph, pw, pw}; }
  /// Output length equals input length at stride 1. Even kernels put the
  /// extra zero on the bottom/right side.
  static Padding same(Extent kernel) {
    return {(kernel.h - 1) / 2, kernel.h / 2, (kernel.w - 1) / 2, kernel.w / 2};
  }
  friend bool operator==(const Padding&, const Padding&) = default;
};

// All spatial ops take NCHW tensors. Convolutions are cross-correlations.

/// input [N,C,H,W], kernel [F,C,kh,kw], bias [F] -> [N,F,H',W'].
Var conv2d(Var input, Var kernel, std::optional<Var> bias, Extent stride = {},
           Padding padding = {});

/// input [N,C,H,W], kernel [C*D,1,kh,kw] -> [N,C*D,H',W']. Output channel
/// c*D+d sees only input channel c.
Var depthwise_conv2d(Var input, Var kernel, std::size_t depth_multiplier, Padding padding = {},
                     Extent stride = {});

/// Depthwise convolution followed by a bias-free 1x1 convolution with
/// pointwise kernel [F,C*D,1,1]; literally the composition of the two ops.
Var separable_conv2d(Var input, Var depthwise_kernel, Var pointwise_kernel,
                     std::size_t depth_multiplier, Padding padding = {});

/// Mean over each window, no padding; output extent floor((H-ph)/sh)+1.
Var avg_pool2d(Var input, Extent window, Extent stride);

/// Maximum over each window. Ties resolve to the first element in row-major
/// order and the gradient flows to that element only.
Var max_pool2d(Var input, Extent window, Extent stride);

/// x for x > 0, exp(x) - 1 otherwise.
Var elu(Var input);

/// input [N,K], weight [M,K], bias [M] -> [N,M].
Var linear(Var input, Var weight, std::optional<Var> bias);

/// Row-wise log-softmax of [N,K] logits using max subtraction.
Var log_softmax(Var logits);

/// Inverted dropout. Identity when `training` is false or `rate` is 0.
Var dropout(Var input, double rate, Pcg32& rng, bool training);

Var reshape(Var input, Shape shape);
Var sum(Var input);
/// Elementwise product of equal-shape tensors.
Var mul(Var a, Var b);

/// Output length of a sliding window along one axis, or 0 if it does not fit.
std::size_t sliding_output(std::size_t input, std::size_t pad_before, std::size_t pad_after,
                           std::size_t window, std::size_t stride);

}  // namespace fingermi
