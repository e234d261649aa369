#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fingermi/autograd.hpp"
#include "fingermi/layers.hpp"
#include "fingermi/random.hpp"

namespace fingermi {

enum class Mode { Training, Eval };

struct ParamInfo {
  std::string name;
  std::size_t layer = 0;
  bool is_bias = false;
  std::size_t fan_in = 0;
  std::size_t fan_out = 0;
};

/// Parameters of a ModelSpec. Parameter tensors are ordered by layer and
/// their shapes are fixed by the ModelSpec alone.
class Network {
 public:
  explicit Network(ModelSpec spec);

  const ModelSpec& spec() const { return spec_; }
  std::vector<Tensor>& params() { return params_; }
  const std::vector<Tensor>& params() const { return params_; }
  const std::vector<ParamInfo>& param_info() const { return info_; }

  Tensor& param(std::string_view name);
  const Tensor& param(std::string_view name) const;

  Mode mode() const { return mode_; }
  void set_mode(Mode mode) { mode_ = mode; }

 private:
  ModelSpec spec_;
  std::vector<Tensor> params_;
  std::vector<ParamInfo> info_;
  Mode mode_ = Mode::Eval;
};

/// Glorot-uniform weights, zero biases, drawn in parameter order from Pcg32(seed).
Network init_params(const ModelSpec& spec, std::uint64_t seed);

/// Records the network on `tape` and returns logits [N, n_classes].
/// Parameters enter as leaves, so backprop fills their gradients. Dropout is
/// active only in training mode, where `dropout_rng` is required.
Var forward(Network& network, Tape& tape, Var batch, Pcg32* dropout_rng = nullptr);

/// Eval-mode logits for a [N,1,channels,samples] batch; no gradients.
Tensor forward(const Network& network, const Tensor& batch);

/// Rescales every row (one output unit's incoming weights) whose L2 norm
/// exceeds the layer's cap to norm c. `caps` holds one optional cap per layer.
void apply_max_norm(Network& network, std::span<const std::optional<double>> caps);
/// Uses the caps declared in the network's spec.
void apply_max_norm(Network& network);

std::size_t param_count(const Network& network);

}  // namespace fingermi
