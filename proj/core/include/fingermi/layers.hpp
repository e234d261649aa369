#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fingermi/ops.hpp"
#include "fingermi/tensor.hpp"

namespace fingermi {

enum class LayerKind {
  Conv2D,
  DepthwiseConv2D,
  SeparableConv2D,
  AvgPool2D,
  MaxPool2D,
  FullyConnected,
  Softmax,
  Activation,
  Dropout,
};

enum class PaddingMode { Valid, Same };
enum class ActivationKind { None, Elu };

std::string_view layer_kind_name(LayerKind kind);

/// One row of an architecture table. Activation, dropout and the max-norm cap
/// are attributes of the structural layer they follow, so the layer list
/// mirrors the table row for row.
struct LayerSpec {
  LayerKind kind = LayerKind::Conv2D;
  std::string name;
  std::size_t filters = 0;  // Conv2D, SeparableConv2D (pointwise outputs), FullyConnected units
  Extent kernel{};
  std::size_t depth_multiplier = 1;
  PaddingMode padding = PaddingMode::Valid;
  bool bias = true;
  Extent pool{};
  Extent stride{};
  ActivationKind activation = ActivationKind::None;
  double dropout = 0.0;  // rate applied after the activation; the rate itself for Dropout layers
  std::optional<double> max_norm;

  static LayerSpec conv2d(std::string name, std::size_t filters, Extent kernel,
                          PaddingMode padding = PaddingMode::Valid);
  static LayerSpec depthwise_conv2d(std::string name, std::size_t depth_multiplier, Extent kernel);
  static LayerSpec separable_conv2d(std::string name, std::size_t filters, Extent kernel,
                                    PaddingMode padding = PaddingMode::Same);
  static LayerSpec avg_pool2d(std::string name, Extent pool);
  static LayerSpec max_pool2d(std::string name, Extent pool);
  static LayerSpec fully_connected(std::string name, std::size_t units);
  static LayerSpec softmax();
  static LayerSpec elu(std::string name);
  static LayerSpec dropout_layer(std::string name, double rate);

  LayerSpec& with_activation(ActivationKind a) { activation = a; return *this; }
  LayerSpec& with_dropout(double rate) { dropout = rate; return *this; }
  LayerSpec& with_max_norm(std::optional<double> cap) { max_norm = cap; return *this; }
  LayerSpec& without_bias() { bias = false; return *this; }
};

/// Single-trial input geometry: electrodes by time samples.
struct InputGeometry {
  std::size_t channels = 24;
  std::size_t samples = 1000;
};

struct ModelSpec {
  std::string name;
  std::vector<LayerSpec> layers;
  InputGeometry input{};
  std::size_t n_classes = 5;

  std::vector<LayerKind> kinds() const;
};

struct EegNetConfig {
  InputGeometry input{};
  std::size_t n_classes = 5;
  std::size_t f1 = 8;
  std::size_t depth_multiplier = 2;
  std::size_t f2 = 16;
  std::size_t temporal_kernel = 125;  // half the 250 Hz sampling rate
  std::size_t separable_kernel = 16;
  std::size_t pool1 = 4;
  std::size_t pool2 = 8;
  double dropout = 0.5;
  std::optional<double> max_norm_depthwise = 1.0;
  std::optional<double> max_norm_dense = 0.25;
};

struct DeepConvNetConfig {
  InputGeometry input{};
  std::size_t n_classes = 5;
  std::vector<std::size_t> filters{25, 25, 50, 100, 200};
  std::size_t temporal_kernel = 10;
  std::size_t pool = 3;
  double dropout = 0.5;
  std::optional<double> max_norm_conv = 2.0;
  std::optional<double> max_norm_dense = 0.5;
};

struct FingerNetConfig {
  EegNetConfig front{};
  std::vector<std::size_t> deep_filters{32, 64, 128};
  std::size_t deep_kernel = 5;
  std::size_t deep_pool = 2;
};

ModelSpec eegnet_spec(const EegNetConfig& config = {});
ModelSpec deepconvnet_spec(const DeepConvNetConfig& config = {});
ModelSpec fingernet_spec(const FingerNetConfig& config = {});

/// Per-trial output shape of every layer ([C,H,W] for feature maps, [units]
/// after a fully-connected layer). Throws ShapeError naming the first layer
/// whose output would collapse, and validates the Softmax/n_classes head.
std::vector<Shape> propagate_shapes(const ModelSpec& spec);

}  // namespace fingermi
