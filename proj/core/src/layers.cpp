#include "fingermi/layers.hpp"

#include <string>

namespace fingermi {

std::string_view layer_kind_name(LayerKind kind) {
  switch (kind) {
    case LayerKind::Conv2D: return "Conv2D";
    case LayerKind::DepthwiseConv2D: return "DepthwiseConv2D";
    case LayerKind::SeparableConv2D: return "SeparableConv2D";
    case LayerKind::AvgPool2D: return "AvgPool2D";
    case LayerKind::MaxPool2D: return "MaxPool2D";
    case LayerKind::FullyConnected: return "FullyConnected";
    case LayerKind::Softmax: return "Softmax";
    case LayerKind::Activation: return "Activation";
    case LayerKind::Dropout: return "Dropout";
  }
  return "?";
}

LayerSpec LayerSpec::conv2d(std::string name, std::size_t filters, Extent kernel,
                            PaddingMode padding) {
  LayerSpec l;
  l.kind = LayerKind::Conv2D;
  l.name = std::move(name);
  l.filters = filters;
  l.kernel = kernel;
  l.padding = padding;
  return l;
}

LayerSpec LayerSpec::depthwise_conv2d(std::string name, std::size_t depth_multiplier,
                                      Extent kernel) {
  LayerSpec l;
  l.kind = LayerKind::DepthwiseConv2D;
  l.name = std::move(name);
  l.depth_multiplier = depth_multiplier;
  l.kernel = kernel;
  l.bias = false;
  return l;
}

LayerSpec LayerSpec::separable_conv2d(std::string name, std::size_t filters, Extent kernel,
                                      PaddingMode padding) {
  LayerSpec l;
  l.kind = LayerKind::SeparableConv2D;
  l.name = std::move(name);
  l.filters = filters;
  l.kernel = kernel;
  l.padding = padding;
  l.bias = false;
  return l;
}

LayerSpec LayerSpec::avg_pool2d(std::string name, Extent pool) {
  LayerSpec l;
  l.kind = LayerKind::AvgPool2D;
  l.name = std::move(name);
  l.pool = pool;
  l.stride = pool;
  return l;
}

LayerSpec LayerSpec::max_pool2d(std::string name, Extent pool) {
  LayerSpec l = avg_pool2d(std::move(name), pool);
  l.kind = LayerKind::MaxPool2D;
  return l;
}

LayerSpec LayerSpec::fully_connected(std::string name, std::size_t units) {
  LayerSpec l;
  l.kind = LayerKind::FullyConnected;
  l.name = std::move(name);
  l.filters = units;
  return l;
}

LayerSpec LayerSpec::softmax() {
  LayerSpec l;
  l.kind = LayerKind::Softmax;
  l.name = "softmax";
  return l;
}

LayerSpec LayerSpec::elu(std::string name) {
  LayerSpec l;
  l.kind = LayerKind::Activation;
  l.name = std::move(name);
  l.activation = ActivationKind::Elu;
  return l;
}

LayerSpec LayerSpec::dropout_layer(std::string name, double rate) {
  LayerSpec l;
  l.kind = LayerKind::Dropout;
  l.name = std::move(name);
  l.dropout = rate;
  return l;
}

std::vector<LayerKind> ModelSpec::kinds() const {
  std::vector<LayerKind> out;
  out.reserve(layers.size());
  for (const auto& l : layers) out.push_back(l.kind);
  return out;
}

namespace {

void append_eegnet_front(std::vector<LayerSpec>& layers, const EegNetConfig& c) {
  layers.push_back(LayerSpec::conv2d("temporal_conv", c.f1, {1, c.temporal_kernel}, PaddingMode::Same));
  layers.push_back(LayerSpec::depthwise_conv2d("spatial_depthwise", c.depth_multiplier,
                                               {c.input.channels, 1})
                       .with_activation(ActivationKind::Elu)
                       .with_max_norm(c.max_norm_depthwise));
  layers.push_back(LayerSpec::avg_pool2d("pool1", {1, c.pool1}).with_dropout(c.dropout));
  layers.push_back(LayerSpec::separable_conv2d("separable", c.f2, {1, c.separable_kernel})
                       .with_activation(ActivationKind::Elu));
  layers.push_back(LayerSpec::avg_pool2d("pool2", {1, c.pool2}).with_dropout(c.dropout));
}

ModelSpec finish(std::string name, std::vector<LayerSpec> layers, InputGeometry input,
                 std::size_t n_classes) {
  ModelSpec spec{std::move(name), std::move(layers), input, n_classes};
  propagate_shapes(spec);
  return spec;
}

}  // namespace

ModelSpec eegnet_spec(const EegNetConfig& c) {
  std::vector<LayerSpec> layers;
  append_eegnet_front(layers, c);
  layers.push_back(LayerSpec::fully_connected("dense", c.n_classes).with_max_norm(c.max_norm_dense));
  layers.push_back(LayerSpec::softmax());
  return finish("eegnet", std::move(layers), c.input, c.n_classes);
}

ModelSpec deepconvnet_spec(const DeepConvNetConfig& c) {
  if (c.filters.size() != 5) {
    throw ValueError("deepconvnet: expected 5 filter counts, got " + std::to_string(c.filters.size()));
  }
  std::vector<LayerSpec> layers;
  layers.push_back(LayerSpec::conv2d("temporal_conv", c.filters[0], {1, c.temporal_kernel})
                       .with_max_norm(c.max_norm_conv));
  layers.push_back(LayerSpec::conv2d("spatial_conv", c.filters[1], {c.input.channels, 1})
                       .with_activation(ActivationKind::Elu)
                       .with_max_norm(c.max_norm_conv));
  layers.push_back(LayerSpec::max_pool2d("pool1", {1, c.pool}).with_dropout(c.dropout));
  for (std::size_t b = 2; b < 5; ++b) {
    const std::string idx = std::to_string(b);
    layers.push_back(LayerSpec::conv2d("conv" + idx, c.filters[b], {1, c.temporal_kernel})
                         .with_activation(ActivationKind::Elu)
                         .with_max_norm(c.max_norm_conv));
    layers.push_back(LayerSpec::max_pool2d("pool" + idx, {1, c.pool}).with_dropout(c.dropout));
  }
  layers.push_back(LayerSpec::fully_connected("dense", c.n_classes).with_max_norm(c.max_norm_dense));
  layers.push_back(LayerSpec::softmax());
  return finish("deepconvnet", std::move(layers), c.input, c.n_classes);
}

ModelSpec fingernet_spec(const FingerNetConfig& c) {
  if (c.deep_filters.size() != 3) {
    throw ValueError("fingernet: expected 3 deep filter counts, got " +
                     std::to_string(c.deep_filters.size()));
  }
  std::vector<LayerSpec> layers;
  append_eegnet_front(layers, c.front);
  for (std::size_t b = 0; b < 3; ++b) {
    const std::string idx = std::to_string(b + 3);
    layers.push_back(LayerSpec::conv2d("conv" + idx, c.deep_filters[b], {1, c.deep_kernel},
                                       PaddingMode::Same)
                         .with_activation(ActivationKind::Elu));
    layers.push_back(LayerSpec::avg_pool2d("pool" + idx, {1, c.deep_pool}).with_dropout(c.front.dropout));
  }
  layers.push_back(
      LayerSpec::fully_connected("dense", c.front.n_classes).with_max_norm(c.front.max_norm_dense));
  layers.push_back(LayerSpec::softmax());
  return finish("fingernet", std::move(layers), c.front.input, c.front.n_classes);
}

std::vector<Shape> propagate_shapes(const ModelSpec& spec) {
  if (spec.input.channels == 0 || spec.input.samples == 0) {
    throw ShapeError(spec.name + ": input geometry must be positive");
  }
  if (spec.n_classes == 0) throw ShapeError(spec.name + ": n_classes must be positive");
  std::vector<Shape> shapes;
  Shape cur{1, spec.input.channels, spec.input.samples};

  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    const LayerSpec& l = spec.layers[i];
    const std::string where = spec.name + " layer " + std::to_string(i) + " '" + l.name + "' (" +
                              std::string(layer_kind_name(l.kind)) + ")";
    auto fail = [&](const std::string& why) { throw ShapeError(where + ": " + why); };
    auto need_map = [&] {
      if (cur.size() != 3) fail("expects a feature map, got " + shape_string(cur));
    };
    auto slide = [&](Extent window, Extent stride, PaddingMode mode) {
      const Padding pad = mode == PaddingMode::Same ? Padding::same(window) : Padding{};
      const std::size_t h = sliding_output(cur[1], pad.top, pad.bottom, window.h, stride.h);
      const std::size_t w = sliding_output(cur[2], pad.left, pad.right, window.w, stride.w);
      if (h == 0 || w == 0) {
        fail("window (" + std::to_string(window.h) + "," + std::to_string(window.w) +
             ") does not fit input " + shape_string(cur));
      }
      return std::pair{h, w};
    };
    if (l.dropout < 0.0 || l.dropout >= 1.0) fail("dropout rate must lie in [0, 1)");
    if (l.max_norm && !(*l.max_norm > 0.0)) fail("max-norm cap must be positive");

    switch (l.kind) {
      case LayerKind::Conv2D: {
        need_map();
        if (l.filters == 0 || l.kernel.h == 0 || l.kernel.w == 0) fail("sizes must be positive");
        auto [h, w] = slide(l.kernel, {1, 1}, l.padding);
        cur = {l.filters, h, w};
        break;
      }
      case LayerKind::DepthwiseConv2D: {
        need_map();
        if (l.depth_multiplier == 0 || l.kernel.h == 0 || l.kernel.w == 0) fail("sizes must be positive");
        auto [h, w] = slide(l.kernel, {1, 1}, l.padding);
        cur = {cur[0] * l.depth_multiplier, h, w};
        break;
      }
      case LayerKind::SeparableConv2D: {
        need_map();
        if (l.filters == 0 || l.depth_multiplier == 0 || l.kernel.h == 0 || l.kernel.w == 0) {
          fail("sizes must be positive");
        }
        auto [h, w] = slide(l.kernel, {1, 1}, l.padding);
        cur = {l.filters, h, w};
        break;
      }
      case LayerKind::AvgPool2D:
      case LayerKind::MaxPool2D: {
        need_map();
        if (l.pool.h == 0 || l.pool.w == 0 || l.stride.h == 0 || l.stride.w == 0) {
          fail("sizes must be positive");
        }
        auto [h, w] = slide(l.pool, l.stride, PaddingMode::Valid);
        cur = {cur[0], h, w};
        break;
      }
      case LayerKind::FullyConnected:
        if (l.filters == 0) fail("units must be positive");
        cur = {l.filters};
        break;
      case LayerKind::Softmax:
        if (i + 1 != spec.layers.size()) fail("Softmax must be the final layer");
        break;
      case LayerKind::Activation:
      case LayerKind::Dropout:
        break;
    }
    shapes.push_back(cur);
  }
  if (cur.size() != 1 || cur[0] != spec.n_classes) {
    throw ShapeError(spec.name + ": final layer yields " + shape_string(cur) + ", expected [" +
                     std::to_string(spec.n_classes) + "]");
  }
  return shapes;
}

}  // namespace fingermi
