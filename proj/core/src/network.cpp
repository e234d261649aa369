#include "fingermi/network.hpp"

#include <cmath>

#include "fingermi/ops.hpp"

namespace fingermi {

namespace {

void add_param(std::vector<Tensor>& params, std::vector<ParamInfo>& info, std::size_t layer,
               std::string name, Shape shape, bool is_bias) {
  ParamInfo p{std::move(name), layer, is_bias, 0, 0};
  if (!is_bias) {
    if (shape.size() == 4) {
      const std::size_t receptive = shape[2] * shape[3];
      p.fan_in = shape[1] * receptive;
      p.fan_out = shape[0] * receptive;
    } else {
      p.fan_in = shape[1];
      p.fan_out = shape[0];
    }
  }
  Tensor t(std::move(shape));
  t.set_requires_grad(true);
  params.push_back(std::move(t));
  info.push_back(std::move(p));
}

std::size_t flat(const Shape& s) { return shape_size(s); }

}  // namespace

Network::Network(ModelSpec spec) : spec_(std::move(spec)) {
  const std::vector<Shape> shapes = propagate_shapes(spec_);
  Shape in{1, spec_.input.channels, spec_.input.samples};
  for (std::size_t i = 0; i < spec_.layers.size(); ++i) {
    const LayerSpec& l = spec_.layers[i];
    const std::string& n = l.name;
    switch (l.kind) {
      case LayerKind::Conv2D:
        add_param(params_, info_, i, n + ".weight", {l.filters, in[0], l.kernel.h, l.kernel.w}, false);
        if (l.bias) add_param(params_, info_, i, n + ".bias", {l.filters}, true);
        break;
      case LayerKind::DepthwiseConv2D:
        add_param(params_, info_, i, n + ".weight",
                  {in[0] * l.depth_multiplier, 1, l.kernel.h, l.kernel.w}, false);
        if (l.bias) add_param(params_, info_, i, n + ".bias", {in[0] * l.depth_multiplier}, true);
        break;
      case LayerKind::SeparableConv2D:
        add_param(params_, info_, i, n + ".depthwise",
                  {in[0] * l.depth_multiplier, 1, l.kernel.h, l.kernel.w}, false);
        add_param(params_, info_, i, n + ".pointwise", {l.filters, in[0] * l.depth_multiplier, 1, 1},
                  false);
        if (l.bias) add_param(params_, info_, i, n + ".bias", {l.filters}, true);
        break;
      case LayerKind::FullyConnected:
        add_param(params_, info_, i, n + ".weight", {l.filters, flat(in)}, false);
        if (l.bias) add_param(params_, info_, i, n + ".bias", {l.filters}, true);
        break;
      default:
        break;
    }
    in = shapes[i];
  }
}

Tensor& Network::param(std::string_view name) {
  for (std::size_t i = 0; i < info_.size(); ++i) {
    if (info_[i].name == name) return params_[i];
  }
  throw ValueError("no parameter named " + std::string(name));
}

const Tensor& Network::param(std::string_view name) const {
  return const_cast<Network*>(this)->param(name);
}

Network init_params(const ModelSpec& spec, std::uint64_t seed) {
  Network net(spec);
  Pcg32 rng(seed);
  for (std::size_t p = 0; p < net.params().size(); ++p) {
    const ParamInfo& info = net.param_info()[p];
    Tensor& t = net.params()[p];
    if (info.is_bias) {
      for (auto& v : t.data()) v = 0.0;
      continue;
    }
    const double bound = std::sqrt(6.0 / static_cast<double>(info.fan_in + info.fan_out));
    for (auto& v : t.data()) v = rng.uniform(-bound, bound);
  }
  return net;
}

namespace {

// Shared layer walk; `param_var` maps a parameter index to its tape handle.
template <typename ParamVar>
Var run_layers(const ModelSpec& spec, const std::vector<ParamInfo>& info, ParamVar&& param_var,
               Var x, bool training, Pcg32* rng) {
  const auto& geo = x.value().shape();
  if (geo.size() != 4 || geo[1] != 1 || geo[2] != spec.input.channels ||
      geo[3] != spec.input.samples) {
    throw ShapeError(spec.name + ": batch must be [N,1," + std::to_string(spec.input.channels) +
                     "," + std::to_string(spec.input.samples) + "], got " + shape_string(geo));
  }
  if (training && rng == nullptr) throw ValueError("forward: training mode needs a dropout RNG");

  std::size_t p = 0;
  auto next = [&](std::size_t layer) {
    if (p >= info.size() || info[p].layer != layer) {
      throw ValueError(spec.name + ": parameter layout does not match spec");
    }
    return param_var(p++);
  };
  auto maybe_bias = [&](const LayerSpec& l, std::size_t layer) -> std::optional<Var> {
    if (!l.bias) return std::nullopt;
    return next(layer);
  };

  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    const LayerSpec& l = spec.layers[i];
    const Padding pad = l.padding == PaddingMode::Same ? Padding::same(l.kernel) : Padding{};
    switch (l.kind) {
      case LayerKind::Conv2D: {
        Var w = next(i);
        x = conv2d(x, w, maybe_bias(l, i), {1, 1}, pad);
        break;
      }
      case LayerKind::DepthwiseConv2D: {
        if (l.bias) throw ValueError(l.name + ": depthwise bias is not supported");
        Var w = next(i);
        x = depthwise_conv2d(x, w, l.depth_multiplier, pad);
        break;
      }
      case LayerKind::SeparableConv2D: {
        if (l.bias) throw ValueError(l.name + ": separable bias is not supported");
        Var dw = next(i);
        Var pw = next(i);
        x = separable_conv2d(x, dw, pw, l.depth_multiplier, pad);
        break;
      }
      case LayerKind::AvgPool2D:
        x = avg_pool2d(x, l.pool, l.stride);
        break;
      case LayerKind::MaxPool2D:
        x = max_pool2d(x, l.pool, l.stride);
        break;
      case LayerKind::FullyConnected: {
        const Shape& s = x.value().shape();
        if (s.size() != 2) x = reshape(x, {s[0], x.value().size() / s[0]});
        Var w = next(i);
        x = linear(x, w, maybe_bias(l, i));
        break;
      }
      case LayerKind::Softmax:
        // Logits are returned; the loss applies log_softmax.
        break;
      case LayerKind::Activation:
        if (l.activation == ActivationKind::Elu) x = elu(x);
        continue;
      case LayerKind::Dropout:
        if (training) x = dropout(x, l.dropout, *rng, true);
        continue;
    }
    if (l.activation == ActivationKind::Elu) x = elu(x);
    if (training && l.dropout > 0.0) x = dropout(x, l.dropout, *rng, true);
  }
  return x;
}

}  // namespace

Var forward(Network& network, Tape& tape, Var batch, Pcg32* dropout_rng) {
  auto& params = network.params();
  return run_layers(
      network.spec(), network.param_info(), [&](std::size_t p) { return tape.leaf(params[p]); },
      batch, network.mode() == Mode::Training, dropout_rng);
}

Tensor forward(const Network& network, const Tensor& batch) {
  Tape tape;
  const auto& params = network.params();
  Var out = run_layers(
      network.spec(), network.param_info(),
      [&](std::size_t p) { return tape.constant(params[p]); }, tape.constant(batch), false, nullptr);
  return out.value();
}

void apply_max_norm(Network& network, std::span<const std::optional<double>> caps) {
  if (caps.size() != network.spec().layers.size()) {
    throw ValueError("apply_max_norm: expected one cap per layer");
  }
  for (std::size_t p = 0; p < network.params().size(); ++p) {
    const ParamInfo& info = network.param_info()[p];
    const auto& cap = caps[info.layer];
    if (info.is_bias || !cap) continue;
    const double c = *cap;
    if (!(c > 0.0)) throw ValueError("apply_max_norm: caps must be positive");
    Tensor& t = network.params()[p];
    const std::size_t rows = t.dim(0);
    const std::size_t len = t.size() / rows;
    for (std::size_t r = 0; r < rows; ++r) {
      auto row = t.data().subspan(r * len, len);
      auto norm = [&] {
        double s = 0.0;
        for (double v : row) s += v * v;
        return std::sqrt(s);
      };
      double n = norm();
      if (n <= c) continue;
      double scale = c / n;
      // Rounding may leave the norm a few ulps above c.
      while (n > c) {
        for (auto& v : row) v *= scale;
        n = norm();
        scale = 1.0 - 0x1.0p-52;
      }
    }
  }
}

void apply_max_norm(Network& network) {
  std::vector<std::optional<double>> caps;
  for (const auto& l : network.spec().layers) caps.push_back(l.max_norm);
  apply_max_norm(network, caps);
}

std::size_t param_count(const Network& network) {
  std::size_t n = 0;
  for (const auto& t : network.params()) n += t.size();
  return n;
}

}  // namespace fingermi
