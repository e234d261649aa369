#include "fingermi/adam.hpp"

#include <cmath>
#include <string>

namespace fingermi {

AdamState adam_init(std::span<const Tensor> params, const AdamOptions& options) {
  if (!(options.lr >= 0.0)) throw ValueError("adam: lr must be >= 0");
  if (!(options.beta1 >= 0.0 && options.beta1 < 1.0) ||
      !(options.beta2 >= 0.0 && options.beta2 < 1.0)) {
    throw ValueError("adam: betas must lie in [0, 1)");
  }
  if (!(options.epsilon > 0.0)) throw ValueError("adam: epsilon must be positive");
  AdamState state;
  state.options = options;
  for (const auto& p : params) {
    state.m.emplace_back(p.size(), 0.0);
    state.v.emplace_back(p.size(), 0.0);
  }
  return state;
}

namespace {

void update(AdamState& s, std::span<Tensor> params, auto&& grad_of) {
  if (params.size() != s.m.size()) throw ShapeError("adam: parameter count changed since init");
  // A bad gradient aborts before any parameter moves.
  for (std::size_t p = 0; p < params.size(); ++p) {
    if (s.m[p].size() != params[p].size()) {
      throw ShapeError("adam: parameter " + std::to_string(p) + " changed shape since init");
    }
    const std::span<const double> g = grad_of(p);
    if (!g.empty() && g.size() != params[p].size()) {
      throw ShapeError("adam: gradient " + std::to_string(p) + " does not match parameter shape");
    }
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (!std::isfinite(g[i])) {
        throw NumericError("adam: non-finite gradient in parameter " + std::to_string(p) +
                           " at index " + std::to_string(i) + " (step " +
                           std::to_string(s.step + 1) + ")");
      }
    }
  }
  s.step += 1;
  const auto& o = s.options;
  const double t = static_cast<double>(s.step);
  const double c1 = 1.0 - std::pow(o.beta1, t);
  const double c2 = 1.0 - std::pow(o.beta2, t);
  for (std::size_t p = 0; p < params.size(); ++p) {
    Tensor& param = params[p];
    const std::span<const double> g = grad_of(p);
    auto& m = s.m[p];
    auto& v = s.v[p];
    for (std::size_t i = 0; i < param.size(); ++i) {
      const double gi = g.empty() ? 0.0 : g[i];
      m[i] = o.beta1 * m[i] + (1.0 - o.beta1) * gi;
      v[i] = o.beta2 * v[i] + (1.0 - o.beta2) * gi * gi;
      const double mhat = m[i] / c1;
      const double vhat = v[i] / c2;
      param[i] -= o.lr * mhat / (std::sqrt(vhat) + o.epsilon);
    }
  }
}

}  // namespace

void adam_step(AdamState& state, std::span<Tensor> params) {
  update(state, params, [&](std::size_t p) -> std::span<const double> {
    const Tensor& t = params[p];
    return t.has_grad() ? t.grad() : std::span<const double>{};
  });
}

void adam_step(AdamState& state, std::span<Tensor> params,
               std::span<const std::vector<double>> grads) {
  if (grads.size() != params.size()) throw ShapeError("adam: one gradient per parameter required");
  update(state, params, [&](std::size_t p) -> std::span<const double> { return grads[p]; });
}

}  // namespace fingermi
