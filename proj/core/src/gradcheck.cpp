#include "fingermi/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace fingermi {

namespace {

double evaluate(const ScalarFn& fn, std::vector<Tensor>& inputs) {
  Tape tape;
  std::vector<Var> vars;
  vars.reserve(inputs.size());
  for (auto& t : inputs) vars.push_back(tape.leaf(t));
  const double v = fn(tape, vars).value().item();
  if (!std::isfinite(v)) throw NumericError("gradcheck: non-finite function value");
  return v;
}

}  // namespace

GradcheckResult gradcheck_detailed(const ScalarFn& fn, std::vector<Tensor> inputs, double eps) {
  for (auto& t : inputs) {
    t.set_requires_grad(true);
    t.zero_grad();
  }
  {
    Tape tape;
    std::vector<Var> vars;
    for (auto& t : inputs) vars.push_back(tape.leaf(t));
    Var out = fn(tape, vars);
    tape.backprop(out);
  }

  GradcheckResult worst;
  for (std::size_t a = 0; a < inputs.size(); ++a) {
    const std::vector<double> analytic(inputs[a].grad().begin(), inputs[a].grad().end());
    for (std::size_t i = 0; i < inputs[a].size(); ++i) {
      const double saved = inputs[a][i];
      inputs[a][i] = saved + eps;
      const double plus = evaluate(fn, inputs);
      inputs[a][i] = saved - eps;
      const double minus = evaluate(fn, inputs);
      inputs[a][i] = saved;
      const double numeric = (plus - minus) / (2.0 * eps);
      if (!std::isfinite(analytic[i])) throw NumericError("gradcheck: non-finite gradient");
      const double rel =
          std::abs(analytic[i] - numeric) / std::max(1e-8, std::abs(analytic[i]) + std::abs(numeric));
      if (rel > worst.max_rel_error || (a == 0 && i == 0)) {
        worst = {rel, a, i, analytic[i], numeric};
      }
    }
  }
  return worst;
}

double gradcheck(const ScalarFn& fn, std::vector<Tensor> inputs, double eps) {
  return gradcheck_detailed(fn, std::move(inputs), eps).max_rel_error;
}

}  // namespace fingermi
