#pragma once

#include <functional>
#include <span>
#include <vector>

#include "fingermi/autograd.hpp"

namespace fingermi {

/// Scalar-valued function of the given leaves, recorded on the supplied tape.
using ScalarFn = std::function<Var(Tape& tape, std::span<const Var> inputs)>;

struct GradcheckResult {
  double max_rel_error = 0.0;
  std::size_t input_index = 0;  // location of the worst coordinate
  std::size_t coordinate = 0;
  double analytic = 0.0;
  double numeric = 0.0;
};

/// Compares backprop gradients of `fn` against central differences of step
/// `eps` for every coordinate of every input. Relative error per coordinate is
/// |a - n| / max(1e-8, |a| + |n|). Throws NumericError on non-finite values.
GradcheckResult gradcheck_detailed(const ScalarFn& fn, std::vector<Tensor> inputs,
                                   double eps = 1e-5);

double gradcheck(const ScalarFn& fn, std::vector<Tensor> inputs, double eps = 1e-5);

}  // namespace fingermi
