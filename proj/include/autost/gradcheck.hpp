#pragma once

#include <functional>
#include <vector>

#include "autost/tape.hpp"

namespace autost {

/// Scalar function of a list of leaf Vars, rebuilt on a fresh tape per call.
using ScalarFn = std::function<Var(Tape&, const std::vector<Var>&)>;

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::size_t entries_checked = 0;
};

/// |analytic - numeric| / max(|analytic|, |numeric|); below 1e-7 in both
/// magnitudes the absolute difference is reported instead.
double relative_error(double analytic, double numeric);

/// Compares tape gradients with central finite differences (step h) over
/// every entry of every input.
GradCheckResult check_gradients(const ScalarFn& f, const std::vector<Tensor>& inputs,
                                double h = 1e-5);

/// Same comparison for module code that reads Parameters through
/// Tape::param: each entry is perturbed in place and restored exactly.
using LossFn = std::function<Var(Tape&)>;
GradCheckResult check_parameter_gradients(const LossFn& f, const std::vector<Parameter*>& params,
                                          double h = 1e-5);

}  // namespace autost
