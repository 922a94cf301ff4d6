#include "autost/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace autost {
namespace {

double evaluate(const ScalarFn& f, const std::vector<Tensor>& inputs) {
  Tape tape;
  std::vector<Var> leaves;
  leaves.reserve(inputs.size());
  for (const Tensor& t : inputs) leaves.push_back(tape.constant(t));
  return f(tape, leaves).value().item();
}

}  // namespace

double relative_error(double analytic, double numeric) {
  const double diff = std::abs(analytic - numeric);
  const double scale = std::max(std::abs(analytic), std::abs(numeric));
  if (scale < 1e-7) return diff;
  return diff / scale;
}

GradCheckResult check_gradients(const ScalarFn& f, const std::vector<Tensor>& inputs, double h) {
  Tape tape;
  std::vector<Var> leaves;
  for (const Tensor& t : inputs) leaves.push_back(tape.variable(t));
  tape.backward(f(tape, leaves));

  GradCheckResult result;
  std::vector<Tensor> probe = inputs;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    const Tensor analytic = tape.grad(leaves[k]);
    for (std::size_t i = 0; i < inputs[k].size(); ++i) {
      const double original = inputs[k].data()[i];
      probe[k].data()[i] = original + h;
      const double up = evaluate(f, probe);
      probe[k].data()[i] = original - h;
      const double down = evaluate(f, probe);
      probe[k].data()[i] = original;
      const double numeric = (up - down) / (2.0 * h);
      result.max_relative_error =
          std::max(result.max_relative_error, relative_error(analytic.data()[i], numeric));
      ++result.entries_checked;
    }
  }
  return result;
}

GradCheckResult check_parameter_gradients(const LossFn& f, const std::vector<Parameter*>& params,
                                          double h) {
  std::vector<Tensor> analytic;
  {
    Tape tape;
    tape.backward(f(tape));
    for (const Parameter* p : params) analytic.push_back(tape.grad(*p));
  }
  auto loss = [&] {
    Tape tape;
    return f(tape).value().item();
  };
  GradCheckResult result;
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto data = params[k]->value.data();
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double original = data[i];
      data[i] = original + h;
      const double up = loss();
      data[i] = original - h;
      const double down = loss();
      data[i] = original;
      const double numeric = (up - down) / (2.0 * h);
      result.max_relative_error =
          std::max(result.max_relative_error, relative_error(analytic[k].data()[i], numeric));
      ++result.entries_checked;
    }
  }
  return result;
}

}  // namespace autost
