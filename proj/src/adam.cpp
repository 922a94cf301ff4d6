#include "autost/adam.hpp"

#include <cmath>

#include "autost/errors.hpp"

namespace autost {

Adam::Adam(AdamConfig config) : config_(config) {
  if (!(config_.learning_rate > 0.0)) throw ConfigError("adam: learning rate must be > 0");
  if (config_.weight_decay < 0.0) throw ConfigError("adam: weight decay must be >= 0");
}

void Adam::step(std::span<Parameter* const> params, std::span<const Tensor> grads) {
  if (params.size() != grads.size()) {
    throw ContractError("adam: " + std::to_string(params.size()) + " parameters but " +
                        std::to_string(grads.size()) + " gradients");
  }
  for (std::size_t k = 0; k < params.size(); ++k) {
    require_same_shape(params[k]->value, grads[k], "adam step");
    if (!grads[k].all_finite()) {
      throw TrainingAborted("non-finite gradient for parameter '" + params[k]->name + "'");
    }
  }

  ++steps_;
  const double lr = config_.learning_rate;
  const double b1 = config_.beta1, b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(steps_));
  const double decay = 1.0 - lr * config_.weight_decay;

  for (std::size_t k = 0; k < params.size(); ++k) {
    Parameter& p = *params[k];
    auto [it, fresh] = moments_.try_emplace(p.name);
    Moments& m = it->second;
    if (fresh || m.first.size() != p.value.size()) {
      m.first = Tensor(p.value.rows(), p.value.cols());
      m.second = Tensor(p.value.rows(), p.value.cols());
    }
    auto theta = p.value.data();
    auto g = grads[k].data();
    auto m1 = m.first.data();
    auto m2 = m.second.data();
    for (std::size_t i = 0; i < theta.size(); ++i) {
      theta[i] *= decay;
      m1[i] = b1 * m1[i] + (1.0 - b1) * g[i];
      m2[i] = b2 * m2[i] + (1.0 - b2) * g[i] * g[i];
      const double mhat = m1[i] / c1;
      const double vhat = m2[i] / c2;
      theta[i] -= lr * mhat / (std::sqrt(vhat) + config_.epsilon);
    }
  }
}

}  // namespace autost
