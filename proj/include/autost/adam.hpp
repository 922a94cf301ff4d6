#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>

#include "autost/tape.hpp"

namespace autost {

struct AdamConfig {
  double learning_rate = 5e-4;
  double weight_decay = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Adam with bias correction and decoupled weight decay: each step first
/// shrinks theta by lr * weight_decay * theta, then applies the Adam delta.
/// Moments are keyed by parameter name, so names must be unique per optimizer.
class Adam {
 public:
  struct Moments {
    Tensor first;
    Tensor second;
  };

  explicit Adam(AdamConfig config = {});

  /// Throws TrainingAborted naming the parameter if any gradient is NaN/Inf,
  /// before touching any parameter.
  void step(std::span<Parameter* const> params, std::span<const Tensor> grads);

  std::size_t steps() const noexcept { return steps_; }
  const AdamConfig& config() const noexcept { return config_; }

  // Checkpoint access.
  std::map<std::string, Moments>& moments() noexcept { return moments_; }
  const std::map<std::string, Moments>& moments() const noexcept { return moments_; }
  void set_steps(std::size_t steps) noexcept { steps_ = steps; }

 private:
  AdamConfig config_;
  std::size_t steps_ = 0;
  std::map<std::string, Moments> moments_;
};

}  // namespace autost
