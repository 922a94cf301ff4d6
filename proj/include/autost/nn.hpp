#pragma once

#include <string>
#include <vector>

#include "autost/random.hpp"
#include "autost/tape.hpp"

namespace autost {

/// y = x W^T + b, with W stored [out x in] and b [1 x out].
struct Linear {
  Parameter weight;
  Parameter bias;

  static Linear glorot(const std::string& name, std::size_t in, std::size_t out, Rng& rng);
  std::size_t in_features() const { return weight.value.cols(); }
  std::size_t out_features() const { return weight.value.rows(); }
  Var forward(Tape& tape, Var x);
};

/// Two-layer perceptron: second(relu(first(x))).
struct Mlp {
  Linear first;
  Linear second;

  static Mlp glorot(const std::string& name, std::size_t in, std::size_t hidden, std::size_t out,
                    Rng& rng);
  Var forward(Tape& tape, Var x);
  std::vector<Parameter*> parameters();
};

}  // namespace autost
