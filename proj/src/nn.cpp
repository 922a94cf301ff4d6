#include "autost/nn.hpp"

#include "autost/ops.hpp"

namespace autost {

Linear Linear::glorot(const std::string& name, std::size_t in, std::size_t out, Rng& rng) {
  Linear l;
  l.weight = {name + ".weight", glorot_uniform(out, in, rng)};
  l.bias = {name + ".bias", Tensor(1, out)};
  return l;
}

Var Linear::forward(Tape& tape, Var x) {
  return add_row(matmul_nt(x, tape.param(weight)), tape.param(bias));
}

Mlp Mlp::glorot(const std::string& name, std::size_t in, std::size_t hidden, std::size_t out,
                Rng& rng) {
  Mlp m;
  m.first = Linear::glorot(name + ".0", in, hidden, rng);
  m.second = Linear::glorot(name + ".1", hidden, out, rng);
  return m;
}

Var Mlp::forward(Tape& tape, Var x) { return second.forward(tape, relu(first.forward(tape, x))); }

std::vector<Parameter*> Mlp::parameters() {
  return {&first.weight, &first.bias, &second.weight, &second.bias};
}

}  // namespace autost
