#include "autost/tape.hpp"

#include "autost/errors.hpp"

namespace autost {

const Tensor& Var::value() const {
  if (tape_ == nullptr) throw ContractError("use of an unbound Var");
  return tape_->nodes_[id_].value;
}

Var Tape::push(Tensor value, bool requires_grad, BackwardFn backward) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  if (requires_grad) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Var(this, nodes_.size() - 1);
}

Var Tape::constant(Tensor value) { return push(std::move(value), false, nullptr); }

Var Tape::variable(Tensor value) { return push(std::move(value), true, nullptr); }

Var Tape::param(Parameter& p) {
  if (auto it = param_ids_.find(&p); it != param_ids_.end()) return Var(this, it->second);
  Var v = push(p.value, true, nullptr);
  param_ids_.emplace(&p, v.id());
  params_.emplace_back(&p, v.id());
  return v;
}

Var Tape::record(Tensor value, std::initializer_list<Var> inputs, BackwardFn backward) {
  bool needs = false;
  for (const Var& in : inputs) {
    if (in.tape_ != this) throw ContractError("op mixes Vars from different tapes");
    needs = needs || nodes_[in.id_].requires_grad;
  }
  return push(std::move(value), needs, std::move(backward));
}

Var Tape::record(Tensor value, const std::vector<Var>& inputs, BackwardFn backward) {
  bool needs = false;
  for (const Var& in : inputs) {
    if (in.tape_ != this) throw ContractError("op mixes Vars from different tapes");
    needs = needs || nodes_[in.id_].requires_grad;
  }
  return push(std::move(value), needs, std::move(backward));
}

void Tape::accumulate(std::size_t id, const Tensor& g) {
  Node& n = nodes_[id];
  if (!n.requires_grad) return;
  require_same_shape(n.value, g, "gradient accumulation");
  if (!n.has_grad) {
    n.grad = g;
    n.has_grad = true;
    return;
  }
  auto dst = n.grad.data();
  auto src = g.data();
  for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
}

void Tape::backward(Var loss) {
  if (loss.tape_ != this) throw ContractError("backward: loss belongs to another tape");
  const Tensor& lv = nodes_[loss.id_].value;
  if (lv.rows() != 1 || lv.cols() != 1) {
    throw ContractError("backward: loss must be scalar, got " + shape_string(lv));
  }
  for (Node& n : nodes_) {
    n.grad = Tensor();
    n.has_grad = false;
  }
  if (!nodes_[loss.id_].requires_grad) return;
  nodes_[loss.id_].grad = Tensor::scalar(1.0);
  nodes_[loss.id_].has_grad = true;
  for (std::size_t id = loss.id_ + 1; id-- > 0;) {
    Node& n = nodes_[id];
    if (!n.has_grad || !n.backward) continue;
    n.backward(*this, id);
  }
}

Tensor Tape::grad(Var v) const {
  const Node& n = nodes_[v.id_];
  if (n.has_grad) return n.grad;
  return Tensor(n.value.rows(), n.value.cols());
}

Tensor Tape::grad(const Parameter& p) const {
  auto it = param_ids_.find(&p);
  if (it == param_ids_.end()) return Tensor(p.value.rows(), p.value.cols());
  return grad(Var(const_cast<Tape*>(this), it->second));
}

std::vector<Parameter*> Tape::parameters() const {
  std::vector<Parameter*> out;
  out.reserve(params_.size());
  for (const auto& [p, id] : params_) out.push_back(p);
  return out;
}

}  // namespace autost
