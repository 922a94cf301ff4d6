#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <initializer_list>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "autost/tensor.hpp"

namespace autost {

/// A named trainable tensor. Modules own their parameters; a Tape only
/// borrows them for the duration of one forward/backward pass.
struct Parameter {
  std::string name;
  Tensor value;
};

class Tape;

/// Handle to a node recorded on a Tape. Cheap to copy; valid while the tape lives.
class Var {
 public:
  Var() = default;

  const Tensor& value() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
  Tape& tape() const { return *tape_; }
  std::size_t id() const noexcept { return id_; }
  bool valid() const noexcept { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

/// Records forward operations in creation order and replays them backwards.
/// Node storage is a deque so references handed out by Var::value() stay
/// valid while more nodes are recorded.
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, std::size_t self)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);
  /// Leaf that receives a gradient but is not a registered parameter.
  Var variable(Tensor value);
  /// Registers `p` (once) and returns its leaf. The tape reads p.value at
  /// registration time; later edits to p are not seen by this tape.
  Var param(Parameter& p);

  /// Reverse sweep from a scalar loss. Throws ContractError for non-scalar loss.
  void backward(Var loss);

  /// Gradient of the last backward() w.r.t. v; zeros when v was not reached.
  Tensor grad(Var v) const;
  /// Gradient w.r.t. a parameter; zeros of its shape if unregistered or off-path.
  Tensor grad(const Parameter& p) const;
  std::vector<Parameter*> parameters() const;
  std::size_t size() const noexcept { return nodes_.size(); }

  // Op-author interface.
  Var record(Tensor value, std::initializer_list<Var> inputs, BackwardFn backward);
  Var record(Tensor value, const std::vector<Var>& inputs, BackwardFn backward);
  const Tensor& value(std::size_t id) const { return nodes_[id].value; }
  const Tensor& upstream(std::size_t id) const { return nodes_[id].grad; }
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
  /// Adds g into the gradient buffer of node `id` (no-op if it needs none).
  void accumulate(std::size_t id, const Tensor& g);

 private:
  friend class Var;
  struct Node {
    Tensor value;
    Tensor grad;
    BackwardFn backward;
    bool requires_grad = false;
    bool has_grad = false;
  };

  Var push(Tensor value, bool requires_grad, BackwardFn backward);

  std::deque<Node> nodes_;
  std::unordered_map<const Parameter*, std::size_t> param_ids_;
  std::vector<std::pair<Parameter*, std::size_t>> params_;
};

}  // namespace autost
