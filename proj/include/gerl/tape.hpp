#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "gerl/tensor.hpp"

namespace gerl {

// A trainable array. `grad` accumulates across backward passes until zeroed.
//
// When `frozen_pad_row` is set, row 0 is the reserved padding / cold-start row:
// it stays at zero and never receives gradient.
template <typename T>
class Parameter {
 public:
  Parameter(std::string name, Tensor<T> value, bool frozen_pad_row = false);

  const std::string& name() const { return name_; }
  Tensor<T>& value() { return value_; }
  const Tensor<T>& value() const { return value_; }
  Tensor<T>& grad() { return grad_; }
  const Tensor<T>& grad() const { return grad_; }
  const Shape& shape() const { return value_.shape(); }
  std::size_t size() const { return value_.size(); }
  bool frozen_pad_row() const { return frozen_pad_row_; }
  // Number of leading elements that belong to the frozen row (0 when not frozen).
  std::size_t frozen_prefix() const;

  void zero_grad() { grad_.fill(T{0}); }

 private:
  std::string name_;
  Tensor<T> value_;
  Tensor<T> grad_;
  bool frozen_pad_row_;
};

// Ordered, name-addressable collection with stable element addresses.
template <typename T>
class ParameterSet {
 public:
  Parameter<T>& add(std::string name, Tensor<T> value, bool frozen_pad_row = false);

  Parameter<T>* find(std::string_view name);
  const Parameter<T>* find(std::string_view name) const;
  Parameter<T>& at(std::string_view name);
  const Parameter<T>& at(std::string_view name) const;

  std::size_t size() const { return params_.size(); }
  Parameter<T>& operator[](std::size_t i) { return *params_[i]; }
  const Parameter<T>& operator[](std::size_t i) const { return *params_[i]; }

  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

  void zero_grad();
  std::size_t element_count() const;

 private:
  std::vector<std::unique_ptr<Parameter<T>>> params_;
};

template <typename T>
class Tape;

// Handle to a value recorded on a tape.
template <typename T>
struct Var {
  Tape<T>* tape = nullptr;
  std::size_t id = 0;

  const Tensor<T>& value() const;
  const Shape& shape() const { return value().shape(); }
  bool requires_grad() const;
};

// Records forward operations and replays their backward rules in reverse.
//
// A tape is single use: build the forward pass, call backward() once, then
// discard it. Parameter gradients are added into Parameter::grad().
template <typename T>
class Tape {
 public:
  using BackwardFn = std::function<void(Tape<T>&, std::size_t self)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Leaf bound to a trainable parameter. Binding the same parameter twice
  // returns the same leaf.
  Var<T> param(Parameter<T>& p);
  // Leaf that never receives gradient.
  Var<T> constant(Tensor<T> value);
  // Leaf that records a gradient (readable via grad()) but is not a parameter.
  Var<T> input(Tensor<T> value);

  // Appends an operation result. `backward` may be empty when no input needs gradient.
  Var<T> record(Tensor<T> value, bool requires_grad, BackwardFn backward);

  const Tensor<T>& value(std::size_t id) const {
    const Node& n = nodes_[id];
    return n.param ? n.param->value() : n.value;
  }
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }

  // Gradient buffer of a node, allocated as zeros on first use. Parameter
  // leaves alias Parameter::grad().
  Tensor<T>& grad(std::size_t id);
  // Gradient if one was accumulated, else nullptr.
  const Tensor<T>* grad_if_any(std::size_t id) const;

  // Seeds d(loss)/d(loss) = 1 and propagates. `loss` must hold exactly one value.
  void backward(Var<T> loss);

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor<T> value;
    Tensor<T> grad;
    bool requires_grad = false;
    Parameter<T>* param = nullptr;
    BackwardFn backward;
  };

  std::vector<Node> nodes_;
  bool consumed_ = false;
};

template <typename T>
const Tensor<T>& Var<T>::value() const {
  return tape->value(id);
}

template <typename T>
bool Var<T>::requires_grad() const {
  return tape->requires_grad(id);
}

// Gradient of one parameter after a backward pass.
template <typename T>
struct GradientRecord {
  std::string parameter;
  Tensor<T> gradient;
};

template <typename T>
std::vector<GradientRecord<T>> gradient_records(const ParameterSet<T>& params);

}  // namespace gerl
