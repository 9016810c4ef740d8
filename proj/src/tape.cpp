#include "gerl/tape.hpp"

#include <algorithm>

namespace gerl {

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string shape_string(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

template <typename T>
Parameter<T>::Parameter(std::string name, Tensor<T> value, bool frozen_pad_row)
    : name_(std::move(name)), value_(std::move(value)), grad_(value_.shape()), frozen_pad_row_(frozen_pad_row) {
  if (frozen_pad_row_) {
    if (value_.rank() != 2) throw ContractError("frozen pad row requires a matrix parameter: " + name_);
    std::fill_n(value_.data(), value_.dim(1), T{0});
  }
}

template <typename T>
std::size_t Parameter<T>::frozen_prefix() const {
  return frozen_pad_row_ ? value_.dim(1) : 0;
}

template <typename T>
Parameter<T>& ParameterSet<T>::add(std::string name, Tensor<T> value, bool frozen_pad_row) {
  if (find(name)) throw ContractError("duplicate parameter name: " + name);
  params_.push_back(std::make_unique<Parameter<T>>(std::move(name), std::move(value), frozen_pad_row));
  return *params_.back();
}

template <typename T>
Parameter<T>* ParameterSet<T>::find(std::string_view name) {
  for (auto& p : params_) {
    if (p->name() == name) return p.get();
  }
  return nullptr;
}

template <typename T>
const Parameter<T>* ParameterSet<T>::find(std::string_view name) const {
  for (const auto& p : params_) {
    if (p->name() == name) return p.get();
  }
  return nullptr;
}

template <typename T>
Parameter<T>& ParameterSet<T>::at(std::string_view name) {
  auto* p = find(name);
  if (!p) throw ContractError("unknown parameter: " + std::string(name));
  return *p;
}

template <typename T>
const Parameter<T>& ParameterSet<T>::at(std::string_view name) const {
  const auto* p = find(name);
  if (!p) throw ContractError("unknown parameter: " + std::string(name));
  return *p;
}

template <typename T>
void ParameterSet<T>::zero_grad() {
  for (auto& p : params_) p->zero_grad();
}

template <typename T>
std::size_t ParameterSet<T>::element_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p->size();
  return n;
}

template <typename T>
Var<T> Tape<T>::param(Parameter<T>& p) {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].param == &p) return Var<T>{this, i};
  }
  Node node;
  node.requires_grad = true;
  node.param = &p;
  nodes_.push_back(std::move(node));
  return Var<T>{this, nodes_.size() - 1};
}

template <typename T>
Var<T> Tape<T>::constant(Tensor<T> value) {
  return record(std::move(value), false, {});
}

template <typename T>
Var<T> Tape<T>::input(Tensor<T> value) {
  Node node;
  node.value = std::move(value);
  node.requires_grad = true;
  nodes_.push_back(std::move(node));
  return Var<T>{this, nodes_.size() - 1};
}

template <typename T>
Var<T> Tape<T>::record(Tensor<T> value, bool requires_grad, BackwardFn backward) {
  Node node;
  node.value = std::move(value);
  node.requires_grad = requires_grad;
  if (requires_grad) node.backward = std::move(backward);
  nodes_.push_back(std::move(node));
  return Var<T>{this, nodes_.size() - 1};
}

template <typename T>
Tensor<T>& Tape<T>::grad(std::size_t id) {
  Node& n = nodes_[id];
  if (n.param) return n.param->grad();
  if (n.grad.empty()) n.grad = Tensor<T>(n.value.shape());
  return n.grad;
}

template <typename T>
const Tensor<T>* Tape<T>::grad_if_any(std::size_t id) const {
  const Node& n = nodes_[id];
  if (n.param) return &n.param->grad();
  return n.grad.empty() ? nullptr : &n.grad;
}

template <typename T>
void Tape<T>::backward(Var<T> loss) {
  if (loss.tape != this) throw ContractError("backward: loss belongs to another tape");
  if (value(loss.id).size() != 1) {
    throw ContractError("backward: loss must be a scalar, got shape " + shape_string(value(loss.id).shape()));
  }
  if (consumed_) throw ContractError("backward: tape already consumed");
  consumed_ = true;
  if (!nodes_[loss.id].requires_grad) return;

  grad(loss.id)[0] += T{1};
  for (std::size_t id = loss.id + 1; id-- > 0;) {
    Node& n = nodes_[id];
    if (!n.requires_grad || n.param || n.grad.empty() || !n.backward) continue;
    n.backward(*this, id);
  }
  for (Node& n : nodes_) {
    if (n.param && n.param->frozen_pad_row()) {
      std::fill_n(n.param->grad().data(), n.param->frozen_prefix(), T{0});
    }
  }
}

template <typename T>
std::vector<GradientRecord<T>> gradient_records(const ParameterSet<T>& params) {
  std::vector<GradientRecord<T>> out;
  out.reserve(params.size());
  for (const auto& p : params) out.push_back({p->name(), p->grad()});
  return out;
}

template class Parameter<float>;
template class Parameter<double>;
template class ParameterSet<float>;
template class ParameterSet<double>;
template class Tape<float>;
template class Tape<double>;
template std::vector<GradientRecord<float>> gradient_records(const ParameterSet<float>&);
template std::vector<GradientRecord<double>> gradient_records(const ParameterSet<double>&);

}  // namespace gerl
