#include "gerl/layers.hpp"

namespace gerl {

template <typename T>
Tensor<T> uniform_tensor(Shape shape, std::mt19937_64& rng, double bound) {
  Tensor<T> t(std::move(shape));
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (auto& v : t.values()) v = static_cast<T>(dist(rng));
  return t;
}

template <typename T>
AdditiveAttention<T>::AdditiveAttention(ParameterSet<T>& params, const std::string& prefix, std::size_t input_dim,
                                        std::size_t hidden_dim, std::mt19937_64& rng)
    : input_dim_(input_dim), hidden_dim_(hidden_dim) {
  projection_ = &params.add(prefix + ".U", uniform_tensor<T>({hidden_dim, input_dim}, rng));
  bias_ = &params.add(prefix + ".u", uniform_tensor<T>({hidden_dim}, rng));
  query_ = &params.add(prefix + ".q", uniform_tensor<T>({hidden_dim}, rng));
}

template <typename T>
Var<T> weighted_sum(Var<T> weights, Var<T> items, std::size_t groups) {
  const std::size_t slots = weights.shape().at(1);
  const std::size_t width = items.shape().at(1);
  auto w3 = ops::reshape(weights, {groups, 1, slots});
  auto x3 = ops::reshape(items, {groups, slots, width});
  return ops::reshape(ops::bmm(w3, x3), {groups, width});
}

template <typename T>
Var<T> uniform_weights(Tape<T>& tape, std::size_t groups, std::span<const std::uint8_t> mask) {
  const std::size_t slots = mask.size() / groups;
  auto zeros = tape.constant(Tensor<T>({groups, slots}));
  return ops::masked_softmax(zeros, mask, ops::EmptyRows::kZero);
}

template <typename T>
Pooled<T> AdditiveAttention<T>::pool(Var<T> items, std::size_t groups, std::span<const std::uint8_t> mask,
                                     Pooling mode) const {
  if (items.shape().size() != 2 || items.shape()[1] != input_dim_) {
    throw DimensionError("additive attention over " + shape_string(items.shape()) + ", expected width " +
                         std::to_string(input_dim_));
  }
  if (groups == 0 || items.shape()[0] % groups != 0 || mask.size() != items.shape()[0]) {
    throw DimensionError("additive attention: " + std::to_string(items.shape()[0]) + " rows, " +
                         std::to_string(mask.size()) + " mask entries, " + std::to_string(groups) + " groups");
  }
  const std::size_t slots = items.shape()[0] / groups;
  Tape<T>& tape = *items.tape;
  Var<T> weights;
  if (mode == Pooling::kAverage) {
    weights = uniform_weights(tape, groups, mask);
  } else {
    auto hidden = ops::tanh(ops::add_bias(ops::matmul_nt(items, tape.param(*projection_)), tape.param(*bias_)));
    auto q = ops::reshape(tape.param(*query_), {hidden_dim_, 1});
    auto scores = ops::reshape(ops::matmul(hidden, q), {groups, slots});
    weights = ops::masked_softmax(scores, mask, ops::EmptyRows::kZero);
  }
  return {weighted_sum(weights, items, groups), weights};
}

template <typename T>
Dense<T>::Dense(ParameterSet<T>& params, const std::string& prefix, std::size_t input_dim, std::size_t output_dim,
                std::mt19937_64& rng)
    : input_dim_(input_dim), output_dim_(output_dim) {
  weight_ = &params.add(prefix + ".W", uniform_tensor<T>({output_dim, input_dim}, rng));
  bias_ = &params.add(prefix + ".b", uniform_tensor<T>({output_dim}, rng));
}

template <typename T>
Var<T> Dense<T>::operator()(Var<T> x) const {
  Tape<T>& tape = *x.tape;
  return ops::add_bias(ops::matmul_nt(x, tape.param(*weight_)), tape.param(*bias_));
}

template Tensor<float> uniform_tensor(Shape, std::mt19937_64&, double);
template Tensor<double> uniform_tensor(Shape, std::mt19937_64&, double);
template class AdditiveAttention<float>;
template class AdditiveAttention<double>;
template class Dense<float>;
template class Dense<double>;
template Var<float> weighted_sum(Var<float>, Var<float>, std::size_t);
template Var<double> weighted_sum(Var<double>, Var<double>, std::size_t);
template Var<float> uniform_weights(Tape<float>&, std::size_t, std::span<const std::uint8_t>);
template Var<double> uniform_weights(Tape<double>&, std::size_t, std::span<const std::uint8_t>);

}  // namespace gerl
