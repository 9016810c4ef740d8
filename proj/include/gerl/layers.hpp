#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>

#include "gerl/model_config.hpp"
#include "gerl/ops.hpp"
#include "gerl/tape.hpp"

namespace gerl {

// Forward-pass mode. Dropout is active only when `training` is set.
struct Mode {
  bool training = false;
  double dropout = 0.0;
  std::mt19937_64* rng = nullptr;

  static Mode inference() { return {}; }
};

template <typename T>
Tensor<T> uniform_tensor(Shape shape, std::mt19937_64& rng, double bound = 0.1);

template <typename T>
struct Pooled {
  Var<T> output;   // [groups × width]
  Var<T> weights;  // [groups × slots], zero on masked slots
};

// Additive attention pooling: score_i = qᵀ tanh(U x_i + u), softmax over the
// valid slots of each group, weighted sum of the x_i. Groups with no valid
// slot produce a zero vector.
template <typename T>
class AdditiveAttention {
 public:
  AdditiveAttention(ParameterSet<T>& params, const std::string& prefix, std::size_t input_dim,
                    std::size_t hidden_dim, std::mt19937_64& rng);

  // `items` is [groups·slots × input_dim], slot-major within each group;
  // `mask` has groups·slots entries. kAverage ignores the attention parameters
  // and uses uniform weights over valid slots.
  Pooled<T> pool(Var<T> items, std::size_t groups, std::span<const std::uint8_t> mask, Pooling mode) const;

  std::size_t input_dim() const { return input_dim_; }
  Parameter<T>& projection() const { return *projection_; }
  Parameter<T>& bias() const { return *bias_; }
  Parameter<T>& query() const { return *query_; }

 private:
  std::size_t input_dim_;
  std::size_t hidden_dim_;
  Parameter<T>* projection_;  // [hidden × input]
  Parameter<T>* bias_;        // [hidden]
  Parameter<T>* query_;       // [hidden]
};

// Pools `items` with explicit weights [groups × slots] → [groups × width].
template <typename T>
Var<T> weighted_sum(Var<T> weights, Var<T> items, std::size_t groups);

// Uniform weights over the valid slots (zero rows for empty groups).
template <typename T>
Var<T> uniform_weights(Tape<T>& tape, std::size_t groups, std::span<const std::uint8_t> mask);

// y = x Wᵀ + b
template <typename T>
class Dense {
 public:
  Dense(ParameterSet<T>& params, const std::string& prefix, std::size_t input_dim, std::size_t output_dim,
        std::mt19937_64& rng);

  Var<T> operator()(Var<T> x) const;

  std::size_t input_dim() const { return input_dim_; }
  std::size_t output_dim() const { return output_dim_; }

 private:
  std::size_t input_dim_;
  std::size_t output_dim_;
  Parameter<T>* weight_;
  Parameter<T>* bias_;
};

}  // namespace gerl
