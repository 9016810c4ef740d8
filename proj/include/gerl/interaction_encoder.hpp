#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>

#include "gerl/layers.hpp"

namespace gerl {

// One-hop representations: the user's clicked news aggregated by attention
// (u_t^O) and the user's own ID embedding (u_e^O). The candidate's semantic
// vector n_t^O is the news encoder output itself.
template <typename T>
class InteractionEncoder {
 public:
  // Creates the user ID table (row 0 frozen at zero for cold-start users).
  InteractionEncoder(ParameterSet<T>& params, const ModelConfig& config, std::size_t user_rows,
                     std::mt19937_64& rng);

  // `clicked` is [users·slots × news_dim]; empty histories give zero vectors.
  Pooled<T> user_semantic(Var<T> clicked, std::size_t users, std::span<const std::uint8_t> mask,
                          Pooling pooling) const;

  // Row lookup plus dropout in training mode. Row 0 is the cold-start row.
  Var<T> user_id(Tape<T>& tape, std::span<const std::uint32_t> user_rows, const Mode& mode) const;

  Parameter<T>& user_embedding() const { return *user_embedding_; }

 private:
  Parameter<T>* user_embedding_;
  AdditiveAttention<T> news_attention_;
};

}  // namespace gerl
