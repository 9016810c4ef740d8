#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>

#include "gerl/layers.hpp"

namespace gerl {

// Two-hop representations aggregated over graph neighbours:
//   u_e^T  neighbour-user ID embeddings (shared user ID table),
//   n_e^T  neighbour-news ID embeddings,
//   n_t^T  neighbour-news semantic vectors (shared news encoder).
// Each site has its own attention parameters. All-padded rows give zeros.
template <typename T>
class GraphEncoder {
 public:
  GraphEncoder(ParameterSet<T>& params, const ModelConfig& config, Parameter<T>& user_embedding,
               std::size_t news_rows, std::mt19937_64& rng);

  // `neighbor_rows` is [nodes·degree] user-table rows (0 on padded slots).
  Pooled<T> neighbor_users(Tape<T>& tape, std::size_t nodes, std::span<const std::uint32_t> neighbor_rows,
                           std::span<const std::uint8_t> mask, Pooling pooling, const Mode& mode) const;

  // `neighbor_rows` is [nodes·degree] news-table rows.
  Pooled<T> neighbor_news_ids(Tape<T>& tape, std::size_t nodes, std::span<const std::uint32_t> neighbor_rows,
                              std::span<const std::uint8_t> mask, Pooling pooling, const Mode& mode) const;

  // `neighbor_vectors` is [nodes·degree × news_dim] news encoder output.
  Pooled<T> neighbor_news_semantics(Var<T> neighbor_vectors, std::size_t nodes, std::span<const std::uint8_t> mask,
                                    Pooling pooling) const;

  Parameter<T>& news_embedding() const { return *news_embedding_; }

 private:
  Parameter<T>* user_embedding_;
  Parameter<T>* news_embedding_;
  AdditiveAttention<T> user_attention_;
  AdditiveAttention<T> news_id_attention_;
  AdditiveAttention<T> news_semantic_attention_;
};

}  // namespace gerl
