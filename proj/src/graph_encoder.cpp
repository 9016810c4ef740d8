#include "gerl/graph_encoder.hpp"

namespace gerl {

template <typename T>
GraphEncoder<T>::GraphEncoder(ParameterSet<T>& params, const ModelConfig& config, Parameter<T>& user_embedding,
                              std::size_t news_rows, std::mt19937_64& rng)
    : user_embedding_(&user_embedding),
      news_embedding_(&params.add("graph.news_id_embedding", uniform_tensor<T>({news_rows, config.id_dim}, rng), true)),
      user_attention_(params, "graph.user_attn", config.id_dim, config.attention_dim, rng),
      news_id_attention_(params, "graph.news_id_attn", config.id_dim, config.attention_dim, rng),
      news_semantic_attention_(params, "graph.news_sem_attn", config.news_dim(), config.attention_dim, rng) {}

template <typename T>
Pooled<T> GraphEncoder<T>::neighbor_users(Tape<T>& tape, std::size_t nodes, std::span<const std::uint32_t> neighbor_rows,
                                          std::span<const std::uint8_t> mask, Pooling pooling, const Mode& mode) const {
  auto embedded = ops::gather_rows(tape.param(*user_embedding_), neighbor_rows);
  if (mode.training) embedded = ops::dropout(embedded, mode.dropout, true, *mode.rng);
  return user_attention_.pool(embedded, nodes, mask, pooling);
}

template <typename T>
Pooled<T> GraphEncoder<T>::neighbor_news_ids(Tape<T>& tape, std::size_t nodes,
                                             std::span<const std::uint32_t> neighbor_rows,
                                             std::span<const std::uint8_t> mask, Pooling pooling,
                                             const Mode& mode) const {
  auto embedded = ops::gather_rows(tape.param(*news_embedding_), neighbor_rows);
  if (mode.training) embedded = ops::dropout(embedded, mode.dropout, true, *mode.rng);
  return news_id_attention_.pool(embedded, nodes, mask, pooling);
}

template <typename T>
Pooled<T> GraphEncoder<T>::neighbor_news_semantics(Var<T> neighbor_vectors, std::size_t nodes,
                                                   std::span<const std::uint8_t> mask, Pooling pooling) const {
  return news_semantic_attention_.pool(neighbor_vectors, nodes, mask, pooling);
}

template class GraphEncoder<float>;
template class GraphEncoder<double>;

}  // namespace gerl
