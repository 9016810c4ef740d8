#include "gerl/interaction_encoder.hpp"

namespace gerl {

template <typename T>
InteractionEncoder<T>::InteractionEncoder(ParameterSet<T>& params, const ModelConfig& config,
                                          std::size_t user_rows, std::mt19937_64& rng)
    : user_embedding_(&params.add("user.id_embedding", uniform_tensor<T>({user_rows, config.id_dim}, rng), true)),
      news_attention_(params, "user.news_attn", config.news_dim(), config.attention_dim, rng) {}

template <typename T>
Pooled<T> InteractionEncoder<T>::user_semantic(Var<T> clicked, std::size_t users, std::span<const std::uint8_t> mask,
                                               Pooling pooling) const {
  return news_attention_.pool(clicked, users, mask, pooling);
}

template <typename T>
Var<T> InteractionEncoder<T>::user_id(Tape<T>& tape, std::span<const std::uint32_t> user_rows,
                                      const Mode& mode) const {
  auto rows = ops::gather_rows(tape.param(*user_embedding_), user_rows);
  if (mode.training) rows = ops::dropout(rows, mode.dropout, true, *mode.rng);
  return rows;
}

template class InteractionEncoder<float>;
template class InteractionEncoder<double>;

}  // namespace gerl
