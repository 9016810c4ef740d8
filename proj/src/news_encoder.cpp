#include "gerl/news_encoder.hpp"

#include <algorithm>

namespace gerl {

NewsBatch make_news_batch(const NewsTable& table, std::span<const std::uint32_t> articles, std::size_t slots) {
  NewsBatch batch;
  batch.count = articles.size();
  if (slots == 0) {
    slots = 1;
    for (auto a : articles) slots = std::max(slots, table[a].length());
  }
  batch.slots = slots;
  batch.tokens.assign(batch.count * slots, Vocabulary::kPad);
  batch.mask.assign(batch.count * slots, 0);
  batch.topics.reserve(batch.count);
  for (std::size_t i = 0; i < batch.count; ++i) {
    const auto& article = table[articles[i]];
    const std::size_t n = std::min(slots, article.title_tokens.size());
    for (std::size_t s = 0; s < n; ++s) {
      batch.tokens[i * slots + s] = article.title_tokens[s];
      batch.mask[i * slots + s] = article.title_mask[s];
    }
    batch.topics.push_back(article.topic_id);
  }
  return batch;
}

template <typename T>
NewsEncoder<T>::NewsEncoder(ParameterSet<T>& params, const ModelConfig& config, std::size_t vocab_size,
                            std::size_t topic_count, std::mt19937_64& rng, const Tensor<double>* word_init)
    : word_dim_(config.word_dim),
      title_dim_(config.title_dim),
      topic_dim_(config.topic_dim),
      heads_(config.heads),
      head_dim_(config.head_dim()),
      word_attention_(params, "news.word_attn", config.title_dim, config.attention_dim, rng) {
  Tensor<T> words;
  if (word_init) {
    if (word_init->shape() != Shape{vocab_size, word_dim_}) {
      throw DimensionError("word embedding initialiser " + shape_string(word_init->shape()) + " does not match " +
                           shape_string({vocab_size, word_dim_}));
    }
    words = word_init->cast<T>();
  } else {
    words = uniform_tensor<T>({vocab_size, word_dim_}, rng);
  }
  word_embedding_ = &params.add("news.word_embedding", std::move(words), true);
  topic_embedding_ = &params.add("news.topic_embedding", uniform_tensor<T>({topic_count, topic_dim_}, rng));
  for (std::size_t k = 0; k < heads_; ++k) {
    bilinear_.push_back(
        &params.add("news.self_attn.W_s." + std::to_string(k), uniform_tensor<T>({word_dim_, word_dim_}, rng)));
    value_.push_back(
        &params.add("news.self_attn.W_v." + std::to_string(k), uniform_tensor<T>({head_dim_, word_dim_}, rng)));
  }
}

template <typename T>
SelfAttentionOutput<T> NewsEncoder<T>::self_attention(Var<T> embedded, std::size_t count, std::size_t slots,
                                                      std::span<const std::uint8_t> mask, Pooling pooling,
                                                      const Mode& mode) const {
  Tape<T>& tape = *embedded.tape;
  // Key mask: row i of article g may attend to every valid slot j of g.
  Mask keys(count * slots * slots);
  for (std::size_t g = 0; g < count; ++g) {
    for (std::size_t i = 0; i < slots; ++i) {
      std::copy_n(mask.data() + g * slots, slots, keys.data() + (g * slots + i) * slots);
    }
  }
  auto e3 = ops::reshape(embedded, {count, slots, word_dim_});

  SelfAttentionOutput<T> out;
  Var<T> shared_context;
  if (pooling == Pooling::kAverage) {
    auto zeros = tape.constant(Tensor<T>({count, slots, slots}));
    auto alpha = ops::masked_softmax(zeros, keys);
    shared_context = ops::reshape(ops::bmm(alpha, e3), {count * slots, word_dim_});
    out.weights.assign(heads_, alpha);
  }

  std::vector<Var<T>> heads;
  heads.reserve(heads_);
  for (std::size_t k = 0; k < heads_; ++k) {
    Var<T> context = shared_context;
    if (pooling == Pooling::kAttention) {
      auto projected = ops::reshape(ops::matmul(embedded, tape.param(*bilinear_[k])), {count, slots, word_dim_});
      auto alpha = ops::masked_softmax(ops::bmm_nt(projected, e3), keys);
      out.weights.push_back(alpha);
      context = ops::reshape(ops::bmm(alpha, e3), {count * slots, word_dim_});
    }
    heads.push_back(ops::matmul_nt(context, tape.param(*value_[k])));
  }
  auto hidden = ops::concat_cols<T>(heads);
  if (mode.training) hidden = ops::dropout(hidden, mode.dropout, true, *mode.rng);
  out.hidden = hidden;
  return out;
}

template <typename T>
Pooled<T> NewsEncoder<T>::word_attention(Var<T> hidden, std::size_t count, std::span<const std::uint8_t> mask,
                                         Pooling pooling) const {
  return word_attention_.pool(hidden, count, mask, pooling);
}

template <typename T>
NewsEncoding<T> NewsEncoder<T>::encode(Tape<T>& tape, const NewsBatch& batch, const Wiring& wiring,
                                       const Mode& mode) const {
  auto embedded = ops::gather_rows(tape.param(*word_embedding_), std::span<const std::uint32_t>(batch.tokens));
  NewsEncoding<T> enc;
  enc.self_attention = self_attention(embedded, batch.count, batch.slots, batch.mask, wiring.self_attention, mode);
  auto pooled = word_attention(enc.self_attention.hidden, batch.count, batch.mask, wiring.word_attention);
  enc.title = pooled.output;
  enc.word_weights = pooled.weights;
  auto topic = ops::gather_rows(tape.param(*topic_embedding_), std::span<const std::uint32_t>(batch.topics));
  const Var<T> parts[] = {enc.title, topic};
  enc.vectors = ops::concat_cols<T>(parts);
  return enc;
}

template class NewsEncoder<float>;
template class NewsEncoder<double>;

}  // namespace gerl
