#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "gerl/corpus.hpp"
#include "gerl/layers.hpp"

namespace gerl {

// Titles and topics of a group of articles, padded to a common slot count.
struct NewsBatch {
  std::size_t count = 0;
  std::size_t slots = 0;
  std::vector<std::uint32_t> tokens;  // count × slots
  Mask mask;                          // count × slots
  std::vector<std::uint32_t> topics;  // count
};

// Gathers the given articles. `slots` = 0 trims to the longest title among
// them (at least 1); trailing PAD slots never change an encoding.
NewsBatch make_news_batch(const NewsTable& table, std::span<const std::uint32_t> articles, std::size_t slots = 0);

template <typename T>
struct SelfAttentionOutput {
  Var<T> hidden;                 // [count·slots × title_dim]
  std::vector<Var<T>> weights;   // per head, [count × slots × slots]
};

template <typename T>
struct NewsEncoding {
  Var<T> vectors;       // [count × (title_dim + topic_dim)], v = [v_t; v_p]
  Var<T> title;         // [count × title_dim], v_t
  SelfAttentionOutput<T> self_attention;
  Var<T> word_weights;  // [count × slots]
};

// Single-layer multi-head self-attention over word embeddings, additive word
// attention, and a topic embedding.
template <typename T>
class NewsEncoder {
 public:
  // `word_init`, when given, must be [vocab_size × word_dim]; its PAD row is
  // zeroed regardless.
  NewsEncoder(ParameterSet<T>& params, const ModelConfig& config, std::size_t vocab_size, std::size_t topic_count,
              std::mt19937_64& rng, const Tensor<double>* word_init = nullptr);

  // Per head k: α_ij ∝ exp(e_iᵀ W_s^k e_j) over valid j, h_i^k = W_v^k Σ_j α_ij e_j.
  // Heads are concatenated, then dropout is applied in training mode.
  SelfAttentionOutput<T> self_attention(Var<T> embedded, std::size_t count, std::size_t slots,
                                        std::span<const std::uint8_t> mask, Pooling pooling,
                                        const Mode& mode) const;

  // β_i ∝ exp(q_wᵀ tanh(U_w h_i + u_w)) over valid i; v_t = Σ β_i h_i.
  Pooled<T> word_attention(Var<T> hidden, std::size_t count, std::span<const std::uint8_t> mask,
                           Pooling pooling) const;

  NewsEncoding<T> encode(Tape<T>& tape, const NewsBatch& batch, const Wiring& wiring, const Mode& mode) const;

  std::size_t output_dim() const { return title_dim_ + topic_dim_; }
  std::size_t heads() const { return heads_; }

 private:
  std::size_t word_dim_;
  std::size_t title_dim_;
  std::size_t topic_dim_;
  std::size_t heads_;
  std::size_t head_dim_;
  Parameter<T>* word_embedding_;
  Parameter<T>* topic_embedding_;
  std::vector<Parameter<T>*> bilinear_;  // W_s^k, [word_dim × word_dim]
  std::vector<Parameter<T>*> value_;     // W_v^k, [head_dim × word_dim]
  AdditiveAttention<T> word_attention_;
};

}  // namespace gerl
