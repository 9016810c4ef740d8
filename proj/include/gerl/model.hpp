#pragma once

#include <cstddef>
#include <optional>
#include <random>
#include <vector>

#include "gerl/batch.hpp"
#include "gerl/graph_encoder.hpp"
#include "gerl/interaction_encoder.hpp"
#include "gerl/news_encoder.hpp"
#include "gerl/scoring.hpp"

namespace gerl {

struct ModelSizes {
  std::size_t vocab = 0;
  std::size_t topics = 0;
  std::size_t user_rows = 1;  // including the frozen row 0
  std::size_t news_rows = 1;

  bool operator==(const ModelSizes&) const = default;
};

template <typename T>
struct ForwardPass {
  Var<T> scores;        // [pairs]
  Var<T> users;         // [users × user_width], u before projection
  Var<T> news;          // [candidate_news × news_width], n before projection
  NewsEncoding<T> articles;
  Pooled<T> user_semantic;                     // u_t^O
  Var<T> user_id;                              // u_e^O
  std::optional<Pooled<T>> neighbor_users;     // u_e^T
  std::optional<Pooled<T>> neighbor_news_ids;  // n_e^T
  std::optional<Pooled<T>> neighbor_news_sem;  // n_t^T
};

// The full model: shared news encoder, one-hop and two-hop modules, and the
// projected inner-product scorer. Parameters are created in a fixed order from
// one generator, so equal seeds give equal initial weights.
template <typename T>
class GerlModel {
 public:
  GerlModel(const ModelConfig& config, const ModelSizes& sizes, std::mt19937_64& rng,
            const Tensor<double>* word_init = nullptr);
  GerlModel(const GerlModel&) = delete;
  GerlModel& operator=(const GerlModel&) = delete;

  ForwardPass<T> forward(Tape<T>& tape, const Batch& batch, const Mode& mode) const;
  // Inference-mode scores, one per pair.
  std::vector<T> score(const Batch& batch) const;

  ParameterSet<T>& parameters() { return params_; }
  const ParameterSet<T>& parameters() const { return params_; }
  const ModelConfig& config() const { return config_; }
  const ModelSizes& sizes() const { return sizes_; }
  const Wiring& wiring() const { return wiring_; }

  const NewsEncoder<T>& news_encoder() const { return news_; }
  const InteractionEncoder<T>& interaction_encoder() const { return interaction_; }
  const GraphEncoder<T>& graph_encoder() const { return graph_; }
  const Scorer<T>& scorer() const { return scorer_; }

 private:
  ModelConfig config_;
  ModelSizes sizes_;
  Wiring wiring_;
  ParameterSet<T> params_;
  NewsEncoder<T> news_;
  InteractionEncoder<T> interaction_;
  GraphEncoder<T> graph_;
  Scorer<T> scorer_;
};

}  // namespace gerl
