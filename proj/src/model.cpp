#include "gerl/model.hpp"

namespace gerl {

namespace {

std::span<const std::uint32_t> ids(const std::vector<std::uint32_t>& v) {
  return v;
}

}  // namespace

template <typename T>
GerlModel<T>::GerlModel(const ModelConfig& config, const ModelSizes& sizes, std::mt19937_64& rng,
                        const Tensor<double>* word_init)
    : config_((config.validate(), config)),
      sizes_(sizes),
      wiring_(apply_ablation(config)),
      news_(params_, config, sizes.vocab, sizes.topics, rng, word_init),
      interaction_(params_, config, sizes.user_rows, rng),
      graph_(params_, config, interaction_.user_embedding(), sizes.news_rows, rng),
      scorer_(params_, config, wiring_, rng) {}

template <typename T>
ForwardPass<T> GerlModel<T>::forward(Tape<T>& tape, const Batch& batch, const Mode& mode) const {
  ForwardPass<T> out;
  out.articles = news_.encode(tape, batch.articles, wiring_, mode);
  const Var<T> vectors = out.articles.vectors;

  auto clicked = ops::gather_rows(vectors, ids(batch.history));
  out.user_semantic = interaction_.user_semantic(clicked, batch.users, batch.history_mask, wiring_.one_hop);
  out.user_id = interaction_.user_id(tape, batch.user_rows, mode);
  std::optional<Var<T>> user_neighbors;
  if (wiring_.user_neighbors) {
    out.neighbor_users = graph_.neighbor_users(tape, batch.users, batch.neighbor_user_rows,
                                               batch.neighbor_user_mask, wiring_.two_hop, mode);
    user_neighbors = out.neighbor_users->output;
  }
  out.users = scorer_.assemble_user(out.user_semantic.output, out.user_id, user_neighbors);

  auto candidates = ops::gather_rows(vectors, ids(batch.candidate_article));
  std::optional<Var<T>> news_semantics;
  std::optional<Var<T>> news_ids;
  if (wiring_.news_neighbor_semantics) {
    auto neighbors = ops::gather_rows(vectors, ids(batch.neighbor_news_article));
    out.neighbor_news_sem =
        graph_.neighbor_news_semantics(neighbors, batch.candidate_news, batch.neighbor_news_mask, wiring_.two_hop);
    news_semantics = out.neighbor_news_sem->output;
  }
  if (wiring_.news_neighbor_ids) {
    out.neighbor_news_ids = graph_.neighbor_news_ids(tape, batch.candidate_news, batch.neighbor_news_rows,
                                                     batch.neighbor_news_mask, wiring_.two_hop, mode);
    news_ids = out.neighbor_news_ids->output;
  }
  out.news = scorer_.assemble_news(news_semantics, news_ids, candidates);

  auto users = ops::gather_rows(scorer_.project_user(out.users), ids(batch.pair_user));
  auto news = ops::gather_rows(scorer_.project_news(out.news), ids(batch.pair_news));
  out.scores = scorer_.score(users, news);
  return out;
}

template <typename T>
std::vector<T> GerlModel<T>::score(const Batch& batch) const {
  Tape<T> tape;
  auto pass = forward(tape, batch, Mode::inference());
  const auto& v = pass.scores.value();
  return {v.data(), v.data() + v.size()};
}

template class GerlModel<float>;
template class GerlModel<double>;

}  // namespace gerl
