#include "gerl/scoring.hpp"

#include <vector>

namespace gerl {

namespace {

template <typename T>
void expect_width(Var<T> v, std::size_t width, const char* what) {
  if (v.shape().size() != 2 || v.shape()[1] != width) {
    throw ContractError(std::string(what) + ": expected width " + std::to_string(width) + ", got " +
                        shape_string(v.shape()));
  }
}

template <typename T>
void expect_presence(const std::optional<Var<T>>& part, bool wired, const char* what) {
  if (part.has_value() != wired) {
    throw ContractError(std::string(what) + (wired ? " is required by the wiring" : " is removed by the wiring"));
  }
}

}  // namespace

template <typename T>
Scorer<T>::Scorer(ParameterSet<T>& params, const ModelConfig& config, const Wiring& wiring, std::mt19937_64& rng)
    : config_(config),
      wiring_(wiring),
      common_dim_(config.common_dim),
      user_projection_(params, "score.user_proj", wiring.user_width(config), config.common_dim, rng),
      news_projection_(params, "score.news_proj", wiring.news_width(config), config.common_dim, rng) {}

template <typename T>
Var<T> Scorer<T>::assemble_user(Var<T> semantic, Var<T> id, std::optional<Var<T>> neighbors) const {
  expect_width(semantic, config_.news_dim(), "u_t^O");
  expect_width(id, config_.id_dim, "u_e^O");
  expect_presence(neighbors, wiring_.user_neighbors, "u_e^T");
  std::vector<Var<T>> parts{semantic, id};
  if (neighbors) {
    expect_width(*neighbors, config_.id_dim, "u_e^T");
    parts.push_back(*neighbors);
  }
  return ops::concat_cols<T>(parts);
}

template <typename T>
Var<T> Scorer<T>::assemble_news(std::optional<Var<T>> neighbor_semantics, std::optional<Var<T>> neighbor_ids,
                                Var<T> semantic) const {
  expect_presence(neighbor_semantics, wiring_.news_neighbor_semantics, "n_t^T");
  expect_presence(neighbor_ids, wiring_.news_neighbor_ids, "n_e^T");
  expect_width(semantic, config_.news_dim(), "n_t^O");
  std::vector<Var<T>> parts;
  if (neighbor_semantics) {
    expect_width(*neighbor_semantics, config_.news_dim(), "n_t^T");
    parts.push_back(*neighbor_semantics);
  }
  if (neighbor_ids) {
    expect_width(*neighbor_ids, config_.id_dim, "n_e^T");
    parts.push_back(*neighbor_ids);
  }
  parts.push_back(semantic);
  return ops::concat_cols<T>(parts);
}

template <typename T>
Var<T> Scorer<T>::score(Var<T> projected_users, Var<T> projected_news) const {
  expect_width(projected_users, common_dim_, "projected user");
  expect_width(projected_news, common_dim_, "projected news");
  return ops::rowwise_dot(projected_users, projected_news);
}

template <typename T>
Var<T> nce_loss(Var<T> scores, std::size_t neg_ratio) {
  if (scores.shape().size() != 2 || scores.shape()[1] != neg_ratio + 1) {
    throw ContractError("nce_loss: expected " + std::to_string(neg_ratio + 1) + " scores per sample, got " +
                        shape_string(scores.shape()));
  }
  return ops::sum(ops::sub(ops::logsumexp_rows(scores), ops::column(scores, 0)));
}

template class Scorer<float>;
template class Scorer<double>;
template Var<float> nce_loss(Var<float>, std::size_t);
template Var<double> nce_loss(Var<double>, std::size_t);

}  // namespace gerl
