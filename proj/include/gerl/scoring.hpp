#pragma once

#include <cstddef>
#include <optional>
#include <random>

#include "gerl/layers.hpp"

namespace gerl {

// Final user / news vectors, their projections to a shared dimension d, and the
// inner-product click score.
//
//   u = [u_t^O; u_e^O; u_e^T]      n = [n_t^T; n_e^T; n_t^O]
//   ŷ = <P_u u + b_u, P_n n + b_n>
//
// The raw vectors have different widths (512 vs 640 at default sizes), so each
// side goes through its own dense layer before the inner product. Components
// removed by an ablation shrink the corresponding projection input.
template <typename T>
class Scorer {
 public:
  Scorer(ParameterSet<T>& params, const ModelConfig& config, const Wiring& wiring, std::mt19937_64& rng);

  // Pass std::nullopt for a component the wiring removes; supplying or omitting
  // a component against the wiring, or a width mismatch, is a ContractError.
  Var<T> assemble_user(Var<T> semantic, Var<T> id, std::optional<Var<T>> neighbors) const;
  Var<T> assemble_news(std::optional<Var<T>> neighbor_semantics, std::optional<Var<T>> neighbor_ids,
                       Var<T> semantic) const;

  Var<T> project_user(Var<T> user) const { return user_projection_(user); }
  Var<T> project_news(Var<T> news) const { return news_projection_(news); }

  // Row-wise inner product of projected vectors; both must be [rows × d].
  Var<T> score(Var<T> projected_users, Var<T> projected_news) const;

  std::size_t common_dim() const { return common_dim_; }

 private:
  ModelConfig config_;
  Wiring wiring_;
  std::size_t common_dim_;
  Dense<T> user_projection_;
  Dense<T> news_projection_;
};

// Σ_i −log( exp(s_i0) / Σ_j exp(s_ij) ) over rows of `scores` [samples × (λ+1)]
// whose column 0 is the clicked candidate.
template <typename T>
Var<T> nce_loss(Var<T> scores, std::size_t neg_ratio);

}  // namespace gerl
