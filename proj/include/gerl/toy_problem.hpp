#pragma once

#include <cstdint>
#include <vector>

#include "gerl/gradcheck.hpp"
#include "gerl/training.hpp"

namespace gerl {

// A complete miniature setup: 50-word vocabulary, 4 users, 6 news, D=3, K=3,
// M=5, 2 heads, every dimension small. Every parameter of the full model
// receives gradient from its training batch.
struct ToyProblem {
  ModelConfig config;
  NewsTable news;
  std::vector<Impression> impressions;
  BipartiteGraph graph;
  NeighborTable user_neighbors;
  NeighborTable news_neighbors;
  IdSpace ids;
  std::vector<TrainingSample> samples;

  ModelInputs inputs() const { return {&news, &user_neighbors, &news_neighbors, &ids}; }
  ModelSizes sizes() const { return {news.words.size(), news.topics.size(), ids.user_rows, ids.news_rows}; }
};

ToyProblem make_toy_problem(std::uint64_t seed = 7);

// Central-difference check of the full model loss on the toy batch at 64-bit.
// `corrupt_backward` adds a term whose backward rule is deliberately wrong,
// as a negative control. Parameters are drawn from uniform(-scale, scale).
GradCheckReport check_model_gradients(const ToyProblem& toy, const GradCheckOptions& options,
                                      bool corrupt_backward = false, double scale = 1.0);

}  // namespace gerl
