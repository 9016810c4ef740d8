#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "gerl/metrics.hpp"
#include "gerl/model.hpp"

namespace gerl {

struct EvalOptions {
  std::size_t impressions_per_batch = 64;
  bool per_impression = false;
};

// Inference-mode scores for every candidate, grouped by impression.
template <typename T>
std::vector<std::vector<double>> score_impressions(const GerlModel<T>& model, const BatchBuilder& builder,
                                                   std::span<const Impression> impressions,
                                                   std::size_t impressions_per_batch = 64);

MetricReport evaluate_scores(std::span<const Impression> impressions, const std::vector<std::vector<double>>& scores,
                             bool per_impression = false);

template <typename T>
MetricReport evaluate(const GerlModel<T>& model, const BatchBuilder& builder, std::span<const Impression> impressions,
                      const EvalOptions& options = {});

}  // namespace gerl
