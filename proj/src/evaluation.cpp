#include "gerl/evaluation.hpp"

#include <algorithm>

#include "gerl/error.hpp"

namespace gerl {

template <typename T>
std::vector<std::vector<double>> score_impressions(const GerlModel<T>& model, const BatchBuilder& builder,
                                                   std::span<const Impression> impressions,
                                                   std::size_t impressions_per_batch) {
  std::vector<std::vector<double>> out;
  out.reserve(impressions.size());
  const std::size_t step = std::max<std::size_t>(1, impressions_per_batch);
  for (std::size_t start = 0; start < impressions.size(); start += step) {
    auto chunk = impressions.subspan(start, std::min(step, impressions.size() - start));
    const auto scores = model.score(builder.evaluation(chunk));
    std::size_t offset = 0;
    for (const auto& imp : chunk) {
      out.emplace_back(scores.begin() + offset, scores.begin() + offset + imp.candidates.size());
      offset += imp.candidates.size();
    }
  }
  return out;
}

MetricReport evaluate_scores(std::span<const Impression> impressions, const std::vector<std::vector<double>>& scores,
                             bool per_impression) {
  if (scores.size() != impressions.size()) {
    throw DimensionError("evaluate: " + std::to_string(scores.size()) + " score lists for " +
                         std::to_string(impressions.size()) + " impressions");
  }
  MetricAccumulator acc(per_impression);
  std::vector<std::uint8_t> labels;
  for (std::size_t i = 0; i < impressions.size(); ++i) {
    labels.clear();
    for (const auto& c : impressions[i].candidates) labels.push_back(c.label);
    acc.add(impressions[i].impression_id, scores[i], labels);
  }
  return acc.report();
}

template <typename T>
MetricReport evaluate(const GerlModel<T>& model, const BatchBuilder& builder, std::span<const Impression> impressions,
                      const EvalOptions& options) {
  return evaluate_scores(impressions, score_impressions(model, builder, impressions, options.impressions_per_batch),
                         options.per_impression);
}

template std::vector<std::vector<double>> score_impressions(const GerlModel<float>&, const BatchBuilder&,
                                                            std::span<const Impression>, std::size_t);
template std::vector<std::vector<double>> score_impressions(const GerlModel<double>&, const BatchBuilder&,
                                                            std::span<const Impression>, std::size_t);
template MetricReport evaluate(const GerlModel<float>&, const BatchBuilder&, std::span<const Impression>,
                               const EvalOptions&);
template MetricReport evaluate(const GerlModel<double>&, const BatchBuilder&, std::span<const Impression>,
                               const EvalOptions&);

}  // namespace gerl
