#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace gerl {

// Ranking order used by every metric: descending score, earlier candidate
// first on ties.
std::vector<std::size_t> rank_order(std::span<const double> scores);

// Fraction of (positive, negative) pairs ordered correctly, ties worth 0.5.
// nullopt unless both classes are present.
std::optional<double> auc(std::span<const double> scores, std::span<const std::uint8_t> labels);
// Mean of 1/rank over the positives. nullopt without positives.
std::optional<double> mrr(std::span<const double> scores, std::span<const std::uint8_t> labels);
// Binary-relevance DCG@k / IDCG@k with gain 1/log2(rank+1). nullopt without positives.
std::optional<double> ndcg(std::span<const double> scores, std::span<const std::uint8_t> labels, std::size_t k);

struct ImpressionMetrics {
  std::string impression_id;
  double auc = 0;
  double mrr = 0;
  double ndcg5 = 0;
  double ndcg10 = 0;
};

// All four metrics, or nullopt for a single-class impression.
std::optional<ImpressionMetrics> impression_metrics(std::span<const double> scores,
                                                    std::span<const std::uint8_t> labels);

struct MetricReport {
  double auc = 0;
  double mrr = 0;
  double ndcg5 = 0;
  double ndcg10 = 0;
  std::size_t n_impressions = 0;  // scored
  std::size_t n_skipped = 0;      // single-class
  std::vector<ImpressionMetrics> per_impression;
};

// Accumulates impressions in call order and averages without weighting.
class MetricAccumulator {
 public:
  explicit MetricAccumulator(bool keep_per_impression = false) : keep_(keep_per_impression) {}

  void add(const std::string& impression_id, std::span<const double> scores, std::span<const std::uint8_t> labels);
  MetricReport report() const;

 private:
  bool keep_;
  double sums_[4] = {0, 0, 0, 0};
  std::size_t scored_ = 0;
  std::size_t skipped_ = 0;
  std::vector<ImpressionMetrics> rows_;
};

// The per-impression breakdown is not serialised.
void to_json(nlohmann::json& j, const MetricReport& r);
void from_json(const nlohmann::json& j, MetricReport& r);
std::string format_table(const MetricReport& report);
void write_report_json(const std::filesystem::path& path, const MetricReport& report);
void write_per_impression_csv(const std::filesystem::path& path, const MetricReport& report);

}  // namespace gerl
