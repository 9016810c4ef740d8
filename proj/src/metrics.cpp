#include "gerl/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "gerl/error.hpp"

namespace gerl {

namespace {

void check_lengths(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  if (scores.size() != labels.size()) {
    throw DimensionError("metric: " + std::to_string(scores.size()) + " scores for " +
                         std::to_string(labels.size()) + " labels");
  }
}

std::size_t count_positive(std::span<const std::uint8_t> labels) {
  return static_cast<std::size_t>(std::count_if(labels.begin(), labels.end(), [](auto l) { return l != 0; }));
}

}  // namespace

std::vector<std::size_t> rank_order(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return order;
}

std::optional<double> auc(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  check_lengths(scores, labels);
  const std::size_t pos = count_positive(labels);
  const std::size_t neg = labels.size() - pos;
  if (pos == 0 || neg == 0) return std::nullopt;
  // Mann–Whitney U with midranks for tied groups.
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double rank_sum = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t t = i; t < j; ++t) {
      if (labels[order[t]]) rank_sum += midrank;
    }
    i = j;
  }
  const double p = static_cast<double>(pos);
  return (rank_sum - p * (p + 1) / 2) / (p * static_cast<double>(neg));
}

std::optional<double> mrr(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  check_lengths(scores, labels);
  const std::size_t pos = count_positive(labels);
  if (pos == 0) return std::nullopt;
  const auto order = rank_order(scores);
  double total = 0;
  for (std::size_t r = 0; r < order.size(); ++r) {
    if (labels[order[r]]) total += 1.0 / static_cast<double>(r + 1);
  }
  return total / static_cast<double>(pos);
}

std::optional<double> ndcg(std::span<const double> scores, std::span<const std::uint8_t> labels, std::size_t k) {
  check_lengths(scores, labels);
  const std::size_t pos = count_positive(labels);
  if (pos == 0) return std::nullopt;
  const auto order = rank_order(scores);
  double dcg = 0;
  for (std::size_t r = 0; r < std::min(k, order.size()); ++r) {
    if (labels[order[r]]) dcg += 1.0 / std::log2(static_cast<double>(r + 2));
  }
  double ideal = 0;
  for (std::size_t r = 0; r < std::min(k, pos); ++r) ideal += 1.0 / std::log2(static_cast<double>(r + 2));
  return dcg / ideal;
}

std::optional<ImpressionMetrics> impression_metrics(std::span<const double> scores,
                                                    std::span<const std::uint8_t> labels) {
  auto a = auc(scores, labels);
  if (!a) return std::nullopt;
  ImpressionMetrics m;
  m.auc = *a;
  m.mrr = *mrr(scores, labels);
  m.ndcg5 = *ndcg(scores, labels, 5);
  m.ndcg10 = *ndcg(scores, labels, 10);
  return m;
}

void MetricAccumulator::add(const std::string& impression_id, std::span<const double> scores,
                            std::span<const std::uint8_t> labels) {
  auto m = impression_metrics(scores, labels);
  if (!m) {
    ++skipped_;
    return;
  }
  sums_[0] += m->auc;
  sums_[1] += m->mrr;
  sums_[2] += m->ndcg5;
  sums_[3] += m->ndcg10;
  ++scored_;
  if (keep_) {
    m->impression_id = impression_id;
    rows_.push_back(std::move(*m));
  }
}

MetricReport MetricAccumulator::report() const {
  MetricReport r;
  r.n_impressions = scored_;
  r.n_skipped = skipped_;
  r.per_impression = rows_;
  if (scored_ > 0) {
    const double n = static_cast<double>(scored_);
    r.auc = sums_[0] / n;
    r.mrr = sums_[1] / n;
    r.ndcg5 = sums_[2] / n;
    r.ndcg10 = sums_[3] / n;
  }
  return r;
}

void to_json(nlohmann::json& j, const MetricReport& r) {
  j = nlohmann::json{{"auc", r.auc},       {"mrr", r.mrr},
                     {"ndcg5", r.ndcg5},   {"ndcg10", r.ndcg10},
                     {"n_impressions", r.n_impressions}, {"n_skipped", r.n_skipped}};
}

void from_json(const nlohmann::json& j, MetricReport& r) {
  j.at("auc").get_to(r.auc);
  j.at("mrr").get_to(r.mrr);
  j.at("ndcg5").get_to(r.ndcg5);
  j.at("ndcg10").get_to(r.ndcg10);
  j.at("n_impressions").get_to(r.n_impressions);
  j.at("n_skipped").get_to(r.n_skipped);
}

std::string format_table(const MetricReport& report) {
  std::ostringstream out;
  out << std::left << std::setw(14) << "metric" << std::right << std::setw(10) << "value" << '\n';
  out << std::fixed << std::setprecision(4);
  const std::pair<const char*, double> rows[] = {
      {"AUC", report.auc}, {"MRR", report.mrr}, {"nDCG@5", report.ndcg5}, {"nDCG@10", report.ndcg10}};
  for (const auto& [name, value] : rows) out << std::left << std::setw(14) << name << std::right << std::setw(10) << value << '\n';
  out << std::left << std::setw(14) << "impressions" << std::right << std::setw(10) << report.n_impressions << '\n';
  out << std::left << std::setw(14) << "skipped" << std::right << std::setw(10) << report.n_skipped << '\n';
  return out.str();
}

void write_report_json(const std::filesystem::path& path, const MetricReport& report) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << nlohmann::json(report).dump(2) << '\n';
}

void write_per_impression_csv(const std::filesystem::path& path, const MetricReport& report) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "impression_id,auc,mrr,ndcg5,ndcg10\n" << std::setprecision(17);
  for (const auto& m : report.per_impression) {
    out << m.impression_id << ',' << m.auc << ',' << m.mrr << ',' << m.ndcg5 << ',' << m.ndcg10 << '\n';
  }
}

}  // namespace gerl
