#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <ostream>
#include <random>
#include <span>
#include <vector>

#include <json.hpp>

#include "gerl/evaluation.hpp"

namespace gerl {

// Independent generator for a named purpose derived from the run seed.
std::mt19937_64 seeded_stream(std::uint64_t seed, std::uint64_t stream);

namespace streams {
inline constexpr std::uint64_t kSplit = 1;
inline constexpr std::uint64_t kNeighbors = 2;
inline constexpr std::uint64_t kInit = 3;
inline constexpr std::uint64_t kSampling = 4;
inline constexpr std::uint64_t kShuffle = 5;
inline constexpr std::uint64_t kDropout = 6;
inline constexpr std::uint64_t kEmbeddings = 7;
}  // namespace streams

struct SamplingStats {
  std::size_t samples = 0;
  std::size_t skipped_no_candidates = 0;
  std::size_t skipped_no_positive = 0;
  std::size_t skipped_no_negative = 0;
  std::size_t with_replacement = 0;  // samples that reused a negative
};

// One sample per clicked candidate, each with exactly λ negatives drawn from
// the impression's unclicked candidates: without replacement when at least λ
// exist, otherwise with replacement. Impressions that cannot form a sample are
// skipped and counted.
std::vector<TrainingSample> sample_negatives(const Impression& impression, std::size_t neg_ratio,
                                             std::mt19937_64& rng, SamplingStats* stats = nullptr);

std::vector<TrainingSample> sample_all(std::span<const Impression> impressions, std::size_t neg_ratio,
                                       std::mt19937_64& rng, SamplingStats* stats = nullptr);

struct AdamOptions {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// m ← β1 m + (1−β1) g,  v ← β2 v + (1−β2) g²,
// θ ← θ − lr · m̂ / (√v̂ + ε) with bias-corrected m̂, v̂.
// Frozen padding rows are left untouched.
template <typename T>
class Adam {
 public:
  Adam(ParameterSet<T>& params, const AdamOptions& options);

  void step();
  std::size_t steps() const { return t_; }

 private:
  ParameterSet<T>* params_;
  AdamOptions options_;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
  std::size_t t_ = 0;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0;  // mean per-sample loss
  MetricReport validation;
  double wall_seconds = 0;
};

// {epoch, train_loss, val_auc, val_mrr, val_ndcg5, val_ndcg10, wall_seconds}
nlohmann::json to_log_record(const EpochRecord& record);

struct TrainingResult {
  std::vector<EpochRecord> history;
  std::size_t best_epoch = 0;
  double best_validation_auc = 0;
  SamplingStats sampling;
};

struct TrainOptions {
  EvalOptions eval;
  std::ostream* log = nullptr;  // JSONL, one line per epoch
  std::function<void(const EpochRecord&)> on_epoch;
};

// Loss of one batch: Σ over samples of −log softmax(positive).
template <typename T>
Var<T> batch_loss(const GerlModel<T>& model, Tape<T>& tape, const Batch& batch, std::size_t samples,
                  const Mode& mode);

// Mini-batch Adam training with per-epoch validation. The parameters with the
// best validation AUC (first epoch on ties) are restored before returning.
// A non-finite loss raises NumericalError.
template <typename T>
TrainingResult train(GerlModel<T>& model, const BatchBuilder& builder, std::span<const Impression> train_split,
                     std::span<const Impression> validation_split, const TrainOptions& options = {});

}  // namespace gerl
