#include "gerl/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "gerl/error.hpp"

namespace gerl {

std::mt19937_64 seeded_stream(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), 0x9e3779b9u};
  return std::mt19937_64(seq);
}

std::vector<TrainingSample> sample_negatives(const Impression& impression, std::size_t neg_ratio,
                                             std::mt19937_64& rng, SamplingStats* stats) {
  SamplingStats local;
  SamplingStats& s = stats ? *stats : local;
  std::vector<TrainingSample> out;
  if (impression.candidates.empty()) {
    ++s.skipped_no_candidates;
    return out;
  }
  std::vector<std::uint32_t> positives;
  std::vector<std::uint32_t> negatives;
  for (const auto& c : impression.candidates) (c.label ? positives : negatives).push_back(c.news);
  if (positives.empty()) {
    ++s.skipped_no_positive;
    return out;
  }
  if (negatives.empty() && neg_ratio > 0) {
    ++s.skipped_no_negative;
    return out;
  }
  for (auto p : positives) {
    TrainingSample sample;
    sample.user = impression.user;
    sample.history = impression.history;
    sample.positive = p;
    if (negatives.size() >= neg_ratio) {
      // Partial Fisher–Yates over a copy.
      std::vector<std::uint32_t> pool = negatives;
      for (std::size_t i = 0; i < neg_ratio; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
        std::swap(pool[i], pool[pick(rng)]);
      }
      sample.negatives.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(neg_ratio));
    } else {
      std::uniform_int_distribution<std::size_t> pick(0, negatives.size() - 1);
      for (std::size_t i = 0; i < neg_ratio; ++i) sample.negatives.push_back(negatives[pick(rng)]);
      ++s.with_replacement;
    }
    out.push_back(std::move(sample));
    ++s.samples;
  }
  return out;
}

std::vector<TrainingSample> sample_all(std::span<const Impression> impressions, std::size_t neg_ratio,
                                       std::mt19937_64& rng, SamplingStats* stats) {
  std::vector<TrainingSample> out;
  for (const auto& imp : impressions) {
    auto samples = sample_negatives(imp, neg_ratio, rng, stats);
    std::move(samples.begin(), samples.end(), std::back_inserter(out));
  }
  return out;
}

template <typename T>
Adam<T>::Adam(ParameterSet<T>& params, const AdamOptions& options) : params_(&params), options_(options) {
  for (const auto& p : params) {
    m_.emplace_back(p->size(), 0.0);
    v_.emplace_back(p->size(), 0.0);
  }
}

template <typename T>
void Adam<T>::step() {
  ++t_;
  const double b1 = options_.beta1;
  const double b2 = options_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params_->size(); ++i) {
    auto& p = (*params_)[i];
    T* value = p.value().data();
    const T* grad = p.grad().data();
    auto& m = m_[i];
    auto& v = v_[i];
    for (std::size_t j = p.frozen_prefix(); j < p.size(); ++j) {
      const double g = grad[j];
      m[j] = b1 * m[j] + (1 - b1) * g;
      v[j] = b2 * v[j] + (1 - b2) * g * g;
      const double update = options_.learning_rate * (m[j] / c1) / (std::sqrt(v[j] / c2) + options_.epsilon);
      value[j] = static_cast<T>(value[j] - update);
    }
  }
}

nlohmann::json to_log_record(const EpochRecord& r) {
  return {{"epoch", r.epoch},
          {"train_loss", r.train_loss},
          {"val_auc", r.validation.auc},
          {"val_mrr", r.validation.mrr},
          {"val_ndcg5", r.validation.ndcg5},
          {"val_ndcg10", r.validation.ndcg10},
          {"wall_seconds", r.wall_seconds}};
}

template <typename T>
Var<T> batch_loss(const GerlModel<T>& model, Tape<T>& tape, const Batch& batch, std::size_t samples,
                  const Mode& mode) {
  const std::size_t width = model.config().neg_ratio + 1;
  if (batch.pairs() != samples * width) {
    throw ContractError("batch_loss: " + std::to_string(batch.pairs()) + " pairs for " + std::to_string(samples) +
                        " samples of width " + std::to_string(width));
  }
  auto pass = model.forward(tape, batch, mode);
  return nce_loss(ops::reshape(pass.scores, {samples, width}), model.config().neg_ratio);
}

namespace {

template <typename T>
std::vector<Tensor<T>> snapshot(const ParameterSet<T>& params) {
  std::vector<Tensor<T>> out;
  for (const auto& p : params) out.push_back(p->value());
  return out;
}

}  // namespace

template <typename T>
TrainingResult train(GerlModel<T>& model, const BatchBuilder& builder, std::span<const Impression> train_split,
                     std::span<const Impression> validation_split, const TrainOptions& options) {
  const ModelConfig& config = model.config();
  auto sampling_rng = seeded_stream(config.seed, streams::kSampling);
  auto shuffle_rng = seeded_stream(config.seed, streams::kShuffle);
  auto dropout_rng = seeded_stream(config.seed, streams::kDropout);
  Adam<T> adam(model.parameters(), AdamOptions{config.learning_rate});
  const Mode mode{true, config.dropout, &dropout_rng};

  TrainingResult result;
  std::vector<Tensor<T>> best;
  const auto started = std::chrono::steady_clock::now();
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    SamplingStats stats;
    auto samples = sample_all(train_split, config.neg_ratio, sampling_rng, &stats);
    if (samples.empty()) throw ConfigError("training split yields no samples");
    std::shuffle(samples.begin(), samples.end(), shuffle_rng);

    double loss_sum = 0;
    for (std::size_t start = 0, index = 0; start < samples.size(); start += config.batch_size, ++index) {
      const std::size_t count = std::min(config.batch_size, samples.size() - start);
      std::span<const TrainingSample> chunk(samples.data() + start, count);
      const Batch batch = builder.training(chunk);
      Tape<T> tape;
      auto loss = batch_loss(model, tape, batch, count, mode);
      const double value = static_cast<double>(loss.value()[0]);
      if (!std::isfinite(value)) {
        std::ostringstream msg;
        msg << "non-finite loss " << value << " at epoch " << epoch << ", batch " << index << " (" << count
            << " samples, " << batch.articles.count << " articles)";
        throw NumericalError(msg.str());
      }
      tape.backward(loss);
      adam.step();
      model.parameters().zero_grad();
      loss_sum += value;
    }

    EpochRecord record;
    record.epoch = epoch;
    record.train_loss = loss_sum / static_cast<double>(samples.size());
    record.validation = evaluate(model, builder, validation_split, options.eval);
    record.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    result.history.push_back(record);
    if (epoch == 1) result.sampling = stats;
    if (epoch == 1 || record.validation.auc > result.best_validation_auc) {
      result.best_epoch = epoch;
      result.best_validation_auc = record.validation.auc;
      best = snapshot(model.parameters());
    }
    if (options.log) *options.log << to_log_record(record).dump() << '\n' << std::flush;
    if (options.on_epoch) options.on_epoch(record);
  }
  for (std::size_t i = 0; i < best.size(); ++i) model.parameters()[i].value() = best[i];
  return result;
}

template class Adam<float>;
template class Adam<double>;
template Var<float> batch_loss(const GerlModel<float>&, Tape<float>&, const Batch&, std::size_t, const Mode&);
template Var<double> batch_loss(const GerlModel<double>&, Tape<double>&, const Batch&, std::size_t, const Mode&);
template TrainingResult train(GerlModel<float>&, const BatchBuilder&, std::span<const Impression>,
                              std::span<const Impression>, const TrainOptions&);
template TrainingResult train(GerlModel<double>&, const BatchBuilder&, std::span<const Impression>,
                              std::span<const Impression>, const TrainOptions&);

}  // namespace gerl
