#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "gerl/click_graph.hpp"
#include "gerl/corpus.hpp"
#include "gerl/model_config.hpp"
#include "gerl/news_encoder.hpp"

namespace gerl {

// Maps corpus indices to rows of the trainable ID tables. Only users and news
// with at least one training click get a row; everything else maps to the
// frozen zero row 0.
struct IdSpace {
  std::vector<std::uint32_t> user_row;  // by user index
  std::vector<std::uint32_t> news_row;  // by news index
  std::size_t user_rows = 1;            // including row 0
  std::size_t news_rows = 1;

  std::uint32_t user(std::uint32_t index) const { return index < user_row.size() ? user_row[index] : 0; }
  std::uint32_t news(std::uint32_t index) const { return index < news_row.size() ? news_row[index] : 0; }
};

// Rows are assigned in index order.
IdSpace build_id_space(const BipartiteGraph& graph);

// Everything a batch needs besides the impressions themselves.
struct ModelInputs {
  const NewsTable* news = nullptr;
  const NeighborTable* user_neighbors = nullptr;  // by user index
  const NeighborTable* news_neighbors = nullptr;  // by news index
  const IdSpace* ids = nullptr;
};

// One clicked candidate paired with λ unclicked ones from the same impression.
struct TrainingSample {
  std::uint32_t user = 0;
  std::vector<std::uint32_t> history;
  std::uint32_t positive = 0;
  std::vector<std::uint32_t> negatives;
};

// Flattened model input. Articles are deduplicated across the whole batch and
// every other field refers to them by slot in `articles`. Masked slots point at
// article slot 0 and are never read through a nonzero weight.
struct Batch {
  NewsBatch articles;
  std::vector<std::uint32_t> article_news;  // news index per article slot

  // One entry per user context (training sample or impression).
  std::size_t users = 0;
  std::vector<std::uint32_t> user_rows;
  std::size_t history_slots = 1;
  std::vector<std::uint32_t> history;  // users × history_slots, article slots
  Mask history_mask;
  std::size_t degree = 0;
  std::vector<std::uint32_t> neighbor_user_rows;  // users × degree
  Mask neighbor_user_mask;

  // One entry per distinct candidate news.
  std::size_t candidate_news = 0;
  std::vector<std::uint32_t> candidate_article;      // article slot
  std::vector<std::uint32_t> neighbor_news_article;  // candidate_news × degree
  std::vector<std::uint32_t> neighbor_news_rows;     // candidate_news × degree
  Mask neighbor_news_mask;

  // One entry per scored (user, candidate) pair.
  std::vector<std::uint32_t> pair_user;
  std::vector<std::uint32_t> pair_news;  // index into the candidate_news entries

  std::size_t pairs() const { return pair_user.size(); }
};

class BatchBuilder {
 public:
  BatchBuilder(const ModelInputs& inputs, const Wiring& wiring);

  // Pairs are sample-major with the positive first: [s0+, s0-, ..., s1+, ...].
  Batch training(std::span<const TrainingSample> samples) const;
  // Pairs follow impression then candidate order.
  Batch evaluation(std::span<const Impression> impressions) const;

 private:
  struct Context {
    std::uint32_t user;
    std::span<const std::uint32_t> history;
  };
  Batch build(std::span<const Context> contexts, std::span<const std::uint32_t> owners,
              std::span<const std::uint32_t> news) const;

  ModelInputs inputs_;
  Wiring wiring_;
};

}  // namespace gerl
