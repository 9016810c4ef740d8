#include "gerl/batch.hpp"

#include <algorithm>
#include <unordered_map>

#include "gerl/error.hpp"

namespace gerl {

IdSpace build_id_space(const BipartiteGraph& graph) {
  IdSpace ids;
  ids.user_row.assign(graph.user_count(), 0);
  ids.news_row.assign(graph.news_count(), 0);
  std::uint32_t next = 1;
  for (std::uint32_t u = 1; u < graph.user_count(); ++u) {
    if (!graph.clicked_by(u).empty()) ids.user_row[u] = next++;
  }
  ids.user_rows = next;
  next = 1;
  for (std::uint32_t n = 1; n < graph.news_count(); ++n) {
    if (!graph.clickers_of(n).empty()) ids.news_row[n] = next++;
  }
  ids.news_rows = next;
  return ids;
}

namespace {

class ArticleSlots {
 public:
  std::uint32_t slot(std::uint32_t news) {
    auto [it, inserted] = slots_.try_emplace(news, static_cast<std::uint32_t>(order_.size()));
    if (inserted) order_.push_back(news);
    return it->second;
  }
  const std::vector<std::uint32_t>& order() const { return order_; }

 private:
  std::unordered_map<std::uint32_t, std::uint32_t> slots_;
  std::vector<std::uint32_t> order_;
};

}  // namespace

BatchBuilder::BatchBuilder(const ModelInputs& inputs, const Wiring& wiring) : inputs_(inputs), wiring_(wiring) {
  if (!inputs.news || !inputs.user_neighbors || !inputs.news_neighbors || !inputs.ids) {
    throw ContractError("BatchBuilder: incomplete model inputs");
  }
  if (inputs.user_neighbors->degree() != inputs.news_neighbors->degree()) {
    throw ContractError("BatchBuilder: user and news neighbour tables have different degrees");
  }
}

Batch BatchBuilder::training(std::span<const TrainingSample> samples) const {
  std::vector<Context> contexts;
  std::vector<std::uint32_t> owners;
  std::vector<std::uint32_t> news;
  for (std::size_t s = 0; s < samples.size(); ++s) {
    const auto& sample = samples[s];
    contexts.push_back({sample.user, sample.history});
    owners.push_back(static_cast<std::uint32_t>(s));
    news.push_back(sample.positive);
    for (auto n : sample.negatives) {
      owners.push_back(static_cast<std::uint32_t>(s));
      news.push_back(n);
    }
  }
  return build(contexts, owners, news);
}

Batch BatchBuilder::evaluation(std::span<const Impression> impressions) const {
  std::vector<Context> contexts;
  std::vector<std::uint32_t> owners;
  std::vector<std::uint32_t> news;
  for (std::size_t i = 0; i < impressions.size(); ++i) {
    contexts.push_back({impressions[i].user, impressions[i].history});
    for (const auto& c : impressions[i].candidates) {
      owners.push_back(static_cast<std::uint32_t>(i));
      news.push_back(c.news);
    }
  }
  return build(contexts, owners, news);
}

Batch BatchBuilder::build(std::span<const Context> contexts, std::span<const std::uint32_t> owners,
                          std::span<const std::uint32_t> news) const {
  if (news.empty()) throw ContractError("BatchBuilder: no candidates");
  const NewsTable& table = *inputs_.news;
  const IdSpace& ids = *inputs_.ids;
  const std::size_t degree = inputs_.user_neighbors->degree();
  auto check_news = [&](std::uint32_t n) {
    if (n == 0 || n >= table.articles.size()) {
      throw ContractError("BatchBuilder: news index " + std::to_string(n) + " out of range");
    }
  };

  Batch b;
  ArticleSlots articles;
  // Candidates first so that slot 0 is always a real article.
  std::unordered_map<std::uint32_t, std::uint32_t> candidate_of;
  std::vector<std::uint32_t> candidate_news;
  for (auto n : news) {
    check_news(n);
    auto [it, inserted] = candidate_of.try_emplace(n, static_cast<std::uint32_t>(candidate_news.size()));
    if (inserted) {
      candidate_news.push_back(n);
      b.candidate_article.push_back(articles.slot(n));
    }
    b.pair_news.push_back(it->second);
  }
  b.pair_user.assign(owners.begin(), owners.end());
  b.candidate_news = candidate_news.size();

  b.users = contexts.size();
  for (const auto& c : contexts) b.history_slots = std::max(b.history_slots, c.history.size());
  b.history.assign(b.users * b.history_slots, 0);
  b.history_mask.assign(b.users * b.history_slots, 0);
  b.degree = degree;
  b.neighbor_user_rows.assign(b.users * degree, 0);
  b.neighbor_user_mask.assign(b.users * degree, 0);
  for (std::size_t u = 0; u < b.users; ++u) {
    const auto& c = contexts[u];
    b.user_rows.push_back(ids.user(c.user));
    for (std::size_t k = 0; k < c.history.size(); ++k) {
      check_news(c.history[k]);
      b.history[u * b.history_slots + k] = articles.slot(c.history[k]);
      b.history_mask[u * b.history_slots + k] = 1;
    }
    if (wiring_.user_neighbors && c.user < inputs_.user_neighbors->rows()) {
      auto row = inputs_.user_neighbors->ids(c.user);
      auto mask = inputs_.user_neighbors->mask(c.user);
      for (std::size_t d = 0; d < degree; ++d) {
        if (!mask[d]) continue;
        b.neighbor_user_rows[u * degree + d] = ids.user(row[d]);
        b.neighbor_user_mask[u * degree + d] = 1;
      }
    }
  }

  const bool want_news_neighbors = wiring_.news_neighbor_ids || wiring_.news_neighbor_semantics;
  b.neighbor_news_article.assign(b.candidate_news * degree, 0);
  b.neighbor_news_rows.assign(b.candidate_news * degree, 0);
  b.neighbor_news_mask.assign(b.candidate_news * degree, 0);
  for (std::size_t c = 0; want_news_neighbors && c < b.candidate_news; ++c) {
    const std::uint32_t n = candidate_news[c];
    if (n >= inputs_.news_neighbors->rows()) continue;
    auto row = inputs_.news_neighbors->ids(n);
    auto mask = inputs_.news_neighbors->mask(n);
    for (std::size_t d = 0; d < degree; ++d) {
      if (!mask[d]) continue;
      b.neighbor_news_mask[c * degree + d] = 1;
      b.neighbor_news_rows[c * degree + d] = ids.news(row[d]);
      if (wiring_.news_neighbor_semantics) {
        check_news(row[d]);
        b.neighbor_news_article[c * degree + d] = articles.slot(row[d]);
      }
    }
  }

  b.article_news = articles.order();
  b.articles = make_news_batch(table, b.article_news);
  return b;
}

}  // namespace gerl
