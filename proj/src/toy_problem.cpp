#include "gerl/toy_problem.hpp"

#include <algorithm>
#include <string>

namespace gerl {

namespace {

std::string word(std::size_t i) { return "w" + std::to_string(i); }

NewsArticle article(const NewsTable& t, const std::string& id, const std::string& topic,
                    const std::vector<std::size_t>& words) {
  NewsArticle a;
  a.news_id = id;
  a.topic_id = t.topics.index(topic);
  a.title_tokens.assign(t.title_len, Vocabulary::kPad);
  a.title_mask.assign(t.title_len, 0);
  for (std::size_t i = 0; i < words.size() && i < t.title_len; ++i) {
    a.title_tokens[i] = t.words.index(word(words[i]));
    a.title_mask[i] = 1;
  }
  return a;
}

Impression impression(const std::string& id, std::uint32_t user, std::vector<std::uint32_t> history,
                      std::vector<Candidate> candidates) {
  Impression imp;
  imp.impression_id = id;
  imp.user = user;
  imp.timestamp = 1000 + static_cast<std::int64_t>(user);
  imp.history = std::move(history);
  imp.candidates = std::move(candidates);
  return imp;
}

}  // namespace

ToyProblem make_toy_problem(std::uint64_t seed) {
  ToyProblem toy;
  auto& c = toy.config;
  c.title_len = 5;
  c.history_len = 3;
  c.degree = 3;
  c.heads = 2;
  c.title_dim = 6;
  c.word_dim = 5;
  c.topic_dim = 3;
  c.id_dim = 4;
  c.attention_dim = 4;
  c.common_dim = 4;
  c.neg_ratio = 4;
  c.dropout = 0.0;
  c.batch_size = 8;
  c.epochs = 1;
  c.seed = seed;

  std::vector<std::vector<std::string>> dictionary(1);
  for (std::size_t i = 0; i < 48; ++i) dictionary[0].push_back(word(i));
  toy.news.words = Vocabulary::build(dictionary);
  toy.news.topics = TopicIndex::build({"sports", "sports", "politics", "tech"});
  toy.news.title_len = c.title_len;
  toy.news.articles.emplace_back();
  toy.news.articles[0].title_tokens.assign(c.title_len, Vocabulary::kPad);
  toy.news.articles[0].title_mask.assign(c.title_len, 0);
  const std::vector<std::pair<std::string, std::vector<std::size_t>>> titles = {
      {"sports", {0, 1, 2, 3, 4}}, {"sports", {5, 6, 1}},     {"politics", {7, 8, 9, 10}},
      {"tech", {11, 12}},          {"politics", {13, 8, 14}}, {"tech", {15, 16, 17, 18, 19}},
  };
  for (std::size_t n = 0; n < titles.size(); ++n) {
    const std::string id = "N" + std::to_string(n + 1);
    toy.news.articles.push_back(article(toy.news, id, titles[n].first, titles[n].second));
    toy.news.by_id[id] = static_cast<std::uint32_t>(n + 1);
  }

  toy.impressions = {
      impression("1", 1, {1, 2}, {{3, 1}, {4, 0}, {5, 0}, {6, 0}, {2, 0}}),
      impression("2", 2, {2, 3, 4}, {{1, 1}, {5, 0}, {6, 0}, {3, 0}, {4, 0}}),
      impression("3", 3, {1}, {{5, 1}, {2, 0}, {3, 0}, {4, 0}, {6, 0}}),
      impression("4", 4, {5, 6}, {{2, 1}, {1, 0}, {3, 0}, {4, 0}, {6, 0}}),
  };
  toy.graph = build_bipartite(toy.impressions, 5, toy.news.articles.size());
  toy.user_neighbors = build_user_neighbors(toy.graph, c.degree);
  auto rng = seeded_stream(seed, streams::kNeighbors);
  toy.news_neighbors = build_news_neighbors(toy.graph, c.degree, rng);
  toy.ids = build_id_space(toy.graph);
  auto sampling = seeded_stream(seed, streams::kSampling);
  toy.samples = sample_all(toy.impressions, c.neg_ratio, sampling);
  return toy;
}

GradCheckReport check_model_gradients(const ToyProblem& toy, const GradCheckOptions& options,
                                      bool corrupt_backward, double scale) {
  auto init = seeded_stream(toy.config.seed, streams::kInit);
  GerlModel<double> model(toy.config, toy.sizes(), init);
  // Redraw at a larger scale so that every gradient is far from zero.
  for (auto& p : model.parameters()) {
    auto fresh = uniform_tensor<double>(p->shape(), init, scale);
    std::fill_n(fresh.data(), p->frozen_prefix(), 0.0);
    p->value() = std::move(fresh);
  }
  BatchBuilder builder(toy.inputs(), model.wiring());
  const Batch batch = builder.training(toy.samples);
  const std::size_t samples = toy.samples.size();

  LossBuilder<double> loss = [&](Tape<double>& tape) {
    auto pass = model.forward(tape, batch, Mode::inference());
    auto value = nce_loss(ops::reshape(pass.scores, {samples, toy.config.neg_ratio + 1}), toy.config.neg_ratio);
    if (!corrupt_backward) return value;
    // Σ s² whose backward uses 3s instead of 2s.
    const auto& s = pass.scores.value();
    double total = 0;
    for (double v : s.values()) total += v * v;
    auto scores = pass.scores;
    auto bad = tape.record(Tensor<double>({1}, total), true, [scores](Tape<double>& t, std::size_t self) {
      const double g = t.grad(self)[0];
      auto& gs = t.grad(scores.id);
      const auto& sv = t.value(scores.id);
      for (std::size_t i = 0; i < sv.size(); ++i) gs[i] += 3.0 * sv[i] * g;
    });
    return ops::add(value, bad);
  };
  return finite_difference_check(model.parameters(), loss, options);
}

}  // namespace gerl
