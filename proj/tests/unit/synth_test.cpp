#include <gtest/gtest.h>

#include <map>
#include <set>

#include "gerl/corpus.hpp"
#include "gerl/error.hpp"
#include "gerl/synth.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace gerl;

namespace {

SynthConfig small() {
  SynthConfig c;
  c.n_users = 60;
  c.n_news = 120;
  c.vocab_size = 160;
  return c;
}

}  // namespace

TEST(Synth, SameSeedSameBytes) {
  test::TempDir a, b;
  write_synth(generate_synth(small()), a.path());
  write_synth(generate_synth(small()), b.path());
  for (const char* f : {"news.tsv", "behaviors.tsv", "affinities.json"}) {
    EXPECT_EQ(test::read_file(a / f), test::read_file(b / f)) << f;
  }
  auto other = small();
  other.seed = 2;
  test::TempDir c;
  write_synth(generate_synth(other), c.path());
  EXPECT_NE(test::read_file(a / "behaviors.tsv"), test::read_file(c / "behaviors.tsv"));
}

TEST(Synth, ParsesThroughCorpusLoaders) {
  test::TempDir dir;
  auto corpus = generate_synth(small());
  write_synth(corpus, dir.path());
  auto news = load_news(dir / "news.tsv", 30);
  EXPECT_EQ(news.size(), corpus.news.size());
  auto log = load_behaviors(dir / "behaviors.tsv", news, 50);
  ASSERT_EQ(log.impressions.size(), corpus.impressions.size());
  EXPECT_EQ(log.dropped_history, 0u);
  for (std::size_t i = 0; i < log.impressions.size(); ++i) {
    const auto& parsed = log.impressions[i];
    const auto& truth = corpus.impressions[i];
    EXPECT_EQ(parsed.timestamp, truth.timestamp);
    EXPECT_EQ(parsed.candidates.size(), truth.candidates.size());
    EXPECT_EQ(parsed.positives(), corpus.config.clicks_per_impression);
    EXPECT_EQ(log.users.name(parsed.user), corpus.users[truth.user].id);
    if (i) {
      EXPECT_LE(corpus.impressions[i - 1].timestamp, truth.timestamp);
    }
  }
}

TEST(Synth, TopicWordPoolsAreDisjoint) {
  auto corpus = generate_synth(small());
  std::map<std::string, std::size_t> owner;
  for (const auto& n : corpus.news) {
    for (const auto& w : n.title) {
      auto [it, fresh] = owner.emplace(w, n.topic);
      EXPECT_EQ(it->second, n.topic) << w;
    }
  }
}

TEST(Synth, ColdUsersHaveNoHistoryButPreTestClicks) {
  auto config = small();
  auto corpus = generate_synth(config);
  std::size_t cold = 0;
  const std::int64_t final_week = config.start_time + static_cast<std::int64_t>(config.days - 7) * 86400;
  std::vector<std::size_t> early(config.n_users, 0);
  for (const auto& imp : corpus.impressions)
    if (imp.timestamp < final_week) ++early[imp.user];
  for (std::size_t u = 0; u < corpus.users.size(); ++u) {
    const auto& user = corpus.users[u];
    EXPECT_EQ(user.affinity.size(), config.n_topics);
    if (!user.cold) {
      EXPECT_GE(user.history.size(), config.history_min);
      continue;
    }
    ++cold;
    EXPECT_TRUE(user.history.empty());
    EXPECT_EQ(early[u], config.cold_impressions_per_user);
  }
  EXPECT_EQ(cold, 18u);
}

TEST(Synth, PurityControlsWrittenTopics) {
  auto config = small();
  config.topic_purity = 1.0;
  for (const auto& n : generate_synth(config).news) EXPECT_EQ(n.topic, n.latent_topic);
  config.topic_purity = 0.0;
  std::size_t same = 0;
  auto corpus = generate_synth(config);
  for (const auto& n : corpus.news) same += n.topic == n.latent_topic;
  EXPECT_LT(same, corpus.news.size() / 4);
}

TEST(Synth, OracleScorerRecoversSharpPreferences) {
  auto config = small();
  config.gamma = 100.0;
  auto corpus = generate_synth(config);
  double total = 0;
  for (const auto& imp : corpus.impressions) {
    std::vector<double> s;
    std::vector<int> labels(imp.labels.begin(), imp.labels.end());
    for (auto n : imp.candidates) s.push_back(corpus.true_score(imp.user, n));
    total += test::brute_auc(s, labels);
  }
  EXPECT_GT(total / static_cast<double>(corpus.impressions.size()), 0.95);
}

TEST(Synth, FlatPreferencesGiveChanceClicks) {
  auto config = small();
  config.gamma = 0.0;
  config.n_users = 400;
  auto corpus = generate_synth(config);
  // With γ = 0 the affinity carries no information about clicks.
  std::uniform_real_distribution<double> d;
  double total = 0;
  for (const auto& imp : corpus.impressions) {
    std::vector<double> s;
    std::vector<int> labels(imp.labels.begin(), imp.labels.end());
    for (auto n : imp.candidates) s.push_back(corpus.users[imp.user].affinity[corpus.news[n].latent_topic]);
    total += test::brute_auc(s, labels);
  }
  EXPECT_NEAR(total / static_cast<double>(corpus.impressions.size()), 0.5, 0.03);
}

TEST(Synth, InfeasibleConfigsAreRejected) {
  auto bad = small();
  bad.candidates = bad.n_news + 1;
  EXPECT_THROW(generate_synth(bad), ConfigError);
  bad = small();
  bad.cold_fraction = 1.0;
  EXPECT_THROW(generate_synth(bad), ConfigError);
  bad = small();
  bad.clicks_per_impression = bad.candidates;
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = small();
  bad.topic_purity = 1.5;
  EXPECT_THROW(bad.validate(), ConfigError);
}

TEST(Synth, ConfigJsonRoundTrip) {
  auto c = small();
  c.topic_purity = 0.3;
  c.seed = 99;
  auto back = nlohmann::json(c).get<SynthConfig>();
  EXPECT_EQ(nlohmann::json(back), nlohmann::json(c));
}
