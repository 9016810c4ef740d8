#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "gerl/corpus.hpp"
#include "support.hpp"

using namespace gerl;

namespace {

Impression at(std::int64_t ts, std::string id = "") {
  Impression imp;
  imp.impression_id = std::move(id);
  imp.timestamp = ts;
  imp.candidates.push_back({1, 1});
  return imp;
}

}  // namespace

TEST(Vocabulary, OrdersByFrequencyThenLexicographically) {
  auto v = Vocabulary::build({{"b", "a", "c"}, {"c", "b"}, {"c"}});
  ASSERT_EQ(v.size(), 5u);
  EXPECT_EQ(v.token(Vocabulary::kPad), "<pad>");
  EXPECT_EQ(v.index("c"), 2u);
  EXPECT_EQ(v.index("b"), 3u);
  EXPECT_EQ(v.index("a"), 4u);
  EXPECT_EQ(v.index("zzz"), Vocabulary::kUnk);
  EXPECT_EQ(v, Vocabulary::build({{"b", "a", "c"}, {"c", "b"}, {"c"}}));
}

TEST(Vocabulary, SaveLoadRoundTrip) {
  test::TempDir dir;
  auto v = Vocabulary::build({{"x", "y", "y"}});
  v.save(dir / "vocab.txt");
  EXPECT_EQ(Vocabulary::load(dir / "vocab.txt"), v);
  auto t = TopicIndex::build({"sports", "tech", "tech"});
  t.save(dir / "topics.txt");
  EXPECT_EQ(TopicIndex::load(dir / "topics.txt"), t);
  EXPECT_EQ(t.index("tech"), 0u);
  EXPECT_THROW(t.index("nope"), std::out_of_range);
}

TEST(LoadNews, PadsAndMasksTitles) {
  test::TempDir dir;
  test::write_file(dir / "news.tsv", "n1\tpolitics\tthe king was impeached\n");
  auto table = load_news(dir / "news.tsv", 30);
  ASSERT_EQ(table.size(), 1u);
  const auto& a = table[table.find("n1")];
  EXPECT_EQ(a.length(), 4u);
  ASSERT_EQ(a.title_tokens.size(), 30u);
  for (std::size_t i = 0; i < 30; ++i) {
    EXPECT_EQ(a.title_mask[i], i < 4 ? 1 : 0);
    if (!a.title_mask[i]) {
      EXPECT_EQ(a.title_tokens[i], Vocabulary::kPad);
    }
  }
  EXPECT_LT(a.topic_id, table.topics.size());
  EXPECT_EQ(table.find("missing"), 0u);
}

TEST(LoadNews, TruncatesLongTitles) {
  test::TempDir dir;
  std::string title;
  for (int i = 0; i < 31; ++i) title += (i ? " w" : "w") + std::to_string(i);
  test::write_file(dir / "news.tsv", "n1\tt\t" + title + "\n");
  auto table = load_news(dir / "news.tsv", 30);
  const auto& a = table[1];
  EXPECT_EQ(a.length(), 30u);
  EXPECT_EQ(table.words.token(a.title_tokens[29]), "w29");
  EXPECT_FALSE(table.words.contains("w30"));
}

TEST(LoadNews, MalformedRowReportsLine) {
  test::TempDir dir;
  test::write_file(dir / "news.tsv", "n1\tt\ta b\nn2\tonly-two\n");
  try {
    load_news(dir / "news.tsv", 30);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  test::write_file(dir / "dup.tsv", "n1\tt\ta\nn1\tt\tb\n");
  EXPECT_THROW(load_news(dir / "dup.tsv", 30), ParseError);
}

TEST(LoadNews, WriteParseRoundTrip) {
  test::TempDir dir;
  test::write_file(dir / "news.tsv", "n1\tsports\tgoal scored late\nn2\ttech\tnew chip\nn3\tsports\tlate goal\n");
  auto table = load_news(dir / "news.tsv", 5);
  write_news(dir / "again.tsv", table);
  auto again = load_news(dir / "again.tsv", 5, &table.words, &table.topics);
  ASSERT_EQ(again.articles.size(), table.articles.size());
  for (std::size_t i = 1; i < table.articles.size(); ++i) {
    EXPECT_EQ(again[i].title_tokens, table[i].title_tokens);
    EXPECT_EQ(again[i].title_mask, table[i].title_mask);
    EXPECT_EQ(again[i].topic_id, table[i].topic_id);
  }
}

TEST(LoadNews, GivenVocabularyMapsUnknownWordsToUnk) {
  test::TempDir dir;
  test::write_file(dir / "a.tsv", "n1\tt\tknown\n");
  auto base = load_news(dir / "a.tsv", 4);
  test::write_file(dir / "b.tsv", "n9\tt\tknown novel\n");
  auto t = load_news(dir / "b.tsv", 4, &base.words, &base.topics);
  EXPECT_EQ(t[1].title_tokens[1], Vocabulary::kUnk);
  test::write_file(dir / "c.tsv", "n9\tother\tknown\n");
  EXPECT_THROW(load_news(dir / "c.tsv", 4, &base.words, &base.topics), ParseError);
}

class BehaviorsTest : public ::testing::Test {
 protected:
  void SetUp() override {
    test::write_file(dir / "news.tsv", "n1\tt\ta\nn4\tt\tb\nn5\tt\tc\nn9\tt\td\n");
    news = load_news(dir / "news.tsv", 4);
  }
  BehaviorLog parse(const std::string& text, std::size_t k = 50) {
    test::write_file(dir / "b.tsv", text);
    return load_behaviors(dir / "b.tsv", news, k);
  }
  test::TempDir dir;
  NewsTable news;
};

TEST_F(BehaviorsTest, ParsesDocumentedExample) {
  auto log = parse("1\tu2\t1545696000\tn1 n4\tn5-1 n9-0\n");
  ASSERT_EQ(log.impressions.size(), 1u);
  const auto& imp = log.impressions[0];
  EXPECT_EQ(log.users.name(imp.user), "u2");
  EXPECT_EQ(imp.timestamp, 1545696000);
  EXPECT_EQ(imp.history, (std::vector<std::uint32_t>{news.find("n1"), news.find("n4")}));
  ASSERT_EQ(imp.candidates.size(), 2u);
  EXPECT_EQ(imp.candidates[0].news, news.find("n5"));
  EXPECT_EQ(imp.candidates[0].label, 1);
  EXPECT_EQ(imp.candidates[1].label, 0);
  EXPECT_EQ(imp.positives(), 1u);
}

TEST_F(BehaviorsTest, EmptyHistoryIsAllowed) {
  auto log = parse("1\tu2\t2019-11-15T08:00:00Z\t\tn5-1 n9-0\n");
  EXPECT_TRUE(log.impressions[0].history.empty());
  EXPECT_EQ(log.impressions[0].timestamp, 1573804800);
}

TEST_F(BehaviorsTest, BadLabelIsParseError) {
  EXPECT_THROW(parse("1\tu2\t0\tn1\tn5-2\n"), ParseError);
  EXPECT_THROW(parse("1\tu2\t0\tn1\n"), ParseError);
  EXPECT_THROW(parse("1\tu2\t0\tn1\tnX-1\n"), ParseError);
  EXPECT_THROW(parse("1\tu2\t0\tn1\t\n"), ParseError);
}

TEST_F(BehaviorsTest, UnknownHistoryDroppedAndCounted) {
  auto log = parse("1\tu2\t0\tn1 nX n4\tn5-1\n");
  EXPECT_EQ(log.impressions[0].history.size(), 2u);
  EXPECT_EQ(log.dropped_history, 1u);
}

TEST_F(BehaviorsTest, HistoryKeepsMostRecent) {
  auto log = parse("1\tu2\t0\tn1 n4 n5 n9\tn5-1\n", 2);
  EXPECT_EQ(log.impressions[0].history, (std::vector<std::uint32_t>{news.find("n5"), news.find("n9")}));
}

TEST(Timestamp, AcceptsEpochAndIso) {
  EXPECT_EQ(parse_timestamp("1545696000"), 1545696000);
  EXPECT_EQ(parse_timestamp("2018-12-25"), 1545696000);
  EXPECT_EQ(parse_timestamp("2018-12-25T00:00:10Z"), 1545696010);
  EXPECT_THROW(parse_timestamp("yesterday"), std::invalid_argument);
  EXPECT_THROW(parse_timestamp("2018-13-01"), std::invalid_argument);
}

TEST(SplitByTime, BoundaryGoesToTestAndValidationIsSized) {
  std::vector<Impression> imps;
  for (int i = 0; i < 100; ++i) imps.push_back(at(i, std::to_string(i)));
  imps.push_back(at(100, "edge"));
  std::mt19937_64 rng(1);
  auto s = split_by_time(imps, 100, 0.1, rng);
  EXPECT_EQ(s.validation.size(), 10u);
  EXPECT_EQ(s.train.size(), 90u);
  ASSERT_EQ(s.test.size(), 1u);
  EXPECT_EQ(s.test[0].impression_id, "edge");
  for (std::size_t i = 1; i < s.train.size(); ++i) EXPECT_LT(s.train[i - 1].timestamp, s.train[i].timestamp);

  std::mt19937_64 again(1);
  auto s2 = split_by_time(imps, 100, 0.1, again);
  for (std::size_t i = 0; i < s.validation.size(); ++i) {
    EXPECT_EQ(s.validation[i].impression_id, s2.validation[i].impression_id);
  }
}

TEST(SplitByTime, EmptySplitIsConfigError) {
  std::vector<Impression> imps;
  for (int i = 0; i < 20; ++i) imps.push_back(at(i));
  std::mt19937_64 rng(1);
  EXPECT_THROW(split_by_time(imps, 1000, 0.1, rng), ConfigError);
  EXPECT_THROW(split_by_time(imps, 10, 0.0, rng), ConfigError);
}

TEST(LastWeek, StartsSevenDaysBeforeTheLastImpression) {
  std::vector<Impression> imps = {at(0), at(30 * 86400)};
  EXPECT_EQ(last_week_start(imps), 23 * 86400 + 1);
}

TEST(PretrainedEmbeddings, CopiesKnownRowsAndSeedsTheRest) {
  test::TempDir dir;
  auto vocab = Vocabulary::build({{"alpha", "beta"}});
  test::write_file(dir / "glove.txt", "alpha 0.5 -1.5 2\nunused 1 1 1\n");
  std::mt19937_64 rng(3);
  std::size_t found = 0;
  auto e = load_pretrained_embeddings(dir / "glove.txt", vocab, 3, rng, &found);
  EXPECT_EQ(found, 1u);
  const auto a = vocab.index("alpha");
  EXPECT_EQ(e(a, 0), 0.5);
  EXPECT_EQ(e(a, 1), -1.5);
  EXPECT_EQ(e(a, 2), 2.0);
  for (std::size_t c = 0; c < 3; ++c) {
    EXPECT_EQ(e(Vocabulary::kPad, c), 0.0);
    EXPECT_GT(e(vocab.index("beta"), c), -0.1);
    EXPECT_LT(e(vocab.index("beta"), c), 0.1);
  }
  std::mt19937_64 rng2(3);
  auto e2 = load_pretrained_embeddings(dir / "glove.txt", vocab, 3, rng2);
  EXPECT_TRUE(std::equal(e.values().begin(), e.values().end(), e2.values().begin()));

  test::write_file(dir / "bad.txt", "alpha 1 2 3\nbeta 1 2\n");
  try {
    load_pretrained_embeddings(dir / "bad.txt", vocab, 3, rng);
    FAIL();
  } catch (const ParseError& err) {
    EXPECT_EQ(err.line(), 2u);
  }
}
