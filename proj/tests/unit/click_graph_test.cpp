#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <numeric>
#include <random>

#include "gerl/click_graph.hpp"
#include "oracles.hpp"

using namespace gerl;

namespace {

Impression impression(std::uint32_t user, std::vector<std::uint32_t> history,
                      std::vector<std::pair<std::uint32_t, int>> candidates) {
  Impression imp;
  imp.user = user;
  imp.history = std::move(history);
  for (auto [n, l] : candidates) imp.candidates.push_back({n, static_cast<std::uint8_t>(l)});
  return imp;
}

std::vector<std::uint32_t> padded(std::vector<std::uint32_t> ids, std::size_t degree) {
  ids.resize(degree, 0);
  return ids;
}

std::vector<std::uint32_t> row(const NeighborTable& t, std::size_t r) {
  auto s = t.ids(r);
  return {s.begin(), s.end()};
}

BipartiteGraph from_clicks(const test::RandomClicks& g) {
  BipartiteGraph graph(g.n_users, g.n_news);
  for (std::uint32_t u = 0; u < g.clicks.size(); ++u)
    for (auto n : g.clicks[u]) graph.add_click(u, n);
  graph.finalize();
  return graph;
}

// u1-{n1,n2}, u2-{n1,n4,n5}
BipartiteGraph figure_graph() {
  std::vector<Impression> train = {impression(1, {1}, {{2, 1}, {3, 0}}), impression(2, {1, 4}, {{5, 1}, {2, 0}})};
  return build_bipartite(train, 3, 6);
}

}  // namespace

TEST(BuildBipartite, EdgesFromHistoryAndPositives) {
  auto g = build_bipartite({impression(2, {1, 4}, {{5, 1}, {9, 0}})}, 3, 10);
  EXPECT_EQ(g.edge_count(), 3u);
  auto clicked = g.clicked_by(2);
  EXPECT_EQ(std::vector<std::uint32_t>(clicked.begin(), clicked.end()), (std::vector<std::uint32_t>{1, 4, 5}));
  EXPECT_FALSE(g.has_edge(2, 9));
  for (auto n : {1u, 4u, 5u}) {
    auto users = g.clickers_of(n);
    EXPECT_EQ(std::vector<std::uint32_t>(users.begin(), users.end()), (std::vector<std::uint32_t>{2}));
  }
}

TEST(BuildBipartite, UserWithoutClicksIsIsolated) {
  auto g = build_bipartite({impression(1, {}, {{3, 0}})}, 2, 4);
  EXPECT_EQ(g.edge_count(), 0u);
  EXPECT_TRUE(g.clicked_by(1).empty());
  EXPECT_TRUE(g.clicked_by(7).empty());
}

TEST(BuildBipartite, DuplicatesCollapse) {
  auto g = build_bipartite({impression(1, {2, 2}, {{2, 1}}), impression(1, {2}, {{3, 1}})}, 2, 4);
  EXPECT_EQ(g.edge_count(), 2u);
  EXPECT_EQ(g.common_clicks(1, 1), 2u);
}

TEST(NeighborUsers, FigurePattern) {
  auto g = figure_graph();
  EXPECT_EQ(padded(neighbor_users(g, 1, 15), 15), padded({2}, 15));
  EXPECT_EQ(neighbor_users(g, 2, 15), (std::vector<std::uint32_t>{1}));
  EXPECT_TRUE(neighbor_users(g, 99, 15).empty());
}

TEST(NeighborUsers, RanksByCommonCountThenIndex) {
  BipartiteGraph g(4, 5);
  for (std::uint32_t n : {1, 2, 3}) g.add_click(1, n);
  g.add_click(2, 1);
  for (std::uint32_t n : {1, 2, 3, 4}) g.add_click(3, n);
  g.finalize();
  EXPECT_EQ(neighbor_users(g, 1, 15), (std::vector<std::uint32_t>{3, 2}));
  EXPECT_EQ(g.common_clicks(1, 3), g.common_clicks(3, 1));
}

TEST(NeighborUsers, TiesKeepSmallestIndices) {
  BipartiteGraph g(22, 2);
  for (std::uint32_t u = 1; u <= 21; ++u) g.add_click(u, 1);
  g.finalize();
  auto n = neighbor_users(g, 21, 15);
  std::vector<std::uint32_t> expected(15);
  std::iota(expected.begin(), expected.end(), 1u);
  EXPECT_EQ(n, expected);
}

TEST(NeighborUsers, MatchesBruteForceOnRandomGraphs) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    auto clicks = test::random_clicks(rng);
    auto g = from_clicks(clicks);
    const std::size_t degree = 1 + rng() % 15;
    auto table = build_user_neighbors(g, degree);
    for (std::uint32_t u = 0; u < clicks.n_users; ++u) {
      auto expected = test::brute_neighbor_users(clicks.clicks, u, degree);
      ASSERT_EQ(row(table, u), expected) << "trial " << trial << " user " << u;
      for (std::size_t s = 0; s < degree; ++s) EXPECT_EQ(table.mask(u)[s], expected[s] != 0 ? 1 : 0);
    }
  }
}

TEST(NeighborNews, FigurePattern) {
  auto g = figure_graph();
  std::mt19937_64 rng(1);
  auto n5 = neighbor_news(g, 5, 15, rng);
  EXPECT_EQ(n5, (std::vector<std::uint32_t>{1, 4}));

  BipartiteGraph only(3, 6);
  only.add_click(2, 1);
  only.add_click(2, 5);
  only.finalize();
  NeighborTable table = build_news_neighbors(only, 15, rng);
  EXPECT_EQ(row(table, 5), padded({1}, 15));
  EXPECT_EQ(table.valid(5), 1u);
  EXPECT_EQ(table.valid(3), 0u);
}

TEST(NeighborNews, SmallPoolKeptWhole) {
  BipartiteGraph g(2, 5);
  for (std::uint32_t n = 1; n <= 4; ++n) g.add_click(1, n);
  g.finalize();
  std::mt19937_64 rng(2);
  EXPECT_EQ(neighbor_news(g, 2, 15, rng), (std::vector<std::uint32_t>{1, 3, 4}));
}

TEST(NeighborNews, LargePoolSamplesDeterministicallyWithoutReplacement) {
  BipartiteGraph g(3, 42);
  for (std::uint32_t n = 1; n <= 40; ++n) g.add_click(n % 2 + 1, n);
  g.add_click(1, 41);
  g.add_click(2, 41);
  g.finalize();
  std::mt19937_64 a(5), b(5);
  auto first = neighbor_news(g, 41, 15, a);
  EXPECT_EQ(first, neighbor_news(g, 41, 15, b));
  ASSERT_EQ(first.size(), 15u);
  auto sorted = first;
  std::sort(sorted.begin(), sorted.end());
  EXPECT_EQ(std::adjacent_find(sorted.begin(), sorted.end()), sorted.end());
  EXPECT_EQ(std::count(first.begin(), first.end(), 41u), 0);
}

TEST(NeighborTable, PaddingFollowsValidSlotsAndNoSelfLoops) {
  std::mt19937_64 rng(21);
  auto clicks = test::random_clicks(rng);
  auto g = from_clicks(clicks);
  auto users = build_user_neighbors(g, 6);
  auto news = build_news_neighbors(g, 6, rng);
  for (const auto* t : {&users, &news}) {
    for (std::size_t r = 0; r < t->rows(); ++r) {
      const std::size_t v = t->valid(r);
      for (std::size_t s = 0; s < t->degree(); ++s) {
        EXPECT_EQ(t->mask(r)[s], s < v ? 1 : 0);
        if (s >= v) {
          EXPECT_EQ(t->ids(r)[s], 0u);
        } else {
          EXPECT_NE(t->ids(r)[s], r);
        }
      }
    }
  }
}

TEST(NeighborTable, DumpSkipsPaddingRow) {
  NeighborTable t(3, 2);
  std::vector<std::uint32_t> r1 = {2}, r2 = {1};
  t.set_row(1, r1);
  t.set_row(2, r2);
  auto path = std::filesystem::temp_directory_path() / "gerl_dump_test.tsv";
  dump_neighbor_table(path, t, [](std::uint32_t i) { return "x" + std::to_string(i); });
  std::ifstream in(path);
  std::string all((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  EXPECT_EQ(all, "x1\tx2\nx2\tx1\n");
  std::filesystem::remove(path);
}
