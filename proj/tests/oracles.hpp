#pragma once

// Independent reference implementations used by unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <set>
#include <utility>
#include <vector>

namespace gerl::test {

// Users ranked by shared clicks over every pair, from raw edge lists.
// Returns exactly `degree` slots, 0 padded.
inline std::vector<std::uint32_t> brute_neighbor_users(const std::vector<std::set<std::uint32_t>>& clicks,
                                                       std::uint32_t user, std::size_t degree) {
  std::vector<std::pair<std::size_t, std::uint32_t>> scored;
  if (user < clicks.size()) {
    for (std::uint32_t v = 1; v < clicks.size(); ++v) {
      if (v == user) continue;
      std::size_t common = 0;
      for (auto n : clicks[user])
        for (auto m : clicks[v])
          if (n == m) ++common;
      if (common > 0) scored.emplace_back(common, v);
    }
  }
  // Bubble sort keeps this obviously different from the library's ordering code.
  for (std::size_t i = 0; i < scored.size(); ++i)
    for (std::size_t j = 0; j + 1 < scored.size() - i; ++j) {
      auto& a = scored[j];
      auto& b = scored[j + 1];
      if (a.first < b.first || (a.first == b.first && a.second > b.second)) std::swap(a, b);
    }
  std::vector<std::uint32_t> out(degree, 0);
  for (std::size_t i = 0; i < degree && i < scored.size(); ++i) out[i] = scored[i].second;
  return out;
}

struct RandomClicks {
  std::size_t n_users = 0;  // including index 0
  std::size_t n_news = 0;
  std::vector<std::set<std::uint32_t>> clicks;  // per user
};

inline RandomClicks random_clicks(std::mt19937_64& rng, std::size_t max_users = 50, std::size_t max_news = 80) {
  RandomClicks g;
  g.n_users = 2 + rng() % (max_users - 1);
  g.n_news = 2 + rng() % (max_news - 1);
  g.clicks.resize(g.n_users);
  const std::size_t per_user = 1 + rng() % 6;
  for (std::uint32_t u = 1; u < g.n_users; ++u) {
    if (rng() % 10 == 0) continue;  // isolated
    const std::size_t k = rng() % (per_user + 1);
    for (std::size_t i = 0; i < k; ++i) g.clicks[u].insert(1 + static_cast<std::uint32_t>(rng() % (g.n_news - 1)));
  }
  return g;
}

// Pairwise-comparison AUC; ties count one half.
inline double brute_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  double wins = 0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < scores.size(); ++i)
    for (std::size_t j = 0; j < scores.size(); ++j)
      if (labels[i] == 1 && labels[j] == 0) {
        ++pairs;
        if (scores[i] > scores[j]) wins += 1;
        else if (scores[i] == scores[j]) wins += 0.5;
      }
  return wins / static_cast<double>(pairs);
}

// Position of each candidate after a stable descending sort, by counting.
inline std::vector<std::size_t> brute_ranks(const std::vector<double>& scores) {
  std::vector<std::size_t> rank(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    std::size_t r = 1;
    for (std::size_t j = 0; j < scores.size(); ++j)
      if (scores[j] > scores[i] || (scores[j] == scores[i] && j < i)) ++r;
    rank[i] = r;
  }
  return rank;
}

inline double brute_mrr(const std::vector<double>& scores, const std::vector<int>& labels) {
  auto rank = brute_ranks(scores);
  double sum = 0;
  int pos = 0;
  for (std::size_t i = 0; i < scores.size(); ++i)
    if (labels[i] == 1) {
      sum += 1.0 / static_cast<double>(rank[i]);
      ++pos;
    }
  return sum / pos;
}

inline double brute_ndcg(const std::vector<double>& scores, const std::vector<int>& labels, std::size_t k) {
  auto rank = brute_ranks(scores);
  double dcg = 0;
  int pos = 0;
  for (std::size_t i = 0; i < scores.size(); ++i)
    if (labels[i] == 1) {
      ++pos;
      if (rank[i] <= k) dcg += 1.0 / std::log2(static_cast<double>(rank[i]) + 1.0);
    }
  double ideal = 0;
  for (int i = 0; i < pos && static_cast<std::size_t>(i) < k; ++i) ideal += 1.0 / std::log2(i + 2.0);
  return dcg / ideal;
}

}  // namespace gerl::test
