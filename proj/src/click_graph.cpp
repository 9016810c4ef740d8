#include "gerl/click_graph.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>

#include "gerl/error.hpp"

namespace gerl {

BipartiteGraph::BipartiteGraph(std::size_t n_users, std::size_t n_news) : user_news_(n_users), news_users_(n_news) {}

void BipartiteGraph::add_click(std::uint32_t user, std::uint32_t news) {
  if (user == 0 || news == 0) throw ContractError("click graph: index 0 is reserved");
  if (user >= user_news_.size() || news >= news_users_.size()) {
    throw ContractError("click graph: node outside graph");
  }
  user_news_[user].push_back(news);
  news_users_[news].push_back(user);
}

void BipartiteGraph::finalize() {
  auto tidy = [](std::vector<std::uint32_t>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  };
  for (auto& v : user_news_) tidy(v);
  for (auto& v : news_users_) tidy(v);
}

std::size_t BipartiteGraph::edge_count() const {
  std::size_t n = 0;
  for (const auto& v : user_news_) n += v.size();
  return n;
}

std::span<const std::uint32_t> BipartiteGraph::clicked_by(std::uint32_t user) const {
  if (user >= user_news_.size()) return {};
  return user_news_[user];
}

std::span<const std::uint32_t> BipartiteGraph::clickers_of(std::uint32_t news) const {
  if (news >= news_users_.size()) return {};
  return news_users_[news];
}

bool BipartiteGraph::has_edge(std::uint32_t user, std::uint32_t news) const {
  const auto adj = clicked_by(user);
  return std::binary_search(adj.begin(), adj.end(), news);
}

std::size_t BipartiteGraph::common_clicks(std::uint32_t a, std::uint32_t b) const {
  const auto x = clicked_by(a);
  const auto y = clicked_by(b);
  std::size_t n = 0;
  std::size_t i = 0, j = 0;
  while (i < x.size() && j < y.size()) {
    if (x[i] < y[j]) {
      ++i;
    } else if (y[j] < x[i]) {
      ++j;
    } else {
      ++n;
      ++i;
      ++j;
    }
  }
  return n;
}

BipartiteGraph build_bipartite(const std::vector<Impression>& train, std::size_t n_users, std::size_t n_news) {
  BipartiteGraph graph(n_users, n_news);
  for (const auto& imp : train) {
    for (auto n : imp.history) graph.add_click(imp.user, n);
    for (const auto& c : imp.candidates) {
      if (c.label == 1) graph.add_click(imp.user, c.news);
    }
  }
  graph.finalize();
  return graph;
}

NeighborTable::NeighborTable(std::size_t rows, std::size_t degree)
    : rows_(rows), degree_(degree), ids_(rows * degree, 0), mask_(rows * degree, 0) {}

std::span<const std::uint32_t> NeighborTable::ids(std::size_t row) const {
  return std::span<const std::uint32_t>(ids_).subspan(row * degree_, degree_);
}

std::span<const std::uint8_t> NeighborTable::mask(std::size_t row) const {
  return std::span<const std::uint8_t>(mask_).subspan(row * degree_, degree_);
}

std::size_t NeighborTable::valid(std::size_t row) const {
  const auto m = mask(row);
  return static_cast<std::size_t>(std::count(m.begin(), m.end(), std::uint8_t{1}));
}

void NeighborTable::set_row(std::size_t row, std::span<const std::uint32_t> neighbors) {
  if (row >= rows_) throw ContractError("neighbor table: row out of range");
  if (neighbors.size() > degree_) throw ContractError("neighbor table: more neighbours than slots");
  const std::size_t base = row * degree_;
  for (std::size_t s = 0; s < degree_; ++s) {
    const bool used = s < neighbors.size();
    ids_[base + s] = used ? neighbors[s] : 0;
    mask_[base + s] = used ? 1 : 0;
  }
}

namespace {

// `count` must be all zero on entry and is left all zero.
std::vector<std::uint32_t> rank_neighbor_users(const BipartiteGraph& graph, std::uint32_t user, std::size_t degree,
                                               std::vector<std::uint32_t>& count) {
  if (user == 0 || user >= graph.user_count()) return {};
  std::vector<std::uint32_t> touched;
  for (auto n : graph.clicked_by(user)) {
    for (auto v : graph.clickers_of(n)) {
      if (v == user) continue;
      if (count[v]++ == 0) touched.push_back(v);
    }
  }
  std::sort(touched.begin(), touched.end(), [&](std::uint32_t a, std::uint32_t b) {
    return count[a] != count[b] ? count[a] > count[b] : a < b;
  });
  for (auto v : touched) count[v] = 0;
  if (touched.size() > degree) touched.resize(degree);
  return touched;
}

}  // namespace

std::vector<std::uint32_t> neighbor_users(const BipartiteGraph& graph, std::uint32_t user, std::size_t degree) {
  std::vector<std::uint32_t> count(graph.user_count(), 0);
  return rank_neighbor_users(graph, user, degree, count);
}

std::vector<std::uint32_t> neighbor_news(const BipartiteGraph& graph, std::uint32_t news, std::size_t degree,
                                         std::mt19937_64& rng) {
  if (news == 0 || news >= graph.news_count()) return {};
  std::vector<std::uint32_t> pool;
  for (auto u : graph.clickers_of(news)) {
    for (auto n : graph.clicked_by(u)) {
      if (n != news) pool.push_back(n);
    }
  }
  std::sort(pool.begin(), pool.end());
  pool.erase(std::unique(pool.begin(), pool.end()), pool.end());
  if (pool.size() <= degree) return pool;
  // Partial Fisher-Yates.
  for (std::size_t i = 0; i < degree; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }
  pool.resize(degree);
  return pool;
}

NeighborTable build_user_neighbors(const BipartiteGraph& graph, std::size_t degree) {
  NeighborTable table(graph.user_count(), degree);
  std::vector<std::uint32_t> count(graph.user_count(), 0);
  for (std::uint32_t u = 1; u < graph.user_count(); ++u) {
    table.set_row(u, rank_neighbor_users(graph, u, degree, count));
  }
  return table;
}

NeighborTable build_news_neighbors(const BipartiteGraph& graph, std::size_t degree, std::mt19937_64& rng) {
  NeighborTable table(graph.news_count(), degree);
  for (std::uint32_t n = 1; n < graph.news_count(); ++n) table.set_row(n, neighbor_news(graph, n, degree, rng));
  return table;
}

void dump_neighbor_table(const std::filesystem::path& path, const NeighborTable& table,
                         const std::function<std::string(std::uint32_t)>& name) {
  std::ofstream out(path, std::ios::binary);
  for (std::size_t r = 1; r < table.rows(); ++r) {
    out << name(static_cast<std::uint32_t>(r)) << '\t';
    const auto ids = table.ids(r);
    const auto mask = table.mask(r);
    bool first = true;
    for (std::size_t s = 0; s < ids.size(); ++s) {
      if (!mask[s]) continue;
      if (!first) out << ' ';
      out << name(ids[s]);
      first = false;
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

}  // namespace gerl
