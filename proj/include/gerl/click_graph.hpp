#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "gerl/corpus.hpp"

namespace gerl {

// User–news click graph. Both adjacency directions are kept sorted and
// duplicate-free; index 0 on either side is the reserved padding node and has
// no edges.
class BipartiteGraph {
 public:
  BipartiteGraph() = default;
  BipartiteGraph(std::size_t n_users, std::size_t n_news);

  void add_click(std::uint32_t user, std::uint32_t news);
  // Sorts and deduplicates adjacency lists. Called by build_bipartite.
  void finalize();

  std::size_t user_count() const { return user_news_.size(); }
  std::size_t news_count() const { return news_users_.size(); }
  std::size_t edge_count() const;

  std::span<const std::uint32_t> clicked_by(std::uint32_t user) const;
  std::span<const std::uint32_t> clickers_of(std::uint32_t news) const;
  bool has_edge(std::uint32_t user, std::uint32_t news) const;

  // Number of news clicked by both users.
  std::size_t common_clicks(std::uint32_t a, std::uint32_t b) const;

 private:
  std::vector<std::vector<std::uint32_t>> user_news_;
  std::vector<std::vector<std::uint32_t>> news_users_;
};

// One edge per history entry and per positive candidate of every training
// impression. `n_users` / `n_news` include the reserved index 0.
BipartiteGraph build_bipartite(const std::vector<Impression>& train, std::size_t n_users, std::size_t n_news);

// Fixed-degree neighbour lists: `degree` slots per node, valid slots first,
// padded slots hold 0 with mask 0.
class NeighborTable {
 public:
  NeighborTable() = default;
  NeighborTable(std::size_t rows, std::size_t degree);

  std::size_t rows() const { return rows_; }
  std::size_t degree() const { return degree_; }
  std::span<const std::uint32_t> ids(std::size_t row) const;
  std::span<const std::uint8_t> mask(std::size_t row) const;
  std::size_t valid(std::size_t row) const;

  void set_row(std::size_t row, std::span<const std::uint32_t> neighbors);

 private:
  std::size_t rows_ = 0;
  std::size_t degree_ = 0;
  std::vector<std::uint32_t> ids_;
  Mask mask_;
};

// Users sharing at least one clicked news with `user`, ranked by the number of
// shared news (descending) then index (ascending), truncated to `degree`.
// Unknown or isolated users get an empty list.
std::vector<std::uint32_t> neighbor_users(const BipartiteGraph& graph, std::uint32_t user, std::size_t degree);

// Up to `degree` news sampled without replacement from the union of the
// clicked news of every user who clicked `news`, excluding `news` itself.
// The whole pool is kept (ascending) when it has at most `degree` entries.
std::vector<std::uint32_t> neighbor_news(const BipartiteGraph& graph, std::uint32_t news, std::size_t degree,
                                         std::mt19937_64& rng);

NeighborTable build_user_neighbors(const BipartiteGraph& graph, std::size_t degree);
// Rows are sampled in index order from a single generator.
NeighborTable build_news_neighbors(const BipartiteGraph& graph, std::size_t degree, std::mt19937_64& rng);

// "node_id TAB neighbour ids" per row, padded slots omitted. Row 0 is skipped.
void dump_neighbor_table(const std::filesystem::path& path, const NeighborTable& table,
                         const std::function<std::string(std::uint32_t)>& name);

}  // namespace gerl
