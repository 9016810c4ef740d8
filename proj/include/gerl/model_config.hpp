#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace gerl {

// Component removals and attention → average-pooling replacements.
struct Ablation {
  bool drop_user_neighbors = false;           // u_e^T
  bool drop_news_neighbor_ids = false;        // n_e^T
  bool drop_news_neighbor_semantics = false;  // n_t^T
  bool avgpool_self_attention = false;
  bool avgpool_word_attention = false;
  bool avgpool_one_hop = false;
  bool avgpool_two_hop = false;

  // Accepts the CLI names: no-two-hop, no-neighbor-user, no-neighbor-news-id,
  // no-neighbor-news-sem, avgpool-self, avgpool-word, avgpool-onehop,
  // avgpool-twohop. Throws ConfigError otherwise.
  void enable(std::string_view name);
  std::vector<std::string> names() const;
  bool any() const;
  bool no_two_hop() const {
    return drop_user_neighbors && drop_news_neighbor_ids && drop_news_neighbor_semantics;
  }

  bool operator==(const Ablation&) const = default;
};

struct ModelConfig {
  std::size_t title_len = 30;       // M
  std::size_t history_len = 50;     // K
  std::size_t degree = 15;          // D
  std::size_t heads = 8;            // N
  std::size_t title_dim = 128;      // N × head_dim
  std::size_t word_dim = 300;
  std::size_t topic_dim = 128;
  std::size_t id_dim = 128;         // Q
  std::size_t attention_dim = 128;  // hidden size of every additive attention
  std::size_t common_dim = 128;     // d
  std::size_t neg_ratio = 4;        // λ
  double dropout = 0.2;
  std::size_t batch_size = 128;
  double learning_rate = 1e-3;
  std::size_t epochs = 10;
  std::uint64_t seed = 42;
  Ablation ablation;

  std::size_t head_dim() const { return title_dim / heads; }
  std::size_t news_dim() const { return title_dim + topic_dim; }

  // Throws ConfigError naming the first violated constraint.
  void validate() const;

  bool operator==(const ModelConfig&) const = default;
};

void to_json(nlohmann::json& j, const Ablation& a);
void from_json(const nlohmann::json& j, Ablation& a);
void to_json(nlohmann::json& j, const ModelConfig& c);
void from_json(const nlohmann::json& j, ModelConfig& c);

// Names of the fields whose values differ.
std::vector<std::string> differing_fields(const ModelConfig& a, const ModelConfig& b);

enum class Pooling { kAttention, kAverage };

// Which representation components feed the final user / news vectors and how
// each list is pooled.
struct Wiring {
  bool user_neighbors = true;
  bool news_neighbor_semantics = true;
  bool news_neighbor_ids = true;
  Pooling self_attention = Pooling::kAttention;
  Pooling word_attention = Pooling::kAttention;
  Pooling one_hop = Pooling::kAttention;
  Pooling two_hop = Pooling::kAttention;

  // [u_t^O; u_e^O; u_e^T] minus dropped parts.
  std::size_t user_width(const ModelConfig& config) const;
  // [n_t^T; n_e^T; n_t^O] minus dropped parts.
  std::size_t news_width(const ModelConfig& config) const;
};

Wiring apply_ablation(const ModelConfig& config);

}  // namespace gerl
