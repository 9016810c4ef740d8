#include "gerl/model_config.hpp"

#include "gerl/error.hpp"

namespace gerl {

namespace {

struct AblationName {
  const char* name;
  bool Ablation::*flag;
};

constexpr AblationName kAblationNames[] = {
    {"no-neighbor-user", &Ablation::drop_user_neighbors},
    {"no-neighbor-news-id", &Ablation::drop_news_neighbor_ids},
    {"no-neighbor-news-sem", &Ablation::drop_news_neighbor_semantics},
    {"avgpool-self", &Ablation::avgpool_self_attention},
    {"avgpool-word", &Ablation::avgpool_word_attention},
    {"avgpool-onehop", &Ablation::avgpool_one_hop},
    {"avgpool-twohop", &Ablation::avgpool_two_hop},
};

}  // namespace

void Ablation::enable(std::string_view name) {
  if (name == "no-two-hop") {
    drop_user_neighbors = drop_news_neighbor_ids = drop_news_neighbor_semantics = true;
    return;
  }
  for (const auto& entry : kAblationNames) {
    if (name == entry.name) {
      this->*entry.flag = true;
      return;
    }
  }
  throw ConfigError("unknown ablation '" + std::string(name) + "'");
}

std::vector<std::string> Ablation::names() const {
  std::vector<std::string> out;
  for (const auto& entry : kAblationNames) {
    if (this->*entry.flag) out.emplace_back(entry.name);
  }
  return out;
}

bool Ablation::any() const { return !names().empty(); }

void ModelConfig::validate() const {
  auto positive = [](std::size_t v, const char* name) {
    if (v == 0) throw ConfigError(std::string(name) + " must be positive");
  };
  positive(title_len, "title_len");
  positive(history_len, "history_len");
  positive(degree, "degree");
  positive(heads, "heads");
  positive(title_dim, "title_dim");
  positive(word_dim, "word_dim");
  positive(topic_dim, "topic_dim");
  positive(id_dim, "id_dim");
  positive(attention_dim, "attention_dim");
  positive(common_dim, "common_dim");
  positive(neg_ratio, "neg_ratio");
  positive(batch_size, "batch_size");
  positive(epochs, "epochs");
  if (title_dim % heads != 0) {
    throw ConfigError("heads (" + std::to_string(heads) + ") must divide title_dim (" + std::to_string(title_dim) +
                      ") so that every head has the same dimension");
  }
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout must lie in [0, 1)");
  if (!(learning_rate >= 0.0)) throw ConfigError("learning rate must be non-negative");
}

void to_json(nlohmann::json& j, const Ablation& a) { j = a.names(); }

void from_json(const nlohmann::json& j, Ablation& a) {
  a = Ablation{};
  for (const auto& name : j) a.enable(name.get<std::string>());
}

#define GERL_CONFIG_FIELDS(X) \
  X(title_len)                \
  X(history_len)              \
  X(degree)                   \
  X(heads)                    \
  X(title_dim)                \
  X(word_dim)                 \
  X(topic_dim)                \
  X(id_dim)                   \
  X(attention_dim)            \
  X(common_dim)               \
  X(neg_ratio)                \
  X(dropout)                  \
  X(batch_size)               \
  X(learning_rate)            \
  X(epochs)                   \
  X(seed)                     \
  X(ablation)

void to_json(nlohmann::json& j, const ModelConfig& c) {
  j = nlohmann::json::object();
#define X(field) j[#field] = c.field;
  GERL_CONFIG_FIELDS(X)
#undef X
  j["head_dim"] = c.head_dim();
}

void from_json(const nlohmann::json& j, ModelConfig& c) {
  c = ModelConfig{};
#define X(field) \
  if (j.contains(#field)) j.at(#field).get_to(c.field);
  GERL_CONFIG_FIELDS(X)
#undef X
}

std::vector<std::string> differing_fields(const ModelConfig& a, const ModelConfig& b) {
  std::vector<std::string> out;
#define X(field) \
  if (!(a.field == b.field)) out.emplace_back(#field);
  GERL_CONFIG_FIELDS(X)
#undef X
  return out;
}

#undef GERL_CONFIG_FIELDS

std::size_t Wiring::user_width(const ModelConfig& config) const {
  return config.news_dim() + config.id_dim + (user_neighbors ? config.id_dim : 0);
}

std::size_t Wiring::news_width(const ModelConfig& config) const {
  return (news_neighbor_semantics ? config.news_dim() : 0) + (news_neighbor_ids ? config.id_dim : 0) +
         config.news_dim();
}

Wiring apply_ablation(const ModelConfig& config) {
  const auto& a = config.ablation;
  Wiring w;
  w.user_neighbors = !a.drop_user_neighbors;
  w.news_neighbor_ids = !a.drop_news_neighbor_ids;
  w.news_neighbor_semantics = !a.drop_news_neighbor_semantics;
  w.self_attention = a.avgpool_self_attention ? Pooling::kAverage : Pooling::kAttention;
  w.word_attention = a.avgpool_word_attention ? Pooling::kAverage : Pooling::kAttention;
  w.one_hop = a.avgpool_one_hop ? Pooling::kAverage : Pooling::kAttention;
  w.two_hop = a.avgpool_two_hop ? Pooling::kAverage : Pooling::kAttention;
  return w;
}

}  // namespace gerl
