#include "gerl/synth.hpp"

#include <algorithm>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <random>
#include <sstream>
#include <unordered_set>

#include "gerl/error.hpp"

namespace gerl {

void SynthConfig::validate() const {
  auto need = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError("synth: " + what);
  };
  need(n_users > 0 && n_news > 0 && n_topics > 0 && n_communities > 0, "all counts must be positive");
  need(n_communities <= n_topics, "more communities than topics");
  need(vocab_size >= n_topics, "vocab_size must give every topic at least one word");
  need(title_min > 0 && title_min <= title_max, "title length range is empty");
  need(history_min <= history_max, "history length range is empty");
  need(history_max <= n_news, "history longer than the catalogue");
  need(impressions_per_user > 0, "impressions_per_user must be positive");
  need(candidates >= 2 && candidates <= n_news, "candidates must lie in [2, n_news]");
  need(clicks_per_impression > 0 && clicks_per_impression < candidates,
       "clicks_per_impression must leave at least one unclicked candidate");
  need(cold_fraction >= 0 && cold_fraction < 1, "cold_fraction must lie in [0, 1)");
  need(gamma >= 0 && affinity_noise >= 0, "gamma and affinity_noise must be non-negative");
  need(topic_purity >= 0 && topic_purity <= 1, "topic_purity must lie in [0, 1]");
  need(days > 7 || cold_final_week_impressions == 0, "cold users need more than 7 days");
}

#define GERL_SYNTH_FIELDS(X)                                                                                   \
  X(n_users) X(n_news) X(n_topics) X(n_communities) X(vocab_size) X(title_min) X(title_max) X(gamma)           \
  X(affinity_noise) X(topic_purity) X(cold_fraction) X(history_min) X(history_max) X(impressions_per_user)                     \
  X(cold_impressions_per_user) X(cold_final_week_impressions) X(candidates) X(clicks_per_impression) X(days) X(start_time) X(seed)

void to_json(nlohmann::json& j, const SynthConfig& c) {
  j = nlohmann::json::object();
#define X(f) j[#f] = c.f;
  GERL_SYNTH_FIELDS(X)
#undef X
}

void from_json(const nlohmann::json& j, SynthConfig& c) {
#define X(f) \
  if (j.contains(#f)) j.at(#f).get_to(c.f);
  GERL_SYNTH_FIELDS(X)
#undef X
}

double SynthCorpus::true_score(std::size_t user, std::size_t news_index) const {
  return config.gamma * users.at(user).affinity.at(news.at(news_index).latent_topic);
}

namespace {

std::string padded(const char* prefix, std::size_t value, int width) {
  std::ostringstream out;
  out << prefix << std::setw(width) << std::setfill('0') << value;
  return out.str();
}

int digits(std::size_t n) { return static_cast<int>(std::to_string(n).size()); }

std::string iso_time(std::int64_t t) {
  std::time_t tt = static_cast<std::time_t>(t);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// k distinct indices from [0, n).
std::vector<std::size_t> draw_distinct(std::size_t n, std::size_t k, std::mt19937_64& rng) {
  std::vector<std::size_t> picked;
  std::unordered_set<std::size_t> seen;
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  while (picked.size() < k) {
    auto v = pick(rng);
    if (seen.insert(v).second) picked.push_back(v);
  }
  return picked;
}

// Index into `slate` chosen with probability ∝ exp(logit), skipping taken slots.
std::size_t softmax_pick(const std::vector<double>& logits, const std::vector<bool>& taken, std::mt19937_64& rng) {
  double top = -INFINITY;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (!taken[i]) top = std::max(top, logits[i]);
  }
  std::vector<double> w(logits.size(), 0.0);
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (!taken[i]) w[i] = std::exp(logits[i] - top);
  }
  std::discrete_distribution<std::size_t> dist(w.begin(), w.end());
  return dist(rng);
}

}  // namespace

SynthCorpus generate_synth(const SynthConfig& config) {
  config.validate();
  std::mt19937_64 rng(config.seed);
  SynthCorpus c;
  c.config = config;

  for (std::size_t t = 0; t < config.n_topics; ++t) c.topics.push_back(padded("topic", t, digits(config.n_topics)));
  const std::size_t pool = config.vocab_size / config.n_topics;
  const int word_digits = digits(pool);

  std::uniform_int_distribution<std::size_t> topic_dist(0, config.n_topics - 1);
  std::uniform_int_distribution<std::size_t> title_dist(config.title_min, config.title_max);
  std::uniform_int_distribution<std::size_t> word_dist(0, pool - 1);
  std::bernoulli_distribution pure(config.topic_purity);
  for (std::size_t n = 0; n < config.n_news; ++n) {
    SynthNews item;
    item.id = padded("N", n + 1, digits(config.n_news));
    item.latent_topic = topic_dist(rng);
    const std::size_t other = topic_dist(rng);
    item.topic = pure(rng) ? item.latent_topic : other;
    const std::size_t len = title_dist(rng);
    for (std::size_t w = 0; w < len; ++w) {
      item.title.push_back(c.topics[item.topic] + padded("w", word_dist(rng), word_digits));
    }
    c.news.push_back(std::move(item));
  }

  const auto n_cold = static_cast<std::size_t>(std::llround(config.cold_fraction * static_cast<double>(config.n_users)));
  std::vector<std::size_t> order(config.n_users);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<bool> cold(config.n_users, false);
  for (std::size_t i = 0; i < n_cold; ++i) cold[order[i]] = true;

  std::normal_distribution<double> noise(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> community_dist(0, config.n_communities - 1);
  for (std::size_t u = 0; u < config.n_users; ++u) {
    SynthUser user;
    user.id = padded("U", u + 1, digits(config.n_users));
    user.community = community_dist(rng);
    user.cold = cold[u];
    for (std::size_t t = 0; t < config.n_topics; ++t) {
      const double base = (t % config.n_communities == user.community) ? 1.0 : 0.0;
      user.affinity.push_back(base + config.affinity_noise * noise(rng));
    }
    c.users.push_back(std::move(user));
  }

  auto logits_for = [&](std::size_t u, const std::vector<std::size_t>& slate) {
    std::vector<double> logits;
    for (auto n : slate) logits.push_back(c.true_score(u, n));
    return logits;
  };

  std::uniform_int_distribution<std::size_t> history_dist(config.history_min, config.history_max);
  for (std::size_t u = 0; u < config.n_users; ++u) {
    if (c.users[u].cold) continue;
    const std::size_t len = history_dist(rng);
    std::unordered_set<std::size_t> seen;
    std::size_t attempts = 0;
    while (c.users[u].history.size() < len && attempts++ < 50 * (len + 1)) {
      auto slate = draw_distinct(config.n_news, config.candidates, rng);
      auto logits = logits_for(u, slate);
      const std::size_t pick = slate[softmax_pick(logits, std::vector<bool>(slate.size(), false), rng)];
      if (seen.insert(pick).second) c.users[u].history.push_back(pick);
    }
  }

  const std::int64_t span = static_cast<std::int64_t>(config.days) * 86400;
  const std::int64_t week = 7 * 86400;
  std::uniform_int_distribution<std::int64_t> any_time(0, span - 1);
  std::uniform_int_distribution<std::int64_t> early_time(0, std::max<std::int64_t>(span - week, 1) - 1);
  std::uniform_int_distribution<std::int64_t> late_time(std::max<std::int64_t>(span - week, 0), span - 1);
  for (std::size_t u = 0; u < config.n_users; ++u) {
    const bool is_cold = c.users[u].cold;
    const std::size_t early = is_cold ? config.cold_impressions_per_user : 0;
    const std::size_t count = is_cold ? early + config.cold_final_week_impressions : config.impressions_per_user;
    for (std::size_t i = 0; i < count; ++i) {
      SynthImpression imp;
      imp.user = u;
      auto& when = !is_cold ? any_time : (i < early ? early_time : late_time);
      imp.timestamp = config.start_time + when(rng);
      imp.candidates = draw_distinct(config.n_news, config.candidates, rng);
      imp.labels.assign(imp.candidates.size(), 0);
      auto logits = logits_for(u, imp.candidates);
      std::vector<bool> taken(imp.candidates.size(), false);
      for (std::size_t k = 0; k < config.clicks_per_impression; ++k) {
        const std::size_t pick = softmax_pick(logits, taken, rng);
        taken[pick] = true;
        imp.labels[pick] = 1;
      }
      c.impressions.push_back(std::move(imp));
    }
  }
  std::stable_sort(c.impressions.begin(), c.impressions.end(),
                   [](const auto& a, const auto& b) { return a.timestamp < b.timestamp; });
  for (std::size_t i = 0; i < c.impressions.size(); ++i) c.impressions[i].id = std::to_string(i + 1);
  return c;
}

void write_synth(const SynthCorpus& c, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
    return out;
  };

  {
    auto out = open("news.tsv");
    for (const auto& n : c.news) {
      out << n.id << '\t' << c.topics[n.topic] << '\t';
      for (std::size_t w = 0; w < n.title.size(); ++w) out << (w ? " " : "") << n.title[w];
      out << '\n';
    }
  }
  {
    auto out = open("behaviors.tsv");
    for (const auto& imp : c.impressions) {
      const auto& user = c.users[imp.user];
      out << imp.id << '\t' << user.id << '\t' << iso_time(imp.timestamp) << '\t';
      for (std::size_t h = 0; h < user.history.size(); ++h) out << (h ? " " : "") << c.news[user.history[h]].id;
      out << '\t';
      for (std::size_t k = 0; k < imp.candidates.size(); ++k) {
        out << (k ? " " : "") << c.news[imp.candidates[k]].id << '-' << static_cast<int>(imp.labels[k]);
      }
      out << '\n';
    }
  }
  {
    nlohmann::json j;
    j["config"] = c.config;
    j["topics"] = c.topics;
    j["news"] = nlohmann::json::array();
    for (const auto& n : c.news) j["news"].push_back({{"news", n.id}, {"latent_topic", n.latent_topic}});
    j["users"] = nlohmann::json::array();
    for (const auto& u : c.users) {
      j["users"].push_back({{"user", u.id}, {"community", u.community}, {"cold", u.cold}, {"affinity", u.affinity}});
    }
    auto out = open("affinities.json");
    out << j.dump(2) << '\n';
  }
}

}  // namespace gerl
