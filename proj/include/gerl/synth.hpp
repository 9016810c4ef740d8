#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace gerl {

// Planted-preference corpus. Users belong to communities; topic t belongs to
// community t mod n_communities. A user's affinity for a topic is 1 for its own
// community's topics and 0 otherwise, plus per-user Gaussian noise. Every click
// picks one item from a random slate with probability ∝ exp(γ · affinity of
// the item's latent topic). The topic label and title words written out match
// the latent topic with probability topic_purity and come from a uniformly
// drawn topic otherwise, so content reveals preferences only partly while
// co-clicks reveal them well.
// Warm users get a click history and impressions spread over the whole period.
// Cold users get no history, a few impressions before the final week and a
// few inside it, so their only collaborative signal is the handful of clicks
// they make before the final week.
struct SynthConfig {
  std::size_t n_users = 200;
  std::size_t n_news = 600;
  std::size_t n_topics = 16;
  std::size_t n_communities = 4;
  std::size_t vocab_size = 800;  // split evenly into disjoint per-topic pools
  std::size_t title_min = 5;
  std::size_t title_max = 10;
  double gamma = 6.0;
  double affinity_noise = 0.1;
  double topic_purity = 1.0;
  double cold_fraction = 0.3;
  std::size_t history_min = 5;
  std::size_t history_max = 20;
  std::size_t impressions_per_user = 8;
  std::size_t cold_impressions_per_user = 2;  // before the final week
  std::size_t cold_final_week_impressions = 2;
  std::size_t candidates = 5;
  std::size_t clicks_per_impression = 1;
  std::size_t days = 28;
  std::int64_t start_time = 1569888000;  // 2019-10-01T00:00:00Z
  std::uint64_t seed = 1;

  // Throws ConfigError on an infeasible combination.
  void validate() const;
};

void to_json(nlohmann::json& j, const SynthConfig& c);
void from_json(const nlohmann::json& j, SynthConfig& c);

struct SynthNews {
  std::string id;
  std::size_t topic = 0;         // as written to news.tsv
  std::size_t latent_topic = 0;  // drives clicks
  std::vector<std::string> title;
};

struct SynthUser {
  std::string id;
  std::size_t community = 0;
  bool cold = false;
  std::vector<double> affinity;  // per topic
  std::vector<std::size_t> history;  // news indices, oldest first
};

struct SynthImpression {
  std::string id;
  std::size_t user = 0;
  std::int64_t timestamp = 0;
  std::vector<std::size_t> candidates;  // news indices
  std::vector<std::uint8_t> labels;
};

struct SynthCorpus {
  SynthConfig config;
  std::vector<std::string> topics;
  std::vector<SynthNews> news;
  std::vector<SynthUser> users;
  std::vector<SynthImpression> impressions;  // ascending timestamp

  // γ · affinity of the user for the news' latent topic.
  double true_score(std::size_t user, std::size_t news) const;
};

SynthCorpus generate_synth(const SynthConfig& config);

// news.tsv, behaviors.tsv and affinities.json in `dir` (created if needed).
void write_synth(const SynthCorpus& corpus, const std::filesystem::path& dir);

}  // namespace gerl
