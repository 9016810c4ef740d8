#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "gerl/tensor.hpp"

namespace gerl {

// Token ↔ index map. Index 0 is PAD and 1 is UNK; corpus tokens follow in
// order of descending frequency, ties broken lexicographically.
class Vocabulary {
 public:
  static constexpr std::uint32_t kPad = 0;
  static constexpr std::uint32_t kUnk = 1;

  Vocabulary();

  static Vocabulary build(const std::vector<std::vector<std::string>>& documents);
  // One token per line in index order, starting with the PAD and UNK labels.
  static Vocabulary load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  // UNK when absent.
  std::uint32_t index(std::string_view token) const;
  bool contains(std::string_view token) const;
  const std::string& token(std::uint32_t index) const { return tokens_.at(index); }
  std::size_t size() const { return tokens_.size(); }

  bool operator==(const Vocabulary& other) const { return tokens_ == other.tokens_; }

 private:
  void add(std::string token);

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::uint32_t> lookup_;
};

// Dense topic ids in order of descending frequency, ties lexicographic.
class TopicIndex {
 public:
  static TopicIndex build(const std::vector<std::string>& topics);
  static TopicIndex load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  // Throws std::out_of_range when unknown.
  std::uint32_t index(std::string_view topic) const;
  bool contains(std::string_view topic) const { return lookup_.contains(std::string(topic)); }
  const std::string& name(std::uint32_t index) const { return names_.at(index); }
  std::size_t size() const { return names_.size(); }

  bool operator==(const TopicIndex& other) const { return names_ == other.names_; }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::uint32_t> lookup_;
};

struct NewsArticle {
  std::string news_id;
  std::uint32_t topic_id = 0;
  // Exactly title_len slots; padded slots hold Vocabulary::kPad with mask 0.
  std::vector<std::uint32_t> title_tokens;
  Mask title_mask;

  std::size_t length() const;
};

// Articles addressed by dense index. Index 0 is a reserved padding article so
// that 0 can mean "no news" everywhere else; real articles start at 1.
struct NewsTable {
  std::vector<NewsArticle> articles;
  std::unordered_map<std::string, std::uint32_t> by_id;
  Vocabulary words;
  TopicIndex topics;
  std::size_t title_len = 0;

  std::size_t size() const { return articles.size() - 1; }
  const NewsArticle& operator[](std::uint32_t index) const { return articles.at(index); }
  // 0 when unknown.
  std::uint32_t find(std::string_view news_id) const;
};

// Reads news.tsv: news_id TAB topic TAB whitespace-tokenized title.
// Titles longer than title_len are truncated. When vocabularies are given they
// are used as-is (unknown words become UNK, unknown topics are an error);
// otherwise both are built from this file.
NewsTable load_news(const std::filesystem::path& path, std::size_t title_len,
                    const Vocabulary* words = nullptr, const TopicIndex* topics = nullptr);
// Writes the table back in news.tsv form (PAD slots omitted).
void write_news(const std::filesystem::path& path, const NewsTable& table);

// Dense user index; 0 is reserved for "unknown / cold start".
class UserIndex {
 public:
  UserIndex();
  std::uint32_t intern(std::string_view user_id);
  // 0 when unknown.
  std::uint32_t find(std::string_view user_id) const;
  const std::string& name(std::uint32_t index) const { return names_.at(index); }
  // Including the reserved entry.
  std::size_t size() const { return names_.size(); }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::uint32_t> lookup_;
};

struct Candidate {
  std::uint32_t news = 0;
  std::uint8_t label = 0;
};

struct Impression {
  std::string impression_id;
  std::uint32_t user = 0;
  std::int64_t timestamp = 0;
  // Oldest first; at most K entries (the most recent ones).
  std::vector<std::uint32_t> history;
  std::vector<Candidate> candidates;

  std::size_t positives() const;
};

struct BehaviorLog {
  std::vector<Impression> impressions;
  UserIndex users;
  std::size_t dropped_history = 0;    // history ids missing from the news table
};

// Reads behaviors.tsv:
//   impression_id TAB user_id TAB timestamp TAB history ids TAB newsid-label pairs
// The timestamp is epoch seconds or ISO-8601 (YYYY-MM-DD[THH:MM:SS[Z]]).
BehaviorLog load_behaviors(const std::filesystem::path& path, const NewsTable& news, std::size_t history_len);

// Epoch seconds from either accepted timestamp form; throws std::invalid_argument.
std::int64_t parse_timestamp(std::string_view text);

struct Split {
  std::vector<Impression> train;
  std::vector<Impression> validation;
  std::vector<Impression> test;
};

// timestamp >= test_start goes to test; round(val_fraction * rest) of the
// remainder, chosen uniformly at random, goes to validation. Relative order is
// preserved within each split. Any empty split is a ConfigError.
Split split_by_time(const std::vector<Impression>& impressions, std::int64_t test_start, double val_fraction,
                    std::mt19937_64& rng);

// Start of the final 7 days of the log.
std::int64_t last_week_start(const std::vector<Impression>& impressions);

// Word-embedding initialisation from a GloVe-format text file. Every row is
// first drawn from uniform(-0.1, 0.1) in index order, then rows of tokens found
// in the file are overwritten; the PAD row is zero. An empty path skips the file.
Tensor<double> load_pretrained_embeddings(const std::filesystem::path& path, const Vocabulary& vocab,
                                          std::size_t dim, std::mt19937_64& rng,
                                          std::size_t* rows_found = nullptr);

}  // namespace gerl
