#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "gerl/checkpoint.hpp"
#include "gerl/training.hpp"

namespace gerl {

struct DataOptions {
  std::filesystem::path news;
  std::filesystem::path behaviors;
  std::filesystem::path embeddings;  // optional GloVe-format file
  double validation_fraction = 0.1;
  std::optional<std::int64_t> test_start;  // default: start of the last week
};

// Corpus, splits, click graph, neighbour tables and ID space of one run.
// The graph is built from the training split only.
struct PreparedData {
  NewsTable news;
  BehaviorLog log;
  Split split;
  std::int64_t test_start = 0;
  BipartiteGraph graph;
  NeighborTable user_neighbors;
  NeighborTable news_neighbors;
  IdSpace ids;

  ModelInputs inputs() const { return {&news, &user_neighbors, &news_neighbors, &ids}; }
  ModelSizes sizes() const { return {news.words.size(), news.topics.size(), ids.user_rows, ids.news_rows}; }
};

// Uses the given vocabularies when present (evaluation of a saved run),
// otherwise builds them from the news file.
PreparedData prepare_data(const DataOptions& data, const ModelConfig& config, const Vocabulary* words = nullptr,
                          const TopicIndex* topics = nullptr);

struct RunOptions {
  ModelConfig config;
  Precision precision = Precision::kFloat32;
  DataOptions data;
  std::filesystem::path out_dir;  // empty: nothing is written
  bool evaluate_train = false;
  bool per_impression = false;
};

struct RunResult {
  TrainingResult training;
  MetricReport test;
  std::optional<MetricReport> train;
};

// Trains from scratch and evaluates the selected parameters on the test split
// (and optionally the training split). With an output directory, writes
// vocab.txt, topics.txt, model.ckpt, model.json, train_log.jsonl and
// metrics.json there.
RunResult run_training(const RunOptions& options, const PreparedData& data);
RunResult run_training(const RunOptions& options);

// Everything needed to repeat a command.
struct RunManifest {
  std::string command;
  ModelConfig config;
  Precision precision = Precision::kFloat32;
  DataOptions data;
  std::filesystem::path out_dir;
  std::string build_id;
  nlohmann::json extra = nlohmann::json::object();
};

std::string build_id();
void write_manifest(const std::filesystem::path& path, const RunManifest& manifest);
RunManifest read_manifest(const std::filesystem::path& path);

}  // namespace gerl
