#include "gerl/pipeline.hpp"

#include <fstream>
#include <memory>

#include "gerl/error.hpp"

#ifndef GERL_BUILD_ID
#define GERL_BUILD_ID "unknown"
#endif

namespace gerl {

PreparedData prepare_data(const DataOptions& data, const ModelConfig& config, const Vocabulary* words,
                          const TopicIndex* topics) {
  config.validate();
  for (const auto* path : {&data.news, &data.behaviors}) {
    if (!std::filesystem::exists(*path)) throw std::runtime_error("no such file: " + path->string());
  }
  PreparedData d;
  d.news = load_news(data.news, config.title_len, words, topics);
  d.log = load_behaviors(data.behaviors, d.news, config.history_len);
  d.test_start = data.test_start.value_or(last_week_start(d.log.impressions));
  auto split_rng = seeded_stream(config.seed, streams::kSplit);
  d.split = split_by_time(d.log.impressions, d.test_start, data.validation_fraction, split_rng);
  d.graph = build_bipartite(d.split.train, d.log.users.size(), d.news.articles.size());
  d.user_neighbors = build_user_neighbors(d.graph, config.degree);
  auto neighbor_rng = seeded_stream(config.seed, streams::kNeighbors);
  d.news_neighbors = build_news_neighbors(d.graph, config.degree, neighbor_rng);
  d.ids = build_id_space(d.graph);
  return d;
}

namespace {

template <typename T>
RunResult run_typed(const RunOptions& options, const PreparedData& data) {
  const ModelConfig& config = options.config;
  const auto& out = options.out_dir;
  if (!out.empty()) std::filesystem::create_directories(out);

  std::unique_ptr<Tensor<double>> word_init;
  if (!options.data.embeddings.empty()) {
    auto rng = seeded_stream(config.seed, streams::kEmbeddings);
    word_init = std::make_unique<Tensor<double>>(
        load_pretrained_embeddings(options.data.embeddings, data.news.words, config.word_dim, rng));
  }
  auto init_rng = seeded_stream(config.seed, streams::kInit);
  GerlModel<T> model(config, data.sizes(), init_rng, word_init.get());
  BatchBuilder builder(data.inputs(), model.wiring());

  std::ofstream log;
  TrainOptions train_options;
  if (!out.empty()) {
    data.news.words.save(out / "vocab.txt");
    data.news.topics.save(out / "topics.txt");
    log.open(out / "train_log.jsonl");
    train_options.log = &log;
  }

  RunResult result;
  result.training = train(model, builder, data.split.train, data.split.validation, train_options);
  EvalOptions eval;
  eval.per_impression = options.per_impression;
  result.test = evaluate(model, builder, data.split.test, eval);
  if (options.evaluate_train) result.train = evaluate(model, builder, data.split.train, eval);

  if (!out.empty()) {
    save_checkpoint(out / "model.ckpt", model.parameters());
    write_checkpoint_meta(out / "model.json", {config, data.sizes(), options.precision});
    write_report_json(out / "metrics.json", result.test);
    if (options.per_impression) write_per_impression_csv(out / "metrics_per_impression.csv", result.test);
  }
  return result;
}

}  // namespace

RunResult run_training(const RunOptions& options, const PreparedData& data) {
  return options.precision == Precision::kFloat64 ? run_typed<double>(options, data)
                                                  : run_typed<float>(options, data);
}

RunResult run_training(const RunOptions& options) {
  return run_training(options, prepare_data(options.data, options.config));
}

std::string build_id() { return GERL_BUILD_ID; }

void write_manifest(const std::filesystem::path& path, const RunManifest& m) {
  nlohmann::json j;
  j["command"] = m.command;
  j["config"] = m.config;
  j["seed"] = m.config.seed;
  j["precision"] = precision_name(m.precision);
  j["inputs"] = {{"news", m.data.news.string()},
                 {"behaviors", m.data.behaviors.string()},
                 {"embeddings", m.data.embeddings.string()},
                 {"validation_fraction", m.data.validation_fraction}};
  if (m.data.test_start) j["inputs"]["test_start"] = *m.data.test_start;
  j["out_dir"] = m.out_dir.string();
  j["build_id"] = m.build_id;
  j["extra"] = m.extra;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

RunManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open manifest " + path.string());
  RunManifest m;
  try {
    auto j = nlohmann::json::parse(in);
    m.command = j.value("command", "");
    m.config = j.at("config").get<ModelConfig>();
    m.precision = parse_precision(j.value("precision", "f32"));
    const auto& inputs = j.at("inputs");
    m.data.news = inputs.at("news").get<std::string>();
    m.data.behaviors = inputs.at("behaviors").get<std::string>();
    m.data.embeddings = inputs.value("embeddings", "");
    m.data.validation_fraction = inputs.value("validation_fraction", 0.1);
    if (inputs.contains("test_start")) m.data.test_start = inputs.at("test_start").get<std::int64_t>();
    m.out_dir = j.value("out_dir", "");
    m.build_id = j.value("build_id", "");
    m.extra = j.value("extra", nlohmann::json::object());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("malformed manifest " + path.string() + ": " + e.what());
  }
  return m;
}

}  // namespace gerl
