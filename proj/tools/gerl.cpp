// gerl: train, evaluate, sweep and gradient-check the news recommender.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "gerl/checkpoint.hpp"
#include "gerl/error.hpp"
#include "gerl/kernels.hpp"
#include "gerl/pipeline.hpp"
#include "gerl/synth.hpp"
#include "gerl/toy_problem.hpp"

namespace fs = std::filesystem;
using namespace gerl;

namespace {

constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kUsage = 2;

// Model flags that override a base configuration only when given.
class ConfigFlags {
 public:
  void add(CLI::App* app) {
    app->add_option("--config", config_file_, "JSON model configuration used as the base");
    field(app, "--seed", &ModelConfig::seed, "Random seed");
    field(app, "--epochs", &ModelConfig::epochs, "Training epochs");
    field(app, "--lr", &ModelConfig::learning_rate, "Adam learning rate");
    field(app, "--batch", &ModelConfig::batch_size, "Samples per mini-batch");
    field(app, "--heads", &ModelConfig::heads, "Self-attention heads");
    field(app, "--degree", &ModelConfig::degree, "Neighbours per node");
    field(app, "--neg-ratio", &ModelConfig::neg_ratio, "Negatives per clicked news");
    field(app, "--common-dim", &ModelConfig::common_dim, "Projected user/news dimension");
    field(app, "--title-len", &ModelConfig::title_len, "Title tokens kept");
    field(app, "--history-len", &ModelConfig::history_len, "Clicked news kept");
    field(app, "--title-dim", &ModelConfig::title_dim, "Concatenated head width");
    field(app, "--word-dim", &ModelConfig::word_dim, "Word embedding width");
    field(app, "--topic-dim", &ModelConfig::topic_dim, "Topic embedding width");
    field(app, "--id-dim", &ModelConfig::id_dim, "User/news ID embedding width");
    field(app, "--attention-dim", &ModelConfig::attention_dim, "Additive attention hidden size");
    field(app, "--dropout", &ModelConfig::dropout, "Dropout rate");
    ablate_ = app->add_option("--ablate", ablations_, "Remove a component or replace an attention (repeatable)")
                  ->check(CLI::IsMember({"no-two-hop", "no-neighbor-user", "no-neighbor-news-id",
                                         "no-neighbor-news-sem", "avgpool-self", "avgpool-word", "avgpool-onehop",
                                         "avgpool-twohop"}));
    precision_ = app->add_option("--precision", precision_name_, "Floating-point width")
                     ->check(CLI::IsMember({"f32", "f64"}));
  }

  ModelConfig resolve(ModelConfig base) const {
    if (!config_file_.empty()) {
      std::ifstream in(config_file_);
      if (!in) throw ConfigError("cannot open config file " + config_file_);
      try {
        base = nlohmann::json::parse(in).get<ModelConfig>();
      } catch (const nlohmann::json::exception& e) {
        throw ConfigError("malformed config file " + config_file_ + ": " + e.what());
      }
    }
    for (const auto& [opt, apply] : setters_) {
      if (opt->count() > 0) apply(base);
    }
    if (ablate_->count() > 0) {
      for (const auto& name : ablations_) base.ablation.enable(name);
    }
    return base;
  }

  Precision precision(Precision base = Precision::kFloat32) const {
    return precision_->count() > 0 ? parse_precision(precision_name_) : base;
  }
  bool precision_given() const { return precision_->count() > 0; }

 private:
  template <typename F>
  void field(CLI::App* app, const char* flag, F ModelConfig::*member, const char* description) {
    auto* opt = app->add_option(flag, given_.*member, description);
    setters_.emplace_back(opt, [this, member](ModelConfig& c) { c.*member = given_.*member; });
  }

  ModelConfig given_;
  std::string config_file_;
  std::vector<std::string> ablations_;
  std::string precision_name_ = "f32";
  CLI::Option* ablate_ = nullptr;
  CLI::Option* precision_ = nullptr;
  std::vector<std::pair<CLI::Option*, std::function<void(ModelConfig&)>>> setters_;
};

struct DataFlags {
  std::string news;
  std::string behaviors;
  std::string embeddings;
  double validation_fraction = 0.1;
  std::int64_t test_start = 0;
  CLI::Option* test_start_opt = nullptr;

  void add(CLI::App* app, bool required) {
    auto* n = app->add_option("--news", news, "news.tsv");
    auto* b = app->add_option("--behaviors", behaviors, "behaviors.tsv");
    if (required) {
      n->required();
      b->required();
    }
    app->add_option("--embeddings", embeddings, "GloVe-format word vectors");
    app->add_option("--val-fraction", validation_fraction, "Share of pre-test impressions held out for validation");
    test_start_opt = app->add_option("--test-start", test_start, "Epoch seconds where the test split begins");
  }

  DataOptions resolve() const {
    DataOptions d;
    d.news = news;
    d.behaviors = behaviors;
    d.embeddings = embeddings;
    d.validation_fraction = validation_fraction;
    if (test_start_opt->count() > 0) d.test_start = test_start;
    return d;
  }
};

void require_files(const DataOptions& data) {
  for (const fs::path* p : {&data.news, &data.behaviors}) {
    if (!fs::exists(*p)) throw std::runtime_error("no such file: " + p->string());
  }
  if (!data.embeddings.empty() && !fs::exists(data.embeddings)) {
    throw std::runtime_error("no such file: " + data.embeddings.string());
  }
}

void print_history(const TrainingResult& r) {
  for (const auto& e : r.history) {
    std::cout << "epoch " << e.epoch << "  loss " << std::fixed << std::setprecision(4) << e.train_loss
              << "  val_auc " << e.validation.auc << "  " << std::setprecision(1) << e.wall_seconds << "s\n";
  }
  std::cout << "selected epoch " << r.best_epoch << " (val_auc " << std::setprecision(4) << r.best_validation_auc
            << ")\n";
}

// ---------------------------------------------------------------- train

struct TrainCommand {
  ConfigFlags config;
  DataFlags data;
  std::string out;
  std::string manifest;
  bool per_impression = false;

  void add(CLI::App* app) {
    config.add(app);
    data.add(app, false);
    app->add_option("--out", out, "Run directory");
    app->add_option("--manifest", manifest, "Repeat the run recorded in this manifest");
    app->add_flag("--per-impression", per_impression, "Also write per-impression test metrics as CSV");
  }

  int run() const {
    RunOptions options;
    if (!manifest.empty()) {
      auto m = read_manifest(manifest);
      options.config = m.config;
      options.precision = m.precision;
      options.data = m.data;
      options.out_dir = out.empty() ? m.out_dir : fs::path(out);
    } else {
      if (data.news.empty() || data.behaviors.empty() || out.empty()) {
        throw ConfigError("train needs --news, --behaviors and --out (or --manifest)");
      }
      options.config = config.resolve(ModelConfig{});
      options.precision = config.precision();
      options.data = data.resolve();
      options.out_dir = out;
    }
    options.per_impression = per_impression;
    options.config.validate();
    require_files(options.data);

    write_manifest(options.out_dir / "manifest.json",
                   {"train", options.config, options.precision, options.data, options.out_dir, build_id(), {}});
    const auto prepared = prepare_data(options.data, options.config);
    std::cout << "news " << prepared.news.size() << ", users " << prepared.log.users.size() - 1 << ", impressions "
              << prepared.split.train.size() << "/" << prepared.split.validation.size() << "/"
              << prepared.split.test.size() << " (train/val/test), edges " << prepared.graph.edge_count() << "\n";
    const auto result = run_training(options, prepared);
    print_history(result.training);
    std::cout << "test\n" << format_table(result.test);
    return kOk;
  }
};

// ---------------------------------------------------------------- eval

struct EvalCommand {
  ConfigFlags config;
  DataFlags data;
  std::string run_dir;
  std::string split = "test";
  std::string out;
  std::string per_impression;

  void add(CLI::App* app) {
    app->add_option("--run", run_dir, "Run directory written by train")->required();
    config.add(app);
    data.add(app, false);
    app->add_option("--split", split, "Split to score")->check(CLI::IsMember({"train", "validation", "test"}));
    app->add_option("--out", out, "Metric JSON path (default RUN/eval_SPLIT.json)");
    app->add_option("--per-impression", per_impression, "Per-impression CSV path");
  }

  template <typename T>
  MetricReport score(const CheckpointMeta& meta, const PreparedData& prepared, const fs::path& checkpoint) const {
    auto rng = seeded_stream(meta.config.seed, streams::kInit);
    GerlModel<T> model(meta.config, meta.sizes, rng);
    load_checkpoint(checkpoint, model.parameters());
    BatchBuilder builder(prepared.inputs(), model.wiring());
    const auto& imps = split == "train" ? prepared.split.train
                       : split == "validation" ? prepared.split.validation
                                               : prepared.split.test;
    EvalOptions options;
    options.per_impression = !per_impression.empty();
    return evaluate(model, builder, imps, options);
  }

  int run() const {
    const fs::path dir = run_dir;
    const fs::path checkpoint = dir / "model.ckpt";
    if (!fs::exists(checkpoint)) throw std::runtime_error("no checkpoint at " + checkpoint.string());
    const auto meta = read_checkpoint_meta(dir / "model.json");

    const ModelConfig requested = config.resolve(meta.config);
    auto differing = differing_fields(meta.config, requested);
    if (config.precision_given() && config.precision() != meta.precision) differing.push_back("precision");
    if (!differing.empty()) {
      std::string names;
      for (const auto& f : differing) names += (names.empty() ? "" : ", ") + f;
      throw ConfigError("configuration differs from the checkpoint in: " + names);
    }

    DataOptions options;
    if (fs::exists(dir / "manifest.json")) options = read_manifest(dir / "manifest.json").data;
    const DataOptions given = data.resolve();
    if (!data.news.empty()) options.news = given.news;
    if (!data.behaviors.empty()) options.behaviors = given.behaviors;
    if (given.test_start) options.test_start = given.test_start;
    require_files(options);

    const auto words = Vocabulary::load(dir / "vocab.txt");
    const auto topics = TopicIndex::load(dir / "topics.txt");
    const auto prepared = prepare_data(options, meta.config, &words, &topics);
    if (!(prepared.sizes() == meta.sizes)) {
      std::string names;
      auto note = [&](const char* name, std::size_t a, std::size_t b) {
        if (a != b) names += std::string(names.empty() ? "" : ", ") + name;
      };
      note("vocab", meta.sizes.vocab, prepared.sizes().vocab);
      note("topics", meta.sizes.topics, prepared.sizes().topics);
      note("user_rows", meta.sizes.user_rows, prepared.sizes().user_rows);
      note("news_rows", meta.sizes.news_rows, prepared.sizes().news_rows);
      throw ConfigError("data does not match the checkpoint in: " + names);
    }

    const auto report = meta.precision == Precision::kFloat64 ? score<double>(meta, prepared, checkpoint)
                                                              : score<float>(meta, prepared, checkpoint);
    const fs::path json = out.empty() ? dir / ("eval_" + split + ".json") : fs::path(out);
    write_report_json(json, report);
    if (!per_impression.empty()) write_per_impression_csv(per_impression, report);
    std::cout << split << "\n" << format_table(report);
    return kOk;
  }
};

// ---------------------------------------------------------------- sweep

struct SweepCommand {
  ConfigFlags config;
  DataFlags data;
  std::string out;
  std::string axis;
  std::vector<std::size_t> values;

  void add(CLI::App* app) {
    config.add(app);
    data.add(app, true);
    app->add_option("--out", out, "Sweep directory")->required();
    app->add_option("--axis", axis, "Swept hyperparameter")->required()->check(CLI::IsMember({"heads", "degree"}));
    app->add_option("--values", values, "Comma-separated values")->delimiter(',');
  }

  int run() const {
    if (values.empty()) throw ConfigError("sweep needs at least one value");
    const ModelConfig base = config.resolve(ModelConfig{});
    const Precision precision = config.precision();
    const DataOptions opts = data.resolve();
    require_files(opts);
    for (auto v : values) {
      ModelConfig c = base;
      (axis == "heads" ? c.heads : c.degree) = v;
      c.validate();
    }
    const fs::path dir = out;
    nlohmann::json extra = {{"axis", axis}, {"values", values}};
    write_manifest(dir / "manifest.json", {"sweep", base, precision, opts, dir, build_id(), extra});

    std::ofstream csv(dir / "sweep.csv");
    if (!csv) throw std::runtime_error("cannot write " + (dir / "sweep.csv").string());
    csv << axis << ",auc,mrr,ndcg5,ndcg10,best_epoch,val_auc\n" << std::setprecision(10);
    for (auto v : values) {
      RunOptions run;
      run.config = base;
      (axis == "heads" ? run.config.heads : run.config.degree) = v;
      run.precision = precision;
      run.data = opts;
      run.out_dir = dir / (axis + "_" + std::to_string(v));
      write_manifest(run.out_dir / "manifest.json",
                     {"train", run.config, precision, opts, run.out_dir, build_id(), {}});
      std::cout << axis << " = " << v << "\n";
      const auto r = run_training(run);
      csv << v << ',' << r.test.auc << ',' << r.test.mrr << ',' << r.test.ndcg5 << ',' << r.test.ndcg10 << ','
          << r.training.best_epoch << ',' << r.training.best_validation_auc << '\n'
          << std::flush;
      std::cout << format_table(r.test);
    }
    return kOk;
  }
};

// ---------------------------------------------------------------- gradcheck

struct GradcheckCommand {
  double tolerance = 1e-4;
  std::uint64_t seed = 7;
  bool corrupt = false;

  void add(CLI::App* app) {
    app->add_option("--tolerance", tolerance, "Largest accepted relative error");
    app->add_option("--seed", seed, "Initialisation seed");
    // Negative control for tests.
    app->add_flag("--corrupt-backward", corrupt)->group("");
  }

  int run() const {
    const auto toy = make_toy_problem(seed);
    GradCheckOptions options;
    options.coords_per_parameter = 1u << 20;  // exhaustive on the toy model
    const auto report = check_model_gradients(toy, options, corrupt);
    std::cout << std::left << std::setw(30) << "parameter" << std::right << std::setw(8) << "coords"
              << std::setw(14) << "max_rel_err" << std::setw(14) << "max_|grad|" << "\n";
    for (const auto& g : report.groups) {
      std::cout << std::left << std::setw(30) << g.parameter << std::right << std::setw(8) << g.coordinates
                << std::scientific << std::setprecision(3) << std::setw(14) << g.max_relative_error
                << std::setw(14) << g.max_abs_gradient << std::defaultfloat << "\n";
    }
    const bool ok = report.passed(tolerance);
    std::cout << "worst " << std::scientific << report.worst << (ok ? " <= " : " > ") << tolerance
              << (ok ? "  PASS" : "  FAIL") << "\n";
    return ok ? kOk : kFailure;
  }
};

// ---------------------------------------------------------------- generate-synth

struct SynthCommand {
  std::string out;
  std::string config_file;
  SynthConfig given;
  std::vector<std::pair<CLI::Option*, std::function<void(SynthConfig&)>>> setters;

  template <typename F>
  void field(CLI::App* app, const char* flag, F SynthConfig::*member, const char* description) {
    auto* opt = app->add_option(flag, given.*member, description);
    setters.emplace_back(opt, [this, member](SynthConfig& c) { c.*member = given.*member; });
  }

  void add(CLI::App* app) {
    app->add_option("--out", out, "Output directory")->required();
    app->add_option("--config", config_file, "JSON generator configuration");
    field(app, "--seed", &SynthConfig::seed, "Generator seed");
    field(app, "--users", &SynthConfig::n_users, "Number of users");
    field(app, "--news-count", &SynthConfig::n_news, "Number of news");
    field(app, "--topics", &SynthConfig::n_topics, "Number of topics");
    field(app, "--communities", &SynthConfig::n_communities, "Number of communities");
    field(app, "--gamma", &SynthConfig::gamma, "Affinity sharpness");
    field(app, "--noise", &SynthConfig::affinity_noise, "Per-user affinity noise");
    field(app, "--topic-purity", &SynthConfig::topic_purity, "Chance the written topic and title match the latent topic");
    field(app, "--cold-fraction", &SynthConfig::cold_fraction, "Share of users without history");
    field(app, "--impressions", &SynthConfig::impressions_per_user, "Impressions per warm user");
    field(app, "--cold-early", &SynthConfig::cold_impressions_per_user, "Cold-user impressions before the final week");
    field(app, "--cold-late", &SynthConfig::cold_final_week_impressions, "Cold-user impressions in the final week");
    field(app, "--candidates", &SynthConfig::candidates, "Candidates per impression");
  }

  int run() const {
    SynthConfig c;
    if (!config_file.empty()) {
      std::ifstream in(config_file);
      if (!in) throw ConfigError("cannot open " + config_file);
      c = nlohmann::json::parse(in).get<SynthConfig>();
    }
    for (const auto& [opt, apply] : setters) {
      if (opt->count() > 0) apply(c);
    }
    const auto corpus = generate_synth(c);
    write_synth(corpus, out);
    std::cout << corpus.news.size() << " news, " << corpus.users.size() << " users, " << corpus.impressions.size()
              << " impressions written to " << out << "\n";
    return kOk;
  }
};

// ---------------------------------------------------------------- dump-neighbors

struct NeighborsCommand {
  ConfigFlags config;
  DataFlags data;
  std::string out;

  void add(CLI::App* app) {
    config.add(app);
    data.add(app, true);
    app->add_option("--out", out, "Output directory")->required();
  }

  int run() const {
    const ModelConfig c = config.resolve(ModelConfig{});
    const DataOptions opts = data.resolve();
    require_files(opts);
    const auto prepared = prepare_data(opts, c);
    fs::create_directories(out);
    dump_neighbor_table(fs::path(out) / "user_neighbors.tsv", prepared.user_neighbors,
                        [&](std::uint32_t u) { return prepared.log.users.name(u); });
    dump_neighbor_table(fs::path(out) / "news_neighbors.tsv", prepared.news_neighbors,
                        [&](std::uint32_t n) { return prepared.news[n].news_id; });
    std::cout << "neighbour tables written to " << out << "\n";
    return kOk;
  }
};

}  // namespace

int main(int argc, char** argv) {
  kernels::configure_threads();
  CLI::App app{"GERL news recommender"};
  app.require_subcommand(1);

  TrainCommand train;
  EvalCommand eval;
  SweepCommand sweep;
  GradcheckCommand gradcheck;
  SynthCommand synth;
  NeighborsCommand neighbors;
  auto* train_app = app.add_subcommand("train", "Build vocabulary and graph, train, write checkpoint and log");
  auto* eval_app = app.add_subcommand("eval", "Score a split with a trained checkpoint");
  auto* sweep_app = app.add_subcommand("sweep", "Retrain over values of one hyperparameter");
  auto* grad_app = app.add_subcommand("gradcheck", "Finite-difference check of every parameter gradient");
  auto* synth_app = app.add_subcommand("generate-synth", "Write a synthetic corpus with planted preferences");
  auto* neighbors_app = app.add_subcommand("dump-neighbors", "Write the user and news neighbour tables");
  train.add(train_app);
  eval.add(eval_app);
  sweep.add(sweep_app);
  gradcheck.add(grad_app);
  synth.add(synth_app);
  neighbors.add(neighbors_app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (train_app->parsed()) return train.run();
    if (eval_app->parsed()) return eval.run();
    if (sweep_app->parsed()) return sweep.run();
    if (grad_app->parsed()) return gradcheck.run();
    if (synth_app->parsed()) return synth.run();
    if (neighbors_app->parsed()) return neighbors.run();
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kUsage;
}
