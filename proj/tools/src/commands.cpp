#include "mxembed/cli/commands.hpp"

#include <filesystem>
#include <iomanip>

#include "mxembed/attention_export.hpp"
#include "mxembed/checkpoint.hpp"
#include "mxembed/error.hpp"
#include "mxembed/features.hpp"
#include "mxembed/graph_io.hpp"
#include "mxembed/walker.hpp"

namespace fs = std::filesystem;

namespace mxembed::cli {

namespace {

fs::path output_dir(const RunConfig& config) {
  if (config.out.empty()) throw UsageError("out is required");
  fs::create_directories(config.out);
  return config.out;
}

std::string path_str(const fs::path& p) { return p.string(); }

WalkOptions walk_options(const MultiplexGraph& g, const RunConfig& config, const TrainConfig& tc,
                         const std::vector<bool>* exclude) {
  WalkOptions o;
  o.walks_per_node = tc.walks_per_node;
  o.length = tc.walk_length;
  o.seed = tc.seed;
  o.threads = config.threads;
  o.exclude = exclude;
  if (!config.metapath.empty()) o.schema = parse_schema(g.schema(), config.metapath);
  return o;
}

void print_report(const MetricReport& r, const Schema& schema, std::ostream& log) {
  log << std::fixed << std::setprecision(4);
  for (const auto& m : r.relations) {
    log << schema.relation_name(m.relation) << "\troc_auc " << m.roc_auc << "\tf1 " << m.f1 << '\n';
  }
  log << "average\troc_auc " << r.mean_roc_auc << "\tf1 " << r.mean_f1 << '\n';
  log.unsetf(std::ios::floatfield);
}

// The graph a checkpoint runs on: the split's evaluation graph when a
// manifest is given, the full graph otherwise.
MultiplexGraph inference_graph(const MultiplexGraph& g, const RunConfig& config) {
  if (!config.manifest.empty()) return load_split(g, config, config.manifest).eval_graph;
  return with_feature_mode(g, config);
}

Checkpoint load_checked(const RunConfig& config, const MultiplexGraph& g) {
  require_file("checkpoint", config.checkpoint);
  Checkpoint c = load_checkpoint(config.checkpoint);
  check_compatible(c, g);
  return c;
}

}  // namespace

MultiplexGraph load_input_graph(const RunConfig& config) {
  require_file("graph", config.graph);
  GraphFiles files;
  files.edges = config.graph;
  if (!config.node_types.empty()) {
    require_file("node_types", config.node_types);
    files.node_types = config.node_types;
  }
  for (const auto& [type, path] : config.features) {
    require_file("feature." + type, path);
    files.features[type] = path;
  }
  LoadOptions options;
  options.undirected = config.undirected;
  options.zero_fill = config.zero_fill;
  return load_graph(files, options);
}

MultiplexGraph with_feature_mode(const MultiplexGraph& g, const RunConfig& config) {
  switch (config.feature_mode) {
    case FeatureMode::kGiven:
      return g;
    case FeatureMode::kMotif:
      return apply_features(g, motif_feature_matrix(g, config.threads, !config.raw_counts));
    case FeatureMode::kCombined:
      return apply_features(
          g, combine_features(given_feature_matrix(g), motif_feature_matrix(g, config.threads, !config.raw_counts)));
  }
  return g;
}

namespace {

PreparedSplit finish(const RunConfig& config, LoadedSplit split) {
  PreparedSplit s;
  if (split.inductive) {
    const auto& n = split.node_masking;
    s.train_graph = with_feature_mode(n.train, config);
    s.eval_graph = with_feature_mode(n.test_graph, config);
    s.validation = n.validation;
    s.test = n.test;
  } else {
    const auto& t = split.transductive;
    s.train_graph = with_feature_mode(t.train, config);
    s.eval_graph = s.train_graph;
    s.validation = t.validation;
    s.test = t.test;
  }
  s.split = std::move(split);
  return s;
}

}  // namespace

PreparedSplit make_split(const MultiplexGraph& g, const RunConfig& config, std::uint64_t seed) {
  LoadedSplit split;
  if (config.inductive) {
    split.inductive = true;
    split.node_masking = split_inductive(g, config.node_frac, config.reveal_frac, config.edge_val_frac, seed);
  } else if (config.folds > 0) {
    split.transductive = std::move(split_cross_validation(g, config.folds, seed).at(config.fold));
  } else {
    split.transductive = split_transductive(g, config.val_frac, config.test_frac, seed);
  }
  return finish(config, std::move(split));
}

PreparedSplit load_split(const MultiplexGraph& g, const RunConfig& config, const std::string& manifest) {
  require_file("manifest", manifest);
  return finish(config, read_split_manifest(g, manifest));
}

void write_manifest(const PreparedSplit& s, const MultiplexGraph& g, const std::string& path) {
  if (s.split.inductive) write_split_manifest(s.split.node_masking, g, path);
  else write_split_manifest(s.split.transductive, g, path);
}

TrainResult train_on_split(const PreparedSplit& s, const RunConfig& config, const TrainConfig& train_config,
                           std::ostream& log) {
  const WalkCorpus corpus = generate_walks(s.train_graph, walk_options(s.train_graph, config, train_config, s.hidden()));
  log << "walks " << corpus.size() << '\n';
  TrainOptions options;
  options.noise_exclude = s.hidden();
  options.on_epoch = [&log](const EpochRecord& r) {
    log << "epoch " << r.epoch << " loss " << r.loss << " val_roc_auc " << r.val_roc_auc << '\n';
  };
  return train(s.train_graph, corpus, train_config, s.validation, options);
}

MetricReport evaluate_on_split(const ModelParameters& params, const TrainConfig& train_config, const PreparedSplit& s,
                               const RunConfig& config) {
  const EmbeddingSet e = compute_embeddings(params, s.eval_graph, embed_options(train_config, config.threads));
  return evaluate(e, s.test, config.scorer, train_config.seed);
}

void cmd_motifs(const RunConfig& config, std::ostream& log) {
  if (config.out.empty()) throw UsageError("out is required");
  const MultiplexGraph g = load_input_graph(config);
  FeatureMatrix m = motif_feature_matrix(g, config.threads, !config.raw_counts);
  if (!config.combine.empty()) {
    require_file("combine", config.combine);
    m = combine_features(read_feature_tsv(config.combine), m);
  }
  const fs::path out(config.out);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  write_feature_tsv(m, out);
  write_run_config(config, path_str(out) + ".config");
  log << "wrote " << m.rows() << " x " << m.cols() << " features to " << path_str(out) << '\n';
}

void cmd_walks(const RunConfig& config, std::ostream& log) {
  const MultiplexGraph g = load_input_graph(config);
  const fs::path dir = output_dir(config);
  const WalkCorpus corpus = generate_walks(g, walk_options(g, config, config.train, nullptr));
  const auto files = write_corpus_shards(corpus, g.num_relations(), dir);
  write_run_config(config, path_str(dir / "config.txt"));
  log << "wrote " << corpus.size() << " walks in " << files.size() << " shards to " << path_str(dir) << '\n';
}

void cmd_train(const RunConfig& config, std::ostream& log) {
  config.train.validate();
  const MultiplexGraph g = load_input_graph(config);
  const fs::path dir = output_dir(config);
  const PreparedSplit s = make_split(g, config, config.train.seed);
  RunConfig snapshot = config;
  snapshot.manifest = path_str(dir / "split.json");
  snapshot.checkpoint = path_str(dir / "checkpoint.bin");
  write_manifest(s, g, snapshot.manifest);

  const TrainResult result = train_on_split(s, config, config.train, log);
  save_checkpoint(snapshot.checkpoint, result.params, config.train, g.schema());
  write_history_csv(result.history, dir / "history.csv");
  write_run_config(snapshot, path_str(dir / "config.txt"));
  log << "best epoch " << result.best_epoch << " val_roc_auc " << result.best_val_roc_auc << '\n';
}

void cmd_evaluate(const RunConfig& config, std::ostream& log) {
  const MultiplexGraph g = load_input_graph(config);
  const fs::path dir = output_dir(config);

  if (!config.checkpoint.empty()) {
    if (config.manifest.empty()) throw UsageError("evaluating a checkpoint needs a split manifest");
    const PreparedSplit s = load_split(g, config, config.manifest);
    const Checkpoint c = load_checked(config, s.eval_graph);
    const MetricReport r = evaluate_on_split(c.params, c.config, s, config);
    write_report_csv(r, g.schema(), dir / "report.csv");
    write_run_config(config, path_str(dir / "config.txt"));
    print_report(r, g.schema(), log);
    return;
  }

  config.train.validate();
  std::vector<MetricReport> reports;
  for (std::size_t i = 0; i < config.trials; ++i) {
    TrainConfig tc = config.train;
    tc.seed = config.train.seed + i;
    const fs::path trial_dir = dir / ("trial_" + std::to_string(i));
    fs::create_directories(trial_dir);
    log << "trial " << i << " seed " << tc.seed << '\n';
    const PreparedSplit s = make_split(g, config, tc.seed);
    write_manifest(s, g, path_str(trial_dir / "split.json"));
    const TrainResult result = train_on_split(s, config, tc, log);
    write_history_csv(result.history, trial_dir / "history.csv");
    reports.push_back(evaluate_on_split(result.params, tc, s, config));
    write_report_csv(reports.back(), g.schema(), trial_dir / "report.csv");
    print_report(reports.back(), g.schema(), log);
  }
  const AggregateReport agg = aggregate(reports);
  write_aggregate_csv(agg, g.schema(), dir / "aggregate.csv");
  write_run_config(config, path_str(dir / "config.txt"));
  log << std::fixed << std::setprecision(4) << "mean roc_auc " << agg.mean_roc_auc.mean << " +/- "
      << agg.mean_roc_auc.stddev << "\tmean f1 " << agg.mean_f1.mean << " +/- " << agg.mean_f1.stddev << '\n';
  log.unsetf(std::ios::floatfield);
}

void cmd_attention(const RunConfig& config, std::ostream& log) {
  const MultiplexGraph g = inference_graph(load_input_graph(config), config);
  const Checkpoint c = load_checked(config, g);
  if (!c.config.attention) throw UsageError("checkpoint was trained without attention");
  const fs::path dir = output_dir(config);
  const auto rows = attention_export(c.params, g, embed_options(c.config, config.threads));
  const auto summary = summarize_attention(rows, g.num_relations(), c.config.levels);
  write_attention_tsv(rows, g, dir / "attention.tsv");
  write_attention_summary_tsv(summary, dir / "attention_summary.tsv");
  write_run_config(config, path_str(dir / "config.txt"));
  log << "wrote " << rows.size() << " attention rows and " << summary.size() << " summary rows to "
      << path_str(dir) << '\n';
}

void cmd_embed(const RunConfig& config, std::ostream& log) {
  const MultiplexGraph g = inference_graph(load_input_graph(config), config);
  const Checkpoint c = load_checked(config, g);
  const fs::path dir = output_dir(config);
  const EmbeddingSet e = compute_embeddings(c.params, g, embed_options(c.config, config.threads));
  write_embeddings_tsv(e, g, dir / "embeddings.tsv");
  write_run_config(config, path_str(dir / "config.txt"));
  log << "wrote embeddings of " << g.num_nodes() << " nodes to " << path_str(dir / "embeddings.tsv") << '\n';
}

}  // namespace mxembed::cli
