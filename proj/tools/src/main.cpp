#include <exception>
#include <functional>
#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "mxembed/cli/commands.hpp"
#include "mxembed/error.hpp"

namespace {

using mxembed::cli::RunConfig;
using Overrides = std::map<std::string, std::string>;

// Every flag records its value under the config key it overrides, so only
// flags that were actually given take part in the merge.
void value_flag(CLI::App& app, Overrides& o, const std::string& flag, const std::string& key,
                const std::string& help) {
  app.add_option_function<std::string>(flag, [&o, key](const std::string& v) { o[key] = v; }, help);
}

void switch_flag(CLI::App& app, Overrides& o, const std::string& flag, const std::string& key,
                 const std::string& value, const std::string& help) {
  app.add_flag_callback(flag, [&o, key, value] { o[key] = value; }, help);
}

void input_flags(CLI::App& app, Overrides& o) {
  value_flag(app, o, "--graph", "graph", "Edge list: edge_type src dst");
  value_flag(app, o, "--node-types", "node_types", "Node types: node_id node_type");
  app.add_option_function<std::vector<std::string>>(
      "--features",
      [&o](const std::vector<std::string>& items) {
        for (const auto& item : items) {
          const auto eq = item.find('=');
          if (eq == std::string::npos || eq == 0) {
            throw CLI::ValidationError("--features", "expected TYPE=PATH, got '" + item + "'");
          }
          o["feature." + item.substr(0, eq)] = item.substr(eq + 1);
        }
      },
      "Feature file per node type as TYPE=PATH");
  switch_flag(app, o, "--undirected", "undirected", "true", "Treat every relation as undirected");
  switch_flag(app, o, "--zero-fill", "zero_fill", "true", "Zero features for nodes without a feature row");
  value_flag(app, o, "--out", "out", "Output directory (output file for motifs)");
  value_flag(app, o, "--threads", "threads", "Worker threads for walks, motifs and embedding");
  value_flag(app, o, "--feature-mode", "feature_mode", "given | motif | combined");
  switch_flag(app, o, "--raw-counts", "raw_counts", "true", "Keep raw motif counts instead of log(1 + count)");
}

void training_flags(CLI::App& app, Overrides& o) {
  value_flag(app, o, "--dim", "dim", "Embedding dimension");
  value_flag(app, o, "--attention-dim", "attention_dim", "Attention dimension");
  value_flag(app, o, "--k-levels", "levels", "Aggregation levels");
  value_flag(app, o, "--walks", "walks_per_node", "Walks per node and relation");
  value_flag(app, o, "--walk-length", "walk_length", "Nodes per walk");
  value_flag(app, o, "--window", "window", "Context window");
  value_flag(app, o, "--negatives", "negatives", "Negative samples per context pair");
  value_flag(app, o, "--epochs", "max_epochs", "Epoch cap");
  value_flag(app, o, "--patience", "patience", "Epochs without validation gain before stopping");
  value_flag(app, o, "--lr", "learning_rate", "Adam learning rate");
  value_flag(app, o, "--neighbor-budget", "neighbor_budget", "Sampled neighbors per relation and level");
  value_flag(app, o, "--activation", "activation", "elu | relu");
  value_flag(app, o, "--seed", "seed", "Random seed");
  value_flag(app, o, "--batch-centers", "batch_centers", "Center nodes per minibatch");
  value_flag(app, o, "--noise", "noise", "uniform | log_uniform");
  switch_flag(app, o, "--per-relation-context", "per_relation_context", "true", "One context vector per relation");
  switch_flag(app, o, "--no-attention", "attention", "false", "Train without relational attention");
  value_flag(app, o, "--metapath", "metapath", "Node-type schema for walks, e.g. a,b,a");
}

void split_flags(CLI::App& app, Overrides& o) {
  value_flag(app, o, "--val-frac", "val_frac", "Validation fraction per relation");
  value_flag(app, o, "--test-frac", "test_frac", "Test fraction per relation");
  value_flag(app, o, "--folds", "folds", "Cross-validation folds (0 disables)");
  value_flag(app, o, "--fold", "fold", "Held-out fold");
  switch_flag(app, o, "--inductive", "inductive", "true", "Mask nodes instead of edges");
  value_flag(app, o, "--node-frac", "node_frac", "Hidden node fraction");
  value_flag(app, o, "--reveal-frac", "reveal_frac", "Revealed edge fraction per hidden node");
  value_flag(app, o, "--edge-val-frac", "edge_val_frac", "Validation fraction of seen edges");
}

void model_flags(CLI::App& app, Overrides& o) {
  value_flag(app, o, "--checkpoint", "checkpoint", "Trained parameters");
  value_flag(app, o, "--manifest", "manifest", "Split manifest written by train");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multiplex heterogeneous graph embedding"};
  app.require_subcommand(1);
  std::string config_path;
  Overrides overrides;
  app.add_option("--config", config_path, "Flat key = value file; flags override it");

  using Command = std::function<void(const RunConfig&, std::ostream&)>;
  std::map<CLI::App*, Command> commands;

  auto* motifs = app.add_subcommand("motifs", "Per-node motif features of every relation layer");
  input_flags(*motifs, overrides);
  value_flag(*motifs, overrides, "--combine", "combine", "Given feature table to concatenate");
  commands[motifs] = mxembed::cli::cmd_motifs;

  auto* walks = app.add_subcommand("walks", "Relation-wise random walk corpus");
  input_flags(*walks, overrides);
  training_flags(*walks, overrides);
  commands[walks] = mxembed::cli::cmd_walks;

  auto* train = app.add_subcommand("train", "Split, walk and train; writes checkpoint and history");
  input_flags(*train, overrides);
  training_flags(*train, overrides);
  split_flags(*train, overrides);
  commands[train] = mxembed::cli::cmd_train;

  auto* evaluate = app.add_subcommand("evaluate", "Link prediction report for a checkpoint or fresh trials");
  input_flags(*evaluate, overrides);
  training_flags(*evaluate, overrides);
  split_flags(*evaluate, overrides);
  model_flags(*evaluate, overrides);
  value_flag(*evaluate, overrides, "--scorer", "scorer", "dot | cosine");
  value_flag(*evaluate, overrides, "--trials", "trials", "Independent trainings over consecutive seeds");
  commands[evaluate] = mxembed::cli::cmd_evaluate;

  auto* attention = app.add_subcommand("attention", "Per-node attention table and quantile summary");
  input_flags(*attention, overrides);
  model_flags(*attention, overrides);
  commands[attention] = mxembed::cli::cmd_attention;

  auto* embed = app.add_subcommand("embed", "Export node embeddings");
  input_flags(*embed, overrides);
  model_flags(*embed, overrides);
  commands[embed] = mxembed::cli::cmd_embed;

  for (auto* sub : {motifs, walks, train, evaluate, attention, embed}) {
    sub->add_option("--config", config_path, "Flat key = value file; flags override it");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    RunConfig config;
    if (!config_path.empty()) config = mxembed::cli::read_run_config(config_path);
    config.apply(overrides);
    for (const auto& [sub, run] : commands) {
      if (sub->parsed()) run(config, std::cout);
    }
  } catch (const mxembed::cli::UsageError& e) {
    std::cerr << "mxembed: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "mxembed: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
