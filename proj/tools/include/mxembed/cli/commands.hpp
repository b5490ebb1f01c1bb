#pragma once

#include <cstdint>
#include <ostream>
#include <vector>

#include "mxembed/cli/run_config.hpp"
#include "mxembed/graph.hpp"
#include "mxembed/metrics.hpp"
#include "mxembed/splits.hpp"
#include "mxembed/trainer.hpp"

namespace mxembed::cli {

/// Loads the graph files named by the config. Missing files raise UsageError.
MultiplexGraph load_input_graph(const RunConfig& config);

/// Applies the config's feature mode. Motif counts are always taken from
/// `g` itself, so pass the graph the model will actually see.
MultiplexGraph with_feature_mode(const MultiplexGraph& g, const RunConfig& config);

/// Graphs and labeled pairs of one split, ready for training and scoring.
struct PreparedSplit {
  LoadedSplit split;
  MultiplexGraph train_graph;  // features applied
  MultiplexGraph eval_graph;   // features applied
  std::vector<LabeledEdges> validation;
  std::vector<LabeledEdges> test;
  const std::vector<bool>* hidden() const {
    return split.inductive ? &split.node_masking.hidden_mask : nullptr;
  }
};

/// Cuts a fresh split of `g` following the config's protocol.
PreparedSplit make_split(const MultiplexGraph& g, const RunConfig& config, std::uint64_t seed);
/// Rebuilds the split recorded in a manifest.
PreparedSplit load_split(const MultiplexGraph& g, const RunConfig& config, const std::string& manifest);
void write_manifest(const PreparedSplit& s, const MultiplexGraph& g, const std::string& path);

/// Walks on the training graph followed by training.
TrainResult train_on_split(const PreparedSplit& s, const RunConfig& config, const TrainConfig& train_config,
                           std::ostream& log);
/// Test metrics of trained parameters on the split's evaluation graph.
MetricReport evaluate_on_split(const ModelParameters& params, const TrainConfig& train_config, const PreparedSplit& s,
                               const RunConfig& config);

void cmd_motifs(const RunConfig& config, std::ostream& log);
void cmd_walks(const RunConfig& config, std::ostream& log);
void cmd_train(const RunConfig& config, std::ostream& log);
void cmd_evaluate(const RunConfig& config, std::ostream& log);
void cmd_attention(const RunConfig& config, std::ostream& log);
void cmd_embed(const RunConfig& config, std::ostream& log);

}  // namespace mxembed::cli
