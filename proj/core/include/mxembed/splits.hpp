#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mxembed/graph.hpp"
#include "mxembed/metrics.hpp"

namespace mxembed {

/// Held-out positives are stored as indices into the full graph's
/// g.edges(r); negatives are explicit pairs.
struct RelationHoldout {
  std::vector<std::size_t> validation;
  std::vector<std::size_t> test;
  std::vector<Edge> validation_negatives;
  std::vector<Edge> test_negatives;
};

struct EdgeSplit {
  MultiplexGraph train;
  std::vector<LabeledEdges> validation;  // per relation
  std::vector<LabeledEdges> test;        // per relation
  std::vector<RelationHoldout> holdout;  // per relation
  std::uint64_t seed = 0;
  double val_frac = 0.0;
  double test_frac = 0.0;
  std::size_t fold = 0;
  std::size_t folds = 0;  // 0 outside cross-validation
};

/// Masks round(frac |E_r|) positives per relation for validation and test,
/// each matched by as many negatives drawn uniformly from the relation's
/// non-edges in `g`. Throws when a relation cannot supply the counts.
EdgeSplit split_transductive(const MultiplexGraph& g, double val_frac, double test_frac, std::uint64_t seed);

/// Partitions each relation's edges into `folds` shuffled folds. Fold f is
/// held out and split half for validation, half for test.
std::vector<EdgeSplit> split_cross_validation(const MultiplexGraph& g, std::size_t folds, std::uint64_t seed);

struct InductiveSplit {
  std::vector<NodeId> hidden;  // sorted
  std::vector<bool> hidden_mask;
  /// No edge touches a hidden node; validation positives are also removed.
  MultiplexGraph train;
  /// Full graph minus the test positives: train edges, validation edges and revealed edges.
  MultiplexGraph test_graph;
  std::vector<LabeledEdges> validation;
  std::vector<LabeledEdges> test;
  std::vector<std::vector<std::size_t>> validation_index;  // per relation, into g.edges(r)
  std::vector<std::vector<std::size_t>> revealed_index;
  std::vector<std::vector<std::size_t>> test_index;
  std::uint64_t seed = 0;
  double node_frac = 0.0;
  double reveal_frac = 0.0;
  double edge_val_frac = 0.0;
};

/// Hides round(node_frac |V|) nodes. Each hidden node reveals
/// ceil(reveal_frac * m) of the m hidden-incident edges it owns (an edge
/// between two hidden nodes belongs to the smaller id); the rest are test
/// positives. Test negatives touch a hidden node.
InductiveSplit split_inductive(const MultiplexGraph& g, double node_frac = 0.15, double reveal_frac = 0.5,
                               double edge_val_frac = 0.2, std::uint64_t seed = 0);

/// JSON manifest holding seed, fractions and the held-out edges by index.
void write_split_manifest(const EdgeSplit& split, const MultiplexGraph& g, const std::filesystem::path& path);
void write_split_manifest(const InductiveSplit& split, const MultiplexGraph& g, const std::filesystem::path& path);

/// Rebuilds a split from a manifest against the full graph it was cut from.
struct LoadedSplit {
  bool inductive = false;
  EdgeSplit transductive;
  InductiveSplit node_masking;
};
LoadedSplit read_split_manifest(const MultiplexGraph& g, const std::filesystem::path& path);

}  // namespace mxembed
