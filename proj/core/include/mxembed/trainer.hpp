#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "mxembed/graph.hpp"
#include "mxembed/metrics.hpp"
#include "mxembed/model.hpp"
#include "mxembed/sampling.hpp"
#include "mxembed/train_config.hpp"
#include "mxembed/walker.hpp"

namespace mxembed {

/// Where every node occurs in a corpus, so the context triples of one center
/// can be produced on demand. Yields exactly the triples of extract_contexts.
class ContextIndex {
 public:
  ContextIndex(const WalkCorpus& corpus, std::size_t num_nodes, std::size_t window);

  /// Calls fn(relation, context) for every triple centered on v.
  template <typename Fn>
  void for_each(NodeId v, Fn&& fn) const {
    for (std::size_t o = offsets_[v]; o < offsets_[v + 1]; ++o) {
      const auto walk = (*corpus_)[walks_[o]];
      const std::size_t a = positions_[o];
      const std::size_t lo = a >= window_ ? a - window_ : 0;
      const std::size_t hi = std::min(walk.nodes.size() - 1, a + window_);
      for (std::size_t b = lo; b <= hi; ++b) {
        if (b != a && walk.nodes[b] != v) fn(walk.relation, walk.nodes[b]);
      }
    }
  }
  std::size_t count(NodeId v) const;
  /// Nodes with at least one triple, ascending.
  const std::vector<NodeId>& centers() const { return centers_; }
  std::size_t total() const { return total_; }

 private:
  const WalkCorpus* corpus_;
  std::size_t window_;
  std::vector<std::size_t> offsets_;
  std::vector<std::uint32_t> walks_;
  std::vector<std::uint16_t> positions_;
  std::vector<NodeId> centers_;
  std::size_t total_ = 0;
};

/// A minibatch: one sample tree per center and the triples of those
/// centers, each with its negatives.
struct TrainingBatch {
  struct Item {
    std::uint32_t center = 0;  // index into centers/trees
    RelationId relation = 0;
    NodeId context = 0;
  };
  std::vector<NodeId> centers;
  std::vector<SampleTree> trees;
  std::vector<Item> items;        // grouped by center
  std::vector<NodeId> negatives;  // items.size() * negatives_per_item
  std::size_t negatives_per_item = 0;
};

/// Mean negative-sampling loss over the batch's items. When `grad` is given
/// its tensors receive the gradient of that mean (added, not assigned).
double loss_and_gradients(const ModelParameters& p, const MultiplexGraph& g, const TrainingBatch& batch,
                          bool attention, ModelParameters* grad);

struct GradientCheckResult {
  double max_relative_error = 0.0;
  std::string worst_tensor;
  Eigen::Index worst_entry = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  std::size_t checked = 0;
};

/// Relative error |a - n| / max(|a|, |n|, floor) between the analytic
/// gradient and central differences. `max_entries_per_tensor` > 0 checks a
/// seeded random subset of each tensor.
GradientCheckResult gradient_check(const ModelParameters& p, const MultiplexGraph& g, const TrainingBatch& batch,
                                   double eps = 1e-5, bool attention = true, std::size_t max_entries_per_tensor = 0,
                                   double floor = 1e-6, std::uint64_t seed = 0);

struct EpochRecord {
  std::size_t epoch = 0;
  double loss = 0.0;
  double val_roc_auc = std::numeric_limits<double>::quiet_NaN();
  std::size_t triples = 0;
};

struct TrainResult {
  ModelParameters params;
  std::vector<EpochRecord> history;
  std::size_t best_epoch = 0;
  double best_val_roc_auc = std::numeric_limits<double>::quiet_NaN();
  bool stopped_early = false;
};

struct TrainOptions {
  /// Nodes never drawn as negatives (hidden nodes of an inductive split).
  const std::vector<bool>* noise_exclude = nullptr;
  /// Optional starting point instead of a fresh initialization.
  const ModelParameters* initial = nullptr;
  /// Called after every epoch.
  std::function<void(const EpochRecord&)> on_epoch;
};

/// Minibatch training with Adam, per-epoch validation ROC-AUC and early
/// stopping. Returns the parameters of the best validation epoch (the last
/// epoch when there is no validation data).
TrainResult train(const MultiplexGraph& g, const WalkCorpus& corpus, const TrainConfig& config,
                  std::span<const LabeledEdges> validation, const TrainOptions& options = {});

/// Draws a batch for the given centers exactly as train() does.
TrainingBatch make_batch(const MultiplexGraph& g, const ContextIndex& contexts, std::span<const NodeId> centers,
                         const std::vector<NoiseDistribution>& noise, const TrainConfig& config, Rng& rng);

/// Noise law per node type; types with no eligible node get an empty entry.
std::vector<NoiseDistribution> build_noise_tables(const MultiplexGraph& g, NoiseKind kind,
                                                  const std::vector<bool>* exclude = nullptr);

/// Embedding options used for validation and final export under a config.
EmbedOptions embed_options(const TrainConfig& config, std::size_t threads = 1);

void write_history_csv(const std::vector<EpochRecord>& history, const std::filesystem::path& path);

}  // namespace mxembed
