#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "mxembed/graph.hpp"
#include "mxembed/model.hpp"

namespace mxembed {

struct AttentionRow {
  NodeId node = 0;
  std::size_t level = 0;  // 1-based
  RelationId output = 0;
  RelationId input = 0;
  double weight = 0.0;
};

/// Root attention of every requested node (all nodes when empty) at every
/// level, using the same per-node samples as compute_embeddings.
std::vector<AttentionRow> attention_export(const ModelParameters& p, const MultiplexGraph& g,
                                           const EmbedOptions& options, std::span<const NodeId> nodes = {});

struct AttentionSummaryRow {
  std::size_t level = 0;
  RelationId output = 0;
  RelationId input = 0;
  std::size_t count = 0;
  double min = 0.0, q25 = 0.0, median = 0.0, q75 = 0.0, max = 0.0, mean = 0.0;
};

/// One row per (level, output, input): |R|^2 rows per level. Quantiles use
/// linear interpolation between order statistics.
std::vector<AttentionSummaryRow> summarize_attention(std::span<const AttentionRow> rows, std::size_t relations,
                                                     std::size_t levels);

/// Linear-interpolation quantile of an unsorted sample, q in [0, 1].
double quantile(std::vector<double> values, double q);

void write_attention_tsv(std::span<const AttentionRow> rows, const MultiplexGraph& g,
                         const std::filesystem::path& path);
void write_attention_summary_tsv(std::span<const AttentionSummaryRow> rows, const std::filesystem::path& path);

}  // namespace mxembed
