#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mxembed/graph.hpp"
#include "mxembed/motifs.hpp"

namespace mxembed {

/// Node-by-column feature table. Rows are keyed by external node id and
/// every column carries a provenance name.
struct FeatureMatrix {
  std::vector<std::int64_t> node_ids;
  std::vector<std::string> columns;
  Eigen::MatrixXd values;  // rows x columns

  std::size_t rows() const { return node_ids.size(); }
  std::size_t cols() const { return columns.size(); }
};

/// Raw per-relation counts, indexed [relation][node].
std::vector<std::vector<MotifCounts>> motif_count_table(const MultiplexGraph& g,
                                                        std::size_t threads = 1);

/// |V| x (9 |R|) matrix; block r holds log(1 + count) of relation r's layer
/// in catalog order. Columns are named "r<id>_<motif>". Pass
/// `log_scale = false` to keep raw counts.
FeatureMatrix motif_feature_matrix(const MultiplexGraph& g, std::size_t threads = 1,
                                   bool log_scale = true);

/// Column-wise concatenation. Rows must list the same nodes in the same
/// order; a matrix without columns is the identity element.
FeatureMatrix combine_features(const FeatureMatrix& given, const FeatureMatrix& motif);

/// The graph's own attributes as a matrix. All node types must share one
/// dense attribute dimension.
FeatureMatrix given_feature_matrix(const MultiplexGraph& g);

/// Replaces every node type's attributes with the matching rows.
MultiplexGraph apply_features(const MultiplexGraph& g, const FeatureMatrix& features);

/// Header line "#node <columns...>", then one row per node.
void write_feature_tsv(const FeatureMatrix& m, const std::filesystem::path& path);
FeatureMatrix read_feature_tsv(const std::filesystem::path& path);

}  // namespace mxembed
