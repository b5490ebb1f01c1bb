#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "mxembed/graph.hpp"

namespace mxembed {

struct GraphFiles {
  std::filesystem::path edges;                     // rows: edge_type src dst
  std::optional<std::filesystem::path> node_types;  // rows: node_id node_type
  std::map<std::string, std::filesystem::path> features;  // node type -> rows: node_id v1 ...
};

struct LoadOptions {
  /// Treat every relation as undirected: pairs are stored once and
  /// neighborhoods read both incidence directions.
  bool undirected = false;
  /// Nodes without a feature row get a zero vector instead of an error.
  bool zero_fill = false;
};

/// Loads whitespace-separated text files. Blank lines and lines starting
/// with '#' are skipped. Without a node-type file every node gets the type
/// "node" and nodes are numbered in order of first appearance. Node types
/// without a feature file get identity (one-hot) attributes.
MultiplexGraph load_graph(const GraphFiles& files, const LoadOptions& options = {});

/// Binary cache: "RHMN", version byte, then the full graph.
void save_graph_cache(const MultiplexGraph& g, const std::filesystem::path& path);
MultiplexGraph load_graph_cache(const std::filesystem::path& path);

/// Writes the graph back to the text formats accepted by load_graph.
void save_graph_text(const MultiplexGraph& g, const std::filesystem::path& edges,
                     const std::filesystem::path& node_types);

}  // namespace mxembed
