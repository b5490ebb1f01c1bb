#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "mxembed/graph.hpp"

namespace mxembed {

/// Connected simple graphs on 2-4 nodes, in catalog order.
enum class Motif : std::uint8_t {
  kEdge = 0,
  kPath3,
  kTriangle,
  kPath4,
  kStar3,
  kCycle4,
  kTailedTriangle,
  kDiamond,
  kClique4,
};

inline constexpr std::size_t kMotifCount = 9;

struct MotifInfo {
  Motif motif;
  std::string_view name;
  int nodes;
  int edges;
  /// Canonical adjacency code: the smallest upper-triangle bitmask over all
  /// relabelings of the motif's nodes (pair order (0,1),(0,2),(0,3),(1,2),(1,3),(2,3)).
  std::uint8_t signature;
};

const std::array<MotifInfo, kMotifCount>& motif_catalog();

/// Canonical adjacency code of an arbitrary graph on `nodes` <= 4 vertices,
/// given as an upper-triangle bitmask in the same pair order.
std::uint8_t canonical_signature(int nodes, std::uint8_t adjacency);

using MotifCounts = std::array<std::uint64_t, kMotifCount>;

struct MotifCountVector {
  NodeId node = 0;
  RelationId relation = 0;
  MotifCounts counts{};
};

/// Undirected simple graph used for counting: symmetric sorted adjacency,
/// no self-loops, no parallel edges.
class SimpleLayer {
 public:
  SimpleLayer() = default;
  SimpleLayer(std::size_t num_nodes, std::span<const Edge> edges);
  /// Symmetrized relation layer restricted to the view's nodes.
  explicit SimpleLayer(const GraphView& view);

  std::size_t num_nodes() const { return adj_.size(); }
  std::size_t num_active() const { return active_; }
  std::span<const NodeId> neighbors(NodeId v) const { return adj_[v]; }
  bool adjacent(NodeId a, NodeId b) const;
  bool contains(NodeId v) const { return member_.empty() || member_[v]; }

 private:
  std::vector<std::vector<NodeId>> adj_;
  std::vector<bool> member_;  // empty: every node belongs to the layer
  std::size_t active_ = 0;
};

/// Induced 2-4 node motif participation of one node, by rooted enumeration
/// of the connected node sets that contain it.
MotifCounts count_motifs_node(const SimpleLayer& layer, NodeId v);
MotifCountVector count_motifs_node(const GraphView& view, NodeId v);

/// Counts for every node of a layer at once. Each connected set is
/// enumerated once from its smallest member. Output is indexed by node id
/// and does not depend on `threads`.
std::vector<MotifCounts> count_motifs_layer(const SimpleLayer& layer, std::size_t threads = 1);

/// Exhaustive reference: examines every 2-, 3- and 4-subset containing v.
/// Refuses layers with more than `kOracleNodeLimit` nodes.
inline constexpr std::size_t kOracleNodeLimit = 200;
MotifCounts brute_force_motif_oracle(const SimpleLayer& layer, NodeId v);
MotifCountVector brute_force_motif_oracle(const GraphView& view, NodeId v);

}  // namespace mxembed
