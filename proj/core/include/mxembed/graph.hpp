#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace mxembed {

using NodeId = std::uint32_t;
using TypeId = std::uint16_t;
using RelationId = std::uint16_t;

struct Edge {
  NodeId src = 0;
  NodeId dst = 0;
  auto operator<=>(const Edge&) const = default;
};

/// A relation layer named by (source node type, edge type, destination node type).
struct CanonicalRelation {
  TypeId src_type = 0;
  TypeId edge_type = 0;
  TypeId dst_type = 0;
  RelationId id = 0;
  bool operator==(const CanonicalRelation&) const = default;
};

/// Which incidence list defines N(v, r) for aggregation, sampling and walks.
enum class NeighborRule : std::uint8_t { kIn = 0, kOut = 1, kBoth = 2 };

struct Schema {
  std::vector<std::string> node_types;
  std::vector<std::string> edge_types;
  std::vector<CanonicalRelation> relations;

  std::size_t num_relations() const { return relations.size(); }
  std::optional<RelationId> find_relation(TypeId src, TypeId edge, TypeId dst) const;
  std::optional<TypeId> find_node_type(std::string_view name) const;
  /// "src:edge:dst" label for reports.
  std::string relation_name(RelationId r) const;
  bool operator==(const Schema&) const = default;
};

/// Attributes of all nodes of one type. Identity blocks stand for one-hot
/// vectors over the type's nodes and carry no storage.
struct AttributeBlock {
  bool identity = false;
  std::size_t dim = 0;
  Eigen::MatrixXd values;  // dim x count, column per node in type-local order

  bool operator==(const AttributeBlock& o) const {
    return identity == o.identity && dim == o.dim && values.rows() == o.values.rows() &&
           values.cols() == o.values.cols() && values == o.values;
  }
};

/// Everything needed to build a graph. Edge lists are indexed by relation id.
struct GraphParts {
  Schema schema;
  std::vector<TypeId> node_type;
  std::vector<std::int64_t> external_id;
  std::vector<AttributeBlock> attributes;  // one per node type
  std::vector<std::vector<Edge>> edges;    // per relation
  std::vector<NeighborRule> rules;         // per relation; empty -> all kIn
  bool undirected = false;
};

/// Immutable attributed heterogeneous multiplex graph with per-relation
/// forward/reverse CSR incidence. Copies share node and attribute storage.
class MultiplexGraph {
 public:
  MultiplexGraph() = default;
  explicit MultiplexGraph(GraphParts parts);

  std::size_t num_nodes() const { return nodes_ ? nodes_->type.size() : 0; }
  std::size_t num_relations() const { return schema_.relations.size(); }
  std::size_t num_node_types() const { return schema_.node_types.size(); }
  std::size_t num_edges() const;
  std::size_t num_edges(RelationId r) const { return edges_.at(r).size(); }

  const Schema& schema() const { return schema_; }
  const CanonicalRelation& relation(RelationId r) const { return schema_.relations.at(r); }
  bool undirected() const { return undirected_; }
  NeighborRule rule(RelationId r) const { return rules_.at(r); }

  TypeId node_type(NodeId v) const { return nodes_->type[v]; }
  std::size_t type_local_index(NodeId v) const { return nodes_->local_index[v]; }
  std::int64_t external_id(NodeId v) const { return nodes_->external_id[v]; }
  std::optional<NodeId> find_node(std::int64_t external) const;
  std::span<const NodeId> nodes_of_type(TypeId t) const { return nodes_->by_type.at(t); }

  const AttributeBlock& attributes(TypeId t) const { return (*attributes_).at(t); }
  std::size_t input_dim(TypeId t) const { return attributes(t).dim; }

  /// Stored edges of a relation, sorted and unique. Undirected same-type
  /// relations store each pair once with src <= dst.
  const std::vector<Edge>& edges(RelationId r) const { return edges_.at(r); }
  std::size_t self_loops(RelationId r) const { return self_loops_.at(r); }

  std::span<const NodeId> out_neighbors(NodeId v, RelationId r) const {
    return row(out_, r, v);
  }
  std::span<const NodeId> in_neighbors(NodeId v, RelationId r) const {
    return row(in_, r, v);
  }
  /// N(v, r) under the relation's neighbor rule; sorted, unique.
  std::span<const NodeId> neighbors(NodeId v, RelationId r) const {
    return row(nbr_, r, v);
  }
  std::size_t degree(NodeId v, RelationId r) const { return neighbors(v, r).size(); }
  std::size_t total_degree(NodeId v) const;

  /// True when v can be an endpoint of r.
  bool type_compatible(NodeId v, RelationId r) const;
  /// Stored-edge membership; undirected graphs ignore orientation.
  bool has_edge(RelationId r, NodeId u, NodeId v) const;

  /// Same nodes, schema, attributes and rules with a different edge set.
  MultiplexGraph with_edges(std::vector<std::vector<Edge>> edges) const;
  /// Same structure with replaced attribute blocks.
  MultiplexGraph with_attributes(std::vector<AttributeBlock> attributes) const;

  GraphParts parts() const;

 private:
  struct NodeTable {
    std::vector<TypeId> type;
    std::vector<std::size_t> local_index;
    std::vector<std::int64_t> external_id;
    std::vector<std::vector<NodeId>> by_type;
    std::vector<std::pair<std::int64_t, NodeId>> sorted_ids;
  };
  struct Csr {
    std::vector<std::vector<std::size_t>> offsets;  // per relation, |V|+1
    std::vector<std::vector<NodeId>> targets;       // per relation
  };

  static std::span<const NodeId> row(const Csr& c, RelationId r, NodeId v) {
    const auto& off = c.offsets[r];
    return {c.targets[r].data() + off[v], off[v + 1] - off[v]};
  }
  void build_indices();

  Schema schema_;
  std::shared_ptr<const NodeTable> nodes_;
  std::shared_ptr<const std::vector<AttributeBlock>> attributes_;
  std::vector<std::vector<Edge>> edges_;
  std::vector<NeighborRule> rules_;
  std::vector<std::size_t> self_loops_;
  bool undirected_ = false;
  Csr out_, in_, nbr_;
};

/// Read-only single-relation view G_r.
class GraphView {
 public:
  GraphView(const MultiplexGraph& g, RelationId r);

  const MultiplexGraph& graph() const { return *graph_; }
  RelationId relation() const { return relation_; }
  bool contains(NodeId v) const { return graph_->type_compatible(v, relation_); }
  std::vector<NodeId> nodes() const;
  std::size_t num_edges() const { return graph_->num_edges(relation_); }
  const std::vector<Edge>& edges() const { return graph_->edges(relation_); }
  std::span<const NodeId> neighbors(NodeId v) const;

 private:
  const MultiplexGraph* graph_;
  RelationId relation_;
};

/// Throws InvalidArgument when r is not a relation of g.
GraphView relation_view(const MultiplexGraph& g, RelationId r);
GraphView relation_view(const MultiplexGraph& g, const CanonicalRelation& r);

}  // namespace mxembed
