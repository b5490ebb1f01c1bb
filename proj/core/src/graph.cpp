#include "mxembed/graph.hpp"

#include <algorithm>
#include <numeric>

#include "mxembed/error.hpp"

namespace mxembed {

std::optional<RelationId> Schema::find_relation(TypeId src, TypeId edge, TypeId dst) const {
  for (const auto& r : relations) {
    if (r.src_type == src && r.edge_type == edge && r.dst_type == dst) return r.id;
  }
  return std::nullopt;
}

std::optional<TypeId> Schema::find_node_type(std::string_view name) const {
  for (std::size_t t = 0; t < node_types.size(); ++t) {
    if (node_types[t] == name) return static_cast<TypeId>(t);
  }
  return std::nullopt;
}

std::string Schema::relation_name(RelationId r) const {
  const auto& rel = relations.at(r);
  return node_types.at(rel.src_type) + ":" + edge_types.at(rel.edge_type) + ":" +
         node_types.at(rel.dst_type);
}

namespace {

void validate_schema(const Schema& s) {
  for (std::size_t i = 0; i < s.relations.size(); ++i) {
    const auto& r = s.relations[i];
    if (r.id != i) throw InvalidArgument("relation ids must be dense and ordered");
    if (r.src_type >= s.node_types.size() || r.dst_type >= s.node_types.size() ||
        r.edge_type >= s.edge_types.size()) {
      throw InvalidArgument("relation " + std::to_string(i) + " references an unknown type");
    }
    for (std::size_t j = 0; j < i; ++j) {
      const auto& o = s.relations[j];
      if (o.src_type == r.src_type && o.edge_type == r.edge_type && o.dst_type == r.dst_type) {
        throw InvalidArgument("duplicate canonical relation " + s.relation_name(r.id));
      }
    }
  }
  auto unique_names = [](std::vector<std::string> names, const char* what) {
    std::sort(names.begin(), names.end());
    if (std::adjacent_find(names.begin(), names.end()) != names.end()) {
      throw InvalidArgument(std::string("duplicate ") + what + " name");
    }
  };
  unique_names(s.node_types, "node type");
  unique_names(s.edge_types, "edge type");
}

}  // namespace

MultiplexGraph::MultiplexGraph(GraphParts parts)
    : schema_(std::move(parts.schema)),
      edges_(std::move(parts.edges)),
      rules_(std::move(parts.rules)),
      undirected_(parts.undirected) {
  validate_schema(schema_);
  const std::size_t n = parts.node_type.size();
  if (parts.external_id.empty()) {
    parts.external_id.resize(n);
    std::iota(parts.external_id.begin(), parts.external_id.end(), std::int64_t{0});
  }
  if (parts.external_id.size() != n) throw InvalidArgument("external id count mismatch");

  auto table = std::make_shared<NodeTable>();
  table->type = std::move(parts.node_type);
  table->external_id = std::move(parts.external_id);
  table->local_index.resize(n);
  table->by_type.resize(schema_.node_types.size());
  for (NodeId v = 0; v < n; ++v) {
    const TypeId t = table->type[v];
    if (t >= schema_.node_types.size()) {
      throw InvalidArgument("node " + std::to_string(v) + " has unknown type");
    }
    table->local_index[v] = table->by_type[t].size();
    table->by_type[t].push_back(v);
  }
  table->sorted_ids.reserve(n);
  for (NodeId v = 0; v < n; ++v) table->sorted_ids.emplace_back(table->external_id[v], v);
  std::sort(table->sorted_ids.begin(), table->sorted_ids.end());
  for (std::size_t i = 1; i < n; ++i) {
    if (table->sorted_ids[i].first == table->sorted_ids[i - 1].first) {
      throw InvalidArgument("duplicate node id " + std::to_string(table->sorted_ids[i].first));
    }
  }
  nodes_ = std::move(table);

  if (parts.attributes.size() != schema_.node_types.size()) {
    throw InvalidArgument("need one attribute block per node type");
  }
  for (std::size_t t = 0; t < parts.attributes.size(); ++t) {
    auto& block = parts.attributes[t];
    const auto count = static_cast<Eigen::Index>(nodes_->by_type[t].size());
    if (block.identity) {
      block.dim = static_cast<std::size_t>(count);
      block.values.resize(0, 0);
    } else if (block.values.cols() != count ||
               block.values.rows() != static_cast<Eigen::Index>(block.dim)) {
      throw InvalidArgument("attribute block for type " + schema_.node_types[t] +
                            " does not cover every node");
    }
  }
  attributes_ = std::make_shared<const std::vector<AttributeBlock>>(std::move(parts.attributes));

  if (rules_.empty()) {
    rules_.assign(schema_.relations.size(), undirected_ ? NeighborRule::kBoth : NeighborRule::kIn);
  }
  if (rules_.size() != schema_.relations.size()) throw InvalidArgument("rule count mismatch");
  if (edges_.size() != schema_.relations.size()) {
    edges_.resize(schema_.relations.size());
  }
  build_indices();
}

void MultiplexGraph::build_indices() {
  const std::size_t n = num_nodes();
  const std::size_t R = num_relations();
  self_loops_.assign(R, 0);
  for (auto* csr : {&out_, &in_, &nbr_}) {
    csr->offsets.assign(R, {});
    csr->targets.assign(R, {});
  }
  for (RelationId r = 0; r < R; ++r) {
    const auto& rel = schema_.relations[r];
    auto& list = edges_[r];
    for (auto& e : list) {
      if (e.src >= n || e.dst >= n) throw InvalidArgument("edge endpoint out of range");
      if (nodes_->type[e.src] != rel.src_type || nodes_->type[e.dst] != rel.dst_type) {
        throw InvalidArgument("edge (" + std::to_string(external_id(e.src)) + ", " +
                              std::to_string(external_id(e.dst)) +
                              ") does not match relation " + schema_.relation_name(r));
      }
      if (undirected_ && rel.src_type == rel.dst_type && e.src > e.dst) std::swap(e.src, e.dst);
    }
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
    for (const auto& e : list) self_loops_[r] += e.src == e.dst ? 1 : 0;

    auto build = [&](Csr& csr, bool forward) {
      auto& off = csr.offsets[r];
      auto& tgt = csr.targets[r];
      off.assign(n + 1, 0);
      for (const auto& e : list) ++off[(forward ? e.src : e.dst) + 1];
      for (std::size_t i = 0; i < n; ++i) off[i + 1] += off[i];
      tgt.resize(list.size());
      std::vector<std::size_t> cursor(off.begin(), off.end() - 1);
      for (const auto& e : list) {
        const NodeId from = forward ? e.src : e.dst;
        tgt[cursor[from]++] = forward ? e.dst : e.src;
      }
      for (std::size_t i = 0; i < n; ++i) std::sort(tgt.begin() + off[i], tgt.begin() + off[i + 1]);
    };
    build(out_, true);
    build(in_, false);

    switch (rules_[r]) {
      case NeighborRule::kIn:
        nbr_.offsets[r] = in_.offsets[r];
        nbr_.targets[r] = in_.targets[r];
        break;
      case NeighborRule::kOut:
        nbr_.offsets[r] = out_.offsets[r];
        nbr_.targets[r] = out_.targets[r];
        break;
      case NeighborRule::kBoth: {
        auto& off = nbr_.offsets[r];
        auto& tgt = nbr_.targets[r];
        off.assign(n + 1, 0);
        tgt.reserve(2 * list.size());
        std::vector<NodeId> merged;
        for (NodeId v = 0; v < n; ++v) {
          auto a = out_neighbors(v, r);
          auto b = in_neighbors(v, r);
          merged.clear();
          std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(merged));
          tgt.insert(tgt.end(), merged.begin(), merged.end());
          off[v + 1] = tgt.size();
        }
        break;
      }
    }
  }
}

std::size_t MultiplexGraph::num_edges() const {
  std::size_t total = 0;
  for (const auto& e : edges_) total += e.size();
  return total;
}

std::optional<NodeId> MultiplexGraph::find_node(std::int64_t external) const {
  if (!nodes_) return std::nullopt;
  const auto& ids = nodes_->sorted_ids;
  auto it = std::lower_bound(ids.begin(), ids.end(), std::make_pair(external, NodeId{0}));
  if (it == ids.end() || it->first != external) return std::nullopt;
  return it->second;
}

std::size_t MultiplexGraph::total_degree(NodeId v) const {
  std::size_t d = 0;
  for (RelationId r = 0; r < num_relations(); ++r) d += degree(v, r);
  return d;
}

bool MultiplexGraph::type_compatible(NodeId v, RelationId r) const {
  const auto& rel = relation(r);
  const TypeId t = node_type(v);
  return t == rel.src_type || t == rel.dst_type;
}

bool MultiplexGraph::has_edge(RelationId r, NodeId u, NodeId v) const {
  auto contains = [](std::span<const NodeId> s, NodeId x) {
    return std::binary_search(s.begin(), s.end(), x);
  };
  if (contains(out_neighbors(u, r), v)) return true;
  return undirected_ && contains(out_neighbors(v, r), u);
}

MultiplexGraph MultiplexGraph::with_edges(std::vector<std::vector<Edge>> edges) const {
  if (edges.size() != num_relations()) throw InvalidArgument("edge lists must cover every relation");
  MultiplexGraph g;
  g.schema_ = schema_;
  g.nodes_ = nodes_;
  g.attributes_ = attributes_;
  g.edges_ = std::move(edges);
  g.rules_ = rules_;
  g.undirected_ = undirected_;
  g.build_indices();
  return g;
}

MultiplexGraph MultiplexGraph::with_attributes(std::vector<AttributeBlock> attributes) const {
  auto p = parts();
  p.attributes = std::move(attributes);
  return MultiplexGraph(std::move(p));
}

GraphParts MultiplexGraph::parts() const {
  GraphParts p;
  p.schema = schema_;
  if (nodes_) {
    p.node_type = nodes_->type;
    p.external_id = nodes_->external_id;
  }
  if (attributes_) p.attributes = *attributes_;
  p.edges = edges_;
  p.rules = rules_;
  p.undirected = undirected_;
  return p;
}

GraphView::GraphView(const MultiplexGraph& g, RelationId r) : graph_(&g), relation_(r) {
  if (r >= g.num_relations()) {
    throw InvalidArgument("relation " + std::to_string(r) + " is not part of the graph");
  }
}

std::vector<NodeId> GraphView::nodes() const {
  const auto& rel = graph_->relation(relation_);
  std::vector<NodeId> out;
  auto a = graph_->nodes_of_type(rel.src_type);
  out.assign(a.begin(), a.end());
  if (rel.dst_type != rel.src_type) {
    auto b = graph_->nodes_of_type(rel.dst_type);
    out.insert(out.end(), b.begin(), b.end());
    std::sort(out.begin(), out.end());
  }
  return out;
}

std::span<const NodeId> GraphView::neighbors(NodeId v) const {
  if (!contains(v)) return {};
  return graph_->neighbors(v, relation_);
}

GraphView relation_view(const MultiplexGraph& g, RelationId r) { return GraphView(g, r); }

GraphView relation_view(const MultiplexGraph& g, const CanonicalRelation& r) {
  auto id = g.schema().find_relation(r.src_type, r.edge_type, r.dst_type);
  if (!id) throw InvalidArgument("canonical relation is not part of the graph");
  return GraphView(g, *id);
}

}  // namespace mxembed
