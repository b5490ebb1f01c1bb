#include "mxembed/sampling.hpp"

#include <string>

#include "mxembed/error.hpp"

namespace mxembed {

namespace {

void draw(std::span<const NodeId> pool, std::size_t size, Rng& rng, std::vector<NodeId>& out) {
  if (pool.empty()) return;
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  for (std::size_t i = 0; i < size; ++i) out.push_back(pool[pick(rng)]);
}

}  // namespace

std::vector<NodeId> sample_neighborhood(const MultiplexGraph& g, NodeId v, RelationId r,
                                        std::size_t size, Rng& rng) {
  if (size == 0) throw InvalidArgument("sample size must be positive");
  if (r >= g.num_relations()) throw InvalidArgument("unknown relation " + std::to_string(r));
  if (v >= g.num_nodes() || !g.type_compatible(v, r)) {
    throw InvalidArgument("node " + std::to_string(v) + " cannot take part in relation " +
                          std::to_string(r));
  }
  std::vector<NodeId> out;
  out.reserve(size);
  draw(g.neighbors(v, r), size, rng, out);
  return out;
}

std::size_t SampleTree::size() const {
  std::size_t n = 0;
  for (const auto& level : nodes) n += level.size();
  return n;
}

SampleTree build_k_level_sample(const MultiplexGraph& g, NodeId v,
                                std::span<const std::size_t> budgets, Rng& rng) {
  if (budgets.empty()) throw InvalidArgument("need at least one level (K >= 1)");
  for (auto b : budgets) {
    if (b == 0) throw InvalidArgument("neighborhood budgets must be positive");
  }
  if (v >= g.num_nodes()) throw InvalidArgument("unknown node " + std::to_string(v));
  const std::size_t R = g.num_relations();
  SampleTree tree;
  tree.root = v;
  tree.relations = R;
  tree.nodes.resize(budgets.size() + 1);
  tree.offsets.resize(budgets.size());
  tree.nodes[0].push_back(v);
  for (std::size_t depth = 0; depth < budgets.size(); ++depth) {
    const auto& parents = tree.nodes[depth];
    auto& children = tree.nodes[depth + 1];
    auto& off = tree.offsets[depth];
    off.reserve(parents.size() * R + 1);
    off.push_back(0);
    children.reserve(parents.size() * R * budgets[depth]);
    for (NodeId parent : parents) {
      for (RelationId r = 0; r < R; ++r) {
        if (g.type_compatible(parent, r)) draw(g.neighbors(parent, r), budgets[depth], rng, children);
        off.push_back(static_cast<std::uint32_t>(children.size()));
      }
    }
  }
  return tree;
}

}  // namespace mxembed
