#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "mxembed/graph.hpp"
#include "mxembed/rng.hpp"

namespace mxembed {

/// Draws `size` neighbors of v on relation r uniformly with replacement.
/// Returns an empty sample when N(v, r) is empty. Throws when size is zero
/// or v cannot take part in r.
std::vector<NodeId> sample_neighborhood(const MultiplexGraph& g, NodeId v, RelationId r,
                                        std::size_t size, Rng& rng);

/// K-level neighborhood sample rooted at a target node.
///
/// Depth 0 holds the root. Every node at depth j < K has, for each relation
/// r, a block of children at depth j + 1 drawn from N(node, r) with budget
/// `budgets[j]`. A node at depth j needs representations up to level K - j.
struct SampleTree {
  NodeId root = 0;
  std::size_t relations = 0;
  std::vector<std::vector<NodeId>> nodes;           // per depth 0..K
  std::vector<std::vector<std::uint32_t>> offsets;  // per depth 0..K-1, size |nodes[j]|*R + 1

  std::size_t levels() const { return nodes.empty() ? 0 : nodes.size() - 1; }
  std::span<const NodeId> children(std::size_t depth, std::size_t index, RelationId r) const {
    const auto& off = offsets[depth];
    const std::size_t slot = index * relations + r;
    return {nodes[depth + 1].data() + off[slot], off[slot + 1] - off[slot]};
  }
  std::pair<std::uint32_t, std::uint32_t> child_range(std::size_t depth, std::size_t index,
                                                      RelationId r) const {
    const std::size_t slot = index * relations + r;
    return {offsets[depth][slot], offsets[depth][slot + 1]};
  }
  std::size_t size() const;
};

/// Builds a tree with K = budgets.size() levels. Relations a node cannot
/// take part in contribute an empty block.
SampleTree build_k_level_sample(const MultiplexGraph& g, NodeId v,
                                std::span<const std::size_t> budgets, Rng& rng);

}  // namespace mxembed
