#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "mxembed/graph.hpp"
#include "mxembed/rng.hpp"

namespace mxembed {

/// Node-type sequence V_1 -> ... -> V_l constraining walk transitions.
/// Walks longer than the schema repeat it from V_2, so schemas usually
/// start and end with the same type.
struct MetapathSchema {
  std::vector<TypeId> types;

  std::size_t length() const { return types.size(); }
  /// Required type at 0-based walk position p.
  TypeId type_at(std::size_t p) const;
};

MetapathSchema parse_schema(const Schema& s, std::string_view spec);  // "a,b,a"

/// Sparse transition law: nodes not listed have probability zero.
struct TransitionTable {
  std::vector<NodeId> nodes;
  std::vector<double> probabilities;

  double probability(NodeId u) const;
  bool empty() const { return nodes.empty(); }
};

/// Law of the next step from v on relation r when v sits at 0-based
/// position `step`: uniform over the neighbors whose type matches the
/// schema at step + 1 (all neighbors without a schema).
TransitionTable transition_distribution(const MultiplexGraph& g, NodeId v, RelationId r,
                                        const MetapathSchema* schema, std::size_t step);

struct WalkView {
  RelationId relation;
  std::span<const NodeId> nodes;
  bool truncated;
};

/// Relation-tagged walks stored back to back.
class WalkCorpus {
 public:
  void add(RelationId r, std::span<const NodeId> nodes, bool truncated);
  std::size_t size() const { return relations_.size(); }
  bool empty() const { return relations_.empty(); }
  WalkView operator[](std::size_t i) const {
    return {relations_[i],
            {nodes_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]},
            truncated_[i] != 0};
  }
  std::size_t total_nodes() const { return nodes_.size(); }
  void append(const WalkCorpus& other);
  bool operator==(const WalkCorpus&) const = default;

 private:
  std::vector<RelationId> relations_;
  std::vector<std::size_t> offsets_{0};
  std::vector<NodeId> nodes_;
  std::vector<std::uint8_t> truncated_;
};

struct WalkOptions {
  std::size_t walks_per_node = 20;
  std::size_t length = 10;
  std::optional<MetapathSchema> schema;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  /// Optional per-node mask; masked nodes start no walks and are never entered.
  const std::vector<bool>* exclude = nullptr;
};

/// For every relation r and every node v with a nonempty eligible
/// neighborhood, `walks_per_node` walks of up to `length` nodes. Walks that
/// get stuck keep their prefix when it has at least two nodes. Output order
/// is (relation, start node, walk index) and each (relation, start node)
/// draws from its own derived stream, so results do not depend on threads.
WalkCorpus generate_walks(const MultiplexGraph& g, const WalkOptions& options);

struct ContextTriple {
  NodeId center = 0;
  RelationId relation = 0;
  NodeId context = 0;
  auto operator<=>(const ContextTriple&) const = default;
};

/// Calls fn for every ordered pair of positions within `window` of each
/// other in every walk, skipping pairs that name the same node.
void for_each_context(const WalkCorpus& corpus, std::size_t window,
                      const std::function<void(const ContextTriple&)>& fn);
std::vector<ContextTriple> extract_contexts(const WalkCorpus& corpus, std::size_t window);

enum class NoiseKind : std::uint8_t { kUniform = 0, kLogUniformByDegree = 1 };

/// Sampling law for negative nodes over one node type.
struct NoiseDistribution {
  NoiseKind kind = NoiseKind::kUniform;
  std::vector<NodeId> nodes;        // eligible nodes (degree rank order for log-uniform)
  std::vector<double> cumulative;   // running sum, last entry == 1

  NodeId sample(Rng& rng) const;
  double probability(NodeId v) const;
};

/// Log-uniform ranks nodes by descending total degree (ties by id) and
/// gives rank k weight log(k + 2) - log(k + 1).
NoiseDistribution build_noise_distribution(const MultiplexGraph& g, TypeId type, NoiseKind kind,
                                           const std::vector<bool>* exclude = nullptr);

/// One file per relation: "walks_r<id>.bin" holding records of
/// (relation u16, length u16, node ids u32 ...), little-endian.
std::vector<std::filesystem::path> write_corpus_shards(const WalkCorpus& corpus,
                                                       std::size_t num_relations,
                                                       const std::filesystem::path& dir);
WalkCorpus read_corpus_shards(std::span<const std::filesystem::path> paths);

}  // namespace mxembed
