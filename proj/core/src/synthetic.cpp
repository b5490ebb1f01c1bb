#include "mxembed/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <string>

#include "mxembed/error.hpp"
#include "mxembed/rng.hpp"

namespace mxembed {

namespace {

Edge ordered(NodeId a, NodeId b) { return a < b ? Edge{a, b} : Edge{b, a}; }

struct Partition {
  std::vector<std::vector<NodeId>> groups;
};

// Random participants split into near-equal communities.
Partition random_partition(std::size_t n, double participation, std::size_t communities, Rng& rng) {
  std::vector<NodeId> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  const auto active = static_cast<std::size_t>(std::llround(participation * static_cast<double>(n)));
  Partition p;
  p.groups.resize(communities);
  for (std::size_t i = 0; i < active; ++i) p.groups[i % communities].push_back(perm[i]);
  return p;
}

std::size_t participant_count(const Partition& p) {
  std::size_t n = 0;
  for (const auto& g : p.groups) n += g.size();
  return n;
}

// Adds `count` distinct intra-community edges to `edges`.
void add_community_edges(const Partition& p, std::size_t count, std::set<Edge>& edges, Rng& rng) {
  const std::size_t total = participant_count(p);
  std::vector<double> weights;
  for (const auto& g : p.groups) weights.push_back(static_cast<double>(g.size()));
  std::discrete_distribution<std::size_t> pick_group(weights.begin(), weights.end());
  const std::size_t target = edges.size() + count;
  for (std::size_t attempt = 0; edges.size() < target && attempt < 100 * count + 1000; ++attempt) {
    const auto& g = p.groups[pick_group(rng)];
    if (g.size() < 2 || total < 2) break;
    std::uniform_int_distribution<std::size_t> pick(0, g.size() - 1);
    const NodeId a = g[pick(rng)];
    const NodeId b = g[pick(rng)];
    if (a != b) edges.insert(ordered(a, b));
  }
}

void add_random_edges(std::size_t n, std::size_t count, std::set<Edge>& edges, Rng& rng) {
  std::uniform_int_distribution<NodeId> pick(0, static_cast<NodeId>(n - 1));
  const std::size_t target = edges.size() + count;
  for (std::size_t attempt = 0; edges.size() < target && attempt < 100 * count + 1000; ++attempt) {
    const NodeId a = pick(rng);
    const NodeId b = pick(rng);
    if (a != b) edges.insert(ordered(a, b));
  }
}

std::size_t edge_budget(std::size_t participants, double degree) {
  return static_cast<std::size_t>(std::llround(degree * static_cast<double>(participants) / 2.0));
}

void check_common(std::size_t nodes, std::size_t communities, double participation, double noise) {
  if (nodes < 2) throw InvalidArgument("synthetic graph needs at least two nodes");
  if (communities == 0) throw InvalidArgument("synthetic graph needs at least one community");
  if (!(participation > 0.0 && participation <= 1.0)) throw InvalidArgument("participation must lie in (0, 1]");
  if (!(noise >= 0.0 && noise < 1.0)) throw InvalidArgument("noise must lie in [0, 1)");
}

}  // namespace

MultiplexGraph make_layered_graph(std::size_t nodes, const std::vector<std::vector<Edge>>& layers) {
  GraphParts parts;
  parts.undirected = true;
  parts.schema.node_types = {"node"};
  for (std::size_t r = 0; r < layers.size(); ++r) {
    parts.schema.edge_types.push_back("r" + std::to_string(r));
    parts.schema.relations.push_back({0, static_cast<TypeId>(r), 0, static_cast<RelationId>(r)});
  }
  parts.node_type.assign(nodes, 0);
  parts.external_id.resize(nodes);
  std::iota(parts.external_id.begin(), parts.external_id.end(), 0);
  parts.attributes.resize(1);
  parts.attributes[0].identity = true;
  parts.edges = layers;
  return MultiplexGraph(std::move(parts));
}

MultiplexGraph erdos_renyi_multiplex(std::size_t nodes, std::size_t relations, double p, std::uint64_t seed) {
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("edge probability must lie in [0, 1]");
  std::vector<std::vector<Edge>> layers(relations);
  for (std::size_t r = 0; r < relations; ++r) {
    Rng rng(derive_seed(seed, 0x6572, r));
    std::bernoulli_distribution coin(p);
    for (NodeId a = 0; a < nodes; ++a) {
      for (NodeId b = a + 1; b < nodes; ++b) {
        if (coin(rng)) layers[r].push_back({a, b});
      }
    }
  }
  return make_layered_graph(nodes, layers);
}

MultiplexGraph barbell_multiplex(std::size_t clique, std::size_t relations) {
  if (clique < 2) throw InvalidArgument("barbell cliques need at least two nodes");
  std::vector<Edge> edges;
  for (std::size_t side = 0; side < 2; ++side) {
    const auto base = static_cast<NodeId>(side * clique);
    for (NodeId a = 0; a < clique; ++a) {
      for (NodeId b = a + 1; b < clique; ++b) edges.push_back({base + a, base + b});
    }
  }
  edges.push_back({static_cast<NodeId>(clique - 1), static_cast<NodeId>(clique)});
  return make_layered_graph(2 * clique, std::vector<std::vector<Edge>>(relations, edges));
}

MultiplexGraph planted_partition_multiplex(const PlantedPartitionOptions& o) {
  check_common(o.nodes, o.communities, o.participation, o.noise);
  std::vector<std::vector<Edge>> layers(o.relations);
  for (std::size_t r = 0; r < o.relations; ++r) {
    Rng rng(derive_seed(o.seed, 0x706c616e, r));
    const Partition part = random_partition(o.nodes, o.participation, o.communities, rng);
    const std::size_t m = edge_budget(participant_count(part), o.degree);
    const auto noisy = static_cast<std::size_t>(std::llround(o.noise * static_cast<double>(m)));
    std::set<Edge> edges;
    add_community_edges(part, m - noisy, edges, rng);
    add_random_edges(o.nodes, noisy, edges, rng);
    layers[r].assign(edges.begin(), edges.end());
  }
  return make_layered_graph(o.nodes, layers);
}

MultiplexGraph shared_edge_multiplex(const SharedLayerOptions& o) {
  check_common(o.nodes, o.communities, o.participation, o.noise);
  if (!(o.shared >= 0.0 && o.shared <= 1.0)) throw InvalidArgument("shared fraction must lie in [0, 1]");
  Rng pool_rng(derive_seed(o.seed, 0x706f6f6c));
  const Partition common = random_partition(o.nodes, o.participation, o.communities, pool_rng);
  const std::size_t m = edge_budget(participant_count(common), o.degree);
  const auto shared = static_cast<std::size_t>(std::llround(o.shared * static_cast<double>(m)));
  std::set<Edge> pool_set;
  add_community_edges(common, shared, pool_set, pool_rng);
  const std::vector<Edge> pool(pool_set.begin(), pool_set.end());

  std::vector<std::vector<Edge>> layers(o.relations);
  for (std::size_t r = 0; r < o.relations; ++r) {
    Rng rng(derive_seed(o.seed, 0x6c617972, r));
    const Partition own = random_partition(o.nodes, o.participation, o.communities, rng);
    std::set<Edge> edges(pool.begin(), pool.end());
    const std::size_t rest = m - std::min(m, edges.size());
    const auto noisy = static_cast<std::size_t>(std::llround(o.noise * static_cast<double>(m)));
    add_community_edges(own, rest - std::min(rest, noisy), edges, rng);
    add_random_edges(o.nodes, std::min(rest, noisy), edges, rng);
    layers[r].assign(edges.begin(), edges.end());
  }
  return make_layered_graph(o.nodes, layers);
}

MultiplexGraph duplicated_layer_multiplex(const DuplicatedLayerOptions& o) {
  check_common(o.nodes, o.communities, o.participation, o.noise);
  if (!(o.perturb >= 0.0 && o.perturb < 1.0)) throw InvalidArgument("perturb must lie in [0, 1)");
  auto planted = [&](std::uint64_t stream) {
    Rng rng(derive_seed(o.seed, stream));
    const Partition part = random_partition(o.nodes, o.participation, o.communities, rng);
    const std::size_t m = edge_budget(participant_count(part), o.degree);
    const auto noisy = static_cast<std::size_t>(std::llround(o.noise * static_cast<double>(m)));
    std::set<Edge> edges;
    add_community_edges(part, m - noisy, edges, rng);
    add_random_edges(o.nodes, noisy, edges, rng);
    return std::vector<Edge>(edges.begin(), edges.end());
  };
  const std::vector<Edge> a = planted(0x41);
  const std::vector<Edge> c = planted(0x43);

  Rng rng(derive_seed(o.seed, 0x42));
  std::vector<Edge> kept = a;
  std::shuffle(kept.begin(), kept.end(), rng);
  const auto replace = static_cast<std::size_t>(std::llround(o.perturb * static_cast<double>(a.size())));
  kept.resize(a.size() - replace);
  std::set<Edge> b(kept.begin(), kept.end());
  add_random_edges(o.nodes, replace, b, rng);
  return make_layered_graph(o.nodes, {a, std::vector<Edge>(b.begin(), b.end()), c});
}

}  // namespace mxembed
