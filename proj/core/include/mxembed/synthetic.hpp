#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "mxembed/graph.hpp"

namespace mxembed {

/// Undirected single-node-type multiplex graph; layer r becomes edge type "r<r>".
MultiplexGraph make_layered_graph(std::size_t nodes, const std::vector<std::vector<Edge>>& layers);

/// Each layer is G(n, p) drawn independently.
MultiplexGraph erdos_renyi_multiplex(std::size_t nodes, std::size_t relations, double p, std::uint64_t seed);

/// Two cliques of `clique` nodes joined by one bridge edge, repeated on `relations` layers.
MultiplexGraph barbell_multiplex(std::size_t clique, std::size_t relations);

struct PlantedPartitionOptions {
  std::size_t nodes = 500;
  std::size_t relations = 2;
  std::size_t communities = 2;
  /// Fraction of nodes taking part in each layer's community structure; the
  /// rest only receive noise edges.
  double participation = 0.2;
  /// Mean degree of a participating node in its layer.
  double degree = 10.0;
  /// Fraction of each layer's edges that join two uniformly random nodes.
  double noise = 0.1;
  std::uint64_t seed = 0;
};

/// Every layer draws its own participants and its own partition of them,
/// then places all structured edges inside communities.
MultiplexGraph planted_partition_multiplex(const PlantedPartitionOptions& options);

struct SharedLayerOptions {
  std::size_t nodes = 500;
  std::size_t relations = 2;
  std::size_t communities = 2;
  double participation = 0.2;
  double degree = 4.0;
  /// Fraction of every layer's edges drawn from one common pool.
  double shared = 0.6;
  double noise = 0.1;
  std::uint64_t seed = 0;
};

/// Layers share `shared` of their edges (a common planted partition); the
/// rest come from a layer-specific partition.
MultiplexGraph shared_edge_multiplex(const SharedLayerOptions& options);

struct DuplicatedLayerOptions {
  std::size_t nodes = 300;
  std::size_t communities = 2;
  double participation = 0.2;
  double degree = 10.0;
  /// Fraction of layer A's edges that layer B replaces with random pairs.
  double perturb = 0.2;
  double noise = 0.1;
  std::uint64_t seed = 0;
};

/// Three layers: A is planted, B copies A with some edges replaced, C is
/// planted independently of A.
MultiplexGraph duplicated_layer_multiplex(const DuplicatedLayerOptions& options);

}  // namespace mxembed
