#include "mxembed/motifs.hpp"

#include <algorithm>
#include <numeric>
#include <string>
#include <utility>

#include "mxembed/error.hpp"
#include "mxembed/parallel.hpp"

namespace mxembed {

namespace {

constexpr int pair_bit(int i, int j) {
  if (i > j) std::swap(i, j);
  // (0,1)=0 (0,2)=1 (0,3)=2 (1,2)=3 (1,3)=4 (2,3)=5
  return i == 0 ? j - 1 : (i == 1 ? j + 1 : 5);
}

std::uint8_t relabel(std::uint8_t adjacency, const std::array<int, 4>& perm) {
  std::uint8_t out = 0;
  for (int i = 0; i < 4; ++i) {
    for (int j = i + 1; j < 4; ++j) {
      if (adjacency & (1u << pair_bit(i, j))) out |= static_cast<std::uint8_t>(1u << pair_bit(perm[i], perm[j]));
    }
  }
  return out;
}

using SignatureTable = std::array<std::array<std::uint8_t, 64>, 5>;

const SignatureTable& signature_table() {
  static const SignatureTable table = [] {
    SignatureTable t{};
    for (int k = 0; k <= 4; ++k) {
      for (int mask = 0; mask < 64; ++mask) {
        std::array<int, 4> perm{0, 1, 2, 3};
        std::uint8_t best = 0xff;
        do {
          best = std::min(best, relabel(static_cast<std::uint8_t>(mask), perm));
        } while (std::next_permutation(perm.begin(), perm.begin() + k));
        t[k][mask] = best;
      }
    }
    return t;
  }();
  return table;
}

std::uint8_t mask_of(std::initializer_list<std::pair<int, int>> edges) {
  std::uint8_t m = 0;
  for (auto [a, b] : edges) m |= static_cast<std::uint8_t>(1u << pair_bit(a, b));
  return m;
}

// Classification used by the enumerators; the oracle instead matches
// canonical signatures.
Motif classify(const SimpleLayer& layer, const NodeId* set, int size) {
  if (size == 2) return Motif::kEdge;
  int edges = 0;
  std::array<int, 4> deg{};
  for (int i = 0; i < size; ++i) {
    for (int j = i + 1; j < size; ++j) {
      if (layer.adjacent(set[i], set[j])) {
        ++edges;
        ++deg[i];
        ++deg[j];
      }
    }
  }
  if (size == 3) return edges == 3 ? Motif::kTriangle : Motif::kPath3;
  const int max_deg = *std::max_element(deg.begin(), deg.end());
  switch (edges) {
    case 3:
      return max_deg == 3 ? Motif::kStar3 : Motif::kPath4;
    case 4:
      return max_deg == 3 ? Motif::kTailedTriangle : Motif::kCycle4;
    case 5:
      return Motif::kDiamond;
    default:
      return Motif::kClique4;
  }
}

// ESU extension step. `floor` restricts added vertices to ids > floor when
// enumerating each set once per layer; pass no floor for rooted enumeration.
template <typename Visit>
void extend(const SimpleLayer& layer, std::array<NodeId, 4>& sub, int size,
            std::vector<NodeId> ext, bool use_floor, NodeId floor, Visit& visit) {
  if (size >= 2) visit(sub.data(), size);
  if (size == 4) return;
  while (!ext.empty()) {
    const NodeId w = ext.back();
    ext.pop_back();
    std::vector<NodeId> next = ext;
    for (NodeId u : layer.neighbors(w)) {
      if (use_floor && u <= floor) continue;
      bool exclusive = true;
      for (int i = 0; i < size && exclusive; ++i) {
        exclusive = u != sub[i] && !layer.adjacent(u, sub[i]);
      }
      if (exclusive) next.push_back(u);
    }
    sub[size] = w;
    extend(layer, sub, size + 1, std::move(next), use_floor, floor, visit);
  }
}

}  // namespace

const std::array<MotifInfo, kMotifCount>& motif_catalog() {
  static const std::array<MotifInfo, kMotifCount> catalog = [] {
    const auto& t = signature_table();
    return std::array<MotifInfo, kMotifCount>{{
        {Motif::kEdge, "edge", 2, 1, t[2][mask_of({{0, 1}})]},
        {Motif::kPath3, "path3", 3, 2, t[3][mask_of({{0, 1}, {1, 2}})]},
        {Motif::kTriangle, "triangle", 3, 3, t[3][mask_of({{0, 1}, {1, 2}, {0, 2}})]},
        {Motif::kPath4, "path4", 4, 3, t[4][mask_of({{0, 1}, {1, 2}, {2, 3}})]},
        {Motif::kStar3, "star3", 4, 3, t[4][mask_of({{0, 1}, {0, 2}, {0, 3}})]},
        {Motif::kCycle4, "cycle4", 4, 4, t[4][mask_of({{0, 1}, {1, 2}, {2, 3}, {3, 0}})]},
        {Motif::kTailedTriangle, "tailed_triangle", 4, 4,
         t[4][mask_of({{0, 1}, {1, 2}, {0, 2}, {2, 3}})]},
        {Motif::kDiamond, "diamond", 4, 5,
         t[4][mask_of({{0, 1}, {1, 2}, {2, 3}, {3, 0}, {0, 2}})]},
        {Motif::kClique4, "clique4", 4, 6,
         t[4][mask_of({{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}})]},
    }};
  }();
  return catalog;
}

std::uint8_t canonical_signature(int nodes, std::uint8_t adjacency) {
  if (nodes < 0 || nodes > 4 || adjacency >= 64) throw InvalidArgument("signature needs <= 4 nodes");
  return signature_table()[nodes][adjacency];
}

SimpleLayer::SimpleLayer(std::size_t num_nodes, std::span<const Edge> edges) : adj_(num_nodes) {
  for (const auto& e : edges) {
    if (e.src >= num_nodes || e.dst >= num_nodes) throw InvalidArgument("edge endpoint out of range");
    if (e.src == e.dst) continue;
    adj_[e.src].push_back(e.dst);
    adj_[e.dst].push_back(e.src);
  }
  for (auto& list : adj_) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }
  active_ = num_nodes;
}

SimpleLayer::SimpleLayer(const GraphView& view)
    : SimpleLayer(view.graph().num_nodes(), view.edges()) {
  const auto& g = view.graph();
  member_.assign(g.num_nodes(), false);
  active_ = 0;
  for (NodeId v : view.nodes()) {
    member_[v] = true;
    ++active_;
  }
}

bool SimpleLayer::adjacent(NodeId a, NodeId b) const {
  const auto& la = adj_[a];
  const auto& lb = adj_[b];
  if (la.size() <= lb.size()) return std::binary_search(la.begin(), la.end(), b);
  return std::binary_search(lb.begin(), lb.end(), a);
}

MotifCounts count_motifs_node(const SimpleLayer& layer, NodeId v) {
  if (v >= layer.num_nodes()) throw InvalidArgument("node out of range");
  MotifCounts counts{};
  auto visit = [&](const NodeId* set, int size) {
    ++counts[static_cast<std::size_t>(classify(layer, set, size))];
  };
  std::array<NodeId, 4> sub{v, 0, 0, 0};
  auto first = layer.neighbors(v);
  extend(layer, sub, 1, std::vector<NodeId>(first.begin(), first.end()), false, 0, visit);
  return counts;
}

MotifCountVector count_motifs_node(const GraphView& view, NodeId v) {
  if (!view.contains(v)) throw InvalidArgument("node " + std::to_string(v) + " is not in the view");
  SimpleLayer layer(view);
  return {v, view.relation(), count_motifs_node(layer, v)};
}

std::vector<MotifCounts> count_motifs_layer(const SimpleLayer& layer, std::size_t threads) {
  const std::size_t n = layer.num_nodes();
  threads = std::max<std::size_t>(1, std::min(threads, n));
  std::vector<std::vector<MotifCounts>> partial(threads, std::vector<MotifCounts>(n, MotifCounts{}));
  parallel_for(n, threads, [&](std::size_t worker, std::size_t begin, std::size_t end) {
    auto& counts = partial[worker];
    auto visit = [&](const NodeId* set, int size) {
      const auto m = static_cast<std::size_t>(classify(layer, set, size));
      for (int i = 0; i < size; ++i) ++counts[set[i]][m];
    };
    std::vector<NodeId> first;
    for (std::size_t root = begin; root < end; ++root) {
      const auto v = static_cast<NodeId>(root);
      first.clear();
      for (NodeId u : layer.neighbors(v)) {
        if (u > v) first.push_back(u);
      }
      std::array<NodeId, 4> sub{v, 0, 0, 0};
      extend(layer, sub, 1, first, true, v, visit);
    }
  });
  // Integer sums: the result is independent of how roots were partitioned.
  for (std::size_t w = 1; w < partial.size(); ++w) {
    for (std::size_t v = 0; v < n; ++v) {
      for (std::size_t m = 0; m < kMotifCount; ++m) partial[0][v][m] += partial[w][v][m];
    }
  }
  return std::move(partial[0]);
}

MotifCounts brute_force_motif_oracle(const SimpleLayer& layer, NodeId v) {
  if (layer.num_active() > kOracleNodeLimit) {
    throw InvalidArgument("brute-force oracle limited to " + std::to_string(kOracleNodeLimit) +
                          " nodes, layer has " + std::to_string(layer.num_active()));
  }
  if (v >= layer.num_nodes()) throw InvalidArgument("node out of range");
  const auto& catalog = motif_catalog();
  std::vector<NodeId> others;
  for (NodeId u = 0; u < layer.num_nodes(); ++u) {
    if (u != v && layer.contains(u)) others.push_back(u);
  }
  MotifCounts counts{};
  auto tally = [&](const std::array<NodeId, 4>& set, int size) {
    std::uint8_t mask = 0;
    for (int i = 0; i < size; ++i) {
      for (int j = i + 1; j < size; ++j) {
        if (layer.adjacent(set[i], set[j])) mask |= static_cast<std::uint8_t>(1u << pair_bit(i, j));
      }
    }
    const auto sig = canonical_signature(size, mask);
    for (const auto& info : catalog) {
      if (info.nodes == size && info.signature == sig) {
        ++counts[static_cast<std::size_t>(info.motif)];
        return;
      }
    }
  };
  const std::size_t m = others.size();
  for (std::size_t a = 0; a < m; ++a) {
    tally({v, others[a], 0, 0}, 2);
    for (std::size_t b = a + 1; b < m; ++b) {
      tally({v, others[a], others[b], 0}, 3);
      for (std::size_t c = b + 1; c < m; ++c) tally({v, others[a], others[b], others[c]}, 4);
    }
  }
  return counts;
}

MotifCountVector brute_force_motif_oracle(const GraphView& view, NodeId v) {
  if (!view.contains(v)) throw InvalidArgument("node " + std::to_string(v) + " is not in the view");
  SimpleLayer layer(view);
  return {v, view.relation(), brute_force_motif_oracle(layer, v)};
}

}  // namespace mxembed
