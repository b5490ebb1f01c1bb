#include "mxembed/walker.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

#include "mxembed/error.hpp"
#include "mxembed/parallel.hpp"
#include "text_util.hpp"

namespace mxembed {

TypeId MetapathSchema::type_at(std::size_t p) const {
  if (p < types.size()) return types[p];
  return types[1 + (p - 1) % (types.size() - 1)];
}

MetapathSchema parse_schema(const Schema& s, std::string_view spec) {
  MetapathSchema schema;
  std::size_t start = 0;
  while (start <= spec.size()) {
    auto end = spec.find(',', start);
    if (end == std::string_view::npos) end = spec.size();
    auto name = spec.substr(start, end - start);
    auto t = s.find_node_type(name);
    if (!t) throw InvalidArgument("schema names unknown node type '" + std::string(name) + "'");
    schema.types.push_back(*t);
    start = end + 1;
  }
  if (schema.types.size() < 2) throw InvalidArgument("a metapath schema needs at least two types");
  return schema;
}

double TransitionTable::probability(NodeId u) const {
  auto it = std::lower_bound(nodes.begin(), nodes.end(), u);
  if (it == nodes.end() || *it != u) return 0.0;
  return probabilities[static_cast<std::size_t>(it - nodes.begin())];
}

TransitionTable transition_distribution(const MultiplexGraph& g, NodeId v, RelationId r,
                                        const MetapathSchema* schema, std::size_t step) {
  TransitionTable t;
  if (r >= g.num_relations()) throw InvalidArgument("unknown relation " + std::to_string(r));
  for (NodeId u : g.neighbors(v, r)) {
    if (schema == nullptr || g.node_type(u) == schema->type_at(step + 1)) t.nodes.push_back(u);
  }
  t.probabilities.assign(t.nodes.size(), t.nodes.empty() ? 0.0 : 1.0 / static_cast<double>(t.nodes.size()));
  return t;
}

void WalkCorpus::add(RelationId r, std::span<const NodeId> nodes, bool truncated) {
  relations_.push_back(r);
  nodes_.insert(nodes_.end(), nodes.begin(), nodes.end());
  offsets_.push_back(nodes_.size());
  truncated_.push_back(truncated ? 1 : 0);
}

void WalkCorpus::append(const WalkCorpus& other) {
  for (std::size_t i = 0; i < other.size(); ++i) {
    auto w = other[i];
    add(w.relation, w.nodes, w.truncated);
  }
}

WalkCorpus generate_walks(const MultiplexGraph& g, const WalkOptions& options) {
  if (options.walks_per_node == 0) throw InvalidArgument("walks_per_node must be at least 1");
  if (options.length < 2) throw InvalidArgument("walk length must be at least 2");
  const MetapathSchema* schema = options.schema ? &*options.schema : nullptr;
  if (schema && schema->length() < 2) throw InvalidArgument("a metapath schema needs at least two types");
  const auto* exclude = options.exclude;
  auto excluded = [&](NodeId v) { return exclude && (*exclude)[v]; };

  const std::size_t n = g.num_nodes();
  WalkCorpus corpus;
  std::vector<NodeId> eligible;
  for (RelationId r = 0; r < g.num_relations(); ++r) {
    std::vector<WalkCorpus> parts(std::max<std::size_t>(1, std::min(options.threads, n)));
    parallel_for(n, options.threads, [&](std::size_t worker, std::size_t begin, std::size_t end) {
      auto& out = parts[worker];
      std::vector<NodeId> walk, pool;
      for (std::size_t s = begin; s < end; ++s) {
        const auto start = static_cast<NodeId>(s);
        if (excluded(start) || g.neighbors(start, r).empty()) continue;
        if (schema && g.node_type(start) != schema->type_at(0)) continue;
        Rng rng(derive_seed(options.seed, r, start));
        for (std::size_t w = 0; w < options.walks_per_node; ++w) {
          walk.assign(1, start);
          bool stuck = false;
          while (walk.size() < options.length) {
            const NodeId cur = walk.back();
            pool.clear();
            for (NodeId u : g.neighbors(cur, r)) {
              if (excluded(u)) continue;
              if (schema && g.node_type(u) != schema->type_at(walk.size())) continue;
              pool.push_back(u);
            }
            if (pool.empty()) {
              stuck = true;
              break;
            }
            std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
            walk.push_back(pool[pick(rng)]);
          }
          if (walk.size() >= 2) out.add(r, walk, stuck);
        }
      }
    });
    for (const auto& p : parts) corpus.append(p);
  }
  return corpus;
}

void for_each_context(const WalkCorpus& corpus, std::size_t window,
                      const std::function<void(const ContextTriple&)>& fn) {
  if (window == 0) throw InvalidArgument("context window must be at least 1");
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto walk = corpus[i];
    const auto& nodes = walk.nodes;
    for (std::size_t a = 0; a < nodes.size(); ++a) {
      const std::size_t lo = a >= window ? a - window : 0;
      const std::size_t hi = std::min(nodes.size() - 1, a + window);
      for (std::size_t b = lo; b <= hi; ++b) {
        if (b == a || nodes[b] == nodes[a]) continue;
        fn({nodes[a], walk.relation, nodes[b]});
      }
    }
  }
}

std::vector<ContextTriple> extract_contexts(const WalkCorpus& corpus, std::size_t window) {
  std::vector<ContextTriple> out;
  for_each_context(corpus, window, [&](const ContextTriple& t) { out.push_back(t); });
  return out;
}

NodeId NoiseDistribution::sample(Rng& rng) const {
  if (kind == NoiseKind::kUniform) {
    std::uniform_int_distribution<std::size_t> pick(0, nodes.size() - 1);
    return nodes[pick(rng)];
  }
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double x = unit(rng);
  auto it = std::upper_bound(cumulative.begin(), cumulative.end(), x);
  const auto idx = std::min<std::size_t>(static_cast<std::size_t>(it - cumulative.begin()), nodes.size() - 1);
  return nodes[idx];
}

double NoiseDistribution::probability(NodeId v) const {
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i] == v) return cumulative[i] - (i == 0 ? 0.0 : cumulative[i - 1]);
  }
  return 0.0;
}

NoiseDistribution build_noise_distribution(const MultiplexGraph& g, TypeId type, NoiseKind kind,
                                           const std::vector<bool>* exclude) {
  if (type >= g.num_node_types()) throw InvalidArgument("unknown node type");
  NoiseDistribution d;
  d.kind = kind;
  for (NodeId v : g.nodes_of_type(type)) {
    if (!exclude || !(*exclude)[v]) d.nodes.push_back(v);
  }
  if (d.nodes.empty()) {
    throw InvalidArgument("node type '" + g.schema().node_types[type] + "' has no eligible nodes");
  }
  std::vector<double> weight(d.nodes.size(), 1.0);
  if (kind == NoiseKind::kLogUniformByDegree) {
    std::vector<std::size_t> degree(g.num_nodes(), 0);
    for (NodeId v : d.nodes) degree[v] = g.total_degree(v);
    std::stable_sort(d.nodes.begin(), d.nodes.end(),
                     [&](NodeId a, NodeId b) { return degree[a] > degree[b]; });
    for (std::size_t k = 0; k < weight.size(); ++k) {
      weight[k] = std::log(static_cast<double>(k) + 2.0) - std::log(static_cast<double>(k) + 1.0);
    }
  }
  double total = 0.0;
  for (double w : weight) total += w;
  d.cumulative.resize(weight.size());
  double run = 0.0;
  for (std::size_t k = 0; k < weight.size(); ++k) {
    run += weight[k];
    d.cumulative[k] = run / total;
  }
  d.cumulative.back() = 1.0;
  return d;
}

std::vector<std::filesystem::path> write_corpus_shards(const WalkCorpus& corpus,
                                                       std::size_t num_relations,
                                                       const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> paths;
  std::vector<std::ofstream> files;
  for (std::size_t r = 0; r < num_relations; ++r) {
    paths.push_back(dir / ("walks_r" + std::to_string(r) + ".bin"));
    files.push_back(detail::open_output(paths.back().string(), std::ios::binary));
  }
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto w = corpus[i];
    if (w.relation >= num_relations) throw InvalidArgument("walk relation out of range");
    if (w.nodes.size() > 0xffff) throw InvalidArgument("walk too long for shard format");
    detail::BinaryWriter out(files[w.relation]);
    out.put<std::uint16_t>(w.relation);
    out.put<std::uint16_t>(static_cast<std::uint16_t>(w.nodes.size()));
    for (NodeId v : w.nodes) out.put<std::uint32_t>(v);
  }
  for (std::size_t r = 0; r < num_relations; ++r) {
    files[r].flush();
    if (!files[r]) throw Error("failed writing " + paths[r].string());
  }
  return paths;
}

WalkCorpus read_corpus_shards(std::span<const std::filesystem::path> paths) {
  WalkCorpus corpus;
  std::vector<NodeId> nodes;
  for (const auto& p : paths) {
    auto in = detail::open_input(p.string(), std::ios::binary);
    detail::BinaryReader rd(in, p.string());
    while (in.peek() != std::char_traits<char>::eof()) {
      const auto r = rd.get<std::uint16_t>();
      const auto len = rd.get<std::uint16_t>();
      nodes.resize(len);
      for (auto& v : nodes) v = rd.get<std::uint32_t>();
      // The shard format has no stuck flag; a walk is only known to be complete.
      corpus.add(r, nodes, false);
    }
  }
  return corpus;
}

}  // namespace mxembed
