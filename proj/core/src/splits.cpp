#include "mxembed/splits.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include "json.hpp"
#include "mxembed/error.hpp"
#include "mxembed/rng.hpp"
#include "text_util.hpp"

namespace mxembed {

namespace {

using json = nlohmann::json;

std::uint64_t pair_key(Edge e) { return (static_cast<std::uint64_t>(e.src) << 32) | e.dst; }

// Canonical orientation of a candidate pair, matching how the graph stores edges.
Edge normalize(const MultiplexGraph& g, RelationId r, NodeId u, NodeId v) {
  const auto& rel = g.relation(r);
  if (g.undirected() && rel.src_type == rel.dst_type && u > v) std::swap(u, v);
  return {u, v};
}

struct Pools {
  std::span<const NodeId> src;
  std::span<const NodeId> dst;
};

// Uniform non-edges of relation r in g, distinct from each other and from
// `taken`, by rejection with a bounded number of attempts.
std::vector<Edge> sample_negatives(const MultiplexGraph& g, RelationId r, std::size_t count,
                                   const std::vector<Pools>& options, std::unordered_set<std::uint64_t>& taken,
                                   Rng& rng) {
  std::vector<Edge> out;
  if (count == 0) return out;
  std::vector<const Pools*> usable;
  for (const auto& o : options) {
    if (!o.src.empty() && !o.dst.empty()) usable.push_back(&o);
  }
  const std::size_t cap = 1000 + 100 * count;
  for (std::size_t attempt = 0; usable.size() > 0 && attempt < cap && out.size() < count; ++attempt) {
    const Pools& pool = *usable[std::uniform_int_distribution<std::size_t>(0, usable.size() - 1)(rng)];
    const NodeId u = pool.src[std::uniform_int_distribution<std::size_t>(0, pool.src.size() - 1)(rng)];
    const NodeId v = pool.dst[std::uniform_int_distribution<std::size_t>(0, pool.dst.size() - 1)(rng)];
    if (u == v || g.has_edge(r, u, v)) continue;
    const Edge e = normalize(g, r, u, v);
    if (!taken.insert(pair_key(e)).second) continue;
    out.push_back(e);
  }
  if (out.size() < count) {
    throw Error("relation '" + g.schema().relation_name(r) + "' yielded only " + std::to_string(out.size()) +
                " of " + std::to_string(count) + " negative pairs");
  }
  return out;
}

std::vector<Edge> pick(const std::vector<Edge>& edges, const std::vector<std::size_t>& index) {
  std::vector<Edge> out;
  out.reserve(index.size());
  for (auto i : index) out.push_back(edges.at(i));
  return out;
}

std::vector<Edge> without(const std::vector<Edge>& edges, const std::vector<bool>& drop) {
  std::vector<Edge> out;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    if (!drop[i]) out.push_back(edges[i]);
  }
  return out;
}

void check_fraction(const char* name, double f) {
  if (!(f > 0.0 && f < 1.0)) throw InvalidArgument(std::string(name) + " must lie in (0, 1)");
}

std::size_t round_count(double frac, std::size_t n) {
  return static_cast<std::size_t>(std::llround(frac * static_cast<double>(n)));
}

// Assembles an EdgeSplit from per-relation holdouts.
EdgeSplit assemble(const MultiplexGraph& g, std::vector<RelationHoldout> holdout) {
  EdgeSplit s;
  std::vector<std::vector<Edge>> train(g.num_relations());
  for (RelationId r = 0; r < g.num_relations(); ++r) {
    const auto& edges = g.edges(r);
    auto& h = holdout[r];
    std::sort(h.validation.begin(), h.validation.end());
    std::sort(h.test.begin(), h.test.end());
    std::vector<bool> drop(edges.size(), false);
    for (auto i : h.validation) drop.at(i) = true;
    for (auto i : h.test) drop.at(i) = true;
    train[r] = without(edges, drop);
    s.validation.push_back({pick(edges, h.validation), h.validation_negatives});
    s.test.push_back({pick(edges, h.test), h.test_negatives});
  }
  s.train = g.with_edges(std::move(train));
  s.holdout = std::move(holdout);
  return s;
}

}  // namespace

EdgeSplit split_transductive(const MultiplexGraph& g, double val_frac, double test_frac, std::uint64_t seed) {
  check_fraction("val_frac", val_frac);
  check_fraction("test_frac", test_frac);
  if (val_frac + test_frac >= 1.0) throw InvalidArgument("val_frac + test_frac must be below 1");
  std::vector<RelationHoldout> holdout(g.num_relations());
  for (RelationId r = 0; r < g.num_relations(); ++r) {
    const std::size_t m = g.num_edges(r);
    const std::size_t nv = round_count(val_frac, m);
    const std::size_t nt = round_count(test_frac, m);
    if (nv == 0 || nt == 0 || nv + nt >= m) {
      throw InvalidArgument("relation '" + g.schema().relation_name(r) + "' has " + std::to_string(m) +
                            " edges, too few for the requested validation and test fractions");
    }
    Rng rng(derive_seed(seed, 0x7472616e, r));
    std::vector<std::size_t> perm(m);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    auto& h = holdout[r];
    h.validation.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(nv));
    h.test.assign(perm.begin() + static_cast<std::ptrdiff_t>(nv), perm.begin() + static_cast<std::ptrdiff_t>(nv + nt));
    const auto& rel = g.relation(r);
    const std::vector<Pools> pools{{g.nodes_of_type(rel.src_type), g.nodes_of_type(rel.dst_type)}};
    std::unordered_set<std::uint64_t> taken;
    h.validation_negatives = sample_negatives(g, r, nv, pools, taken, rng);
    h.test_negatives = sample_negatives(g, r, nt, pools, taken, rng);
  }
  EdgeSplit s = assemble(g, std::move(holdout));
  s.seed = seed;
  s.val_frac = val_frac;
  s.test_frac = test_frac;
  return s;
}

std::vector<EdgeSplit> split_cross_validation(const MultiplexGraph& g, std::size_t folds, std::uint64_t seed) {
  if (folds < 2) throw InvalidArgument("cross-validation needs at least two folds");
  std::vector<std::vector<std::size_t>> perms(g.num_relations());
  for (RelationId r = 0; r < g.num_relations(); ++r) {
    const std::size_t m = g.num_edges(r);
    if (m / folds < 2) {
      throw InvalidArgument("relation '" + g.schema().relation_name(r) + "' has " + std::to_string(m) +
                            " edges, too few for " + std::to_string(folds) + " folds");
    }
    Rng rng(derive_seed(seed, 0x666f6c64, r));
    perms[r].resize(m);
    std::iota(perms[r].begin(), perms[r].end(), 0);
    std::shuffle(perms[r].begin(), perms[r].end(), rng);
  }
  std::vector<EdgeSplit> out;
  for (std::size_t f = 0; f < folds; ++f) {
    std::vector<RelationHoldout> holdout(g.num_relations());
    for (RelationId r = 0; r < g.num_relations(); ++r) {
      const std::size_t m = g.num_edges(r);
      const std::size_t lo = f * m / folds;
      const std::size_t hi = (f + 1) * m / folds;
      const std::size_t half = lo + (hi - lo) / 2;
      auto& h = holdout[r];
      const auto& perm = perms[r];
      h.validation.assign(perm.begin() + static_cast<std::ptrdiff_t>(lo), perm.begin() + static_cast<std::ptrdiff_t>(half));
      h.test.assign(perm.begin() + static_cast<std::ptrdiff_t>(half), perm.begin() + static_cast<std::ptrdiff_t>(hi));
      Rng rng(derive_seed(seed, 0x6e656766 + f, r));
      const auto& rel = g.relation(r);
      const std::vector<Pools> pools{{g.nodes_of_type(rel.src_type), g.nodes_of_type(rel.dst_type)}};
      std::unordered_set<std::uint64_t> taken;
      h.validation_negatives = sample_negatives(g, r, h.validation.size(), pools, taken, rng);
      h.test_negatives = sample_negatives(g, r, h.test.size(), pools, taken, rng);
    }
    EdgeSplit s = assemble(g, std::move(holdout));
    s.seed = seed;
    s.val_frac = 0.5 / static_cast<double>(folds);
    s.test_frac = 0.5 / static_cast<double>(folds);
    s.fold = f;
    s.folds = folds;
    out.push_back(std::move(s));
  }
  return out;
}

namespace {

// Builds the graphs and labeled pairs of an inductive split whose index
// sets (hidden, validation, revealed, test) are already fixed.
void finish_inductive(const MultiplexGraph& g, InductiveSplit& s, Rng* rng) {
  const std::size_t R = g.num_relations();
  s.hidden_mask.assign(g.num_nodes(), false);
  for (NodeId v : s.hidden) s.hidden_mask.at(v) = true;
  std::vector<std::vector<Edge>> train(R), test_graph(R);
  s.validation.assign(R, {});
  s.test.assign(R, {});
  for (RelationId r = 0; r < R; ++r) {
    const auto& edges = g.edges(r);
    auto& vi = s.validation_index[r];
    auto& ri = s.revealed_index[r];
    auto& ti = s.test_index[r];
    std::sort(vi.begin(), vi.end());
    std::sort(ri.begin(), ri.end());
    std::sort(ti.begin(), ti.end());
    std::vector<bool> in_test(edges.size(), false), in_val(edges.size(), false);
    for (auto i : ti) in_test.at(i) = true;
    for (auto i : vi) in_val.at(i) = true;
    for (std::size_t i = 0; i < edges.size(); ++i) {
      const auto& e = edges[i];
      const bool touches = s.hidden_mask[e.src] || s.hidden_mask[e.dst];
      if (!touches && !in_val[i]) train[r].push_back(e);
      if (!in_test[i]) test_graph[r].push_back(e);
    }
    s.validation[r].positives = pick(edges, vi);
    s.test[r].positives = pick(edges, ti);
  }
  s.train = g.with_edges(std::move(train));
  s.test_graph = g.with_edges(std::move(test_graph));
  if (rng == nullptr) return;

  for (RelationId r = 0; r < R; ++r) {
    const auto& rel = g.relation(r);
    std::vector<NodeId> seen_src, seen_dst, hidden_src, hidden_dst;
    for (NodeId v : g.nodes_of_type(rel.src_type)) (s.hidden_mask[v] ? hidden_src : seen_src).push_back(v);
    for (NodeId v : g.nodes_of_type(rel.dst_type)) (s.hidden_mask[v] ? hidden_dst : seen_dst).push_back(v);
    const auto all_src = g.nodes_of_type(rel.src_type);
    const auto all_dst = g.nodes_of_type(rel.dst_type);
    std::unordered_set<std::uint64_t> taken;
    s.validation[r].negatives =
        sample_negatives(g, r, s.validation[r].positives.size(), {{seen_src, seen_dst}}, taken, *rng);
    s.test[r].negatives = sample_negatives(g, r, s.test[r].positives.size(),
                                           {{hidden_src, all_dst}, {all_src, hidden_dst}}, taken, *rng);
  }
}

}  // namespace

InductiveSplit split_inductive(const MultiplexGraph& g, double node_frac, double reveal_frac, double edge_val_frac,
                               std::uint64_t seed) {
  check_fraction("node_frac", node_frac);
  check_fraction("reveal_frac", reveal_frac);
  check_fraction("edge_val_frac", edge_val_frac);
  const std::size_t n = g.num_nodes();
  const std::size_t R = g.num_relations();
  InductiveSplit s;
  s.seed = seed;
  s.node_frac = node_frac;
  s.reveal_frac = reveal_frac;
  s.edge_val_frac = edge_val_frac;

  Rng rng(derive_seed(seed, 0x68696465));
  std::vector<NodeId> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  const std::size_t h = round_count(node_frac, n);
  if (h == 0 || h >= n) throw InvalidArgument("node_frac hides no node or every node");
  s.hidden.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(h));
  std::sort(s.hidden.begin(), s.hidden.end());
  std::vector<bool> mask(n, false);
  for (NodeId v : s.hidden) mask[v] = true;

  s.validation_index.assign(R, {});
  s.revealed_index.assign(R, {});
  s.test_index.assign(R, {});
  std::vector<std::vector<std::pair<RelationId, std::size_t>>> owned(n);
  for (RelationId r = 0; r < R; ++r) {
    const auto& edges = g.edges(r);
    std::vector<std::size_t> seen;
    for (std::size_t i = 0; i < edges.size(); ++i) {
      const auto& e = edges[i];
      if (mask[e.src] || mask[e.dst]) {
        const NodeId owner = mask[e.src] && mask[e.dst] ? std::min(e.src, e.dst) : (mask[e.src] ? e.src : e.dst);
        owned[owner].emplace_back(r, i);
      } else {
        seen.push_back(i);
      }
    }
    std::shuffle(seen.begin(), seen.end(), rng);
    seen.resize(round_count(edge_val_frac, seen.size()));
    s.validation_index[r] = std::move(seen);
  }
  for (NodeId v : s.hidden) {
    auto& list = owned[v];
    std::shuffle(list.begin(), list.end(), rng);
    const auto reveal = static_cast<std::size_t>(std::ceil(reveal_frac * static_cast<double>(list.size())));
    for (std::size_t i = 0; i < list.size(); ++i) {
      auto [r, idx] = list[i];
      (i < reveal ? s.revealed_index : s.test_index)[r].push_back(idx);
    }
  }
  finish_inductive(g, s, &rng);
  return s;
}

namespace {

json edges_json(const MultiplexGraph& g, const std::vector<Edge>& edges) {
  json a = json::array();
  for (const auto& e : edges) a.push_back({g.external_id(e.src), g.external_id(e.dst)});
  return a;
}

std::vector<Edge> edges_from_json(const MultiplexGraph& g, const json& a, const std::string& what) {
  std::vector<Edge> out;
  for (const auto& pair : a) {
    auto u = g.find_node(pair.at(0).get<std::int64_t>());
    auto v = g.find_node(pair.at(1).get<std::int64_t>());
    if (!u || !v) throw ParseError(what + ": manifest names a node missing from the graph");
    out.push_back({*u, *v});
  }
  return out;
}

json header(const MultiplexGraph& g, const char* kind, std::uint64_t seed) {
  json j;
  j["kind"] = kind;
  j["seed"] = seed;
  j["num_nodes"] = g.num_nodes();
  return j;
}

void write_json(const json& j, const std::filesystem::path& path) {
  auto out = detail::open_output(path.string());
  out << j.dump(1) << '\n';
  if (!out) throw Error("failed writing " + path.string());
}

}  // namespace

void write_split_manifest(const EdgeSplit& split, const MultiplexGraph& g, const std::filesystem::path& path) {
  json j = header(g, "transductive", split.seed);
  j["val_frac"] = split.val_frac;
  j["test_frac"] = split.test_frac;
  j["fold"] = split.fold;
  j["folds"] = split.folds;
  json rels = json::array();
  for (RelationId r = 0; r < g.num_relations(); ++r) {
    const auto& h = split.holdout.at(r);
    rels.push_back({{"id", r},
                    {"name", g.schema().relation_name(r)},
                    {"num_edges", g.num_edges(r)},
                    {"validation", h.validation},
                    {"test", h.test},
                    {"validation_negatives", edges_json(g, h.validation_negatives)},
                    {"test_negatives", edges_json(g, h.test_negatives)}});
  }
  j["relations"] = std::move(rels);
  write_json(j, path);
}

void write_split_manifest(const InductiveSplit& split, const MultiplexGraph& g, const std::filesystem::path& path) {
  json j = header(g, "inductive", split.seed);
  j["node_frac"] = split.node_frac;
  j["reveal_frac"] = split.reveal_frac;
  j["edge_val_frac"] = split.edge_val_frac;
  json hidden = json::array();
  for (NodeId v : split.hidden) hidden.push_back(g.external_id(v));
  j["hidden"] = std::move(hidden);
  json rels = json::array();
  for (RelationId r = 0; r < g.num_relations(); ++r) {
    rels.push_back({{"id", r},
                    {"name", g.schema().relation_name(r)},
                    {"num_edges", g.num_edges(r)},
                    {"validation", split.validation_index.at(r)},
                    {"revealed", split.revealed_index.at(r)},
                    {"test", split.test_index.at(r)},
                    {"validation_negatives", edges_json(g, split.validation.at(r).negatives)},
                    {"test_negatives", edges_json(g, split.test.at(r).negatives)}});
  }
  j["relations"] = std::move(rels);
  write_json(j, path);
}

LoadedSplit read_split_manifest(const MultiplexGraph& g, const std::filesystem::path& path) {
  const std::string what = path.string();
  auto in = detail::open_input(what);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(what + ": " + e.what());
  }
  LoadedSplit out;
  try {
    if (j.at("num_nodes").get<std::size_t>() != g.num_nodes()) {
      throw InvalidArgument(what + ": manifest was made for a graph with a different node count");
    }
    const auto& rels = j.at("relations");
    if (rels.size() != g.num_relations()) {
      throw InvalidArgument(what + ": manifest was made for a graph with a different relation count");
    }
    for (RelationId r = 0; r < g.num_relations(); ++r) {
      const auto& jr = rels.at(r);
      if (jr.at("num_edges").get<std::size_t>() != g.num_edges(r) ||
          jr.at("name").get<std::string>() != g.schema().relation_name(r)) {
        throw InvalidArgument(what + ": relation " + std::to_string(r) + " does not match the graph");
      }
    }
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "transductive") {
      std::vector<RelationHoldout> holdout(g.num_relations());
      for (RelationId r = 0; r < g.num_relations(); ++r) {
        const auto& jr = rels.at(r);
        holdout[r].validation = jr.at("validation").get<std::vector<std::size_t>>();
        holdout[r].test = jr.at("test").get<std::vector<std::size_t>>();
        holdout[r].validation_negatives = edges_from_json(g, jr.at("validation_negatives"), what);
        holdout[r].test_negatives = edges_from_json(g, jr.at("test_negatives"), what);
        for (auto i : holdout[r].validation) {
          if (i >= g.num_edges(r)) throw ParseError(what + ": edge index out of range");
        }
        for (auto i : holdout[r].test) {
          if (i >= g.num_edges(r)) throw ParseError(what + ": edge index out of range");
        }
      }
      out.transductive = assemble(g, std::move(holdout));
      out.transductive.seed = j.at("seed").get<std::uint64_t>();
      out.transductive.val_frac = j.at("val_frac").get<double>();
      out.transductive.test_frac = j.at("test_frac").get<double>();
      out.transductive.fold = j.at("fold").get<std::size_t>();
      out.transductive.folds = j.at("folds").get<std::size_t>();
    } else if (kind == "inductive") {
      out.inductive = true;
      auto& s = out.node_masking;
      s.seed = j.at("seed").get<std::uint64_t>();
      s.node_frac = j.at("node_frac").get<double>();
      s.reveal_frac = j.at("reveal_frac").get<double>();
      s.edge_val_frac = j.at("edge_val_frac").get<double>();
      for (const auto& id : j.at("hidden")) {
        auto v = g.find_node(id.get<std::int64_t>());
        if (!v) throw ParseError(what + ": hidden node missing from the graph");
        s.hidden.push_back(*v);
      }
      std::sort(s.hidden.begin(), s.hidden.end());
      for (RelationId r = 0; r < g.num_relations(); ++r) {
        const auto& jr = rels.at(r);
        s.validation_index.push_back(jr.at("validation").get<std::vector<std::size_t>>());
        s.revealed_index.push_back(jr.at("revealed").get<std::vector<std::size_t>>());
        s.test_index.push_back(jr.at("test").get<std::vector<std::size_t>>());
        for (const auto* list : {&s.validation_index.back(), &s.revealed_index.back(), &s.test_index.back()}) {
          for (auto i : *list) {
            if (i >= g.num_edges(r)) throw ParseError(what + ": edge index out of range");
          }
        }
      }
      finish_inductive(g, s, nullptr);
      for (RelationId r = 0; r < g.num_relations(); ++r) {
        s.validation[r].negatives = edges_from_json(g, rels.at(r).at("validation_negatives"), what);
        s.test[r].negatives = edges_from_json(g, rels.at(r).at("test_negatives"), what);
      }
    } else {
      throw ParseError(what + ": unknown split kind '" + kind + "'");
    }
  } catch (const json::exception& e) {
    throw ParseError(what + ": " + e.what());
  }
  return out;
}

}  // namespace mxembed
