#include "mxembed/graph_io.hpp"

#include <algorithm>
#include <array>
#include <cstring>
#include <tuple>
#include <unordered_map>

#include "mxembed/error.hpp"
#include "text_util.hpp"

namespace mxembed {

namespace {

constexpr std::array<char, 4> kGraphMagic = {'R', 'H', 'M', 'N'};
constexpr std::uint8_t kGraphVersion = 1;

std::string where(const std::filesystem::path& p, std::size_t line) {
  return p.string() + ":" + std::to_string(line) + ": ";
}

TypeId intern(std::vector<std::string>& names, std::unordered_map<std::string, TypeId>& index,
              std::string_view name) {
  auto [it, inserted] = index.try_emplace(std::string(name), static_cast<TypeId>(names.size()));
  if (inserted) {
    if (names.size() >= 0xffff) throw ParseError("too many types");
    names.emplace_back(name);
  }
  return it->second;
}

}  // namespace

MultiplexGraph load_graph(const GraphFiles& files, const LoadOptions& options) {
  GraphParts parts;
  parts.undirected = options.undirected;
  std::unordered_map<std::int64_t, NodeId> ids;
  std::unordered_map<std::string, TypeId> node_type_index, edge_type_index;
  std::vector<std::string_view> fields;
  std::string line;

  const bool declared_nodes = files.node_types.has_value();
  if (declared_nodes) {
    auto in = detail::open_input(files.node_types->string());
    for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
      if (detail::is_skippable(line)) continue;
      detail::split_fields(line, fields);
      if (fields.size() != 2) {
        throw ParseError(where(*files.node_types, lineno) + "expected 'node_id node_type'");
      }
      auto id = detail::parse_number<std::int64_t>(fields[0]);
      if (!id) throw ParseError(where(*files.node_types, lineno) + "bad node id");
      const TypeId t = intern(parts.schema.node_types, node_type_index, fields[1]);
      if (!ids.emplace(*id, static_cast<NodeId>(parts.node_type.size())).second) {
        throw ParseError(where(*files.node_types, lineno) + "duplicate node id " +
                         std::to_string(*id));
      }
      parts.node_type.push_back(t);
      parts.external_id.push_back(*id);
    }
  } else {
    parts.schema.node_types.push_back("node");
  }

  struct RawEdge {
    TypeId edge_type;
    NodeId src, dst;
  };
  std::vector<RawEdge> raw;
  {
    auto in = detail::open_input(files.edges.string());
    auto resolve = [&](std::string_view field, std::size_t lineno) -> NodeId {
      auto id = detail::parse_number<std::int64_t>(field);
      if (!id) throw ParseError(where(files.edges, lineno) + "bad node id '" + std::string(field) + "'");
      auto it = ids.find(*id);
      if (it != ids.end()) return it->second;
      if (declared_nodes) {
        throw ParseError(where(files.edges, lineno) + "unknown node id " + std::to_string(*id));
      }
      const auto v = static_cast<NodeId>(parts.node_type.size());
      ids.emplace(*id, v);
      parts.node_type.push_back(0);
      parts.external_id.push_back(*id);
      return v;
    };
    for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
      if (detail::is_skippable(line)) continue;
      detail::split_fields(line, fields);
      if (fields.size() != 3) {
        throw ParseError(where(files.edges, lineno) + "expected 'edge_type src dst'");
      }
      const TypeId e = intern(parts.schema.edge_types, edge_type_index, fields[0]);
      const NodeId s = resolve(fields[1], lineno);
      const NodeId d = resolve(fields[2], lineno);
      raw.push_back({e, s, d});
    }
  }

  // Relations are the distinct observed (src type, edge type, dst type)
  // triples, ordered by edge type then endpoint types.
  std::vector<std::tuple<TypeId, TypeId, TypeId>> triples;
  for (const auto& e : raw) {
    TypeId s = parts.node_type[e.src], d = parts.node_type[e.dst];
    if (options.undirected && d < s) std::swap(s, d);
    triples.emplace_back(e.edge_type, s, d);
  }
  std::sort(triples.begin(), triples.end());
  triples.erase(std::unique(triples.begin(), triples.end()), triples.end());
  if (triples.size() > 0xffff) throw ParseError("too many relations");
  for (std::size_t i = 0; i < triples.size(); ++i) {
    auto [e, s, d] = triples[i];
    parts.schema.relations.push_back({s, e, d, static_cast<RelationId>(i)});
  }
  parts.edges.resize(triples.size());
  for (const auto& e : raw) {
    NodeId s = e.src, d = e.dst;
    if (options.undirected && parts.node_type[d] < parts.node_type[s]) std::swap(s, d);
    auto rel = parts.schema.find_relation(parts.node_type[s], e.edge_type, parts.node_type[d]);
    parts.edges[*rel].push_back({s, d});
  }

  // Attributes.
  const std::size_t num_types = parts.schema.node_types.size();
  std::vector<std::size_t> type_count(num_types, 0);
  std::vector<std::size_t> local(parts.node_type.size());
  for (std::size_t v = 0; v < parts.node_type.size(); ++v) local[v] = type_count[parts.node_type[v]]++;
  parts.attributes.assign(num_types, AttributeBlock{true, 0, {}});
  for (const auto& [type_name, path] : files.features) {
    auto t = parts.schema.find_node_type(type_name);
    if (!t) throw ParseError(path.string() + ": unknown node type '" + type_name + "'");
    auto in = detail::open_input(path.string());
    AttributeBlock block;
    std::vector<bool> seen(type_count[*t], false);
    bool sized = false;
    for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
      if (detail::is_skippable(line)) continue;
      detail::split_fields(line, fields);
      if (fields.empty()) continue;
      auto id = detail::parse_number<std::int64_t>(fields[0]);
      if (!id) throw ParseError(where(path, lineno) + "bad node id");
      auto it = ids.find(*id);
      if (it == ids.end()) throw ParseError(where(path, lineno) + "unknown node id " + std::to_string(*id));
      const NodeId v = it->second;
      if (parts.node_type[v] != *t) {
        throw ParseError(where(path, lineno) + "node " + std::to_string(*id) + " has type '" +
                         parts.schema.node_types[parts.node_type[v]] + "', not '" + type_name + "'");
      }
      const std::size_t dim = fields.size() - 1;
      if (!sized) {
        block.dim = dim;
        block.values = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim),
                                             static_cast<Eigen::Index>(type_count[*t]));
        sized = true;
      } else if (dim != block.dim) {
        throw ParseError(where(path, lineno) + "feature dimension " + std::to_string(dim) +
                         " does not match " + std::to_string(block.dim) + " for type '" +
                         type_name + "'");
      }
      if (seen[local[v]]) throw ParseError(where(path, lineno) + "duplicate feature row");
      seen[local[v]] = true;
      for (std::size_t j = 0; j < dim; ++j) {
        auto x = detail::parse_number<double>(fields[j + 1]);
        if (!x) throw ParseError(where(path, lineno) + "bad feature value");
        block.values(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(local[v])) = *x;
      }
    }
    if (!sized) throw ParseError(path.string() + ": no feature rows");
    if (!options.zero_fill) {
      auto missing = std::find(seen.begin(), seen.end(), false);
      if (missing != seen.end()) {
        const auto idx = static_cast<std::size_t>(missing - seen.begin());
        std::int64_t ext = 0;
        for (std::size_t v = 0; v < parts.node_type.size(); ++v) {
          if (parts.node_type[v] == *t && local[v] == idx) ext = parts.external_id[v];
        }
        throw ParseError(path.string() + ": missing feature row for node " + std::to_string(ext));
      }
    }
    parts.attributes[*t] = std::move(block);
  }
  return MultiplexGraph(std::move(parts));
}

void save_graph_cache(const MultiplexGraph& g, const std::filesystem::path& path) {
  auto out = detail::open_output(path.string(), std::ios::binary);
  detail::BinaryWriter w(out);
  out.write(kGraphMagic.data(), kGraphMagic.size());
  w.put<std::uint8_t>(kGraphVersion);
  w.put<std::uint8_t>(g.undirected() ? 1 : 0);
  const auto& s = g.schema();
  w.put<std::uint32_t>(static_cast<std::uint32_t>(s.node_types.size()));
  for (const auto& n : s.node_types) w.put_string(n);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(s.edge_types.size()));
  for (const auto& n : s.edge_types) w.put_string(n);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(s.relations.size()));
  for (const auto& r : s.relations) {
    w.put<TypeId>(r.src_type);
    w.put<TypeId>(r.edge_type);
    w.put<TypeId>(r.dst_type);
    w.put<std::uint8_t>(static_cast<std::uint8_t>(g.rule(r.id)));
  }
  w.put<std::uint64_t>(g.num_nodes());
  for (NodeId v = 0; v < g.num_nodes(); ++v) {
    w.put<TypeId>(g.node_type(v));
    w.put<std::int64_t>(g.external_id(v));
  }
  for (TypeId t = 0; t < g.num_node_types(); ++t) {
    const auto& a = g.attributes(t);
    w.put<std::uint8_t>(a.identity ? 1 : 0);
    w.put<std::uint64_t>(a.dim);
    w.put<std::uint64_t>(static_cast<std::uint64_t>(a.values.cols()));
    w.put_doubles(a.values.data(), static_cast<std::size_t>(a.values.size()));
  }
  for (RelationId r = 0; r < g.num_relations(); ++r) {
    w.put<std::uint64_t>(g.edges(r).size());
    for (const auto& e : g.edges(r)) {
      w.put<NodeId>(e.src);
      w.put<NodeId>(e.dst);
    }
  }
  if (!out) throw Error("failed writing " + path.string());
}

MultiplexGraph load_graph_cache(const std::filesystem::path& path) {
  auto in = detail::open_input(path.string(), std::ios::binary);
  detail::BinaryReader rd(in, path.string());
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kGraphMagic) throw ParseError(path.string() + ": not a graph cache file");
  const auto version = rd.get<std::uint8_t>();
  if (version != kGraphVersion) {
    throw ParseError(path.string() + ": unsupported cache version " + std::to_string(version));
  }
  GraphParts parts;
  parts.undirected = rd.get<std::uint8_t>() != 0;
  parts.schema.node_types.resize(rd.get<std::uint32_t>());
  for (auto& n : parts.schema.node_types) n = rd.get_string();
  parts.schema.edge_types.resize(rd.get<std::uint32_t>());
  for (auto& n : parts.schema.edge_types) n = rd.get_string();
  const auto R = rd.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < R; ++i) {
    CanonicalRelation r;
    r.src_type = rd.get<TypeId>();
    r.edge_type = rd.get<TypeId>();
    r.dst_type = rd.get<TypeId>();
    r.id = static_cast<RelationId>(i);
    const auto rule = rd.get<std::uint8_t>();
    if (rule > 2) throw ParseError(path.string() + ": bad neighbor rule");
    parts.rules.push_back(static_cast<NeighborRule>(rule));
    parts.schema.relations.push_back(r);
  }
  const auto n = rd.get<std::uint64_t>();
  parts.node_type.resize(n);
  parts.external_id.resize(n);
  for (std::uint64_t v = 0; v < n; ++v) {
    parts.node_type[v] = rd.get<TypeId>();
    parts.external_id[v] = rd.get<std::int64_t>();
  }
  parts.attributes.resize(parts.schema.node_types.size());
  for (auto& a : parts.attributes) {
    a.identity = rd.get<std::uint8_t>() != 0;
    a.dim = rd.get<std::uint64_t>();
    const auto cols = rd.get<std::uint64_t>();
    if (!a.identity) {
      a.values.resize(static_cast<Eigen::Index>(a.dim), static_cast<Eigen::Index>(cols));
      rd.get_doubles(a.values.data(), static_cast<std::size_t>(a.values.size()));
    }
  }
  parts.edges.resize(R);
  for (auto& list : parts.edges) {
    list.resize(rd.get<std::uint64_t>());
    for (auto& e : list) {
      e.src = rd.get<NodeId>();
      e.dst = rd.get<NodeId>();
    }
  }
  return MultiplexGraph(std::move(parts));
}

void save_graph_text(const MultiplexGraph& g, const std::filesystem::path& edges,
                     const std::filesystem::path& node_types) {
  {
    auto out = detail::open_output(node_types.string());
    for (NodeId v = 0; v < g.num_nodes(); ++v) {
      out << g.external_id(v) << '\t' << g.schema().node_types[g.node_type(v)] << '\n';
    }
  }
  auto out = detail::open_output(edges.string());
  for (RelationId r = 0; r < g.num_relations(); ++r) {
    const auto& name = g.schema().edge_types[g.relation(r).edge_type];
    for (const auto& e : g.edges(r)) {
      out << name << '\t' << g.external_id(e.src) << '\t' << g.external_id(e.dst) << '\n';
    }
  }
}

}  // namespace mxembed
