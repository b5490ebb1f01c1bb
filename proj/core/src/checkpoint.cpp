#include "mxembed/checkpoint.hpp"

#include <map>

#include "mxembed/error.hpp"
#include "text_util.hpp"

namespace mxembed {

namespace {

constexpr char kMagic[4] = {'R', 'H', 'M', 'P'};
constexpr std::uint32_t kVersion = 1;

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const ModelParameters& params, const TrainConfig& config,
                     const Schema& schema) {
  auto out = detail::open_output(path.string(), std::ios::binary);
  detail::BinaryWriter w(out);
  out.write(kMagic, 4);
  w.put<std::uint32_t>(kVersion);
  const auto kv = config.to_key_values();
  w.put<std::uint32_t>(static_cast<std::uint32_t>(kv.size()));
  for (const auto& [k, v] : kv) {
    w.put_string(k);
    w.put_string(v);
  }
  w.put<std::uint32_t>(static_cast<std::uint32_t>(schema.node_types.size()));
  for (const auto& t : schema.node_types) w.put_string(t);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(schema.num_relations()));
  for (RelationId r = 0; r < schema.num_relations(); ++r) w.put_string(schema.relation_name(r));

  const auto& s = params.shape;
  w.put<std::uint64_t>(s.dim);
  w.put<std::uint64_t>(s.attention_dim);
  w.put<std::uint64_t>(s.levels);
  w.put<std::uint64_t>(s.relations);
  w.put<std::uint64_t>(s.num_nodes);
  w.put<std::uint8_t>(s.per_relation_context ? 1 : 0);
  w.put<std::uint8_t>(static_cast<std::uint8_t>(s.activation));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(s.input_dims.size()));
  for (auto d : s.input_dims) w.put<std::uint64_t>(d);
  const auto tensors = params.tensors();
  w.put<std::uint32_t>(static_cast<std::uint32_t>(tensors.size()));
  for (const auto* m : tensors) {
    w.put<std::uint64_t>(static_cast<std::uint64_t>(m->rows()));
    w.put<std::uint64_t>(static_cast<std::uint64_t>(m->cols()));
    w.put_doubles(m->data(), static_cast<std::size_t>(m->size()));
  }
  out.flush();
  if (!out) throw Error("failed writing " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  const std::string what = path.string();
  auto in = detail::open_input(what, std::ios::binary);
  char magic[4] = {};
  in.read(magic, 4);
  if (!in || std::string_view(magic, 4) != std::string_view(kMagic, 4)) {
    throw ParseError(what + ": not a model checkpoint");
  }
  detail::BinaryReader r(in, what);
  const auto version = r.get<std::uint32_t>();
  if (version != kVersion) throw ParseError(what + ": unsupported checkpoint version " + std::to_string(version));
  Checkpoint c;
  std::map<std::string, std::string> kv;
  const auto nkv = r.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < nkv; ++i) {
    auto k = r.get_string();
    kv[k] = r.get_string();
  }
  c.config.apply(kv);
  const auto ntypes = r.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < ntypes; ++i) c.node_types.push_back(r.get_string());
  const auto nrel = r.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < nrel; ++i) c.relations.push_back(r.get_string());

  ModelShape s;
  s.dim = r.get<std::uint64_t>();
  s.attention_dim = r.get<std::uint64_t>();
  s.levels = r.get<std::uint64_t>();
  s.relations = r.get<std::uint64_t>();
  s.num_nodes = r.get<std::uint64_t>();
  s.per_relation_context = r.get<std::uint8_t>() != 0;
  const auto act = r.get<std::uint8_t>();
  if (act > 1) throw ParseError(what + ": unknown activation code");
  s.activation = static_cast<Activation>(act);
  const auto ndims = r.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < ndims; ++i) s.input_dims.push_back(r.get<std::uint64_t>());
  if (s.relations != nrel || ndims != ntypes) throw ParseError(what + ": inconsistent checkpoint header");
  c.params = ModelParameters::zeros(s);
  auto tensors = c.params.tensors();
  if (r.get<std::uint32_t>() != tensors.size()) throw ParseError(what + ": unexpected tensor count");
  for (auto* m : tensors) {
    const auto rows = r.get<std::uint64_t>();
    const auto cols = r.get<std::uint64_t>();
    if (rows != static_cast<std::uint64_t>(m->rows()) || cols != static_cast<std::uint64_t>(m->cols())) {
      throw ParseError(what + ": tensor shape does not match the header");
    }
    r.get_doubles(m->data(), static_cast<std::size_t>(m->size()));
  }
  return c;
}

void check_compatible(const Checkpoint& c, const MultiplexGraph& g) {
  if (c.node_types != g.schema().node_types) throw InvalidArgument("checkpoint node types differ from the graph's");
  if (c.relations.size() != g.num_relations()) {
    throw InvalidArgument("checkpoint has " + std::to_string(c.relations.size()) + " relations, graph has " +
                          std::to_string(g.num_relations()));
  }
  for (RelationId r = 0; r < g.num_relations(); ++r) {
    if (c.relations[r] != g.schema().relation_name(r)) {
      throw InvalidArgument("checkpoint relation " + std::to_string(r) + " is '" + c.relations[r] +
                            "', graph has '" + g.schema().relation_name(r) + "'");
    }
  }
  if (c.params.shape.num_nodes != g.num_nodes()) throw InvalidArgument("checkpoint node count differs from the graph's");
  for (TypeId t = 0; t < g.num_node_types(); ++t) {
    if (c.params.shape.input_dims[t] != g.input_dim(t)) {
      throw InvalidArgument("checkpoint input dimension differs for node type '" + g.schema().node_types[t] + "'");
    }
  }
}

}  // namespace mxembed
