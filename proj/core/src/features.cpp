#include "mxembed/features.hpp"

#include <cmath>
#include <unordered_map>

#include "mxembed/error.hpp"
#include "text_util.hpp"

namespace mxembed {

std::vector<std::vector<MotifCounts>> motif_count_table(const MultiplexGraph& g,
                                                        std::size_t threads) {
  std::vector<std::vector<MotifCounts>> table;
  table.reserve(g.num_relations());
  for (RelationId r = 0; r < g.num_relations(); ++r) {
    // Directed layers are symmetrized by SimpleLayer.
    SimpleLayer layer(relation_view(g, r));
    table.push_back(count_motifs_layer(layer, threads));
  }
  return table;
}

FeatureMatrix motif_feature_matrix(const MultiplexGraph& g, std::size_t threads, bool log_scale) {
  const auto table = motif_count_table(g, threads);
  const auto& catalog = motif_catalog();
  FeatureMatrix m;
  m.node_ids.reserve(g.num_nodes());
  for (NodeId v = 0; v < g.num_nodes(); ++v) m.node_ids.push_back(g.external_id(v));
  for (RelationId r = 0; r < g.num_relations(); ++r) {
    for (const auto& info : catalog) m.columns.push_back("r" + std::to_string(r) + "_" + std::string(info.name));
  }
  m.values.resize(static_cast<Eigen::Index>(g.num_nodes()), static_cast<Eigen::Index>(m.columns.size()));
  for (RelationId r = 0; r < g.num_relations(); ++r) {
    for (NodeId v = 0; v < g.num_nodes(); ++v) {
      for (std::size_t k = 0; k < kMotifCount; ++k) {
        const double c = static_cast<double>(table[r][v][k]);
        m.values(v, static_cast<Eigen::Index>(r * kMotifCount + k)) = log_scale ? std::log1p(c) : c;
      }
    }
  }
  return m;
}

FeatureMatrix combine_features(const FeatureMatrix& given, const FeatureMatrix& motif) {
  if (given.cols() == 0 && (given.rows() == 0 || given.rows() == motif.rows())) return motif;
  if (motif.cols() == 0 && (motif.rows() == 0 || motif.rows() == given.rows())) return given;
  if (given.rows() != motif.rows()) {
    throw InvalidArgument("cannot combine feature matrices with " + std::to_string(given.rows()) +
                          " and " + std::to_string(motif.rows()) + " rows");
  }
  if (given.node_ids != motif.node_ids) throw InvalidArgument("feature matrices list different nodes");
  FeatureMatrix out;
  out.node_ids = given.node_ids;
  out.columns = given.columns;
  out.columns.insert(out.columns.end(), motif.columns.begin(), motif.columns.end());
  out.values.resize(given.values.rows(), given.values.cols() + motif.values.cols());
  out.values << given.values, motif.values;
  return out;
}

FeatureMatrix given_feature_matrix(const MultiplexGraph& g) {
  FeatureMatrix m;
  std::size_t dim = 0;
  for (TypeId t = 0; t < g.num_node_types(); ++t) {
    const auto& a = g.attributes(t);
    if (a.identity) throw InvalidArgument("node type '" + g.schema().node_types[t] + "' has no given features");
    if (t > 0 && a.dim != dim) throw InvalidArgument("node types have different attribute dimensions");
    dim = a.dim;
  }
  for (std::size_t j = 0; j < dim; ++j) m.columns.push_back("given_" + std::to_string(j));
  m.values.resize(static_cast<Eigen::Index>(g.num_nodes()), static_cast<Eigen::Index>(dim));
  for (NodeId v = 0; v < g.num_nodes(); ++v) {
    m.node_ids.push_back(g.external_id(v));
    m.values.row(v) = g.attributes(g.node_type(v)).values.col(static_cast<Eigen::Index>(g.type_local_index(v))).transpose();
  }
  return m;
}

MultiplexGraph apply_features(const MultiplexGraph& g, const FeatureMatrix& features) {
  std::unordered_map<std::int64_t, std::size_t> row_of;
  for (std::size_t i = 0; i < features.rows(); ++i) row_of.emplace(features.node_ids[i], i);
  const auto dim = static_cast<Eigen::Index>(features.cols());
  std::vector<AttributeBlock> blocks(g.num_node_types());
  for (TypeId t = 0; t < g.num_node_types(); ++t) {
    auto nodes = g.nodes_of_type(t);
    blocks[t].dim = features.cols();
    blocks[t].values.resize(dim, static_cast<Eigen::Index>(nodes.size()));
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      auto it = row_of.find(g.external_id(nodes[i]));
      if (it == row_of.end()) {
        throw InvalidArgument("feature matrix has no row for node " + std::to_string(g.external_id(nodes[i])));
      }
      blocks[t].values.col(static_cast<Eigen::Index>(i)) =
          features.values.row(static_cast<Eigen::Index>(it->second)).transpose();
    }
  }
  return g.with_attributes(std::move(blocks));
}

void write_feature_tsv(const FeatureMatrix& m, const std::filesystem::path& path) {
  auto out = detail::open_output(path.string());
  out << "#node";
  for (const auto& c : m.columns) out << '\t' << c;
  out << '\n';
  for (std::size_t i = 0; i < m.rows(); ++i) {
    out << m.node_ids[i];
    for (std::size_t j = 0; j < m.cols(); ++j) {
      out << '\t' << detail::format_double(m.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
    }
    out << '\n';
  }
  if (!out) throw Error("failed writing " + path.string());
}

FeatureMatrix read_feature_tsv(const std::filesystem::path& path) {
  auto in = detail::open_input(path.string());
  FeatureMatrix m;
  std::vector<std::vector<double>> rows;
  std::vector<std::string_view> fields;
  std::string line;
  bool have_header = false;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    if (!have_header && line.rfind("#node", 0) == 0) {
      detail::split_fields(line, fields);
      for (std::size_t j = 1; j < fields.size(); ++j) m.columns.emplace_back(fields[j]);
      have_header = true;
      continue;
    }
    if (detail::is_skippable(line)) continue;
    detail::split_fields(line, fields);
    auto id = detail::parse_number<std::int64_t>(fields[0]);
    if (!id) throw ParseError(path.string() + ":" + std::to_string(lineno) + ": bad node id");
    if (!have_header && m.columns.empty()) {
      for (std::size_t j = 1; j < fields.size(); ++j) m.columns.push_back("given_" + std::to_string(j - 1));
      have_header = true;
    }
    if (fields.size() - 1 != m.columns.size()) {
      throw ParseError(path.string() + ":" + std::to_string(lineno) + ": expected " +
                       std::to_string(m.columns.size()) + " values");
    }
    std::vector<double> row;
    for (std::size_t j = 1; j < fields.size(); ++j) {
      auto x = detail::parse_number<double>(fields[j]);
      if (!x) throw ParseError(path.string() + ":" + std::to_string(lineno) + ": bad value");
      row.push_back(*x);
    }
    m.node_ids.push_back(*id);
    rows.push_back(std::move(row));
  }
  m.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(m.columns.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      m.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return m;
}

}  // namespace mxembed
