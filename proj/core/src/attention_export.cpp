#include "mxembed/attention_export.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mxembed/error.hpp"
#include "mxembed/rng.hpp"
#include "text_util.hpp"

namespace mxembed {

std::vector<AttentionRow> attention_export(const ModelParameters& p, const MultiplexGraph& g,
                                           const EmbedOptions& options, std::span<const NodeId> nodes) {
  std::vector<NodeId> all;
  if (nodes.empty()) {
    all.resize(g.num_nodes());
    std::iota(all.begin(), all.end(), 0);
    nodes = all;
  }
  const std::size_t R = g.num_relations();
  std::vector<AttentionRow> out;
  out.reserve(nodes.size() * p.shape.levels * R * R);
  for (NodeId v : nodes) {
    Rng rng = embedding_tree_rng(options.seed, v);
    const SampleTree tree = build_k_level_sample(g, v, options.budgets, rng);
    const TreePass pass(p, g, tree, true);
    for (std::size_t k = 1; k <= p.shape.levels; ++k) {
      const auto a = pass.root_attention(k);
      for (std::size_t o = 0; o < R; ++o) {
        for (std::size_t i = 0; i < R; ++i) {
          out.push_back({v, k, static_cast<RelationId>(o), static_cast<RelationId>(i),
                         a(static_cast<Eigen::Index>(o), static_cast<Eigen::Index>(i))});
        }
      }
    }
  }
  return out;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw InvalidArgument("quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(values.size() - 1, lo + 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

std::vector<AttentionSummaryRow> summarize_attention(std::span<const AttentionRow> rows, std::size_t relations,
                                                     std::size_t levels) {
  std::vector<std::vector<double>> buckets(levels * relations * relations);
  for (const auto& row : rows) {
    if (row.level == 0 || row.level > levels || row.output >= relations || row.input >= relations) {
      throw InvalidArgument("attention row out of range");
    }
    buckets[((row.level - 1) * relations + row.output) * relations + row.input].push_back(row.weight);
  }
  std::vector<AttentionSummaryRow> out;
  for (std::size_t k = 1; k <= levels; ++k) {
    for (std::size_t o = 0; o < relations; ++o) {
      for (std::size_t i = 0; i < relations; ++i) {
        const auto& b = buckets[((k - 1) * relations + o) * relations + i];
        AttentionSummaryRow s;
        s.level = k;
        s.output = static_cast<RelationId>(o);
        s.input = static_cast<RelationId>(i);
        s.count = b.size();
        if (!b.empty()) {
          s.min = *std::min_element(b.begin(), b.end());
          s.max = *std::max_element(b.begin(), b.end());
          s.q25 = quantile(b, 0.25);
          s.median = quantile(b, 0.5);
          s.q75 = quantile(b, 0.75);
          s.mean = std::accumulate(b.begin(), b.end(), 0.0) / static_cast<double>(b.size());
        }
        out.push_back(s);
      }
    }
  }
  return out;
}

void write_attention_tsv(std::span<const AttentionRow> rows, const MultiplexGraph& g,
                         const std::filesystem::path& path) {
  auto out = detail::open_output(path.string());
  out << "#node\tlevel\toutput_relation\tinput_relation\tweight\n";
  for (const auto& r : rows) {
    out << g.external_id(r.node) << '\t' << r.level << '\t' << r.output << '\t' << r.input << '\t'
        << detail::format_double(r.weight) << '\n';
  }
  if (!out) throw Error("failed writing " + path.string());
}

void write_attention_summary_tsv(std::span<const AttentionSummaryRow> rows, const std::filesystem::path& path) {
  auto out = detail::open_output(path.string());
  out << "#level\toutput_relation\tinput_relation\tcount\tmin\tq25\tmedian\tq75\tmax\tmean\n";
  for (const auto& s : rows) {
    out << s.level << '\t' << s.output << '\t' << s.input << '\t' << s.count;
    for (double x : {s.min, s.q25, s.median, s.q75, s.max, s.mean}) out << '\t' << detail::format_double(x);
    out << '\n';
  }
  if (!out) throw Error("failed writing " + path.string());
}

}  // namespace mxembed
