#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "mxembed/graph.hpp"
#include "mxembed/model.hpp"

namespace mxembed {

enum class Scorer : std::uint8_t { kDot = 0, kCosine = 1 };

std::string to_string(Scorer s);
Scorer parse_scorer(const std::string& s);

/// Probability-like score of edge (u, v) on relation r: s(z_ur . z_vr), or
/// (1 + cos) / 2 for the cosine scorer. Symmetric in u and v.
double edge_score(const EmbeddingSet& e, NodeId u, NodeId v, RelationId r, Scorer scorer = Scorer::kDot);

/// Mann-Whitney ROC-AUC with ties counted one half. Labels are 0 or 1.
double roc_auc(std::span<const double> scores, std::span<const int> labels);

struct F1Result {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Marks the k highest scores positive (ties keep input order) and scores
/// the positive class.
F1Result f1_at_known_k(std::span<const double> scores, std::span<const int> labels, std::size_t k);

/// Positive and negative pairs of one relation.
struct LabeledEdges {
  std::vector<Edge> positives;
  std::vector<Edge> negatives;
  bool empty() const { return positives.empty() && negatives.empty(); }
};

struct RelationMetrics {
  RelationId relation = 0;
  double roc_auc = 0.0;
  double f1 = 0.0;
  std::size_t positives = 0;
  std::size_t negatives = 0;
};

struct MetricReport {
  std::uint64_t seed = 0;
  std::vector<RelationMetrics> relations;  // only relations with labeled pairs
  double mean_roc_auc = 0.0;
  double mean_f1 = 0.0;
};

/// Scores each relation's labeled pairs and averages uniformly over the
/// relations that have both classes. k for F1 is the positive count.
MetricReport evaluate(const EmbeddingSet& e, std::span<const LabeledEdges> pairs, Scorer scorer = Scorer::kDot,
                      std::uint64_t seed = 0);

struct MeanStd {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation, 0 for one trial
};

MeanStd mean_std(std::span<const double> values);

struct AggregateReport {
  std::size_t trials = 0;
  std::vector<RelationId> relations;
  std::vector<MeanStd> roc_auc;  // per relation
  std::vector<MeanStd> f1;
  MeanStd mean_roc_auc;
  MeanStd mean_f1;
};

/// Reports must cover the same relations.
AggregateReport aggregate(std::span<const MetricReport> reports);

void write_report_csv(const MetricReport& report, const Schema& schema, const std::filesystem::path& path);
void write_aggregate_csv(const AggregateReport& report, const Schema& schema, const std::filesystem::path& path);

}  // namespace mxembed
