#include "mxembed/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mxembed/error.hpp"
#include "mxembed/loss.hpp"
#include "text_util.hpp"

namespace mxembed {

std::string to_string(Scorer s) { return s == Scorer::kDot ? "dot" : "cosine"; }

Scorer parse_scorer(const std::string& s) {
  if (s == "dot") return Scorer::kDot;
  if (s == "cosine") return Scorer::kCosine;
  throw InvalidArgument("scorer: expected dot or cosine, got '" + s + "'");
}

double edge_score(const EmbeddingSet& e, NodeId u, NodeId v, RelationId r, Scorer scorer) {
  if (r >= e.relations) throw InvalidArgument("unknown relation " + std::to_string(r));
  if (!e.has(u) || !e.has(v)) throw InvalidArgument("edge endpoint has no embedding");
  const auto zu = e.z(u, r);
  const auto zv = e.z(v, r);
  const double dot = zu.dot(zv);
  if (scorer == Scorer::kDot) return sigmoid(dot);
  const double norm = zu.norm() * zv.norm();
  if (norm == 0.0) return 0.5;
  return 0.5 * (1.0 + std::clamp(dot / norm, -1.0, 1.0));
}

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw InvalidArgument("roc_auc: scores and labels differ in length");
  const std::size_t n = scores.size();
  std::size_t pos = 0;
  for (int l : labels) {
    if (l != 0 && l != 1) throw InvalidArgument("roc_auc: labels must be 0 or 1");
    pos += static_cast<std::size_t>(l);
  }
  const std::size_t neg = n - pos;
  if (pos == 0 || neg == 0) throw InvalidArgument("roc_auc needs both positive and negative labels");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Sum of mid-ranks of the positives.
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double mid = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t t = i; t < j; ++t) {
      if (labels[order[t]] == 1) rank_sum += mid;
    }
    i = j;
  }
  const double p = static_cast<double>(pos);
  return (rank_sum - p * (p + 1.0) / 2.0) / (p * static_cast<double>(neg));
}

F1Result f1_at_known_k(std::span<const double> scores, std::span<const int> labels, std::size_t k) {
  if (scores.size() != labels.size()) throw InvalidArgument("f1: scores and labels differ in length");
  if (k == 0) throw InvalidArgument("f1_at_known_k needs k >= 1");
  if (k > scores.size()) throw InvalidArgument("f1_at_known_k: k exceeds the number of scores");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::size_t tp = 0;
  for (std::size_t i = 0; i < k; ++i) tp += labels[order[i]] == 1 ? 1 : 0;
  const auto actual = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
  F1Result out;
  out.precision = static_cast<double>(tp) / static_cast<double>(k);
  out.recall = actual == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(actual);
  const double denom = out.precision + out.recall;
  out.f1 = denom == 0.0 ? 0.0 : 2.0 * out.precision * out.recall / denom;
  return out;
}

MetricReport evaluate(const EmbeddingSet& e, std::span<const LabeledEdges> pairs, Scorer scorer,
                      std::uint64_t seed) {
  MetricReport report;
  report.seed = seed;
  std::vector<double> scores;
  std::vector<int> labels;
  for (std::size_t r = 0; r < pairs.size(); ++r) {
    const auto& le = pairs[r];
    if (le.positives.empty() || le.negatives.empty()) continue;
    scores.clear();
    labels.clear();
    const auto rel = static_cast<RelationId>(r);
    for (const auto& x : le.positives) {
      scores.push_back(edge_score(e, x.src, x.dst, rel, scorer));
      labels.push_back(1);
    }
    for (const auto& x : le.negatives) {
      scores.push_back(edge_score(e, x.src, x.dst, rel, scorer));
      labels.push_back(0);
    }
    RelationMetrics m;
    m.relation = rel;
    m.roc_auc = roc_auc(scores, labels);
    m.f1 = f1_at_known_k(scores, labels, le.positives.size()).f1;
    m.positives = le.positives.size();
    m.negatives = le.negatives.size();
    report.relations.push_back(m);
  }
  if (report.relations.empty()) throw InvalidArgument("no relation has both positive and negative pairs");
  for (const auto& m : report.relations) {
    report.mean_roc_auc += m.roc_auc;
    report.mean_f1 += m.f1;
  }
  report.mean_roc_auc /= static_cast<double>(report.relations.size());
  report.mean_f1 /= static_cast<double>(report.relations.size());
  return report;
}

MeanStd mean_std(std::span<const double> values) {
  MeanStd out;
  if (values.empty()) return out;
  out.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return out;
}

AggregateReport aggregate(std::span<const MetricReport> reports) {
  if (reports.empty()) throw InvalidArgument("aggregate needs at least one report");
  AggregateReport out;
  out.trials = reports.size();
  for (const auto& m : reports[0].relations) out.relations.push_back(m.relation);
  for (const auto& rep : reports) {
    if (rep.relations.size() != out.relations.size()) throw InvalidArgument("reports cover different relations");
    for (std::size_t i = 0; i < rep.relations.size(); ++i) {
      if (rep.relations[i].relation != out.relations[i]) throw InvalidArgument("reports cover different relations");
    }
  }
  std::vector<double> a, f;
  for (std::size_t i = 0; i < out.relations.size(); ++i) {
    a.clear();
    f.clear();
    for (const auto& rep : reports) {
      a.push_back(rep.relations[i].roc_auc);
      f.push_back(rep.relations[i].f1);
    }
    out.roc_auc.push_back(mean_std(a));
    out.f1.push_back(mean_std(f));
  }
  a.clear();
  f.clear();
  for (const auto& rep : reports) {
    a.push_back(rep.mean_roc_auc);
    f.push_back(rep.mean_f1);
  }
  out.mean_roc_auc = mean_std(a);
  out.mean_f1 = mean_std(f);
  return out;
}

void write_report_csv(const MetricReport& report, const Schema& schema, const std::filesystem::path& path) {
  auto out = detail::open_output(path.string());
  out << "relation,name,roc_auc,f1,positives,negatives\n";
  for (const auto& m : report.relations) {
    out << m.relation << ',' << schema.relation_name(m.relation) << ',' << detail::format_double(m.roc_auc) << ','
        << detail::format_double(m.f1) << ',' << m.positives << ',' << m.negatives << '\n';
  }
  out << "average,uniform," << detail::format_double(report.mean_roc_auc) << ','
      << detail::format_double(report.mean_f1) << ",,\n";
  if (!out) throw Error("failed writing " + path.string());
}

void write_aggregate_csv(const AggregateReport& report, const Schema& schema, const std::filesystem::path& path) {
  auto out = detail::open_output(path.string());
  out << "relation,name,roc_auc_mean,roc_auc_std,f1_mean,f1_std,trials\n";
  auto row = [&](const std::string& id, const std::string& name, const MeanStd& a, const MeanStd& f) {
    out << id << ',' << name << ',' << detail::format_double(a.mean) << ',' << detail::format_double(a.stddev) << ','
        << detail::format_double(f.mean) << ',' << detail::format_double(f.stddev) << ',' << report.trials << '\n';
  };
  for (std::size_t i = 0; i < report.relations.size(); ++i) {
    row(std::to_string(report.relations[i]), schema.relation_name(report.relations[i]), report.roc_auc[i],
        report.f1[i]);
  }
  row("average", "uniform", report.mean_roc_auc, report.mean_f1);
  if (!out) throw Error("failed writing " + path.string());
}

}  // namespace mxembed
