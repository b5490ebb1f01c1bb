// End-to-end checks, one PASS/FAIL/SKIP line per criterion. Pass criterion
// numbers as arguments to run a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "mxembed/attention_export.hpp"
#include "mxembed/graph_io.hpp"
#include "mxembed/motifs.hpp"
#include "mxembed/splits.hpp"
#include "mxembed/synthetic.hpp"
#include "mxembed/trainer.hpp"
#include "test_support.hpp"

namespace mxembed {
namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

enum class Status { kPass, kFail, kSkip };

struct Outcome {
  Status status = Status::kPass;
  std::string detail;
};

// Collects the first few violations of a criterion.
class Checker {
 public:
  void expect(bool ok, const std::string& what) {
    if (ok) return;
    ++failures_;
    if (failures_ <= 5) messages_ += (messages_.empty() ? "" : "; ") + what;
  }
  bool ok() const { return failures_ == 0; }
  Outcome outcome(const std::string& summary) const {
    if (ok()) return {Status::kPass, summary};
    return {Status::kFail, summary + "; " + std::to_string(failures_) + " violation(s): " + messages_};
  }

 private:
  std::size_t failures_ = 0;
  std::string messages_;
};

std::string fmt(double x, int precision = 4) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(precision);
  s << x;
  return s.str();
}

std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2e", x);
  return buf;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// 1. Analytic gradients of the full loss against central differences.
Outcome gradient_correctness() {
  double worst = 0.0;
  std::size_t checked = 0;
  Checker c;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    testing::RandomGraphSpec s;
    s.seed = 1000 + seed;
    s.nodes = 14;
    s.relations = 2 + seed % 3;
    s.density = 0.3;
    s.undirected = seed % 2 == 0;
    const auto g = testing::random_hetero_graph(s);
    TrainConfig tc;
    tc.dim = 4 + seed % 5;
    tc.attention_dim = 3;
    tc.levels = 1 + seed % 2;
    tc.negatives = 2;
    tc.neighbor_budget = 2;
    tc.window = 2;
    tc.per_relation_context = seed % 4 == 3;
    tc.seed = seed;
    auto p = ModelParameters::initialize(ModelShape::from(g, tc), seed);
    for (auto& level : p.bias) {
      for (auto& b : level) b.setRandom();
    }
    WalkOptions wo;
    wo.walks_per_node = 3;
    wo.length = 6;
    wo.seed = seed;
    const auto corpus = generate_walks(g, wo);
    const ContextIndex index(corpus, g.num_nodes(), tc.window);
    const auto noise = build_noise_tables(g, tc.noise);
    Rng rng(seed);
    const std::vector<NodeId> centers(index.centers().begin(),
                                      index.centers().begin() + std::min<std::ptrdiff_t>(3, index.centers().size()));
    const auto batch = make_batch(g, index, centers, noise, tc, rng);
    const auto res = gradient_check(p, g, batch, 1e-5, true, 0, 1e-6, seed);
    checked += res.checked;
    worst = std::max(worst, res.max_relative_error);
    c.expect(res.max_relative_error < 1e-4, "instance " + std::to_string(seed) + " " + res.worst_tensor + " error " +
                                                sci(res.max_relative_error));
  }
  return c.outcome("20 instances, " + std::to_string(checked) + " entries, max relative error " + sci(worst));
}

SimpleLayer random_layer(std::size_t n, double p, std::uint64_t seed) {
  Rng rng(seed);
  std::bernoulli_distribution coin(p);
  std::vector<Edge> e;
  for (NodeId a = 0; a < n; ++a) {
    for (NodeId b = a + 1; b < n; ++b) {
      if (coin(rng)) e.push_back({a, b});
    }
  }
  return SimpleLayer(n, e);
}

// 2. Counting kernel against exhaustive enumeration.
Outcome motif_oracle() {
  Checker c;
  using C = MotifCounts;
  auto clique = [](std::size_t n) {
    std::vector<Edge> e;
    for (NodeId a = 0; a < n; ++a) {
      for (NodeId b = a + 1; b < n; ++b) e.push_back({a, b});
    }
    return e;
  };
  const std::vector<std::pair<std::string, std::pair<SimpleLayer, std::vector<C>>>> hand = {
      {"K3", {SimpleLayer(3, clique(3)), std::vector<C>(3, C{2, 0, 1, 0, 0, 0, 0, 0, 0})}},
      {"P3",
       {SimpleLayer(3, std::vector<Edge>{{0, 1}, {1, 2}}),
        {C{1, 1, 0, 0, 0, 0, 0, 0, 0}, C{2, 1, 0, 0, 0, 0, 0, 0, 0}, C{1, 1, 0, 0, 0, 0, 0, 0, 0}}}},
      {"C4",
       {SimpleLayer(4, std::vector<Edge>{{0, 1}, {1, 2}, {2, 3}, {3, 0}}),
        std::vector<C>(4, C{2, 3, 0, 0, 0, 1, 0, 0, 0})}},
      {"K4", {SimpleLayer(4, clique(4)), std::vector<C>(4, C{3, 0, 3, 0, 0, 0, 0, 0, 1})}},
  };
  for (const auto& [name, item] : hand) {
    const auto& [layer, expected] = item;
    const auto all = count_motifs_layer(layer);
    for (NodeId v = 0; v < layer.num_nodes(); ++v) {
      c.expect(count_motifs_node(layer, v) == expected[v], name + " node " + std::to_string(v));
      c.expect(all[v] == expected[v], name + " layer count node " + std::to_string(v));
      c.expect(brute_force_motif_oracle(layer, v) == expected[v], name + " oracle node " + std::to_string(v));
    }
  }
  const double ps[] = {0.1, 0.3, 0.5};
  std::size_t nodes = 0;
  for (std::uint64_t i = 0; i < 100; ++i) {
    const std::size_t n = 5 + i % 26;
    const auto layer = random_layer(n, ps[i % 3], 500 + i);
    const auto all = count_motifs_layer(layer);
    for (NodeId v = 0; v < n; ++v, ++nodes) {
      const auto expected = brute_force_motif_oracle(layer, v);
      c.expect(all[v] == expected, "layer " + std::to_string(i) + " node " + std::to_string(v));
      c.expect(count_motifs_node(layer, v) == expected, "rooted, layer " + std::to_string(i));
    }
  }
  return c.outcome("4 hand cases and 100 random layers, " + std::to_string(nodes) + " nodes");
}

// 3. Empirical step frequencies of the walker against the transition law.
Outcome walk_law() {
  Checker c;
  const auto g = erdos_renyi_multiplex(20, 3, 0.2, 17);
  double worst = 0.0;

  // Every (relation, node) state stepped 10^5 times.
  WalkOptions one;
  one.walks_per_node = 100000;
  one.length = 2;
  one.seed = 5;
  const auto first = generate_walks(g, one);
  std::map<std::tuple<RelationId, NodeId, NodeId>, double> hits;
  std::map<std::pair<RelationId, NodeId>, double> visits;
  for (std::size_t i = 0; i < first.size(); ++i) {
    const auto w = first[i];
    hits[{w.relation, w.nodes[0], w.nodes[1]}] += 1;
    visits[{w.relation, w.nodes[0]}] += 1;
  }
  for (const auto& [state, n] : visits) {
    const auto [r, v] = state;
    c.expect(n == 100000, "state visited " + fmt(n, 0) + " times");
    const auto law = transition_distribution(g, v, r, nullptr, 0);
    for (NodeId u = 0; u < g.num_nodes(); ++u) {
      const auto it = hits.find({r, v, u});
      const double f = it == hits.end() ? 0.0 : it->second / n;
      const double err = std::abs(f - law.probability(u));
      worst = std::max(worst, err);
      c.expect(err <= 0.01, "relation " + std::to_string(r) + " " + std::to_string(v) + "->" + std::to_string(u) +
                                " off by " + fmt(err));
    }
  }
  std::size_t steps = first.size();

  // Later steps of long walks, pooled per state.
  WalkOptions many;
  many.walks_per_node = 20000;
  many.length = 10;
  many.seed = 6;
  const auto corpus = generate_walks(g, many);
  hits.clear();
  visits.clear();
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto w = corpus[i];
    for (std::size_t p = 2; p < w.nodes.size(); ++p) {
      hits[{w.relation, w.nodes[p - 1], w.nodes[p]}] += 1;
      visits[{w.relation, w.nodes[p - 1]}] += 1;
      ++steps;
    }
  }
  std::size_t states = 0;
  for (const auto& [state, n] : visits) {
    if (n < 100000) continue;
    ++states;
    const auto [r, v] = state;
    const auto law = transition_distribution(g, v, r, nullptr, 0);
    for (NodeId u = 0; u < g.num_nodes(); ++u) {
      const auto it = hits.find({r, v, u});
      const double f = it == hits.end() ? 0.0 : it->second / n;
      const double err = std::abs(f - law.probability(u));
      worst = std::max(worst, err);
      c.expect(err <= 0.01, "later step, relation " + std::to_string(r) + " node " + std::to_string(v));
    }
  }
  c.expect(states > 0, "no state reached 10^5 later steps");
  return c.outcome(std::to_string(steps) + " steps, " + std::to_string(states) +
                   " later-step states, max deviation " + fmt(worst));
}

// 4. Attention rows are distributions and outputs stay in the inputs' hull.
Outcome attention_validity() {
  Checker c;
  double worst_sum = 0.0;
  double worst_hull = 0.0;
  std::size_t rows = 0;
  std::vector<MultiplexGraph> graphs;
  for (std::uint64_t s = 0; s < 10; ++s) {
    testing::RandomGraphSpec spec;
    spec.seed = 2000 + s;
    spec.nodes = 25;
    spec.relations = 2 + s % 3;
    spec.density = 0.2;
    spec.undirected = s % 2 == 0;
    graphs.push_back(testing::random_hetero_graph(spec));
  }
  Rng rng(77);
  for (std::size_t pass = 0; pass < 1000; ++pass) {
    const auto& g = graphs[pass % graphs.size()];
    TrainConfig tc;
    tc.dim = 3 + pass % 6;
    tc.attention_dim = 2 + pass % 3;
    tc.levels = 1 + pass % 2;
    auto p = ModelParameters::initialize(ModelShape::from(g, tc), pass);
    // Scaled weights push the softmax towards saturation.
    const double scale = 1.0 + static_cast<double>(pass % 5) * 2.0;
    for (std::size_t k = 0; k < tc.levels; ++k) {
      for (auto& m : p.rel[k]) m *= scale;
    }
    const NodeId v = static_cast<NodeId>(std::uniform_int_distribution<std::size_t>(0, g.num_nodes() - 1)(rng));
    const auto tree = build_k_level_sample(g, v, tc.budgets(), rng);
    const TreePass tp(p, g, tree);
    const std::size_t R = g.num_relations();
    const std::size_t K = tc.levels;
    for (std::size_t k = 1; k <= K; ++k) {
      const MatrixXd a = tp.root_attention(k);
      for (Index r = 0; r < a.rows(); ++r, ++rows) {
        const double err = std::abs(a.row(r).sum() - 1.0);
        worst_sum = std::max(worst_sum, err);
        c.expect(err <= 1e-9 && (a.row(r).array() >= 0.0).all(), "pass " + std::to_string(pass) + " row sum");
      }
    }
    // Rebuild the root's relation-wise inputs at level K and mix them again.
    MatrixXd stacked(static_cast<Index>(R), static_cast<Index>(tc.dim));
    for (std::size_t r = 0; r < R; ++r) {
      const auto rel = static_cast<RelationId>(r);
      const VectorXd self = tp.representation(0, K - 1, rel).col(0);
      std::vector<VectorXd> kids;
      const auto [c0, c1] = tree.child_range(0, 0, rel);
      for (auto i = c0; i < c1; ++i) kids.push_back(tp.representation(1, K - 1, rel).col(i));
      stacked.row(static_cast<Index>(r)) = relation_conv(p, K, rel, self, neighbor_message(p, K, rel, kids)).transpose();
    }
    const auto att = relational_attention(p, K, stacked);
    const VectorXd lo = stacked.colwise().minCoeff();
    const VectorXd hi = stacked.colwise().maxCoeff();
    for (std::size_t r = 0; r < R; ++r) {
      const VectorXd z = tp.z_columns().col(static_cast<Index>(r));
      const double agree = (z - att.attended.row(static_cast<Index>(r)).transpose()).cwiseAbs().maxCoeff();
      c.expect(agree <= 1e-12, "pass " + std::to_string(pass) + " recomputed output differs by " + sci(agree));
      const double below = (lo - z).cwiseMax(0.0).maxCoeff();
      const double above = (z - hi).cwiseMax(0.0).maxCoeff();
      worst_hull = std::max({worst_hull, below, above});
      c.expect(below <= 1e-12 && above <= 1e-12, "pass " + std::to_string(pass) + " outside hull");
    }
  }
  return c.outcome("1000 passes, " + std::to_string(rows) + " rows, max |sum - 1| " + sci(worst_sum) +
                   ", max hull excess " + sci(worst_hull));
}

TrainConfig desk_config(std::uint64_t seed) {
  TrainConfig c;
  c.dim = 32;
  c.seed = seed;
  return c;
}

// Transductive split, walks on the training graph, training with
// validation, test ROC-AUC on the training graph's embeddings.
double transductive_auc(const MultiplexGraph& g, const TrainConfig& tc, std::size_t threads = 1) {
  const auto split = split_transductive(g, 0.05, 0.10, tc.seed);
  WalkOptions wo;
  wo.walks_per_node = tc.walks_per_node;
  wo.length = tc.walk_length;
  wo.seed = tc.seed;
  wo.threads = threads;
  const auto corpus = generate_walks(split.train, wo);
  const auto result = train(split.train, corpus, tc, split.validation);
  const auto emb = compute_embeddings(result.params, split.train, embed_options(tc, threads));
  return evaluate(emb, split.test).mean_roc_auc;
}

// 5. Planted communities are recovered far above chance.
Outcome planted_structure() {
  std::vector<double> aucs;
  std::string per_seed;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    PlantedPartitionOptions o;
    o.seed = seed;
    const auto g = planted_partition_multiplex(o);
    aucs.push_back(transductive_auc(g, desk_config(seed)));
    per_seed += (per_seed.empty() ? "" : " ") + fmt(aucs.back());
  }
  const double mean = (aucs[0] + aucs[1] + aucs[2]) / 3.0;
  Checker c;
  c.expect(mean >= 0.90, "mean test ROC-AUC " + fmt(mean) + " below 0.90");
  return c.outcome("test ROC-AUC per seed " + per_seed + ", mean " + fmt(mean));
}

// 6. Removing attention does not help when layers share edges.
Outcome ablation_direction() {
  Checker c;
  std::string detail;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    SharedLayerOptions o;
    o.seed = seed;
    const auto g = shared_edge_multiplex(o);
    auto tc = desk_config(seed);
    const double full = transductive_auc(g, tc);
    tc.attention = false;
    const double plain = transductive_auc(g, tc);
    detail += (detail.empty() ? "" : ", ") + std::string("seed ") + std::to_string(seed) + " full " + fmt(full) +
              " no-attention " + fmt(plain);
    c.expect(full >= plain, "seed " + std::to_string(seed) + " full model below the no-attention variant");
  }
  return c.outcome(detail);
}

// 7. Attention from A prefers its near-duplicate B over the independent C.
Outcome attention_interpretability() {
  Checker c;
  std::string detail;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    DuplicatedLayerOptions o;
    o.seed = seed;
    const auto g = duplicated_layer_multiplex(o);
    const auto tc = desk_config(seed);
    WalkOptions wo;
    wo.walks_per_node = tc.walks_per_node;
    wo.length = tc.walk_length;
    wo.seed = seed;
    const auto corpus = generate_walks(g, wo);
    const auto result = train(g, corpus, tc, {});
    const auto rows = attention_export(result.params, g, embed_options(tc));
    std::vector<double> ab, ac;
    for (const auto& r : rows) {
      if (r.level != tc.levels || r.output != 0) continue;
      if (r.input == 1) ab.push_back(r.weight);
      if (r.input == 2) ac.push_back(r.weight);
    }
    const double mab = median(ab);
    const double mac = median(ac);
    detail += (detail.empty() ? "" : ", ") + std::string("seed ") + std::to_string(seed) + " A->B " + fmt(mab) +
              " A->C " + fmt(mac);
    c.expect(mab > mac, "seed " + std::to_string(seed) + " median A->B not above A->C");
  }
  return c.outcome("median top-level attention, " + detail);
}

using PairSet = std::set<std::pair<NodeId, NodeId>>;

PairSet pair_set(const std::vector<Edge>& edges) {
  PairSet s;
  for (const auto& e : edges) s.insert({e.src, e.dst});
  return s;
}

void check_negatives(Checker& c, const MultiplexGraph& g, RelationId r, const std::vector<Edge>& negs,
                     const std::string& where) {
  for (const auto& e : negs) {
    c.expect(e.src != e.dst, where + " self-pair negative");
    c.expect(!g.has_edge(r, e.src, e.dst), where + " negative is an edge");
    c.expect(g.node_type(e.src) == g.relation(r).src_type && g.node_type(e.dst) == g.relation(r).dst_type,
             where + " negative has wrong node types");
  }
  c.expect(pair_set(negs).size() == negs.size(), where + " duplicate negatives");
}

std::size_t rounded(double frac, std::size_t n) {
  return static_cast<std::size_t>(std::llround(frac * static_cast<double>(n)));
}

// 8. Split fractions and leakage on random graphs.
Outcome protocol_fidelity() {
  Checker c;
  std::size_t relations = 0;
  for (std::uint64_t gi = 0; gi < 50; ++gi) {
    testing::RandomGraphSpec spec;
    spec.seed = 3000 + gi;
    spec.nodes = 60 + gi % 41;
    spec.node_types = 1 + gi % 3;
    spec.relations = 2 + gi % 3;
    spec.density = 0.25;
    spec.undirected = gi % 2 == 0;
    const auto g = testing::random_hetero_graph(spec);
    const std::string tag = "graph " + std::to_string(gi);
    relations += g.num_relations();

    const auto t = split_transductive(g, 0.05, 0.10, gi);
    for (RelationId r = 0; r < g.num_relations(); ++r) {
      const std::size_t m = g.num_edges(r);
      const auto train_set = pair_set(t.train.edges(r));
      const auto vp = pair_set(t.validation[r].positives);
      const auto tp = pair_set(t.test[r].positives);
      c.expect(vp.size() == rounded(0.05, m) && t.validation[r].positives.size() == vp.size(), tag + " val count");
      c.expect(tp.size() == rounded(0.10, m) && t.test[r].positives.size() == tp.size(), tag + " test count");
      c.expect(train_set.size() + vp.size() + tp.size() == m, tag + " train count");
      c.expect(t.validation[r].negatives.size() == vp.size(), tag + " val negative count");
      c.expect(t.test[r].negatives.size() == tp.size(), tag + " test negative count");
      for (const auto& e : vp) c.expect(!train_set.count(e) && !tp.count(e), tag + " validation leak");
      for (const auto& e : tp) c.expect(!train_set.count(e), tag + " test leak");
      for (const auto& e : tp) c.expect(g.has_edge(r, e.first, e.second), tag + " test positive not an edge");
      check_negatives(c, g, r, t.validation[r].negatives, tag + " val");
      check_negatives(c, g, r, t.test[r].negatives, tag + " test");
      const auto vn = pair_set(t.validation[r].negatives);
      for (const auto& e : t.test[r].negatives) c.expect(!vn.count({e.src, e.dst}), tag + " shared negative");
    }

    const auto folds = split_cross_validation(g, 5, gi);
    for (RelationId r = 0; r < g.num_relations(); ++r) {
      const std::size_t m = g.num_edges(r);
      std::vector<int> held(m, 0);
      for (const auto& f : folds) {
        const auto& h = f.holdout[r];
        const std::size_t out = h.validation.size() + h.test.size();
        c.expect(out == m / 5 || out == m / 5 + 1, tag + " fold is not 20% of the edges");
        c.expect(h.test.size() - h.validation.size() <= 1, tag + " fold halves unbalanced");
        for (auto i : h.validation) ++held[i];
        for (auto i : h.test) ++held[i];
        const auto train_set = pair_set(f.train.edges(r));
        for (const auto& e : f.test[r].positives) c.expect(!train_set.count({e.src, e.dst}), tag + " fold leak");
        for (const auto& e : f.validation[r].positives) c.expect(!train_set.count({e.src, e.dst}), tag + " fold leak");
        check_negatives(c, g, r, f.test[r].negatives, tag + " fold test");
        check_negatives(c, g, r, f.validation[r].negatives, tag + " fold val");
      }
      c.expect(std::all_of(held.begin(), held.end(), [](int x) { return x == 1; }), tag + " folds overlap");
    }

    const auto s = split_inductive(g, 0.15, 0.5, 0.2, gi);
    c.expect(s.hidden.size() == rounded(0.15, g.num_nodes()), tag + " hidden count");
    std::map<NodeId, std::pair<std::size_t, std::size_t>> owned;
    auto owner = [&](const Edge& e) {
      if (s.hidden_mask[e.src] && s.hidden_mask[e.dst]) return std::min(e.src, e.dst);
      return s.hidden_mask[e.src] ? e.src : e.dst;
    };
    for (RelationId r = 0; r < g.num_relations(); ++r) {
      const auto& edges = g.edges(r);
      for (const auto& e : s.train.edges(r)) c.expect(!s.hidden_mask[e.src] && !s.hidden_mask[e.dst], tag + " hidden node in training");
      for (const auto& e : s.validation[r].positives) c.expect(!s.hidden_mask[e.src] && !s.hidden_mask[e.dst], tag + " hidden node in validation");
      for (const auto& e : s.validation[r].negatives) c.expect(!s.hidden_mask[e.src] && !s.hidden_mask[e.dst], tag + " hidden node in validation negatives");
      for (const auto& e : s.test[r].positives) c.expect(s.hidden_mask[e.src] || s.hidden_mask[e.dst], tag + " test positive misses hidden nodes");
      for (const auto& e : s.test[r].negatives) c.expect(s.hidden_mask[e.src] || s.hidden_mask[e.dst], tag + " test negative misses hidden nodes");
      c.expect(s.test[r].negatives.size() == s.test[r].positives.size(), tag + " inductive negative count");
      check_negatives(c, g, r, s.test[r].negatives, tag + " inductive test");
      check_negatives(c, g, r, s.validation[r].negatives, tag + " inductive val");
      std::size_t seen = 0, touching = 0;
      for (const auto& e : edges) (s.hidden_mask[e.src] || s.hidden_mask[e.dst] ? touching : seen)++;
      c.expect(s.validation[r].positives.size() == rounded(0.2, seen), tag + " inductive validation count");
      c.expect(s.revealed_index[r].size() + s.test_index[r].size() == touching, tag + " hidden edges unaccounted");
      const std::set<std::size_t> revealed(s.revealed_index[r].begin(), s.revealed_index[r].end());
      for (auto i : s.test_index[r]) c.expect(!revealed.count(i), tag + " revealed edge in test");
      for (auto i : s.revealed_index[r]) {
        auto& o = owned[owner(edges[i])];
        ++o.first;
        ++o.second;
      }
      for (auto i : s.test_index[r]) ++owned[owner(edges[i])].second;
      const auto test_graph = pair_set(s.test_graph.edges(r));
      for (const auto& e : s.test[r].positives) c.expect(!test_graph.count({e.src, e.dst}), tag + " test edge visible");
      c.expect(test_graph.size() == edges.size() - s.test_index[r].size(), tag + " test graph size");
    }
    for (const auto& [v, o] : owned) {
      c.expect(o.first == (o.second + 1) / 2, tag + " node " + std::to_string(v) + " reveals " +
                                                  std::to_string(o.first) + " of " + std::to_string(o.second));
    }
  }
  return c.outcome("50 graphs, " + std::to_string(relations) + " relations, transductive, 5-fold and inductive");
}

// 9. Two single-threaded runs of the whole pipeline write identical files.
Outcome determinism() {
  PlantedPartitionOptions o;
  o.nodes = 150;
  o.seed = 9;
  const auto g = planted_partition_multiplex(o);
  testing::TempDir dir;
  auto once = [&](const std::string& name) {
    TrainConfig tc;
    tc.dim = 16;
    tc.max_epochs = 3;
    tc.seed = 11;
    const auto split = split_transductive(g, 0.05, 0.10, tc.seed);
    WalkOptions wo;
    wo.walks_per_node = tc.walks_per_node;
    wo.length = tc.walk_length;
    wo.seed = tc.seed;
    const auto corpus = generate_walks(split.train, wo);
    const auto result = train(split.train, corpus, tc, split.validation);
    const auto emb = compute_embeddings(result.params, split.train, embed_options(tc));
    write_embeddings_tsv(emb, g, dir / (name + "_embeddings.tsv"));
    write_report_csv(evaluate(emb, split.test), g.schema(), dir / (name + "_report.csv"));
    write_history_csv(result.history, dir / (name + "_history.csv"));
  };
  once("a");
  once("b");
  Checker c;
  std::size_t bytes = 0;
  for (const char* file : {"_embeddings.tsv", "_report.csv", "_history.csv"}) {
    const auto a = testing::read_text(dir / (std::string("a") + file));
    const auto b = testing::read_text(dir / (std::string("b") + file));
    bytes += a.size();
    c.expect(!a.empty() && a == b, std::string(file + 1) + " differs");
  }
  return c.outcome("embeddings, report and history identical, " + std::to_string(bytes) + " bytes");
}

// 10. Full-scale run on a user-supplied tissue PPI extract.
Outcome full_scale() {
  const char* edges = std::getenv("MXEMBED_TISSUE_PPI");
  if (edges == nullptr || *edges == '\0') return {Status::kSkip, "set MXEMBED_TISSUE_PPI to the edge list to run"};
  GraphFiles files;
  files.edges = edges;
  if (const char* types = std::getenv("MXEMBED_TISSUE_PPI_NODE_TYPES"); types != nullptr && *types != '\0') {
    files.node_types = types;
  }
  LoadOptions lo;
  lo.undirected = true;
  const auto g = load_graph(files, lo);
  const std::size_t threads = std::max(1u, std::thread::hardware_concurrency());
  TrainConfig tc;
  const double auc = transductive_auc(g, tc, threads);
  Checker c;
  c.expect(auc >= 0.90, "test ROC-AUC " + fmt(auc) + " below 0.90");
  return c.outcome(std::to_string(g.num_nodes()) + " nodes, " + std::to_string(g.num_edges()) + " edges, " +
                   std::to_string(g.num_relations()) + " relations, test ROC-AUC " + fmt(auc));
}

struct Criterion {
  int id;
  const char* name;
  double limit_seconds;  // 0 when there is no runtime bound
  std::function<Outcome()> run;
};

}  // namespace
}  // namespace mxembed

int main(int argc, char** argv) {
  using namespace mxembed;
  const std::vector<Criterion> criteria = {
      {1, "gradient correctness", 60, gradient_correctness},
      {2, "motif oracle equivalence", 120, motif_oracle},
      {3, "walk transition law", 30, walk_law},
      {4, "attention validity", 0, attention_validity},
      {5, "planted-structure link prediction", 600, planted_structure},
      {6, "ablation direction", 0, ablation_direction},
      {7, "attention interpretability", 0, attention_interpretability},
      {8, "split protocol fidelity", 0, protocol_fidelity},
      {9, "pipeline determinism", 0, determinism},
      {10, "full-scale spot check", 0, full_scale},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failed = 0;
  for (const auto& c : criteria) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {Status::kFail, std::string("threw: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (o.status == Status::kPass && c.limit_seconds > 0 && seconds > c.limit_seconds) {
      o = {Status::kFail, o.detail + "; took " + fmt(seconds, 1) + " s, limit " + fmt(c.limit_seconds, 0) + " s"};
    }
    const char* label = o.status == Status::kPass ? "PASS" : (o.status == Status::kFail ? "FAIL" : "SKIP");
    std::printf("criterion %d %s: %s (%s; %.1f s)\n", c.id, label, c.name, o.detail.c_str(), seconds);
    std::fflush(stdout);
    failed += o.status == Status::kFail ? 1 : 0;
  }
  return failed == 0 ? 0 : 1;
}
