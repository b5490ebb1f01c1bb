#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <numeric>

#include "mxembed/adam.hpp"
#include "mxembed/checkpoint.hpp"
#include "mxembed/error.hpp"
#include "mxembed/loss.hpp"
#include "mxembed/model.hpp"
#include "mxembed/synthetic.hpp"
#include "test_support.hpp"

namespace mxembed {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using testing::RandomGraphSpec;
using testing::random_hetero_graph;

MatrixXd mat(std::initializer_list<std::initializer_list<double>> rows) {
  MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& row : rows) {
    Eigen::Index j = 0;
    for (double x : row) m(i, j++) = x;
    ++i;
  }
  return m;
}

ModelShape shape_for(const MultiplexGraph& g, std::size_t dim, std::size_t da, std::size_t levels) {
  TrainConfig c;
  c.dim = dim;
  c.attention_dim = da;
  c.levels = levels;
  return ModelShape::from(g, c);
}

// Three nodes, two layers, d = 2, one level; values checked against a
// separate numpy evaluation of the same formulas.
struct HandCase {
  MultiplexGraph g = make_layered_graph(3, {{{0, 1}}, {{0, 2}, {1, 2}}});
  ModelParameters p;
  SampleTree tree;

  HandCase() {
    p = ModelParameters::zeros(shape_for(g, 2, 2, 1));
    p.projection[0] = mat({{0.5, -0.3, 0.8}, {0.1, 0.4, -0.6}});
    p.self[0] = {mat({{0.2, -0.1}, {0.3, 0.5}}), mat({{-0.4, 0.2}, {0.1, 0.1}})};
    p.neighbor[0] = {mat({{0.7, 0.0}, {-0.2, 0.3}}), mat({{0.1, 0.6}, {0.5, -0.3}})};
    p.bias[0] = {mat({{0.05}, {-0.1}}), mat({{-0.2}, {0.15}})};
    p.attn[0] = {mat({{0.3, -0.5}, {0.8, 0.2}}), mat({{-0.6, 0.4}, {0.2, 0.9}})};
    p.rel[0] = {mat({{1.0, -0.5}, {0.3, 0.7}}), mat({{-0.2, 0.4}, {0.6, -0.8}})};
    tree.root = 0;
    tree.relations = 2;
    tree.nodes = {{0}, {1, 2, 2}};
    tree.offsets = {{0, 1, 3}};
  }
};

TEST(Forward, HandTraceMatchesFrozenValues) {
  HandCase h;
  const TreePass pass(h.p, h.g, h.tree);
  const MatrixXd z = pass.z_columns();
  EXPECT_NEAR(z(0, 0), -0.2479470820310296, 1e-12);
  EXPECT_NEAR(z(1, 0), 0.5013344320164307, 1e-12);
  EXPECT_NEAR(z(0, 1), -0.2329489699650893, 1e-12);
  EXPECT_NEAR(z(1, 1), 0.48292707916536337, 1e-12);
  const MatrixXd a = pass.root_attention(1);
  EXPECT_NEAR(a(0, 0), 0.5660109176148419, 1e-12);
  EXPECT_NEAR(a(0, 1), 0.4339890823851581, 1e-12);
  EXPECT_NEAR(a(1, 0), 0.6021037663424248, 1e-12);
  EXPECT_NEAR(a(1, 1), 0.39789623365757515, 1e-12);
}

TEST(Forward, WithoutAttentionReturnsRelationConvolutions) {
  HandCase h;
  const TreePass pass(h.p, h.g, h.tree, false);
  const MatrixXd z = pass.z_columns();
  EXPECT_NEAR(z(0, 0), -0.06760618009405177, 1e-12);
  EXPECT_NEAR(z(1, 0), 0.28, 1e-12);
  EXPECT_NEAR(z(0, 1), -0.4831486655083007, 1e-12);
  EXPECT_NEAR(z(1, 1), 0.79, 1e-12);
  EXPECT_EQ(pass.root_attention(1).size(), 0);
}

TEST(Forward, BuildingBlocksAgreeWithTreePass) {
  HandCase h;
  const VectorXd self = h.p.projection[0].col(0);
  std::vector<VectorXd> r0 = {h.p.projection[0].col(1)};
  std::vector<VectorXd> r1 = {h.p.projection[0].col(2), h.p.projection[0].col(2)};
  MatrixXd stacked(2, 2);
  stacked.row(0) = relation_conv(h.p, 1, 0, self, neighbor_message(h.p, 1, 0, r0)).transpose();
  stacked.row(1) = relation_conv(h.p, 1, 1, self, neighbor_message(h.p, 1, 1, r1)).transpose();
  const auto att = relational_attention(h.p, 1, stacked);
  const TreePass pass(h.p, h.g, h.tree);
  EXPECT_LT((att.attended - pass.embedding()).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LT((att.attention - pass.root_attention(1)).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(NeighborMessage, MeanOfTransformedNeighbors) {
  HandCase h;
  h.p.neighbor[0][0] = mat({{1, 2}, {3, 4}});
  std::vector<VectorXd> reps = {VectorXd::Unit(2, 0), VectorXd::Unit(2, 1)};
  const VectorXd m = neighbor_message(h.p, 1, 0, reps);
  EXPECT_DOUBLE_EQ(m(0), 1.5);
  EXPECT_DOUBLE_EQ(m(1), 3.5);
  const VectorXd empty = neighbor_message(h.p, 1, 0, {});
  EXPECT_EQ(empty, VectorXd::Zero(2));
}

TEST(RelationConv, AppliesEluAfterAffineMap) {
  HandCase h;
  h.p.self[0][0] = mat({{1, 0}, {0, -1}});
  h.p.bias[0][0] = mat({{0.5}, {0.0}});
  VectorXd self(2);
  self << 1.0, 1.0;
  VectorXd msg(2);
  msg << 0.25, 0.0;
  const VectorXd out = relation_conv(h.p, 1, 0, self, msg);
  EXPECT_DOUBLE_EQ(out(0), 1.75);
  EXPECT_DOUBLE_EQ(out(1), std::expm1(-1.0));
  EXPECT_NEAR(out(1), -0.6321205588285577, 1e-15);
  h.p.shape.activation = Activation::kRelu;
  EXPECT_EQ(relation_conv(h.p, 1, 0, self, msg)(1), 0.0);
}

TEST(Activation, ValuesAndDerivatives) {
  EXPECT_EQ(activate(Activation::kElu, 2.0), 2.0);
  EXPECT_DOUBLE_EQ(activate(Activation::kElu, -2.0), std::exp(-2.0) - 1.0);
  EXPECT_DOUBLE_EQ(activate_derivative(Activation::kElu, -2.0), std::exp(-2.0));
  EXPECT_EQ(activate_derivative(Activation::kElu, 3.0), 1.0);
  EXPECT_EQ(activate(Activation::kRelu, -1.0), 0.0);
  EXPECT_EQ(activate_derivative(Activation::kRelu, -1.0), 0.0);
  EXPECT_EQ(activate_derivative(Activation::kRelu, 1.0), 1.0);
}

TEST(Attention, ZeroRelationWeightsGiveUniformMixing) {
  HandCase h;
  for (auto& m : h.p.rel[0]) m.setZero();
  MatrixXd stacked(2, 2);
  stacked << 1.0, 2.0, 3.0, 5.0;
  const auto att = relational_attention(h.p, 1, stacked);
  EXPECT_TRUE(att.attention.isConstant(0.5, 1e-15));
  for (int r = 0; r < 2; ++r) {
    EXPECT_DOUBLE_EQ(att.attended(r, 0), 2.0);
    EXPECT_DOUBLE_EQ(att.attended(r, 1), 3.5);
  }
}

TEST(Attention, RowsAreProbabilityVectors) {
  const auto g = erdos_renyi_multiplex(10, 4, 0.3, 2);
  const auto p = ModelParameters::initialize(shape_for(g, 6, 3, 2), 5);
  Rng rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    MatrixXd stacked = MatrixXd::Random(4, 6) * 3.0;
    for (std::size_t k = 1; k <= 2; ++k) {
      const auto att = relational_attention(p, k, stacked);
      EXPECT_TRUE((att.attention.array() > 0.0).all());
      for (int r = 0; r < 4; ++r) EXPECT_NEAR(att.attention.row(r).sum(), 1.0, 1e-12);
    }
  }
  EXPECT_THROW(relational_attention(p, 1, MatrixXd::Zero(3, 6)), InvalidArgument);
}

TEST(Attention, SingleRelationIsIdentity) {
  const auto g = erdos_renyi_multiplex(12, 1, 0.3, 3);
  const auto p = ModelParameters::initialize(shape_for(g, 5, 3, 2), 1);
  const std::vector<std::size_t> budgets = {4, 3};
  for (NodeId v = 0; v < 12; ++v) {
    Rng rng(v);
    const auto tree = build_k_level_sample(g, v, budgets, rng);
    const TreePass with(p, g, tree, true);
    const TreePass without(p, g, tree, false);
    EXPECT_EQ(with.z_columns(), without.z_columns());
    EXPECT_EQ(with.root_attention(1)(0, 0), 1.0);
    EXPECT_EQ(with.root_attention(2)(0, 0), 1.0);
  }
}

// Direct recursive evaluation of the tree recurrence, one node and one
// relation at a time.
struct NaiveModel {
  const ModelParameters& p;
  const MultiplexGraph& g;
  const SampleTree& tree;
  bool attention;

  VectorXd level0(NodeId v) const {
    const TypeId t = g.node_type(v);
    const auto local = static_cast<Eigen::Index>(g.type_local_index(v));
    const auto& a = g.attributes(t);
    if (a.identity) return p.projection[t].col(local);
    return p.projection[t] * a.values.col(local);
  }

  // h^k of the node at (depth, index) for every relation, rows = relations.
  MatrixXd h(std::size_t depth, std::size_t index, std::size_t k) const {
    const std::size_t R = p.shape.relations;
    const auto d = static_cast<Eigen::Index>(p.shape.dim);
    const NodeId v = tree.nodes[depth][index];
    if (k == 0) return level0(v).transpose().replicate(static_cast<Eigen::Index>(R), 1);
    const MatrixXd self = h(depth, index, k - 1);
    MatrixXd ht(static_cast<Eigen::Index>(R), d);
    for (std::size_t r = 0; r < R; ++r) {
      const auto [c0, c1] = tree.child_range(depth, index, static_cast<RelationId>(r));
      VectorXd mean = VectorXd::Zero(d);
      for (auto c = c0; c < c1; ++c) mean += h(depth + 1, c, k - 1).row(static_cast<Eigen::Index>(r)).transpose();
      if (c1 > c0) mean /= static_cast<double>(c1 - c0);
      VectorXd pre = p.self[k - 1][r] * self.row(static_cast<Eigen::Index>(r)).transpose() +
                     p.neighbor[k - 1][r] * mean + p.bias[k - 1][r].col(0);
      for (Eigen::Index i = 0; i < d; ++i) pre(i) = pre(i) > 0 ? pre(i) : std::exp(pre(i)) - 1.0;
      ht.row(static_cast<Eigen::Index>(r)) = pre.transpose();
    }
    if (!attention) return ht;
    MatrixXd out(static_cast<Eigen::Index>(R), d);
    for (std::size_t r = 0; r < R; ++r) {
      VectorXd t = p.attn[k - 1][r].transpose() * ht.row(static_cast<Eigen::Index>(r)).transpose();
      for (Eigen::Index i = 0; i < t.size(); ++i) t(i) = std::tanh(t(i));
      VectorXd logits = p.rel[k - 1][r].transpose() * t;
      double total = 0.0;
      for (Eigen::Index s = 0; s < logits.size(); ++s) total += std::exp(logits(s));
      VectorXd row = VectorXd::Zero(d);
      for (std::size_t s = 0; s < R; ++s) {
        row += std::exp(logits(static_cast<Eigen::Index>(s))) / total * ht.row(static_cast<Eigen::Index>(s)).transpose();
      }
      out.row(static_cast<Eigen::Index>(r)) = row.transpose();
    }
    return out;
  }
};

TEST(Forward, MatchesNaiveRecursionOnRandomHeterogeneousGraphs) {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    RandomGraphSpec s;
    s.seed = seed;
    s.nodes = 20;
    s.density = 0.2;
    s.undirected = seed % 2 == 1;
    const auto g = random_hetero_graph(s);
    const std::size_t K = 1 + seed % 3;
    auto p = ModelParameters::initialize(shape_for(g, 4, 3, K), seed);
    for (auto& level : p.bias) {
      for (auto& b : level) b.setRandom();
    }
    const std::vector<std::size_t> budgets(K, 3);
    for (NodeId v = 0; v < g.num_nodes(); v += 3) {
      Rng rng(derive_seed(seed, v));
      const auto tree = build_k_level_sample(g, v, budgets, rng);
      for (bool attention : {true, false}) {
        const TreePass pass(p, g, tree, attention);
        const NaiveModel naive{p, g, tree, attention};
        EXPECT_LT((pass.embedding() - naive.h(0, 0, K)).cwiseAbs().maxCoeff(), 1e-12)
            << "seed " << seed << " node " << v;
      }
    }
  }
}

TEST(Forward, LevelZeroIsSharedAcrossRelations) {
  RandomGraphSpec s;
  s.seed = 4;
  const auto g = random_hetero_graph(s);
  const auto p = ModelParameters::initialize(shape_for(g, 4, 2, 2), 4);
  const std::vector<std::size_t> budgets = {3, 3};
  for (NodeId v = 0; v < g.num_nodes(); ++v) {
    Rng rng(v);
    const auto tree = build_k_level_sample(g, v, budgets, rng);
    const TreePass pass(p, g, tree);
    const NaiveModel naive{p, g, tree, true};
    for (RelationId r = 0; r < g.num_relations(); ++r) {
      EXPECT_EQ(pass.representation(0, 0, r), pass.level0(0));
    }
    EXPECT_LT((pass.level0(0).col(0) - naive.level0(v)).cwiseAbs().maxCoeff(), 1e-14);
  }
}

// Rebuilds a tree with its relation blocks reordered so that relation r becomes perm[r].
SampleTree permute_tree(const SampleTree& t, const std::vector<RelationId>& perm) {
  const std::size_t R = t.relations;
  std::vector<RelationId> inverse(R);
  for (std::size_t r = 0; r < R; ++r) inverse[perm[r]] = static_cast<RelationId>(r);
  SampleTree out;
  out.root = t.root;
  out.relations = R;
  out.nodes = {{t.root}};
  std::vector<std::uint32_t> old_index = {0};
  for (std::size_t j = 0; j < t.levels(); ++j) {
    std::vector<std::uint32_t> next;
    std::vector<NodeId> nodes;
    std::vector<std::uint32_t> offsets = {0};
    for (auto oi : old_index) {
      for (std::size_t r = 0; r < R; ++r) {
        const auto [c0, c1] = t.child_range(j, oi, inverse[r]);
        for (auto c = c0; c < c1; ++c) {
          next.push_back(c);
          nodes.push_back(t.nodes[j + 1][c]);
        }
        offsets.push_back(static_cast<std::uint32_t>(nodes.size()));
      }
    }
    out.nodes.push_back(std::move(nodes));
    out.offsets.push_back(std::move(offsets));
    old_index = std::move(next);
  }
  return out;
}

TEST(Forward, EquivariantUnderRelationPermutation) {
  const std::size_t R = 3;
  const auto base = erdos_renyi_multiplex(15, R, 0.3, 11);
  std::vector<std::vector<Edge>> layers(R);
  for (RelationId r = 0; r < R; ++r) {
    for (NodeId v = 0; v < 15; ++v) {
      for (NodeId u : base.neighbors(v, r)) {
        if (v < u) layers[r].push_back({v, u});
      }
    }
  }
  const std::vector<RelationId> perm = {2, 0, 1};
  std::vector<std::vector<Edge>> permuted(R);
  for (std::size_t r = 0; r < R; ++r) permuted[perm[r]] = layers[r];
  const auto g = make_layered_graph(15, layers);
  const auto gp = make_layered_graph(15, permuted);

  const auto p = ModelParameters::initialize(shape_for(g, 4, 3, 2), 2);
  auto q = p;
  for (std::size_t k = 0; k < 2; ++k) {
    for (std::size_t r = 0; r < R; ++r) {
      q.self[k][perm[r]] = p.self[k][r];
      q.neighbor[k][perm[r]] = p.neighbor[k][r];
      q.bias[k][perm[r]] = p.bias[k][r];
      q.attn[k][perm[r]] = p.attn[k][r];
      for (std::size_t s = 0; s < R; ++s) q.rel[k][perm[r]].col(perm[s]) = p.rel[k][r].col(static_cast<Eigen::Index>(s));
    }
  }
  const std::vector<std::size_t> budgets = {3, 2};
  for (NodeId v = 0; v < 15; ++v) {
    Rng rng(v);
    const auto tree = build_k_level_sample(g, v, budgets, rng);
    const auto tree_p = permute_tree(tree, perm);
    const TreePass a(p, g, tree);
    const TreePass b(q, gp, tree_p);
    for (std::size_t r = 0; r < R; ++r) {
      EXPECT_LT((a.z_columns().col(static_cast<Eigen::Index>(r)) - b.z_columns().col(perm[r])).cwiseAbs().maxCoeff(),
                1e-12);
      for (std::size_t s = 0; s < R; ++s) {
        EXPECT_NEAR(a.root_attention(2)(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(s)),
                    b.root_attention(2)(perm[r], perm[s]), 1e-12);
      }
    }
  }
}

TEST(Forward, AttentionChangesMultiRelationOutput) {
  HandCase h;
  const TreePass with(h.p, h.g, h.tree, true);
  const TreePass without(h.p, h.g, h.tree, false);
  EXPECT_GT((with.z_columns() - without.z_columns()).cwiseAbs().maxCoeff(), 1e-3);
  const std::vector<SampleTree> trees = {h.tree};
  const auto fa = forward(h.p, h.g, trees);
  const auto fn = forward_no_attention(h.p, h.g, trees);
  EXPECT_EQ(fa.z[0], with.embedding());
  EXPECT_EQ(fn.z[0], without.embedding());
  ASSERT_EQ(fa.attention[0].size(), 1u);
  EXPECT_TRUE(fn.attention[0].empty());
}

TEST(Forward, NonFiniteValuesThrow) {
  HandCase h;
  h.p.bias[0][1](0, 0) = std::numeric_limits<double>::infinity();
  EXPECT_THROW(TreePass(h.p, h.g, h.tree), NumericError);
  HandCase n;
  n.p.projection[0](0, 2) = std::nan("");
  try {
    TreePass pass(n.p, n.g, n.tree);
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("level 1"), std::string::npos) << e.what();
  }
}

TEST(Forward, TreeShapeMismatchThrows) {
  HandCase h;
  const auto p2 = ModelParameters::zeros(shape_for(h.g, 2, 2, 2));
  EXPECT_THROW(TreePass(p2, h.g, h.tree), InvalidArgument);
}

TEST(Parameters, InitializationIsSeededAndBounded) {
  RandomGraphSpec s;
  const auto g = random_hetero_graph(s);
  const auto shape = shape_for(g, 8, 4, 2);
  const auto a = ModelParameters::initialize(shape, 3);
  EXPECT_TRUE(a == ModelParameters::initialize(shape, 3));
  EXPECT_FALSE(a == ModelParameters::initialize(shape, 4));
  for (const auto& level : a.bias) {
    for (const auto& b : level) EXPECT_TRUE(b.isZero(0.0));
  }
  const double limit = std::sqrt(6.0 / (8 + 8));
  EXPECT_LE(a.self[0][0].cwiseAbs().maxCoeff(), limit);
  EXPECT_TRUE(a.all_finite());

  std::size_t expected = 0;
  for (auto in : shape.input_dims) expected += 8 * in;
  expected += 2 * shape.relations * (8 * 8 * 2 + 8 + 8 * 4 + 4 * shape.relations);
  expected += 8 * g.num_nodes();
  EXPECT_EQ(a.parameter_count(), expected);
  EXPECT_EQ(a.tensors().size(), a.tensor_names().size());
  EXPECT_EQ(a.tensor_names().back(), "context");
}

TEST(Parameters, PerRelationContextHasOneColumnPerPair) {
  const auto g = erdos_renyi_multiplex(10, 3, 0.2, 1);
  TrainConfig c;
  c.dim = 4;
  c.per_relation_context = true;
  const auto shape = ModelShape::from(g, c);
  const auto p = ModelParameters::zeros(shape);
  EXPECT_EQ(p.context.cols(), 30);
  EXPECT_EQ(shape.context_index(4, 2), 14u);
  c.per_relation_context = false;
  EXPECT_EQ(ModelShape::from(g, c).context_index(4, 2), 4u);
}

TEST(Parameters, ZeroRelationsOrLevelsThrow) {
  ModelShape s;
  s.dim = 2;
  s.attention_dim = 2;
  s.levels = 1;
  EXPECT_THROW(ModelParameters::zeros(s), InvalidArgument);
  s.relations = 1;
  s.levels = 0;
  EXPECT_THROW(ModelParameters::zeros(s), InvalidArgument);
}

TEST(Embeddings, ThreadCountAndSubsetDoNotChangeValues) {
  RandomGraphSpec s;
  s.nodes = 40;
  const auto g = random_hetero_graph(s);
  const auto p = ModelParameters::initialize(shape_for(g, 6, 3, 2), 8);
  EmbedOptions o;
  o.budgets = {4, 3};
  o.seed = 21;
  const auto one = compute_embeddings(p, g, o);
  o.threads = 3;
  const auto three = compute_embeddings(p, g, o);
  EXPECT_EQ(one.values, three.values);
  const std::vector<NodeId> subset = {5, 17, 30};
  const auto some = compute_embeddings(p, g, o, subset);
  for (NodeId v : subset) {
    EXPECT_TRUE(some.has(v));
    EXPECT_EQ(some.row(v), one.row(v));
  }
  EXPECT_FALSE(some.has(6));
  for (NodeId v = 0; v < 40; ++v) {
    Rng rng = embedding_tree_rng(21, v);
    const auto tree = build_k_level_sample(g, v, o.budgets, rng);
    EXPECT_EQ(TreePass(p, g, tree).embedding(), one.row(v));
  }
  o.budgets = {4};
  EXPECT_THROW(compute_embeddings(p, g, o), InvalidArgument);
}

TEST(Embeddings, TsvHasOneRowPerNodeAndRelation) {
  const auto g = erdos_renyi_multiplex(6, 2, 0.5, 1);
  const auto p = ModelParameters::initialize(shape_for(g, 3, 2, 1), 1);
  EmbedOptions o;
  o.budgets = {2};
  const auto e = compute_embeddings(p, g, o);
  testing::TempDir dir;
  write_embeddings_tsv(e, g, dir / "e.tsv");
  std::istringstream in(testing::read_text(dir / "e.tsv"));
  std::string line;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    std::istringstream fields(line);
    long long id = 0;
    int r = 0;
    fields >> id >> r;
    std::vector<double> values;
    for (double x; fields >> x;) values.push_back(x);
    ASSERT_EQ(values.size(), 3u);
    for (int i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(values[i], e.z(static_cast<NodeId>(id), r)(i));
    ++rows;
  }
  EXPECT_EQ(rows, 12u);
}

TEST(Loss, ZeroEmbeddingGivesLogTwoPerTerm) {
  const VectorXd z = VectorXd::Zero(4);
  const auto res = nce_loss(z, VectorXd::Random(4), MatrixXd::Random(4, 5));
  EXPECT_NEAR(res.loss, 6.0 * std::log(2.0), 1e-14);
}

TEST(Loss, VanishesForSeparatedPairs) {
  VectorXd z(2);
  z << 10.0, 0.0;
  VectorXd c(2);
  c << 10.0, 0.0;
  MatrixXd neg(2, 2);
  neg << -10.0, -10.0, 1.0, 2.0;
  const auto res = nce_loss(z, c, neg);
  EXPECT_LT(res.loss, 1e-40);
  EXPECT_GE(res.loss, 0.0);
  const auto far = nce_loss(1e3 * z, c, neg);
  EXPECT_TRUE(std::isfinite(far.loss));
  const auto wrong = nce_loss(-1e3 * z, c, neg);
  // Every term is -log s(-1e5), which tends to 1e5.
  EXPECT_NEAR(wrong.loss, 3e5, 1e-6);
}

TEST(Loss, GradientsMatchFiniteDifferences) {
  Rng rng(4);
  std::normal_distribution<double> gauss;
  for (int trial = 0; trial < 10; ++trial) {
    VectorXd z(5), c(5);
    MatrixXd neg(5, 3);
    for (int i = 0; i < 5; ++i) {
      z(i) = gauss(rng);
      c(i) = gauss(rng);
      for (int j = 0; j < 3; ++j) neg(i, j) = gauss(rng);
    }
    const auto res = nce_loss(z, c, neg);
    const double h = 1e-6;
    auto check = [&](double& x, double analytic) {
      const double keep = x;
      x = keep + h;
      const double up = nce_loss(z, c, neg).loss;
      x = keep - h;
      const double down = nce_loss(z, c, neg).loss;
      x = keep;
      EXPECT_NEAR(analytic, (up - down) / (2 * h), 1e-7);
    };
    for (int i = 0; i < 5; ++i) {
      check(z(i), res.dz(i));
      check(c(i), res.dcontext(i));
      for (int j = 0; j < 3; ++j) check(neg(i, j), res.dnegatives(i, j));
    }
  }
}

TEST(Loss, StableLogSigmoid) {
  EXPECT_DOUBLE_EQ(log_sigmoid(0.0), -std::log(2.0));
  EXPECT_DOUBLE_EQ(log_sigmoid(-800.0), -800.0);
  EXPECT_EQ(log_sigmoid(800.0), -0.0);
  EXPECT_DOUBLE_EQ(sigmoid(0.0), 0.5);
  EXPECT_EQ(sigmoid(-800.0), 0.0);
  EXPECT_EQ(sigmoid(800.0), 1.0);
  EXPECT_THROW(nce_loss(VectorXd::Zero(2), VectorXd::Zero(3), MatrixXd()), InvalidArgument);
}

TEST(Adam, StepsMatchHandComputation) {
  const auto g = make_layered_graph(1, {{}});
  auto shape = shape_for(g, 1, 1, 1);
  auto p = ModelParameters::zeros(shape);
  p.context(0, 0) = 1.0;
  auto grad = ModelParameters::zeros(shape);
  Adam adam(p, AdamOptions{});
  EXPECT_EQ(adam.options().learning_rate, 0.001);
  const double expected[] = {0.99900000002, 0.9987336629870784, 0.9980630153452915};
  const double grads[] = {0.5, -0.25, 2.0};
  for (int t = 0; t < 3; ++t) {
    grad.context(0, 0) = grads[t];
    adam.step(p, grad);
    EXPECT_NEAR(p.context(0, 0), expected[t], 1e-15);
  }
  EXPECT_EQ(adam.steps(), 3u);
  // Zero gradients leave untouched entries at zero.
  EXPECT_EQ(p.self[0][0](0, 0), 0.0);
}

TEST(Adam, TensorMismatchThrows) {
  const auto g = erdos_renyi_multiplex(4, 2, 0.5, 1);
  auto p = ModelParameters::zeros(shape_for(g, 2, 2, 1));
  const auto other = ModelParameters::zeros(shape_for(g, 2, 2, 2));
  Adam adam(p, AdamOptions{});
  EXPECT_THROW(adam.step(p, other), InvalidArgument);
}

TEST(Checkpoint, RoundTripIsBitExact) {
  RandomGraphSpec s;
  const auto g = random_hetero_graph(s);
  TrainConfig c;
  c.dim = 6;
  c.attention_dim = 3;
  c.seed = 99;
  c.noise = NoiseKind::kLogUniformByDegree;
  c.activation = Activation::kRelu;
  c.per_relation_context = true;
  const auto p = ModelParameters::initialize(ModelShape::from(g, c), 7);
  testing::TempDir dir;
  save_checkpoint(dir / "m.bin", p, c, g.schema());
  const auto back = load_checkpoint(dir / "m.bin");
  EXPECT_TRUE(back.params == p);
  EXPECT_EQ(back.config, c);
  EXPECT_EQ(back.node_types, g.schema().node_types);
  EXPECT_NO_THROW(check_compatible(back, g));
}

TEST(Checkpoint, IncompatibleGraphsAreRejected) {
  const auto g = erdos_renyi_multiplex(10, 2, 0.3, 1);
  TrainConfig c;
  c.dim = 3;
  const auto p = ModelParameters::initialize(ModelShape::from(g, c), 1);
  testing::TempDir dir;
  save_checkpoint(dir / "m.bin", p, c, g.schema());
  const auto back = load_checkpoint(dir / "m.bin");
  EXPECT_THROW(check_compatible(back, erdos_renyi_multiplex(10, 3, 0.3, 1)), InvalidArgument);
  EXPECT_THROW(check_compatible(back, erdos_renyi_multiplex(11, 2, 0.3, 1)), InvalidArgument);
  RandomGraphSpec s;
  EXPECT_THROW(check_compatible(back, random_hetero_graph(s)), InvalidArgument);
}

TEST(Checkpoint, CorruptFilesAreRejected) {
  testing::TempDir dir;
  testing::write_text(dir / "bad.bin", "NOPE0000");
  EXPECT_THROW(load_checkpoint(dir / "bad.bin"), ParseError);
  const auto g = erdos_renyi_multiplex(5, 1, 0.5, 1);
  TrainConfig c;
  c.dim = 2;
  save_checkpoint(dir / "m.bin", ModelParameters::zeros(ModelShape::from(g, c)), c, g.schema());
  auto bytes = testing::read_text(dir / "m.bin");
  testing::write_text(dir / "short.bin", bytes.substr(0, bytes.size() - 5));
  EXPECT_THROW(load_checkpoint(dir / "short.bin"), ParseError);
  EXPECT_THROW(load_checkpoint(dir / "missing.bin"), Error);
}

TEST(TrainConfig, ReferenceDefaults) {
  const TrainConfig c;
  EXPECT_EQ(c.dim, 200u);
  EXPECT_EQ(c.attention_dim, 20u);
  EXPECT_EQ(c.levels, 2u);
  EXPECT_EQ(c.walks_per_node, 20u);
  EXPECT_EQ(c.walk_length, 10u);
  EXPECT_EQ(c.window, 5u);
  EXPECT_EQ(c.negatives, 5u);
  EXPECT_EQ(c.neighbor_budget, 10u);
  EXPECT_EQ(c.learning_rate, 0.001);
  EXPECT_EQ(c.patience, 3u);
  EXPECT_EQ(c.activation, Activation::kElu);
  EXPECT_EQ(c.budgets(), (std::vector<std::size_t>{10, 10}));
  EXPECT_NO_THROW(c.validate());
}

TEST(TrainConfig, KeyValueFileRoundTrip) {
  TrainConfig c;
  c.dim = 17;
  c.learning_rate = 0.000123456789012345;
  c.seed = 18446744073709551615ull;
  c.noise = NoiseKind::kLogUniformByDegree;
  c.attention = false;
  c.activation = Activation::kRelu;
  testing::TempDir dir;
  const auto path = (dir / "c.txt").string();
  write_key_values(path, c.to_key_values());
  TrainConfig back;
  back.apply(read_key_values(path));
  EXPECT_EQ(back, c);
  for (const auto& [k, v] : c.to_key_values()) EXPECT_TRUE(TrainConfig::is_key(k)) << k;
  EXPECT_FALSE(TrainConfig::is_key("graph"));
}

TEST(TrainConfig, CommentsAndUnknownKeys) {
  testing::TempDir dir;
  testing::write_text(dir / "c.txt", "# comment\ndim = 12   # trailing\n\nwindow=3\n");
  TrainConfig c;
  c.apply(read_key_values((dir / "c.txt").string()));
  EXPECT_EQ(c.dim, 12u);
  EXPECT_EQ(c.window, 3u);
  EXPECT_THROW(c.apply({{"dimm", "3"}}), InvalidArgument);
  EXPECT_THROW(c.apply({{"dim", "abc"}}), InvalidArgument);
  EXPECT_THROW(c.apply({{"activation", "sigmoid"}}), InvalidArgument);
}

TEST(TrainConfig, ValidationNamesTheField) {
  const std::vector<std::pair<std::function<void(TrainConfig&)>, std::string>> cases = {
      {[](TrainConfig& c) { c.dim = 0; }, "dim"},
      {[](TrainConfig& c) { c.levels = 0; }, "levels"},
      {[](TrainConfig& c) { c.window = 0; }, "window"},
      {[](TrainConfig& c) { c.negatives = 0; }, "negatives"},
      {[](TrainConfig& c) { c.walk_length = 1; }, "walk_length"},
      {[](TrainConfig& c) { c.learning_rate = -1.0; }, "learning_rate"},
      {[](TrainConfig& c) { c.batch_centers = 0; }, "batch_centers"},
  };
  for (const auto& [mutate, field] : cases) {
    TrainConfig c;
    mutate(c);
    try {
      c.validate();
      ADD_FAILURE() << field << " accepted";
    } catch (const InvalidArgument& e) {
      EXPECT_NE(std::string(e.what()).find(field), std::string::npos) << e.what();
    }
  }
}

}  // namespace
}  // namespace mxembed
