#include "mxembed/model.hpp"

#include <cmath>
#include <string>

#include "mxembed/error.hpp"
#include "mxembed/parallel.hpp"
#include "mxembed/rng.hpp"
#include "text_util.hpp"

namespace mxembed {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr std::uint64_t kEmbedStream = 0x656d6265;

void softmax_columns(MatrixXd& m) {
  for (Index c = 0; c < m.cols(); ++c) {
    auto col = m.col(c);
    col.array() -= col.maxCoeff();
    col = col.array().exp().matrix();
    col /= col.sum();
  }
}

void check_finite(const MatrixXd& m, std::size_t k, RelationId r, const char* what) {
  if (!m.allFinite()) {
    throw NumericError(std::string("non-finite ") + what + " at level " + std::to_string(k) +
                       ", relation " + std::to_string(r));
  }
}

void fill_glorot(MatrixXd& m, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(m.rows() + m.cols()));
  std::uniform_real_distribution<double> u(-limit, limit);
  for (Index j = 0; j < m.cols(); ++j) {
    for (Index i = 0; i < m.rows(); ++i) m(i, j) = u(rng);
  }
}

}  // namespace

ModelShape ModelShape::from(const MultiplexGraph& g, const TrainConfig& config) {
  ModelShape s;
  s.dim = config.dim;
  s.attention_dim = config.attention_dim;
  s.levels = config.levels;
  s.relations = g.num_relations();
  for (TypeId t = 0; t < g.num_node_types(); ++t) s.input_dims.push_back(g.input_dim(t));
  s.num_nodes = g.num_nodes();
  s.per_relation_context = config.per_relation_context;
  s.activation = config.activation;
  return s;
}

ModelParameters ModelParameters::zeros(const ModelShape& shape) {
  if (shape.relations == 0) throw InvalidArgument("model needs at least one relation");
  if (shape.levels == 0) throw InvalidArgument("model needs K >= 1");
  ModelParameters p;
  p.shape = shape;
  const auto d = static_cast<Index>(shape.dim);
  const auto da = static_cast<Index>(shape.attention_dim);
  const auto R = static_cast<Index>(shape.relations);
  for (auto in : shape.input_dims) p.projection.push_back(MatrixXd::Zero(d, static_cast<Index>(in)));
  auto per_level = [&](Index rows, Index cols) {
    return std::vector<std::vector<MatrixXd>>(shape.levels,
                                              std::vector<MatrixXd>(shape.relations, MatrixXd::Zero(rows, cols)));
  };
  p.self = per_level(d, d);
  p.neighbor = per_level(d, d);
  p.bias = per_level(d, 1);
  p.attn = per_level(d, da);
  p.rel = per_level(da, R);
  const auto rows = shape.per_relation_context ? shape.num_nodes * shape.relations : shape.num_nodes;
  p.context = MatrixXd::Zero(d, static_cast<Index>(rows));
  return p;
}

ModelParameters ModelParameters::initialize(const ModelShape& shape, std::uint64_t seed) {
  ModelParameters p = zeros(shape);
  Rng rng(derive_seed(seed, 0x696e6974));
  for (auto& m : p.projection) fill_glorot(m, rng);
  for (std::size_t k = 0; k < shape.levels; ++k) {
    for (std::size_t r = 0; r < shape.relations; ++r) {
      fill_glorot(p.self[k][r], rng);
      fill_glorot(p.neighbor[k][r], rng);
      fill_glorot(p.attn[k][r], rng);
      fill_glorot(p.rel[k][r], rng);
    }
  }
  std::normal_distribution<double> normal(0.0, std::sqrt(1.0 / static_cast<double>(shape.dim)));
  for (Index j = 0; j < p.context.cols(); ++j) {
    for (Index i = 0; i < p.context.rows(); ++i) p.context(i, j) = normal(rng);
  }
  return p;
}

std::vector<MatrixXd*> ModelParameters::tensors() {
  std::vector<MatrixXd*> out;
  for (auto& m : projection) out.push_back(&m);
  for (std::size_t k = 0; k < self.size(); ++k) {
    for (std::size_t r = 0; r < self[k].size(); ++r) {
      out.push_back(&self[k][r]);
      out.push_back(&neighbor[k][r]);
      out.push_back(&bias[k][r]);
      out.push_back(&attn[k][r]);
      out.push_back(&rel[k][r]);
    }
  }
  out.push_back(&context);
  return out;
}

std::vector<const MatrixXd*> ModelParameters::tensors() const {
  auto mut = const_cast<ModelParameters*>(this)->tensors();
  return {mut.begin(), mut.end()};
}

std::vector<std::string> ModelParameters::tensor_names() const {
  std::vector<std::string> out;
  for (std::size_t t = 0; t < projection.size(); ++t) out.push_back("projection[" + std::to_string(t) + "]");
  for (std::size_t k = 0; k < self.size(); ++k) {
    for (std::size_t r = 0; r < self[k].size(); ++r) {
      const auto suffix = "[" + std::to_string(k + 1) + "][" + std::to_string(r) + "]";
      for (const char* name : {"self", "neighbor", "bias", "attn", "rel"}) out.push_back(name + suffix);
    }
  }
  out.emplace_back("context");
  return out;
}

std::size_t ModelParameters::parameter_count() const {
  std::size_t n = 0;
  for (const auto* m : tensors()) n += static_cast<std::size_t>(m->size());
  return n;
}

bool ModelParameters::all_finite() const {
  for (const auto* m : tensors()) {
    if (!m->allFinite()) return false;
  }
  return true;
}

void ModelParameters::set_zero() {
  for (auto* m : tensors()) m->setZero();
}

bool ModelParameters::operator==(const ModelParameters& o) const {
  if (!(shape == o.shape)) return false;
  auto a = tensors();
  auto b = o.tensors();
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i]->rows() != b[i]->rows() || a[i]->cols() != b[i]->cols() || *a[i] != *b[i]) return false;
  }
  return true;
}

double activate(Activation a, double x) {
  if (a == Activation::kRelu) return x > 0.0 ? x : 0.0;
  return x > 0.0 ? x : std::expm1(x);
}

double activate_derivative(Activation a, double x) {
  if (a == Activation::kRelu) return x > 0.0 ? 1.0 : 0.0;
  return x > 0.0 ? 1.0 : std::exp(x);
}

VectorXd neighbor_message(const ModelParameters& p, std::size_t k, RelationId r,
                          std::span<const VectorXd> neighbor_reps) {
  VectorXd out = VectorXd::Zero(static_cast<Index>(p.shape.dim));
  if (neighbor_reps.empty()) return out;
  for (const auto& h : neighbor_reps) out += p.neighbor.at(k - 1).at(r) * h;
  return out / static_cast<double>(neighbor_reps.size());
}

VectorXd relation_conv(const ModelParameters& p, std::size_t k, RelationId r, const VectorXd& self_rep,
                       const VectorXd& message) {
  VectorXd pre = p.self.at(k - 1).at(r) * self_rep + message + p.bias.at(k - 1).at(r).col(0);
  const auto act = p.shape.activation;
  return pre.unaryExpr([act](double x) { return activate(act, x); });
}

AttentionResult relational_attention(const ModelParameters& p, std::size_t k, const MatrixXd& stacked) {
  const auto R = static_cast<Index>(p.shape.relations);
  if (stacked.rows() != R) throw InvalidArgument("stacked input must have one row per relation");
  AttentionResult out;
  out.attention.resize(R, R);
  out.attended.resize(R, stacked.cols());
  for (Index r = 0; r < R; ++r) {
    const VectorXd t = (p.attn.at(k - 1)[static_cast<std::size_t>(r)].transpose() * stacked.row(r).transpose())
                           .array()
                           .tanh()
                           .matrix();
    MatrixXd logits = p.rel[k - 1][static_cast<std::size_t>(r)].transpose() * t;
    softmax_columns(logits);
    out.attention.row(r) = logits.col(0).transpose();
    out.attended.row(r) = logits.col(0).transpose() * stacked;
  }
  return out;
}

TreePass::TreePass(const ModelParameters& p, const MultiplexGraph& g, const SampleTree& tree, bool attention)
    : p_(&p), g_(&g), tree_(&tree), attention_(attention), levels_(tree.levels()), relations_(tree.relations) {
  const std::size_t K = levels_;
  const std::size_t R = relations_;
  if (K != p.shape.levels) {
    throw InvalidArgument("sample tree has " + std::to_string(K) + " levels, model has " +
                          std::to_string(p.shape.levels));
  }
  if (R != p.shape.relations) throw InvalidArgument("sample tree and model disagree on relation count");
  const auto d = static_cast<Index>(p.shape.dim);
  const auto act = p.shape.activation;

  for (auto* cache : {&h_, &ht_, &pre_, &mean_, &t_, &a_}) {
    cache->assign(K + 1, {});
    for (std::size_t j = 0; j <= K; ++j) (*cache)[j].assign(K - j + 1, {});
  }

  for (std::size_t j = 0; j <= K; ++j) {
    const auto& nodes = tree.nodes[j];
    MatrixXd h0(d, static_cast<Index>(nodes.size()));
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const NodeId v = nodes[i];
      const TypeId t = g.node_type(v);
      const auto local = static_cast<Index>(g.type_local_index(v));
      const auto& attrs = g.attributes(t);
      if (attrs.identity) {
        h0.col(static_cast<Index>(i)) = p.projection[t].col(local);
      } else {
        h0.col(static_cast<Index>(i)) = p.projection[t] * attrs.values.col(local);
      }
    }
    h_[j][0] = {std::move(h0)};
  }

  for (std::size_t k = 1; k <= K; ++k) {
    for (std::size_t j = 0; j + k <= K; ++j) {
      const auto n = static_cast<Index>(tree.nodes[j].size());
      auto& pre = pre_[j][k];
      auto& mean = mean_[j][k];
      auto& ht = ht_[j][k];
      pre.resize(R);
      mean.resize(R);
      ht.resize(R);
      for (std::size_t r = 0; r < R; ++r) {
        const auto rel = static_cast<RelationId>(r);
        const MatrixXd& below = representation(j + 1, k - 1, rel);
        mean[r] = MatrixXd::Zero(d, n);
        for (Index i = 0; i < n; ++i) {
          const auto [c0, c1] = tree.child_range(j, static_cast<std::size_t>(i), rel);
          if (c0 == c1) continue;
          for (auto c = c0; c < c1; ++c) mean[r].col(i) += below.col(c);
          mean[r].col(i) /= static_cast<double>(c1 - c0);
        }
        pre[r] = p.self[k - 1][r] * representation(j, k - 1, rel) + p.neighbor[k - 1][r] * mean[r];
        pre[r].colwise() += p.bias[k - 1][r].col(0);
        check_finite(pre[r], k, rel, "pre-activation");
        ht[r] = pre[r].unaryExpr([act](double x) { return activate(act, x); });
      }
      auto& h = h_[j][k];
      h.resize(R);
      if (!attention_) {
        h = ht;
        continue;
      }
      auto& tt = t_[j][k];
      auto& aa = a_[j][k];
      tt.resize(R);
      aa.resize(R);
      for (std::size_t r = 0; r < R; ++r) {
        tt[r] = (p.attn[k - 1][r].transpose() * ht[r]).array().tanh().matrix();
        aa[r] = p.rel[k - 1][r].transpose() * tt[r];
        softmax_columns(aa[r]);
        h[r] = (ht[0].array().rowwise() * aa[r].row(0).array()).matrix();
        for (std::size_t s = 1; s < R; ++s) h[r].array() += ht[s].array().rowwise() * aa[r].row(static_cast<Index>(s)).array();
        check_finite(h[r], k, static_cast<RelationId>(r), "attended representation");
      }
    }
  }

  z_.resize(d, static_cast<Index>(R));
  for (std::size_t r = 0; r < R; ++r) z_.col(static_cast<Index>(r)) = h_[0][K][r].col(0);
}

MatrixXd TreePass::root_attention(std::size_t k) const {
  if (!attention_) return {};
  if (k == 0 || k > levels_) throw InvalidArgument("attention level out of range");
  const auto R = static_cast<Index>(relations_);
  MatrixXd out(R, R);
  for (Index r = 0; r < R; ++r) out.row(r) = a_[0][k][static_cast<std::size_t>(r)].col(0).transpose();
  return out;
}

void TreePass::backward(const MatrixXd& dz, ModelParameters& grad) const {
  const std::size_t K = levels_;
  const std::size_t R = relations_;
  const auto& p = *p_;
  const auto& tree = *tree_;
  const auto d = static_cast<Index>(p.shape.dim);
  const auto act = p.shape.activation;
  if (dz.rows() != d || dz.cols() != static_cast<Index>(R)) throw InvalidArgument("dz must be d x R");

  // g[j][k][r] mirrors h_; level 0 is the single shared matrix.
  std::vector<std::vector<std::vector<MatrixXd>>> g(K + 1);
  for (std::size_t j = 0; j <= K; ++j) {
    const auto n = static_cast<Index>(tree.nodes[j].size());
    g[j].assign(K - j + 1, {});
    g[j][0] = {MatrixXd::Zero(d, n)};
    for (std::size_t k = 1; k + j <= K; ++k) g[j][k].assign(R, MatrixXd::Zero(d, n));
  }
  for (std::size_t r = 0; r < R; ++r) g[0][K][r] = dz.col(static_cast<Index>(r));

  auto grad_at = [&](std::size_t j, std::size_t k, std::size_t r) -> MatrixXd& {
    return k == 0 ? g[j][0][0] : g[j][k][r];
  };

  for (std::size_t k = K; k >= 1; --k) {
    for (std::size_t j = 0; j + k <= K; ++j) {
      const auto n = static_cast<Index>(tree.nodes[j].size());
      const auto& ht = ht_[j][k];
      std::vector<MatrixXd> dht;
      if (!attention_) {
        dht = g[j][k];
      } else {
        dht.assign(R, MatrixXd::Zero(d, n));
        const auto& tt = t_[j][k];
        const auto& aa = a_[j][k];
        for (std::size_t r = 0; r < R; ++r) {
          const MatrixXd& gr = g[j][k][r];
          MatrixXd da(static_cast<Index>(R), n);
          for (std::size_t s = 0; s < R; ++s) {
            const auto si = static_cast<Index>(s);
            dht[s].array() += gr.array().rowwise() * aa[r].row(si).array();
            da.row(si) = (ht[s].array() * gr.array()).colwise().sum().matrix();
          }
          const Eigen::RowVectorXd dot = (aa[r].array() * da.array()).colwise().sum().matrix();
          const MatrixXd dlogits = (aa[r].array() * (da.rowwise() - dot).array()).matrix();
          grad.rel[k - 1][r] += tt[r] * dlogits.transpose();
          const MatrixXd ds = ((p.rel[k - 1][r] * dlogits).array() * (1.0 - tt[r].array().square())).matrix();
          grad.attn[k - 1][r] += ht[r] * ds.transpose();
          dht[r] += p.attn[k - 1][r] * ds;
        }
      }
      for (std::size_t r = 0; r < R; ++r) {
        const auto rel = static_cast<RelationId>(r);
        const MatrixXd dpre =
            (dht[r].array() * pre_[j][k][r].unaryExpr([act](double x) { return activate_derivative(act, x); }).array())
                .matrix();
        grad.bias[k - 1][r].col(0) += dpre.rowwise().sum();
        grad.self[k - 1][r] += dpre * representation(j, k - 1, rel).transpose();
        grad.neighbor[k - 1][r] += dpre * mean_[j][k][r].transpose();
        grad_at(j, k - 1, r) += p.self[k - 1][r].transpose() * dpre;
        const MatrixXd to_children = p.neighbor[k - 1][r].transpose() * dpre;
        MatrixXd& below = grad_at(j + 1, k - 1, r);
        for (Index i = 0; i < n; ++i) {
          const auto [c0, c1] = tree.child_range(j, static_cast<std::size_t>(i), rel);
          if (c0 == c1) continue;
          const double inv = 1.0 / static_cast<double>(c1 - c0);
          for (auto c = c0; c < c1; ++c) below.col(c) += inv * to_children.col(i);
        }
      }
    }
  }

  for (std::size_t j = 0; j <= K; ++j) {
    const auto& nodes = tree.nodes[j];
    const MatrixXd& g0 = g[j][0][0];
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const NodeId v = nodes[i];
      const TypeId t = g_->node_type(v);
      const auto local = static_cast<Index>(g_->type_local_index(v));
      const auto& attrs = g_->attributes(t);
      if (attrs.identity) {
        grad.projection[t].col(local) += g0.col(static_cast<Index>(i));
      } else {
        grad.projection[t] += g0.col(static_cast<Index>(i)) * attrs.values.col(local).transpose();
      }
    }
  }
}

namespace {

ForwardOutput run_forward(const ModelParameters& p, const MultiplexGraph& g, std::span<const SampleTree> trees,
                          bool attention) {
  ForwardOutput out;
  for (const auto& tree : trees) {
    TreePass pass(p, g, tree, attention);
    out.z.push_back(pass.embedding());
    std::vector<MatrixXd> levels;
    if (attention) {
      for (std::size_t k = 1; k <= tree.levels(); ++k) levels.push_back(pass.root_attention(k));
    }
    out.attention.push_back(std::move(levels));
  }
  return out;
}

}  // namespace

ForwardOutput forward(const ModelParameters& p, const MultiplexGraph& g, std::span<const SampleTree> trees) {
  return run_forward(p, g, trees, true);
}

ForwardOutput forward_no_attention(const ModelParameters& p, const MultiplexGraph& g,
                                   std::span<const SampleTree> trees) {
  return run_forward(p, g, trees, false);
}

MatrixXd EmbeddingSet::row(NodeId v) const {
  MatrixXd out(static_cast<Index>(relations), static_cast<Index>(dim));
  for (std::size_t r = 0; r < relations; ++r) {
    out.row(static_cast<Index>(r)) = z(v, static_cast<RelationId>(r)).transpose();
  }
  return out;
}

Rng embedding_tree_rng(std::uint64_t seed, NodeId v) { return Rng(derive_seed(seed, kEmbedStream, v)); }

EmbeddingSet compute_embeddings(const ModelParameters& p, const MultiplexGraph& g, const EmbedOptions& options,
                                std::span<const NodeId> nodes) {
  if (options.budgets.size() != p.shape.levels) {
    throw InvalidArgument("embedding needs one neighbor budget per level");
  }
  std::vector<NodeId> all;
  if (nodes.empty()) {
    all.resize(g.num_nodes());
    for (NodeId v = 0; v < g.num_nodes(); ++v) all[v] = v;
    nodes = all;
  }
  EmbeddingSet e;
  e.relations = g.num_relations();
  e.dim = p.shape.dim;
  e.values = MatrixXd::Zero(static_cast<Index>(e.dim), static_cast<Index>(g.num_nodes() * e.relations));
  e.present.assign(g.num_nodes(), false);
  for (NodeId v : nodes) {
    if (v >= g.num_nodes()) throw InvalidArgument("node " + std::to_string(v) + " out of range");
    e.present[v] = true;
  }
  parallel_for(nodes.size(), options.threads, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const NodeId v = nodes[i];
      Rng rng = embedding_tree_rng(options.seed, v);
      const SampleTree tree = build_k_level_sample(g, v, options.budgets, rng);
      const TreePass pass(p, g, tree, options.attention);
      e.values.middleCols(static_cast<Index>(v) * static_cast<Index>(e.relations), static_cast<Index>(e.relations)) =
          pass.z_columns();
    }
  });
  return e;
}

void write_embeddings_tsv(const EmbeddingSet& e, const MultiplexGraph& g, const std::filesystem::path& path) {
  auto out = detail::open_output(path.string());
  for (NodeId v = 0; v < e.present.size(); ++v) {
    if (!e.present[v]) continue;
    for (std::size_t r = 0; r < e.relations; ++r) {
      out << g.external_id(v) << '\t' << r;
      const auto z = e.z(v, static_cast<RelationId>(r));
      for (Index i = 0; i < z.size(); ++i) out << '\t' << detail::format_double(z(i));
      out << '\n';
    }
  }
  if (!out) throw Error("failed writing " + path.string());
}

}  // namespace mxembed
