#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mxembed/graph.hpp"
#include "mxembed/sampling.hpp"
#include "mxembed/train_config.hpp"

namespace mxembed {

struct ModelShape {
  std::size_t dim = 0;
  std::size_t attention_dim = 0;
  std::size_t levels = 0;
  std::size_t relations = 0;
  std::vector<std::size_t> input_dims;  // per node type
  std::size_t num_nodes = 0;
  bool per_relation_context = false;
  Activation activation = Activation::kElu;

  static ModelShape from(const MultiplexGraph& g, const TrainConfig& config);
  std::size_t context_index(NodeId u, RelationId r) const {
    return per_relation_context ? static_cast<std::size_t>(u) * relations + r : u;
  }
  bool operator==(const ModelShape&) const = default;
};

/// All trainable tensors. Per-level tensors are indexed [k - 1][r].
struct ModelParameters {
  ModelShape shape;
  std::vector<Eigen::MatrixXd> projection;             // per node type, d x input_dim
  std::vector<std::vector<Eigen::MatrixXd>> self;      // d x d
  std::vector<std::vector<Eigen::MatrixXd>> neighbor;  // d x d
  std::vector<std::vector<Eigen::MatrixXd>> bias;      // d x 1
  std::vector<std::vector<Eigen::MatrixXd>> attn;      // d x d_a
  std::vector<std::vector<Eigen::MatrixXd>> rel;       // d_a x R
  Eigen::MatrixXd context;                             // d x (N or N*R)

  /// Every tensor allocated and set to zero.
  static ModelParameters zeros(const ModelShape& shape);
  /// Glorot-uniform transforms, zero biases, N(0, 1/d) context vectors.
  static ModelParameters initialize(const ModelShape& shape, std::uint64_t seed);

  /// Flat list of every tensor in a fixed order, matching tensor_names().
  std::vector<Eigen::MatrixXd*> tensors();
  std::vector<const Eigen::MatrixXd*> tensors() const;
  std::vector<std::string> tensor_names() const;
  std::size_t parameter_count() const;
  bool all_finite() const;
  void set_zero();

  bool operator==(const ModelParameters& o) const;
};

/// Mean of W_n h over the sampled neighbors; the zero vector when empty.
Eigen::VectorXd neighbor_message(const ModelParameters& p, std::size_t k, RelationId r,
                                 std::span<const Eigen::VectorXd> neighbor_reps);

/// act(W_s self + message + b) for level k (1-based) and relation r.
Eigen::VectorXd relation_conv(const ModelParameters& p, std::size_t k, RelationId r,
                              const Eigen::VectorXd& self_rep, const Eigen::VectorXd& message);

struct AttentionResult {
  Eigen::MatrixXd attention;  // R x R, row r = weights used for output relation r
  Eigen::MatrixXd attended;   // R x d
};

/// Mixes the R relation-specific rows of `stacked` (R x d) into R outputs.
AttentionResult relational_attention(const ModelParameters& p, std::size_t k,
                                     const Eigen::MatrixXd& stacked);

double activate(Activation a, double x);
double activate_derivative(Activation a, double x);

/// Forward pass over one sample tree with every intermediate kept so the
/// gradient can be pulled back through it.
class TreePass {
 public:
  TreePass(const ModelParameters& p, const MultiplexGraph& g, const SampleTree& tree,
           bool attention = true);

  /// Root embeddings, column r = z_{root, r}.
  const Eigen::MatrixXd& z_columns() const { return z_; }
  /// R x d.
  Eigen::MatrixXd embedding() const { return z_columns().transpose(); }
  /// Root attention at level k (1-based), R x R. Empty without attention.
  Eigen::MatrixXd root_attention(std::size_t k) const;
  /// Level-0 representation of every node at the given depth, d x n.
  const Eigen::MatrixXd& level0(std::size_t depth) const { return h_[depth][0][0]; }
  /// Level-k representation of relation r at a depth, d x n.
  const Eigen::MatrixXd& representation(std::size_t depth, std::size_t k, RelationId r) const {
    return k == 0 ? h_[depth][0][0] : h_[depth][k][r];
  }

  /// Adds dLoss/dparams to `grad` given dLoss/dz (d x R, column per relation).
  void backward(const Eigen::MatrixXd& dz, ModelParameters& grad) const;

 private:
  const ModelParameters* p_;
  const MultiplexGraph* g_;
  const SampleTree* tree_;
  bool attention_;
  std::size_t levels_;
  std::size_t relations_;
  // [depth][level][relation]; level 0 is shared and stored once at [0].
  std::vector<std::vector<std::vector<Eigen::MatrixXd>>> h_, ht_, pre_, mean_, t_, a_;
  Eigen::MatrixXd z_;
};

/// Stacked |R| x d embeddings per tree, plus per-level root attention.
struct ForwardOutput {
  std::vector<Eigen::MatrixXd> z;
  std::vector<std::vector<Eigen::MatrixXd>> attention;  // [tree][k - 1], R x R
};

ForwardOutput forward(const ModelParameters& p, const MultiplexGraph& g,
                      std::span<const SampleTree> trees);
/// Same as forward but h^k = h~^k: relation-wise representations are never mixed.
ForwardOutput forward_no_attention(const ModelParameters& p, const MultiplexGraph& g,
                                   std::span<const SampleTree> trees);

/// Multi-embeddings of a set of nodes. Column v * R + r holds z_{v, r}.
struct EmbeddingSet {
  std::size_t relations = 0;
  std::size_t dim = 0;
  Eigen::MatrixXd values;
  std::vector<bool> present;

  auto z(NodeId v, RelationId r) const { return values.col(static_cast<Eigen::Index>(v) * relations + r); }
  Eigen::MatrixXd row(NodeId v) const;  // R x d
  bool has(NodeId v) const { return v < present.size() && present[v]; }
};

struct EmbedOptions {
  std::vector<std::size_t> budgets;
  std::uint64_t seed = 0;
  bool attention = true;
  std::size_t threads = 1;
};

/// Random stream behind node v's sample tree when embedding under `seed`.
Rng embedding_tree_rng(std::uint64_t seed, NodeId v);

/// Embeds `nodes` (all nodes when empty). Every node's tree uses its own
/// derived stream, so the output does not depend on the thread count.
EmbeddingSet compute_embeddings(const ModelParameters& p, const MultiplexGraph& g,
                                const EmbedOptions& options, std::span<const NodeId> nodes = {});

/// Rows "node_id relation_id v1 ... vd" for every present node.
void write_embeddings_tsv(const EmbeddingSet& e, const MultiplexGraph& g,
                          const std::filesystem::path& path);

}  // namespace mxembed
