#include "mxembed/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mxembed/adam.hpp"
#include "mxembed/error.hpp"
#include "mxembed/loss.hpp"
#include "text_util.hpp"

namespace mxembed {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;

constexpr std::uint64_t kShuffleStream = 0x73687566;
constexpr std::uint64_t kBatchStream = 0x62617463;
constexpr std::uint64_t kEmbedStream = 0x76616c69;
constexpr std::uint64_t kCheckStream = 0x63686563;

}  // namespace

ContextIndex::ContextIndex(const WalkCorpus& corpus, std::size_t num_nodes, std::size_t window)
    : corpus_(&corpus), window_(window), offsets_(num_nodes + 1, 0) {
  if (window == 0) throw InvalidArgument("context window must be at least 1");
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    for (NodeId v : corpus[i].nodes) {
      if (v >= num_nodes) throw InvalidArgument("corpus names node " + std::to_string(v) + " outside the graph");
      ++offsets_[v + 1];
    }
  }
  std::partial_sum(offsets_.begin(), offsets_.end(), offsets_.begin());
  walks_.resize(offsets_.back());
  positions_.resize(offsets_.back());
  std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto w = corpus[i];
    for (std::size_t p = 0; p < w.nodes.size(); ++p) {
      const auto slot = fill[w.nodes[p]]++;
      walks_[slot] = static_cast<std::uint32_t>(i);
      positions_[slot] = static_cast<std::uint16_t>(p);
    }
  }
  for (NodeId v = 0; v < num_nodes; ++v) {
    const auto c = count(v);
    if (c > 0) centers_.push_back(v);
    total_ += c;
  }
}

std::size_t ContextIndex::count(NodeId v) const {
  std::size_t n = 0;
  for_each(v, [&](RelationId, NodeId) { ++n; });
  return n;
}

std::vector<NoiseDistribution> build_noise_tables(const MultiplexGraph& g, NoiseKind kind,
                                                  const std::vector<bool>* exclude) {
  std::vector<NoiseDistribution> out(g.num_node_types());
  for (TypeId t = 0; t < g.num_node_types(); ++t) {
    bool any = false;
    for (NodeId v : g.nodes_of_type(t)) any = any || !exclude || !(*exclude)[v];
    if (any) out[t] = build_noise_distribution(g, t, kind, exclude);
  }
  return out;
}

TrainingBatch make_batch(const MultiplexGraph& g, const ContextIndex& contexts, std::span<const NodeId> centers,
                         const std::vector<NoiseDistribution>& noise, const TrainConfig& config, Rng& rng) {
  TrainingBatch b;
  b.negatives_per_item = config.negatives;
  const auto budgets = config.budgets();
  for (NodeId v : centers) {
    const auto ci = static_cast<std::uint32_t>(b.centers.size());
    b.centers.push_back(v);
    b.trees.push_back(build_k_level_sample(g, v, budgets, rng));
    contexts.for_each(v, [&](RelationId r, NodeId u) {
      b.items.push_back({ci, r, u});
      const auto& table = noise.at(g.node_type(u));
      if (table.nodes.empty()) {
        throw InvalidArgument("node type '" + g.schema().node_types[g.node_type(u)] + "' has no negative candidates");
      }
      for (std::size_t i = 0; i < config.negatives; ++i) b.negatives.push_back(table.sample(rng));
    });
  }
  return b;
}

double loss_and_gradients(const ModelParameters& p, const MultiplexGraph& g, const TrainingBatch& batch,
                          bool attention, ModelParameters* grad) {
  const std::size_t total = batch.items.size();
  if (total == 0) return 0.0;
  if (batch.negatives.size() != total * batch.negatives_per_item) {
    throw InvalidArgument("batch negatives do not match its items");
  }
  const double scale = 1.0 / static_cast<double>(total);
  const auto& shape = p.shape;
  const auto d = static_cast<Index>(shape.dim);
  const std::size_t L = batch.negatives_per_item;
  double loss = 0.0;
  MatrixXd negs(d, static_cast<Index>(L));
  std::size_t item = 0;
  for (std::size_t ci = 0; ci < batch.centers.size(); ++ci) {
    const std::size_t first = item;
    while (item < total && batch.items[item].center == ci) ++item;
    if (item == first) continue;
    const TreePass pass(p, g, batch.trees[ci], attention);
    const MatrixXd& z = pass.z_columns();
    MatrixXd dz = MatrixXd::Zero(d, z.cols());
    for (std::size_t i = first; i < item; ++i) {
      const auto& it = batch.items[i];
      const auto r = it.relation;
      const NodeId* neg = batch.negatives.data() + i * L;
      for (std::size_t l = 0; l < L; ++l) {
        negs.col(static_cast<Index>(l)) = p.context.col(static_cast<Index>(shape.context_index(neg[l], r)));
      }
      const auto ctx = static_cast<Index>(shape.context_index(it.context, r));
      const NceResult res = nce_loss(z.col(r), p.context.col(ctx), negs);
      loss += res.loss;
      if (grad == nullptr) continue;
      dz.col(r) += scale * res.dz;
      grad->context.col(ctx) += scale * res.dcontext;
      for (std::size_t l = 0; l < L; ++l) {
        grad->context.col(static_cast<Index>(shape.context_index(neg[l], r))) +=
            scale * res.dnegatives.col(static_cast<Index>(l));
      }
    }
    if (grad != nullptr) pass.backward(dz, *grad);
  }
  if (item != total) throw InvalidArgument("batch items must be grouped by center in center order");
  return loss * scale;
}

GradientCheckResult gradient_check(const ModelParameters& p, const MultiplexGraph& g, const TrainingBatch& batch,
                                   double eps, bool attention, std::size_t max_entries_per_tensor, double floor,
                                   std::uint64_t seed) {
  ModelParameters grad = ModelParameters::zeros(p.shape);
  loss_and_gradients(p, g, batch, attention, &grad);
  ModelParameters q = p;
  auto qt = q.tensors();
  const auto gt = grad.tensors();
  const auto names = p.tensor_names();
  Rng rng(derive_seed(seed, kCheckStream));
  GradientCheckResult out;
  for (std::size_t t = 0; t < qt.size(); ++t) {
    MatrixXd& m = *qt[t];
    std::vector<Index> entries(static_cast<std::size_t>(m.size()));
    std::iota(entries.begin(), entries.end(), 0);
    if (max_entries_per_tensor > 0 && entries.size() > max_entries_per_tensor) {
      std::shuffle(entries.begin(), entries.end(), rng);
      entries.resize(max_entries_per_tensor);
    }
    for (Index e : entries) {
      double& x = m.data()[e];
      const double saved = x;
      x = saved + eps;
      const double plus = loss_and_gradients(q, g, batch, attention, nullptr);
      x = saved - eps;
      const double minus = loss_and_gradients(q, g, batch, attention, nullptr);
      x = saved;
      const double numeric = (plus - minus) / (2.0 * eps);
      const double analytic = gt[t]->data()[e];
      const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
      const double err = std::abs(analytic - numeric) / denom;
      ++out.checked;
      if (out.worst_tensor.empty() || err > out.max_relative_error) {
        out.max_relative_error = err;
        out.worst_tensor = names[t];
        out.worst_entry = e;
        out.analytic = analytic;
        out.numeric = numeric;
      }
    }
  }
  return out;
}

EmbedOptions embed_options(const TrainConfig& config, std::size_t threads) {
  EmbedOptions o;
  o.budgets = config.budgets();
  o.seed = derive_seed(config.seed, kEmbedStream);
  o.attention = config.attention;
  o.threads = threads;
  return o;
}

TrainResult train(const MultiplexGraph& g, const WalkCorpus& corpus, const TrainConfig& config,
                  std::span<const LabeledEdges> validation, const TrainOptions& options) {
  config.validate();
  if (corpus.empty()) throw InvalidArgument("training corpus is empty");
  const ModelShape shape = ModelShape::from(g, config);
  TrainResult result;
  ModelParameters params;
  if (options.initial != nullptr) {
    if (!(options.initial->shape == shape)) throw InvalidArgument("initial parameters do not fit this graph");
    params = *options.initial;
  } else {
    params = ModelParameters::initialize(shape, config.seed);
  }
  Adam adam(params, AdamOptions{config.learning_rate});
  const ContextIndex contexts(corpus, g.num_nodes(), config.window);
  if (contexts.total() == 0) throw InvalidArgument("corpus yields no context triples");
  const auto noise = build_noise_tables(g, config.noise, options.noise_exclude);

  std::vector<NodeId> val_nodes;
  bool has_val = false;
  for (const auto& le : validation) {
    has_val = has_val || (!le.positives.empty() && !le.negatives.empty());
    for (const auto* list : {&le.positives, &le.negatives}) {
      for (const auto& e : *list) {
        val_nodes.push_back(e.src);
        val_nodes.push_back(e.dst);
      }
    }
  }
  std::sort(val_nodes.begin(), val_nodes.end());
  val_nodes.erase(std::unique(val_nodes.begin(), val_nodes.end()), val_nodes.end());
  const EmbedOptions eval_opts = embed_options(config);

  ModelParameters grad = ModelParameters::zeros(shape);
  std::size_t stale = 0;
  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    std::vector<NodeId> order = contexts.centers();
    Rng shuffle_rng(derive_seed(config.seed, kShuffleStream, epoch));
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    const std::uint64_t epoch_seed = derive_seed(config.seed, kBatchStream, epoch);
    EpochRecord rec;
    rec.epoch = epoch;
    double loss_sum = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_centers, ++batch_index) {
      const std::size_t end = std::min(order.size(), start + config.batch_centers);
      Rng rng(derive_seed(epoch_seed, batch_index));
      const TrainingBatch batch =
          make_batch(g, contexts, std::span<const NodeId>(order).subspan(start, end - start), noise, config, rng);
      grad.set_zero();
      const double loss = loss_and_gradients(params, g, batch, config.attention, &grad);
      if (!std::isfinite(loss) || !grad.all_finite()) {
        throw NumericError("training diverged: non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                           std::to_string(batch_index));
      }
      adam.step(params, grad);
      loss_sum += loss * static_cast<double>(batch.items.size());
      rec.triples += batch.items.size();
    }
    rec.loss = loss_sum / static_cast<double>(rec.triples);
    if (has_val) {
      const EmbeddingSet emb = compute_embeddings(params, g, eval_opts, val_nodes);
      rec.val_roc_auc = evaluate(emb, validation).mean_roc_auc;
    }
    result.history.push_back(rec);
    if (options.on_epoch) options.on_epoch(rec);

    if (!has_val) {
      result.best_epoch = epoch;
      continue;
    }
    if (result.best_epoch == 0 || rec.val_roc_auc > result.best_val_roc_auc) {
      result.best_val_roc_auc = rec.val_roc_auc;
      result.best_epoch = epoch;
      result.params = params;
      stale = 0;
    } else if (++stale >= config.patience) {
      result.stopped_early = true;
      break;
    }
  }
  if (!has_val) result.params = std::move(params);
  return result;
}

void write_history_csv(const std::vector<EpochRecord>& history, const std::filesystem::path& path) {
  auto out = detail::open_output(path.string());
  out << "epoch,loss,val_roc_auc\n";
  for (const auto& r : history) {
    out << r.epoch << ',' << detail::format_double(r.loss) << ',' << detail::format_double(r.val_roc_auc) << '\n';
  }
  if (!out) throw Error("failed writing " + path.string());
}

}  // namespace mxembed
