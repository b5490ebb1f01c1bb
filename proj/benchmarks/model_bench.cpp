#include <benchmark/benchmark.h>

#include "mxembed/synthetic.hpp"
#include "mxembed/trainer.hpp"

namespace mxembed {
namespace {

struct Setup {
  MultiplexGraph g;
  TrainConfig config;
  ModelParameters params;
  TrainingBatch batch;

  Setup(std::size_t dim, std::size_t relations) {
    PlantedPartitionOptions o;
    o.relations = relations;
    g = planted_partition_multiplex(o);
    config.dim = dim;
    params = ModelParameters::initialize(ModelShape::from(g, config), 1);
    WalkOptions wo;
    wo.walks_per_node = 2;
    const auto corpus = generate_walks(g, wo);
    const ContextIndex index(corpus, g.num_nodes(), config.window);
    const auto noise = build_noise_tables(g, config.noise);
    Rng rng(1);
    const std::vector<NodeId> centers(index.centers().begin(), index.centers().begin() + 8);
    batch = make_batch(g, index, centers, noise, config, rng);
  }
};

// One sample tree forward, reference dimensions.
void BM_TreeForward(benchmark::State& state) {
  const Setup s(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)));
  for (auto _ : state) {
    const TreePass pass(s.params, s.g, s.batch.trees[0]);
    benchmark::DoNotOptimize(pass.z_columns());
  }
}
BENCHMARK(BM_TreeForward)->Args({32, 2})->Args({200, 2})->Args({200, 4})->Unit(benchmark::kMicrosecond);

// Loss and full gradient of an eight-center batch.
void BM_BatchGradient(benchmark::State& state) {
  const Setup s(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)));
  auto grad = ModelParameters::zeros(s.params.shape);
  for (auto _ : state) {
    grad.set_zero();
    benchmark::DoNotOptimize(loss_and_gradients(s.params, s.g, s.batch, true, &grad));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(s.batch.items.size()));
}
BENCHMARK(BM_BatchGradient)->Args({32, 2})->Args({200, 2})->Args({200, 4})->Unit(benchmark::kMillisecond);

void BM_Embeddings(benchmark::State& state) {
  const Setup s(32, 2);
  for (auto _ : state) benchmark::DoNotOptimize(compute_embeddings(s.params, s.g, embed_options(s.config)));
}
BENCHMARK(BM_Embeddings)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace mxembed

BENCHMARK_MAIN();
