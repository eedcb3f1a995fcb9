#include <benchmark/benchmark.h>

#include "mmp/losses.hpp"
#include "mmp/trainer.hpp"
#include "testutil.hpp"

using namespace mmp;

namespace {

Graph make_graph(Eigen::Index n) { return testutil::random_graph(n, 32, 4, 8.0 / double(n), 9); }

void BM_Spmm(benchmark::State& state) {
  const auto n = static_cast<Eigen::Index>(state.range(0));
  auto g = make_graph(n);
  auto norm = gcn_normalize(g);
  Rng rng(1);
  Tensor x = Tensor::constant(testutil::random_mat(n, 64, rng));
  for (auto _ : state) {
    Tape tape;
    benchmark::DoNotOptimize(tape.spmm(norm.matrix, x));
  }
}
BENCHMARK(BM_Spmm)->Arg(1000)->Arg(4000);

void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<Eigen::Index>(state.range(0));
  Rng rng(2);
  Tensor a = Tensor::constant(testutil::random_mat(n, 512, rng));
  Tensor b = Tensor::constant(testutil::random_mat(512, 64, rng));
  for (auto _ : state) {
    Tape tape;
    benchmark::DoNotOptimize(tape.matmul(a, b));
  }
}
BENCHMARK(BM_Matmul)->Arg(1000)->Arg(4000);

void BM_TrainEpochGcnMmp(benchmark::State& state) {
  const auto n = static_cast<Eigen::Index>(state.range(0));
  auto g = make_graph(n);
  auto ctx = GraphContext::from_graph(g);
  ModelConfig cfg;
  cfg.wrapper = WrapperKind::kMmp;
  cfg.lambda = 0.5;
  Rng rng(3);
  Model model(cfg, g.feature_dim(), g.num_classes(), rng);
  auto params = model.parameters();
  AdamOptimizer opt(params, cfg.lr, cfg.weight_decay);
  Tensor x = Tensor::constant(g.features());
  std::vector<bool> mask(n, true);
  for (auto _ : state) {
    Tape tape;
    auto fwd = model.forward(tape, ctx, x, true, rng);
    Tensor semi = semi_supervised_loss(tape, fwd.logits, g.labels(), mask);
    Tensor dec = decoupling_loss(tape, fwd.states);
    tape.backward(final_loss(tape, semi, dec, cfg.lambda));
    opt.step(params);
  }
}
BENCHMARK(BM_TrainEpochGcnMmp)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
