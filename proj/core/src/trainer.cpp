#include "mmp/trainer.hpp"

#include "mmp/losses.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <mutex>
#include <thread>

namespace mmp {

AdamOptimizer::AdamOptimizer(const std::vector<Tensor>& params, double lr, double weight_decay)
    : lr(lr), weight_decay(weight_decay) {
  for (const Tensor& p : params) {
    m.push_back(Mat::Zero(p.rows(), p.cols()));
    v.push_back(Mat::Zero(p.rows(), p.cols()));
  }
}

void AdamOptimizer::step(std::vector<Tensor>& params) {
  if (params.size() != m.size())
    throw std::invalid_argument("AdamOptimizer::step: parameter count mismatch");
  ++t;
  const double bc1 = 1.0 - std::pow(beta1, t);
  const double bc2 = 1.0 - std::pow(beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor& p = params[i];
    if (p.rows() != m[i].rows() || p.cols() != m[i].cols())
      throw std::invalid_argument("AdamOptimizer::step: state shape mismatch");
    Mat g = p.grad();
    if (weight_decay != 0.0) g += weight_decay * p.value();
    m[i] = beta1 * m[i] + (1.0 - beta1) * g;
    v[i] = beta2 * v[i] + (1.0 - beta2) * g.cwiseProduct(g);
    Mat m_hat = m[i] / bc1;
    Mat v_hat = v[i] / bc2;
    p.value() -= lr * m_hat.cwiseQuotient((v_hat.cwiseSqrt().array() + eps).matrix());
    p.zero_grad();
  }
}

RunResult train_once(const Graph& g, const Split& split, const ModelConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(cfg.seed);
  const GraphContext full_ctx = GraphContext::from_graph(g);
  Model model(cfg, g.feature_dim(), g.num_classes(), rng);
  auto params = model.parameters();
  AdamOptimizer opt(params, cfg.lr, cfg.weight_decay);

  const Tensor x = Tensor::constant(g.features());
  const auto n = g.num_nodes();
  const auto train_mask = split.train_mask(n);
  const auto val_mask = split.val_mask(n);
  const auto test_mask = split.test_mask(n);

  const bool use_mmp = cfg.wrapper == WrapperKind::kMmp && cfg.conv != ConvKind::kMlp;

  double best_val = -1.0;
  double best_val_loss = std::numeric_limits<double>::infinity();
  int best_epoch = 0;
  int since_improve = 0;
  std::vector<Mat> best_params = model.snapshot();

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    GraphContext epoch_ctx_storage;
    const GraphContext* ctx = &full_ctx;
    if (cfg.wrapper == WrapperKind::kDropEdge && cfg.conv != ConvKind::kMlp) {
      epoch_ctx_storage = GraphContext::from_graph(drop_edges(g, cfg.dropedge_p, rng));
      ctx = &epoch_ctx_storage;
    }

    Tape tape;
    ForwardResult fwd = model.forward(tape, *ctx, x, /*training=*/true, rng);
    Tensor semi = semi_supervised_loss(tape, fwd.logits, g.labels(), train_mask,
                                       cfg.mean_reduction);
    Tensor loss = semi;
    if (use_mmp && cfg.lambda > 0.0) {
      Tensor dec = decoupling_loss(tape, fwd.states, cfg.include_layer0_decouple);
      loss = final_loss(tape, semi, dec, cfg.lambda);
    }
    if (!std::isfinite(loss.scalar()))
      throw TrainingDiverged("non-finite loss at epoch " + std::to_string(epoch) + " (seed " +
                             std::to_string(cfg.seed) + ")");
    tape.backward(loss);
    opt.step(params);

    // Validation in eval mode on the unperturbed graph.
    Tape eval_tape;
    ForwardResult ev = model.forward(eval_tape, full_ctx, x, /*training=*/false, rng);
    bool improved;
    if (cfg.early_stop_on_loss) {
      Tensor vloss = semi_supervised_loss(eval_tape, ev.logits, g.labels(), val_mask,
                                          cfg.mean_reduction);
      improved = vloss.scalar() < best_val_loss;
      if (improved) {
        best_val_loss = vloss.scalar();
        best_val = accuracy(ev.logits.value(), g.labels(), val_mask);
      }
    } else {
      const double val_acc = accuracy(ev.logits.value(), g.labels(), val_mask);
      improved = val_acc > best_val;
      if (improved) best_val = val_acc;
    }
    if (improved) {
      best_epoch = epoch;
      best_params = model.snapshot();
      since_improve = 0;
    } else {
      ++since_improve;
      if (since_improve > cfg.patience) break;
    }
  }

  model.restore(best_params);
  Tape test_tape;
  ForwardResult tv = model.forward(test_tape, full_ctx, x, /*training=*/false, rng);

  RunResult res;
  res.test_accuracy = accuracy(tv.logits.value(), g.labels(), test_mask);
  res.best_val_accuracy = best_val;
  res.best_epoch = best_epoch;
  res.lambda_used = cfg.lambda;
  res.seed = cfg.seed;
  res.wall_time_sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

namespace {

// Runs fn(i) for i in [0, count) on up to `jobs` threads. Each index is an
// independent training run; results land in pre-sized slots so ordering is
// deterministic regardless of scheduling.
void parallel_for(int count, int jobs, const std::function<void(int)>& fn) {
  if (jobs <= 1 || count <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  auto worker = [&] {
    for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> threads;
  const int nthreads = std::min(jobs, count);
  threads.reserve(nthreads);
  for (int i = 0; i < nthreads; ++i) threads.emplace_back(worker);
  for (auto& th : threads) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace

double select_lambda(const Graph& g, const SplitSet& splits, const ModelConfig& cfg,
                     const std::vector<double>& grid, int jobs) {
  if (grid.empty()) throw std::invalid_argument("select_lambda: empty grid");
  std::vector<double> sorted = grid;
  std::sort(sorted.begin(), sorted.end());

  const int total = static_cast<int>(sorted.size() * splits.size());
  std::vector<double> val_acc(total, 0.0);
  parallel_for(total, jobs, [&](int idx) {
    const int li = idx / static_cast<int>(splits.size());
    const int si = idx % static_cast<int>(splits.size());
    ModelConfig c = cfg;
    c.lambda = sorted[li];
    c.seed = cfg.seed + static_cast<std::uint64_t>(si);
    val_acc[idx] = train_once(g, splits[si], c).best_val_accuracy;
  });

  double best_lambda = sorted.front();
  double best_mean = -1.0;
  for (std::size_t li = 0; li < sorted.size(); ++li) {
    double mean = 0.0;
    for (std::size_t si = 0; si < splits.size(); ++si)
      mean += val_acc[li * splits.size() + si];
    mean /= static_cast<double>(splits.size());
    if (mean > best_mean) {  // strict: ties keep the smaller lambda
      best_mean = mean;
      best_lambda = sorted[li];
    }
  }
  return best_lambda;
}

SplitSummary evaluate_splits(const Graph& g, const SplitSet& splits, const ModelConfig& cfg,
                             int jobs) {
  SplitSummary summary;
  summary.runs.resize(splits.size());
  parallel_for(static_cast<int>(splits.size()), jobs, [&](int i) {
    ModelConfig c = cfg;
    c.seed = cfg.seed + static_cast<std::uint64_t>(i);
    summary.runs[i] = train_once(g, splits[i], c);
  });
  double mean = 0.0;
  for (const auto& r : summary.runs) mean += r.test_accuracy;
  mean /= static_cast<double>(summary.runs.size());
  double ss = 0.0;
  for (const auto& r : summary.runs) ss += (r.test_accuracy - mean) * (r.test_accuracy - mean);
  summary.mean = mean;
  summary.stdev = summary.runs.size() > 1
                      ? std::sqrt(ss / static_cast<double>(summary.runs.size() - 1))
                      : 0.0;
  return summary;
}

}  // namespace mmp
