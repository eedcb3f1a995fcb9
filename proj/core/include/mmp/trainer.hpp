#pragma once

#include "mmp/graph.hpp"
#include "mmp/layers.hpp"

#include <stdexcept>
#include <vector>

namespace mmp {

class TrainingDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Standard Adam with bias correction. Weight decay enters as an L2 term added
// to the gradient (not decoupled decay).
struct AdamOptimizer {
  double lr = 0.05;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;

  explicit AdamOptimizer(const std::vector<Tensor>& params, double lr = 0.05,
                         double weight_decay = 0.0);
  // Reads each parameter's accumulated gradient, updates values in place,
  // then clears the gradients.
  void step(std::vector<Tensor>& params);

  std::vector<Mat> m;
  std::vector<Mat> v;
  long t = 0;
};

struct RunResult {
  double test_accuracy = 0.0;
  double best_val_accuracy = 0.0;
  int best_epoch = 0;
  double lambda_used = 0.0;
  std::uint64_t seed = 0;
  double wall_time_sec = 0.0;
};

struct SplitSummary {
  double mean = 0.0;
  double stdev = 0.0;  // sample stdev, n-1 denominator
  std::vector<RunResult> runs;
};

// One full training run on one split: forward/backward/Adam per epoch,
// early stopping on validation accuracy with best-epoch parameter restore.
RunResult train_once(const Graph& g, const Split& split, const ModelConfig& cfg);

// Largest mean validation accuracy over the splits wins; ties go to the
// smaller lambda. Per-split seed = cfg.seed + split index.
double select_lambda(const Graph& g, const SplitSet& splits, const ModelConfig& cfg,
                     const std::vector<double>& grid, int jobs = 1);

// train_once per split with per-split seeds cfg.seed + i; jobs > 1 fans the
// independent runs out over threads.
SplitSummary evaluate_splits(const Graph& g, const SplitSet& splits, const ModelConfig& cfg,
                             int jobs = 1);

}  // namespace mmp
