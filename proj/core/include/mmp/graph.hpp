#pragma once

#include "mmp/tensor.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace mmp {

// Immutable undirected graph. The edge list stores each undirected edge once
// as (min, max); the CSR view is symmetric. No self-loops, no duplicates.
class Graph {
 public:
  Graph(Mat features, std::vector<int> labels, int num_classes,
        std::vector<std::pair<std::int32_t, std::int32_t>> edges);

  Eigen::Index num_nodes() const { return features_.rows(); }
  Eigen::Index feature_dim() const { return features_.cols(); }
  int num_classes() const { return num_classes_; }
  const Mat& features() const { return features_; }
  const std::vector<int>& labels() const { return labels_; }
  // Each undirected edge once, normalized to (min, max), sorted.
  const std::vector<std::pair<std::int32_t, std::int32_t>>& edges() const { return edges_; }
  std::size_t num_edges() const { return edges_.size(); }
  // Symmetric CSR over the raw edge set, unit weights, no self-loops.
  const CsrMatrix& adjacency() const { return adj_; }

 private:
  Mat features_;
  std::vector<int> labels_;
  int num_classes_;
  std::vector<std::pair<std::int32_t, std::int32_t>> edges_;
  CsrMatrix adj_;
};

// D^{-1/2} (A + I) D^{-1/2} with degrees taken after self-loop insertion.
// Deliberately a distinct type from Graph so it cannot be re-normalized.
struct NormalizedAdjacency {
  CsrMatrix matrix;
};

NormalizedAdjacency gcn_normalize(const Graph& g);

// Fraction of undirected edges whose endpoints share a label. Throws on an
// empty edge set.
double edge_homophily(const Graph& g);

struct Split {
  std::vector<std::int32_t> train;
  std::vector<std::int32_t> val;
  std::vector<std::int32_t> test;

  std::vector<bool> train_mask(Eigen::Index n) const;
  std::vector<bool> val_mask(Eigen::Index n) const;
  std::vector<bool> test_mask(Eigen::Index n) const;
};

using SplitSet = std::vector<Split>;

// Stratified per-class partition. Per class: round(f_train*n_c) train,
// round(f_val*n_c) validation, remainder test. Deterministic under seed.
SplitSet generate_splits(const Graph& g, int num_splits = 10, double train_frac = 0.48,
                         double val_frac = 0.32, std::uint64_t seed = 0);

// New graph with ceil(ratio * |E|) extra distinct undirected edges drawn
// uniformly from the non-edge, non-self-loop pairs. Throws if not enough
// non-edges exist.
Graph add_random_edges(const Graph& g, double ratio, std::uint64_t seed);

// Each undirected edge kept independently with probability 1-p. Used once
// per training epoch; caller re-normalizes the returned view.
Graph drop_edges(const Graph& g, double p, Rng& rng);

}  // namespace mmp
