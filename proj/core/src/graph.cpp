#include "mmp/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

namespace mmp {

namespace {

CsrMatrix build_symmetric_csr(Eigen::Index n,
                              const std::vector<std::pair<std::int32_t, std::int32_t>>& edges,
                              bool add_self_loops) {
  std::vector<std::vector<std::int32_t>> nbrs(n);
  for (auto [a, b] : edges) {
    nbrs[a].push_back(b);
    nbrs[b].push_back(a);
  }
  if (add_self_loops)
    for (Eigen::Index i = 0; i < n; ++i) nbrs[i].push_back(static_cast<std::int32_t>(i));
  CsrMatrix m;
  m.rows = m.cols = n;
  m.indptr.assign(n + 1, 0);
  for (Eigen::Index i = 0; i < n; ++i) {
    std::sort(nbrs[i].begin(), nbrs[i].end());
    m.indptr[i + 1] = m.indptr[i] + static_cast<std::int64_t>(nbrs[i].size());
    for (auto j : nbrs[i]) {
      m.indices.push_back(j);
      m.weights.push_back(1.0);
    }
  }
  return m;
}

}  // namespace

Graph::Graph(Mat features, std::vector<int> labels, int num_classes,
             std::vector<std::pair<std::int32_t, std::int32_t>> edges)
    : features_(std::move(features)),
      labels_(std::move(labels)),
      num_classes_(num_classes),
      edges_(std::move(edges)) {
  const Eigen::Index n = features_.rows();
  if (static_cast<Eigen::Index>(labels_.size()) != n)
    throw std::invalid_argument("Graph: labels length must equal node count");
  for (int y : labels_) {
    if (y < 0 || y >= num_classes_)
      throw std::invalid_argument("Graph: label " + std::to_string(y) + " out of range [0," +
                                  std::to_string(num_classes_) + ")");
  }
  for (auto& [a, b] : edges_) {
    if (a < 0 || b < 0 || a >= n || b >= n)
      throw std::invalid_argument("Graph: edge endpoint out of range");
    if (a == b) throw std::invalid_argument("Graph: self-loop in raw edge set");
    if (a > b) std::swap(a, b);
  }
  std::sort(edges_.begin(), edges_.end());
  if (std::adjacent_find(edges_.begin(), edges_.end()) != edges_.end())
    throw std::invalid_argument("Graph: duplicate edge");
  adj_ = build_symmetric_csr(n, edges_, /*add_self_loops=*/false);
}

NormalizedAdjacency gcn_normalize(const Graph& g) {
  const Eigen::Index n = g.num_nodes();
  CsrMatrix m = build_symmetric_csr(n, g.edges(), /*add_self_loops=*/true);
  std::vector<double> inv_sqrt_deg(n);
  for (Eigen::Index i = 0; i < n; ++i)
    inv_sqrt_deg[i] = 1.0 / std::sqrt(static_cast<double>(m.indptr[i + 1] - m.indptr[i]));
  for (Eigen::Index i = 0; i < n; ++i)
    for (std::int64_t k = m.indptr[i]; k < m.indptr[i + 1]; ++k)
      m.weights[k] = inv_sqrt_deg[i] * inv_sqrt_deg[m.indices[k]];
  return NormalizedAdjacency{std::move(m)};
}

double edge_homophily(const Graph& g) {
  if (g.edges().empty()) throw std::invalid_argument("edge_homophily: graph has no edges");
  std::size_t same = 0;
  for (auto [a, b] : g.edges())
    if (g.labels()[a] == g.labels()[b]) ++same;
  return static_cast<double>(same) / static_cast<double>(g.num_edges());
}

std::vector<bool> Split::train_mask(Eigen::Index n) const {
  std::vector<bool> m(n, false);
  for (auto i : train) m[i] = true;
  return m;
}
std::vector<bool> Split::val_mask(Eigen::Index n) const {
  std::vector<bool> m(n, false);
  for (auto i : val) m[i] = true;
  return m;
}
std::vector<bool> Split::test_mask(Eigen::Index n) const {
  std::vector<bool> m(n, false);
  for (auto i : test) m[i] = true;
  return m;
}

SplitSet generate_splits(const Graph& g, int num_splits, double train_frac, double val_frac,
                         std::uint64_t seed) {
  std::vector<std::vector<std::int32_t>> by_class(g.num_classes());
  for (Eigen::Index i = 0; i < g.num_nodes(); ++i)
    by_class[g.labels()[i]].push_back(static_cast<std::int32_t>(i));
  for (int c = 0; c < g.num_classes(); ++c) {
    if (by_class[c].size() < 3)
      throw std::invalid_argument("generate_splits: class " + std::to_string(c) +
                                  " has fewer than 3 nodes");
  }
  Rng rng(seed);
  SplitSet out;
  out.reserve(num_splits);
  for (int s = 0; s < num_splits; ++s) {
    Split split;
    for (auto& cls : by_class) {
      std::vector<std::int32_t> perm = cls;
      std::shuffle(perm.begin(), perm.end(), rng);
      const auto nc = static_cast<double>(perm.size());
      const auto n_train = static_cast<std::size_t>(std::lround(train_frac * nc));
      const auto n_val = static_cast<std::size_t>(std::lround(val_frac * nc));
      for (std::size_t i = 0; i < perm.size(); ++i) {
        if (i < n_train)
          split.train.push_back(perm[i]);
        else if (i < n_train + n_val)
          split.val.push_back(perm[i]);
        else
          split.test.push_back(perm[i]);
      }
    }
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.val.begin(), split.val.end());
    std::sort(split.test.begin(), split.test.end());
    out.push_back(std::move(split));
  }
  return out;
}

Graph add_random_edges(const Graph& g, double ratio, std::uint64_t seed) {
  if (ratio < 0.0) throw std::invalid_argument("add_random_edges: ratio must be >= 0");
  const auto n = g.num_nodes();
  const auto want = static_cast<std::size_t>(std::ceil(ratio * static_cast<double>(g.num_edges())));
  const std::size_t max_pairs = static_cast<std::size_t>(n) * (n - 1) / 2;
  if (g.num_edges() + want > max_pairs)
    throw std::invalid_argument("add_random_edges: requested edges exceed available non-edges");

  std::set<std::pair<std::int32_t, std::int32_t>> existing(g.edges().begin(), g.edges().end());
  Rng rng(seed);
  std::uniform_int_distribution<std::int32_t> pick(0, static_cast<std::int32_t>(n - 1));
  std::vector<std::pair<std::int32_t, std::int32_t>> edges = g.edges();
  std::size_t added = 0;
  while (added < want) {
    std::int32_t a = pick(rng), b = pick(rng);
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    if (!existing.insert({a, b}).second) continue;
    edges.emplace_back(a, b);
    ++added;
  }
  return Graph(g.features(), g.labels(), g.num_classes(), std::move(edges));
}

Graph drop_edges(const Graph& g, double p, Rng& rng) {
  if (p < 0.0 || p >= 1.0) throw std::invalid_argument("drop_edges: p must be in [0,1)");
  if (p == 0.0) return g;
  std::bernoulli_distribution drop(p);
  std::vector<std::pair<std::int32_t, std::int32_t>> kept;
  kept.reserve(g.num_edges());
  for (auto e : g.edges())
    if (!drop(rng)) kept.push_back(e);
  return Graph(g.features(), g.labels(), g.num_classes(), std::move(kept));
}

}  // namespace mmp
