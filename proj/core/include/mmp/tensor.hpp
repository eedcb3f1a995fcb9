#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace mmp {

// Row-major throughout; node-feature matrices are (num_nodes x dim).
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using Rng = std::mt19937_64;

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

namespace detail {
struct TensorNode {
  Mat value;
  Mat grad;  // lazily allocated, same shape as value
  bool requires_grad = false;

  void accumulate(const Mat& g) {
    if (grad.size() == 0) grad = Mat::Zero(value.rows(), value.cols());
    grad += g;
  }
};
}  // namespace detail

// Shared handle to a value (and optional gradient) in the computation graph.
class Tensor {
 public:
  Tensor() = default;

  static Tensor constant(Mat v) { return Tensor(std::move(v), false); }
  static Tensor parameter(Mat v) { return Tensor(std::move(v), true); }

  bool defined() const { return node_ != nullptr; }
  Eigen::Index rows() const { return node_->value.rows(); }
  Eigen::Index cols() const { return node_->value.cols(); }
  const Mat& value() const { return node_->value; }
  Mat& value() { return node_->value; }
  bool requires_grad() const { return node_->requires_grad; }

  // Gradient of the last backward pass; zero matrix if never touched.
  Mat grad() const {
    if (node_->grad.size() == 0) return Mat::Zero(rows(), cols());
    return node_->grad;
  }
  void zero_grad() { node_->grad.resize(0, 0); }

  double scalar() const {
    if (rows() != 1 || cols() != 1) throw ShapeError("scalar() on non-1x1 tensor");
    return node_->value(0, 0);
  }

  std::shared_ptr<detail::TensorNode> node() const { return node_; }

 private:
  Tensor(Mat v, bool requires_grad) : node_(std::make_shared<detail::TensorNode>()) {
    node_->value = std::move(v);
    node_->requires_grad = requires_grad;
  }
  std::shared_ptr<detail::TensorNode> node_;
};

// CSR matrix with constant edge weights (no gradient through the weights).
struct CsrMatrix {
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  std::vector<std::int64_t> indptr;   // size rows+1
  std::vector<std::int32_t> indices;  // column index per entry
  std::vector<double> weights;        // value per entry

  Eigen::Index nnz() const { return static_cast<Eigen::Index>(indices.size()); }
  Mat densify() const;
  CsrMatrix transposed() const;
};

// Records operations in execution order; backward replays them reversed.
// Single-threaded by contract. A tape may be backward()ed once, then reset.
class Tape {
 public:
  Tensor matmul(const Tensor& a, const Tensor& b);
  Tensor spmm(const CsrMatrix& adj, const Tensor& x);
  Tensor add(const Tensor& a, const Tensor& b);
  Tensor sub(const Tensor& a, const Tensor& b);
  Tensor mul(const Tensor& a, const Tensor& b);
  // Adds a 1 x d row vector to every row of an n x d tensor.
  Tensor add_bias(const Tensor& x, const Tensor& bias);
  // Multiplies row i of x by the scalar s(i, 0).
  Tensor scale_rows(const Tensor& x, const Tensor& s);
  Tensor scale(const Tensor& x, double c);
  Tensor relu(const Tensor& x);
  Tensor leaky_relu(const Tensor& x, double slope);
  Tensor sigmoid(const Tensor& x);
  Tensor abs(const Tensor& x);
  Tensor concat_cols(const std::vector<Tensor>& xs);
  Tensor slice_cols(const Tensor& x, Eigen::Index start, Eigen::Index count);
  Tensor sum(const Tensor& x);  // full reduction to 1x1
  // Inverted dropout: kept entries scaled by 1/(1-p). Identity when !training.
  Tensor dropout(const Tensor& x, double p, bool training, Rng& rng);
  // Sum (or mean, if mean_reduction) of -ln softmax(logits)_label over masked rows.
  Tensor softmax_cross_entropy(const Tensor& logits, const std::vector<int>& labels,
                               const std::vector<bool>& mask, bool mean_reduction = false);
  // Per-row cosine similarity, n x 1; denominator clamped below by eps.
  Tensor cosine_similarity_rows(const Tensor& a, const Tensor& b, double eps = 1e-8);
  // Attention-weighted neighborhood sum: for each destination row i of `structure`,
  // scores e_ij = leaky_relu(dst_score[i] + src_score[j]) over stored neighbors j,
  // softmax-normalized, then out_i = sum_j alpha_ij * values_j.
  Tensor attention_aggregate(const CsrMatrix& structure, const Tensor& values,
                             const Tensor& src_score, const Tensor& dst_score, double slope);

  // Seeds grad(loss)=1 and runs all recorded backward rules in reverse order.
  // Calling twice without reset() throws.
  void backward(const Tensor& loss);
  void reset();
  std::size_t num_ops() const { return ops_.size(); }

 private:
  struct Op {
    std::shared_ptr<detail::TensorNode> output;
    std::function<void()> backward;
  };
  Tensor make_output(Mat value, std::initializer_list<const Tensor*> inputs);
  void record(const Tensor& out, std::function<void()> fn);

  std::vector<Op> ops_;
  bool backward_done_ = false;
};

// Glorot-uniform init, limit sqrt(6/(fan_in+fan_out)).
Mat glorot_uniform(Eigen::Index rows, Eigen::Index cols, Rng& rng);

}  // namespace mmp
