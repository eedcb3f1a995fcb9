#include "mmp/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mmp {

namespace {

std::string shape_str(const Tensor& t) {
  std::ostringstream os;
  os << t.rows() << "x" << t.cols();
  return os.str();
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_str(a) + " vs " + shape_str(b));
  }
}

}  // namespace

Mat CsrMatrix::densify() const {
  Mat d = Mat::Zero(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (std::int64_t k = indptr[i]; k < indptr[i + 1]; ++k) {
      d(i, indices[k]) += weights[k];
    }
  }
  return d;
}

CsrMatrix CsrMatrix::transposed() const {
  CsrMatrix t;
  t.rows = cols;
  t.cols = rows;
  t.indptr.assign(cols + 1, 0);
  for (auto j : indices) t.indptr[j + 1]++;
  for (Eigen::Index j = 0; j < cols; ++j) t.indptr[j + 1] += t.indptr[j];
  t.indices.resize(indices.size());
  t.weights.resize(weights.size());
  std::vector<std::int64_t> cursor(t.indptr.begin(), t.indptr.end() - 1);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (std::int64_t k = indptr[i]; k < indptr[i + 1]; ++k) {
      auto pos = cursor[indices[k]]++;
      t.indices[pos] = static_cast<std::int32_t>(i);
      t.weights[pos] = weights[k];
    }
  }
  return t;
}

Tensor Tape::make_output(Mat value, std::initializer_list<const Tensor*> inputs) {
  bool req = false;
  for (const Tensor* t : inputs) req = req || t->requires_grad();
  return req ? Tensor::parameter(std::move(value)) : Tensor::constant(std::move(value));
}

void Tape::record(const Tensor& out, std::function<void()> fn) {
  if (out.requires_grad()) ops_.push_back(Op{out.node(), std::move(fn)});
}

Tensor Tape::matmul(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: inner dimensions disagree, " + shape_str(a) + " * " + shape_str(b));
  }
  Tensor out = make_output(a.value() * b.value(), {&a, &b});
  record(out, [an = a.node(), bn = b.node(), on = out.node()] {
    if (an->requires_grad) an->accumulate(on->grad * bn->value.transpose());
    if (bn->requires_grad) bn->accumulate(an->value.transpose() * on->grad);
  });
  return out;
}

Tensor Tape::spmm(const CsrMatrix& adj, const Tensor& x) {
  if (adj.cols != x.rows()) {
    throw ShapeError("spmm: adjacency cols " + std::to_string(adj.cols) + " vs input rows " +
                     std::to_string(x.rows()));
  }
  Mat out = Mat::Zero(adj.rows, x.cols());
  const Mat& xv = x.value();
  for (Eigen::Index i = 0; i < adj.rows; ++i) {
    for (std::int64_t k = adj.indptr[i]; k < adj.indptr[i + 1]; ++k) {
      out.row(i) += adj.weights[k] * xv.row(adj.indices[k]);
    }
  }
  Tensor t = make_output(std::move(out), {&x});
  record(t, [adjT = adj.transposed(), xn = x.node(), on = t.node()] {
    Mat gx = Mat::Zero(xn->value.rows(), xn->value.cols());
    for (Eigen::Index i = 0; i < adjT.rows; ++i) {
      for (std::int64_t k = adjT.indptr[i]; k < adjT.indptr[i + 1]; ++k) {
        gx.row(i) += adjT.weights[k] * on->grad.row(adjT.indices[k]);
      }
    }
    xn->accumulate(gx);
  });
  return t;
}

Tensor Tape::add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  Tensor out = make_output(a.value() + b.value(), {&a, &b});
  record(out, [an = a.node(), bn = b.node(), on = out.node()] {
    if (an->requires_grad) an->accumulate(on->grad);
    if (bn->requires_grad) bn->accumulate(on->grad);
  });
  return out;
}

Tensor Tape::sub(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  Tensor out = make_output(a.value() - b.value(), {&a, &b});
  record(out, [an = a.node(), bn = b.node(), on = out.node()] {
    if (an->requires_grad) an->accumulate(on->grad);
    if (bn->requires_grad) bn->accumulate(-on->grad);
  });
  return out;
}

Tensor Tape::mul(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  Tensor out = make_output(a.value().cwiseProduct(b.value()), {&a, &b});
  record(out, [an = a.node(), bn = b.node(), on = out.node()] {
    if (an->requires_grad) an->accumulate(on->grad.cwiseProduct(bn->value));
    if (bn->requires_grad) bn->accumulate(on->grad.cwiseProduct(an->value));
  });
  return out;
}

Tensor Tape::add_bias(const Tensor& x, const Tensor& bias) {
  if (bias.rows() != 1 || bias.cols() != x.cols()) {
    throw ShapeError("add_bias: bias " + shape_str(bias) + " vs input " + shape_str(x));
  }
  Mat v = x.value();
  v.rowwise() += bias.value().row(0);
  Tensor out = make_output(std::move(v), {&x, &bias});
  record(out, [xn = x.node(), bn = bias.node(), on = out.node()] {
    if (xn->requires_grad) xn->accumulate(on->grad);
    if (bn->requires_grad) bn->accumulate(on->grad.colwise().sum());
  });
  return out;
}

Tensor Tape::scale_rows(const Tensor& x, const Tensor& s) {
  if (s.rows() != x.rows() || s.cols() != 1) {
    throw ShapeError("scale_rows: scale " + shape_str(s) + " vs input " + shape_str(x));
  }
  Tensor out = make_output(s.value().col(0).asDiagonal() * x.value(), {&x, &s});
  record(out, [xn = x.node(), sn = s.node(), on = out.node()] {
    if (xn->requires_grad) xn->accumulate(sn->value.col(0).asDiagonal() * on->grad);
    if (sn->requires_grad)
      sn->accumulate(on->grad.cwiseProduct(xn->value).rowwise().sum());
  });
  return out;
}

Tensor Tape::scale(const Tensor& x, double c) {
  Tensor out = make_output(c * x.value(), {&x});
  record(out, [c, xn = x.node(), on = out.node()] { xn->accumulate(c * on->grad); });
  return out;
}

Tensor Tape::relu(const Tensor& x) {
  Tensor out = make_output(x.value().cwiseMax(0.0), {&x});
  record(out, [xn = x.node(), on = out.node()] {
    xn->accumulate((xn->value.array() > 0.0).cast<double>().matrix().cwiseProduct(on->grad));
  });
  return out;
}

Tensor Tape::leaky_relu(const Tensor& x, double slope) {
  Mat v = x.value().unaryExpr([slope](double a) { return a > 0.0 ? a : slope * a; });
  Tensor out = make_output(std::move(v), {&x});
  record(out, [slope, xn = x.node(), on = out.node()] {
    Mat d = xn->value.unaryExpr([slope](double a) { return a > 0.0 ? 1.0 : slope; });
    xn->accumulate(d.cwiseProduct(on->grad));
  });
  return out;
}

Tensor Tape::sigmoid(const Tensor& x) {
  Mat v = x.value().unaryExpr([](double a) { return 1.0 / (1.0 + std::exp(-a)); });
  Tensor out = make_output(std::move(v), {&x});
  record(out, [xn = x.node(), on = out.node()] {
    Mat d = on->value.cwiseProduct((Mat::Ones(on->value.rows(), on->value.cols()) - on->value));
    xn->accumulate(d.cwiseProduct(on->grad));
  });
  return out;
}

Tensor Tape::abs(const Tensor& x) {
  Tensor out = make_output(x.value().cwiseAbs(), {&x});
  record(out, [xn = x.node(), on = out.node()] {
    Mat d = xn->value.unaryExpr([](double a) { return a > 0.0 ? 1.0 : (a < 0.0 ? -1.0 : 0.0); });
    xn->accumulate(d.cwiseProduct(on->grad));
  });
  return out;
}

Tensor Tape::concat_cols(const std::vector<Tensor>& xs) {
  if (xs.empty()) throw ShapeError("concat_cols: no inputs");
  Eigen::Index n = xs.front().rows();
  Eigen::Index total = 0;
  bool req = false;
  for (const Tensor& t : xs) {
    if (t.rows() != n) throw ShapeError("concat_cols: row count mismatch");
    total += t.cols();
    req = req || t.requires_grad();
  }
  Mat v(n, total);
  Eigen::Index off = 0;
  for (const Tensor& t : xs) {
    v.middleCols(off, t.cols()) = t.value();
    off += t.cols();
  }
  Tensor out = req ? Tensor::parameter(std::move(v)) : Tensor::constant(std::move(v));
  if (req) {
    std::vector<std::shared_ptr<detail::TensorNode>> nodes;
    for (const Tensor& t : xs) nodes.push_back(t.node());
    ops_.push_back(Op{out.node(), [nodes, on = out.node()] {
      Eigen::Index off = 0;
      for (const auto& nptr : nodes) {
        if (nptr->requires_grad) nptr->accumulate(on->grad.middleCols(off, nptr->value.cols()));
        off += nptr->value.cols();
      }
    }});
  }
  return out;
}

Tensor Tape::slice_cols(const Tensor& x, Eigen::Index start, Eigen::Index count) {
  if (start < 0 || count < 1 || start + count > x.cols()) {
    throw ShapeError("slice_cols: range out of bounds");
  }
  Tensor out = make_output(x.value().middleCols(start, count), {&x});
  record(out, [start, count, xn = x.node(), on = out.node()] {
    Mat g = Mat::Zero(xn->value.rows(), xn->value.cols());
    g.middleCols(start, count) = on->grad;
    xn->accumulate(g);
  });
  return out;
}

Tensor Tape::sum(const Tensor& x) {
  Mat v(1, 1);
  v(0, 0) = x.value().sum();
  Tensor out = make_output(std::move(v), {&x});
  record(out, [xn = x.node(), on = out.node()] {
    xn->accumulate(Mat::Constant(xn->value.rows(), xn->value.cols(), on->grad(0, 0)));
  });
  return out;
}

Tensor Tape::dropout(const Tensor& x, double p, bool training, Rng& rng) {
  if (p < 0.0 || p >= 1.0) throw std::invalid_argument("dropout: p must be in [0,1)");
  if (!training || p == 0.0) return x;
  std::bernoulli_distribution keep(1.0 - p);
  Mat mask(x.rows(), x.cols());
  const double inv = 1.0 / (1.0 - p);
  for (Eigen::Index i = 0; i < mask.rows(); ++i)
    for (Eigen::Index j = 0; j < mask.cols(); ++j) mask(i, j) = keep(rng) ? inv : 0.0;
  Tensor out = make_output(x.value().cwiseProduct(mask), {&x});
  record(out, [mask, xn = x.node(), on = out.node()] {
    xn->accumulate(on->grad.cwiseProduct(mask));
  });
  return out;
}

Tensor Tape::softmax_cross_entropy(const Tensor& logits, const std::vector<int>& labels,
                                   const std::vector<bool>& mask, bool mean_reduction) {
  const Eigen::Index n = logits.rows(), c = logits.cols();
  if (static_cast<Eigen::Index>(labels.size()) != n || static_cast<Eigen::Index>(mask.size()) != n)
    throw ShapeError("softmax_cross_entropy: labels/mask length must equal row count");
  Eigen::Index n_masked = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!mask[i]) continue;
    ++n_masked;
    if (labels[i] < 0 || labels[i] >= c)
      throw std::out_of_range("softmax_cross_entropy: label " + std::to_string(labels[i]) +
                              " out of range [0," + std::to_string(c) + ")");
  }
  if (n_masked == 0) throw std::invalid_argument("softmax_cross_entropy: empty mask");

  // Row-max subtraction for stability; softmax rows cached for backward.
  Mat probs(n, c);
  double loss = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double mx = logits.value().row(i).maxCoeff();
    Eigen::RowVectorXd e = (logits.value().row(i).array() - mx).exp();
    double z = e.sum();
    probs.row(i) = e / z;
    if (mask[i]) loss -= std::log(probs(i, labels[i]));
  }
  const double norm = mean_reduction ? 1.0 / static_cast<double>(n_masked) : 1.0;
  Mat v(1, 1);
  v(0, 0) = loss * norm;
  Tensor out = make_output(std::move(v), {&logits});
  record(out, [probs, labels, mask, norm, ln = logits.node(), on = out.node()] {
    Mat g = Mat::Zero(probs.rows(), probs.cols());
    for (Eigen::Index i = 0; i < probs.rows(); ++i) {
      if (!mask[i]) continue;
      g.row(i) = probs.row(i);
      g(i, labels[i]) -= 1.0;
    }
    ln->accumulate(on->grad(0, 0) * norm * g);
  });
  return out;
}

Tensor Tape::cosine_similarity_rows(const Tensor& a, const Tensor& b, double eps) {
  require_same_shape(a, b, "cosine_similarity_rows");
  const Eigen::Index n = a.rows();
  Mat v(n, 1);
  Eigen::VectorXd na(n), nb(n), dot(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    dot(i) = a.value().row(i).dot(b.value().row(i));
    na(i) = std::max(a.value().row(i).norm(), eps);
    nb(i) = std::max(b.value().row(i).norm(), eps);
    v(i, 0) = dot(i) / (na(i) * nb(i));
  }
  Tensor out = make_output(std::move(v), {&a, &b});
  record(out, [na, nb, dot, eps, an = a.node(), bn = b.node(), on = out.node()] {
    const Eigen::Index n = na.size();
    Mat ga = Mat::Zero(an->value.rows(), an->value.cols());
    Mat gb = ga;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double g = on->grad(i, 0);
      const double denom = na(i) * nb(i);
      // d cos / d a_i = b_i/(|a||b|) - dot * a_i / (|a|^3 |b|); clamped norms
      // are treated as constants (derivative 0 through the clamp).
      Eigen::RowVectorXd ai = an->value.row(i), bi = bn->value.row(i);
      Eigen::RowVectorXd da = bi / denom;
      Eigen::RowVectorXd db = ai / denom;
      if (ai.norm() > eps) da -= dot(i) / (na(i) * na(i) * denom) * ai;
      if (bi.norm() > eps) db -= dot(i) / (nb(i) * nb(i) * denom) * bi;
      if (an->requires_grad) ga.row(i) = g * da;
      if (bn->requires_grad) gb.row(i) = g * db;
    }
    if (an->requires_grad) an->accumulate(ga);
    if (bn->requires_grad) bn->accumulate(gb);
  });
  return out;
}

Tensor Tape::attention_aggregate(const CsrMatrix& structure, const Tensor& values,
                                 const Tensor& src_score, const Tensor& dst_score, double slope) {
  const Eigen::Index n = structure.rows;
  if (structure.cols != values.rows())
    throw ShapeError("attention_aggregate: structure/value row mismatch");
  if (src_score.rows() != values.rows() || src_score.cols() != 1 || dst_score.rows() != n ||
      dst_score.cols() != 1)
    throw ShapeError("attention_aggregate: scores must be n x 1");

  // Per-edge softmax coefficients and pre-activation signs, kept for backward.
  std::vector<double> alpha(structure.indices.size());
  std::vector<double> raw(structure.indices.size());
  Mat out = Mat::Zero(n, values.cols());
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::int64_t lo = structure.indptr[i], hi = structure.indptr[i + 1];
    if (lo == hi) continue;
    double mx = -std::numeric_limits<double>::infinity();
    for (std::int64_t k = lo; k < hi; ++k) {
      double e = dst_score.value()(i, 0) + src_score.value()(structure.indices[k], 0);
      raw[k] = e;
      double act = e > 0.0 ? e : slope * e;
      alpha[k] = act;
      mx = std::max(mx, act);
    }
    double z = 0.0;
    for (std::int64_t k = lo; k < hi; ++k) {
      alpha[k] = std::exp(alpha[k] - mx);
      z += alpha[k];
    }
    for (std::int64_t k = lo; k < hi; ++k) {
      alpha[k] /= z;
      out.row(i) += alpha[k] * values.value().row(structure.indices[k]);
    }
  }
  Tensor t = make_output(std::move(out), {&values, &src_score, &dst_score});
  record(t, [alpha, raw, slope, indptr = structure.indptr, indices = structure.indices,
             nrows = structure.rows, vn = values.node(), sn = src_score.node(),
             dn = dst_score.node(), on = t.node()] {
    Mat gv = Mat::Zero(vn->value.rows(), vn->value.cols());
    Mat gs = Mat::Zero(sn->value.rows(), 1);
    Mat gd = Mat::Zero(dn->value.rows(), 1);
    for (Eigen::Index i = 0; i < nrows; ++i) {
      const std::int64_t lo = indptr[i], hi = indptr[i + 1];
      if (lo == hi) continue;
      // d loss / d alpha_ik, then softmax jacobian back to the raw scores.
      double inner = 0.0;  // sum_k alpha_ik * dalpha_ik
      for (std::int64_t k = lo; k < hi; ++k) {
        const auto j = indices[k];
        gv.row(j) += alpha[k] * on->grad.row(i);
        inner += alpha[k] * on->grad.row(i).dot(vn->value.row(j));
      }
      for (std::int64_t k = lo; k < hi; ++k) {
        const auto j = indices[k];
        double dalpha = on->grad.row(i).dot(vn->value.row(j));
        double de = alpha[k] * (dalpha - inner);
        de *= raw[k] > 0.0 ? 1.0 : slope;
        gs(j, 0) += de;
        gd(i, 0) += de;
      }
    }
    if (vn->requires_grad) vn->accumulate(gv);
    if (sn->requires_grad) sn->accumulate(gs);
    if (dn->requires_grad) dn->accumulate(gd);
  });
  return t;
}

void Tape::backward(const Tensor& loss) {
  if (loss.rows() != 1 || loss.cols() != 1)
    throw ShapeError("backward: loss must be scalar (1x1)");
  if (backward_done_)
    throw std::logic_error("backward: tape already consumed; call reset() first");
  backward_done_ = true;
  loss.node()->accumulate(Mat::Ones(1, 1));
  // Ops whose output never received gradient are dead branches; skip them.
  for (auto it = ops_.rbegin(); it != ops_.rend(); ++it) {
    if (it->output->grad.size() != 0) it->backward();
  }
}

void Tape::reset() {
  ops_.clear();
  backward_done_ = false;
}

Mat glorot_uniform(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  std::uniform_real_distribution<double> dist(-limit, limit);
  Mat m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = dist(rng);
  return m;
}

}  // namespace mmp
