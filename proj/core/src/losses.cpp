#include "mmp/losses.hpp"

#include <stdexcept>

namespace mmp {

Tensor semi_supervised_loss(Tape& tape, const Tensor& logits, const std::vector<int>& labels,
                            const std::vector<bool>& train_mask, bool mean_reduction) {
  return tape.softmax_cross_entropy(logits, labels, train_mask, mean_reduction);
}

Tensor decoupling_loss(Tape& tape, const std::vector<LayerState>& states, bool include_layer0,
                       double eps) {
  if (states.empty()) throw std::invalid_argument("decoupling_loss: no layer states");
  Tensor total;
  for (std::size_t l = include_layer0 ? 0 : 1; l < states.size(); ++l) {
    const LayerState& s = states[l];
    if (!s.memory.defined()) continue;
    Tensor term = tape.sum(tape.abs(tape.cosine_similarity_rows(s.memory, s.hidden, eps)));
    total = total.defined() ? tape.add(total, term) : term;
  }
  if (!total.defined()) return Tensor::constant(Mat::Zero(1, 1));
  return total;
}

Tensor final_loss(Tape& tape, const Tensor& semi, const Tensor& decouple, double lambda) {
  if (lambda < 0.0) throw std::invalid_argument("final_loss: lambda must be >= 0");
  if (lambda == 0.0) return semi;
  return tape.add(semi, tape.scale(decouple, lambda));
}

double accuracy(const Mat& logits, const std::vector<int>& labels,
                const std::vector<bool>& mask) {
  if (static_cast<Eigen::Index>(labels.size()) != logits.rows() ||
      static_cast<Eigen::Index>(mask.size()) != logits.rows())
    throw std::invalid_argument("accuracy: labels/mask length must equal row count");
  std::size_t total = 0, correct = 0;
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    if (!mask[i]) continue;
    ++total;
    Eigen::Index best = 0;
    for (Eigen::Index j = 1; j < logits.cols(); ++j)
      if (logits(i, j) > logits(i, best)) best = j;
    if (static_cast<int>(best) == labels[i]) ++correct;
  }
  if (total == 0) throw std::invalid_argument("accuracy: empty mask");
  return static_cast<double>(correct) / static_cast<double>(total);
}

}  // namespace mmp
