#pragma once

#include "mmp/layers.hpp"
#include "mmp/tensor.hpp"

#include <vector>

namespace mmp {

// Cross-entropy over the training mask; sum reduction matches the objective
// used for reporting, mean is offered for learning-rate portability.
Tensor semi_supervised_loss(Tape& tape, const Tensor& logits, const std::vector<int>& labels,
                            const std::vector<bool>& train_mask, bool mean_reduction = false);

// Sum over nodes and layers of |cosine(C_i^l, H_i^l)|. Layer 0 is excluded by
// default (C^0 = H^0 makes it a constant n); states without a memory tensor
// contribute nothing.
Tensor decoupling_loss(Tape& tape, const std::vector<LayerState>& states,
                       bool include_layer0 = false, double eps = 1e-8);

// semi + lambda * decouple; returns semi untouched when lambda == 0.
Tensor final_loss(Tape& tape, const Tensor& semi, const Tensor& decouple, double lambda);

// Fraction of masked nodes whose argmax logit matches the label; ties go to
// the lowest class index.
double accuracy(const Mat& logits, const std::vector<int>& labels, const std::vector<bool>& mask);

}  // namespace mmp
