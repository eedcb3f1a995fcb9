#include "mmp/layers.hpp"

#include <algorithm>
#include <stdexcept>

namespace mmp {

ConvKind parse_conv_kind(const std::string& s) {
  if (s == "gcn") return ConvKind::kGcn;
  if (s == "gat") return ConvKind::kGat;
  if (s == "mlp") return ConvKind::kMlp;
  throw std::invalid_argument("unknown conv kind: " + s);
}

WrapperKind parse_wrapper_kind(const std::string& s) {
  if (s == "none") return WrapperKind::kNone;
  if (s == "mmp") return WrapperKind::kMmp;
  if (s == "jk") return WrapperKind::kJk;
  if (s == "dropedge") return WrapperKind::kDropEdge;
  throw std::invalid_argument("unknown wrapper kind: " + s);
}

std::string to_string(ConvKind k) {
  switch (k) {
    case ConvKind::kGcn: return "gcn";
    case ConvKind::kGat: return "gat";
    case ConvKind::kMlp: return "mlp";
  }
  return "?";
}

std::string to_string(WrapperKind k) {
  switch (k) {
    case WrapperKind::kNone: return "none";
    case WrapperKind::kMmp: return "mmp";
    case WrapperKind::kJk: return "jk";
    case WrapperKind::kDropEdge: return "dropedge";
  }
  return "?";
}

GraphContext GraphContext::from_graph(const Graph& g) {
  GraphContext ctx;
  ctx.norm = gcn_normalize(g);
  // Attention softmax runs over N(i) plus self; reuse the normalized CSR's
  // sparsity pattern, which is exactly adjacency plus self-loops.
  ctx.self_loop_structure = ctx.norm.matrix;
  std::fill(ctx.self_loop_structure.weights.begin(), ctx.self_loop_structure.weights.end(), 1.0);
  return ctx;
}

GcnLayer::GcnLayer(Eigen::Index d_in, Eigen::Index d_out, Rng& rng, bool use_relu)
    : weight(Tensor::parameter(glorot_uniform(d_in, d_out, rng))),
      bias(Tensor::parameter(Mat::Zero(1, d_out))),
      use_relu(use_relu) {}

Tensor GcnLayer::forward(Tape& tape, const GraphContext& ctx, const Tensor& x) const {
  Tensor h = tape.add_bias(tape.matmul(tape.spmm(ctx.norm.matrix, x), weight), bias);
  return use_relu ? tape.relu(h) : h;
}

GatLayer::GatLayer(Eigen::Index d_in, Eigen::Index d_out, int heads, Rng& rng, bool use_relu,
                   bool average_heads, double leaky_slope)
    : leaky_slope(leaky_slope), average_heads(average_heads), use_relu(use_relu) {
  if (heads < 1) throw std::invalid_argument("GatLayer: heads must be >= 1");
  // Concatenation splits d_out across heads; averaging gives each head the
  // full width.
  Eigen::Index per_head = d_out;
  if (!average_heads) {
    if (d_out % heads != 0)
      throw std::invalid_argument("GatLayer: output dim not divisible by head count");
    per_head = d_out / heads;
  }
  for (int h = 0; h < heads; ++h) {
    head_weights.push_back(Tensor::parameter(glorot_uniform(d_in, per_head, rng)));
    head_attn_src.push_back(Tensor::parameter(glorot_uniform(per_head, 1, rng)));
    head_attn_dst.push_back(Tensor::parameter(glorot_uniform(per_head, 1, rng)));
  }
  bias = Tensor::parameter(Mat::Zero(1, d_out));
}

Tensor GatLayer::forward(Tape& tape, const GraphContext& ctx, const Tensor& x) const {
  std::vector<Tensor> outs;
  outs.reserve(head_weights.size());
  for (std::size_t h = 0; h < head_weights.size(); ++h) {
    Tensor wh = tape.matmul(x, head_weights[h]);
    Tensor s_src = tape.matmul(wh, head_attn_src[h]);
    Tensor s_dst = tape.matmul(wh, head_attn_dst[h]);
    outs.push_back(
        tape.attention_aggregate(ctx.self_loop_structure, wh, s_src, s_dst, leaky_slope));
  }
  Tensor combined;
  if (average_heads) {
    combined = outs.front();
    for (std::size_t h = 1; h < outs.size(); ++h) combined = tape.add(combined, outs[h]);
    combined = tape.scale(combined, 1.0 / static_cast<double>(outs.size()));
  } else {
    combined = outs.size() == 1 ? outs.front() : tape.concat_cols(outs);
  }
  Tensor out = tape.add_bias(combined, bias);
  return use_relu ? tape.relu(out) : out;
}

std::vector<Tensor> GatLayer::parameters() const {
  std::vector<Tensor> ps;
  for (std::size_t h = 0; h < head_weights.size(); ++h) {
    ps.push_back(head_weights[h]);
    ps.push_back(head_attn_src[h]);
    ps.push_back(head_attn_dst[h]);
  }
  ps.push_back(bias);
  return ps;
}

Eigen::Index GatLayer::output_dim() const { return bias.cols(); }

MmpWrapper::MmpWrapper(std::shared_ptr<GcnLayer> inner, Eigen::Index dim, Rng& rng)
    : inner_gcn(std::move(inner)),
      gate_weight(Tensor::parameter(glorot_uniform(2 * dim, 3, rng))),
      gate_bias(Tensor::parameter(Mat::Zero(1, 3))) {}

MmpWrapper::MmpWrapper(std::shared_ptr<GatLayer> inner, Eigen::Index dim, Rng& rng)
    : inner_gat(std::move(inner)),
      gate_weight(Tensor::parameter(glorot_uniform(2 * dim, 3, rng))),
      gate_bias(Tensor::parameter(Mat::Zero(1, 3))) {}

LayerState MmpWrapper::forward(Tape& tape, const GraphContext& ctx, const LayerState& state,
                               bool training, double dropout_p, Rng& rng) const {
  auto inner_forward = [&](const Tensor& in) {
    return inner_gcn ? inner_gcn->forward(tape, ctx, in) : inner_gat->forward(tape, ctx, in);
  };
  if (bypass_memory) {
    Tensor h = inner_forward(tape.dropout(state.hidden, dropout_p, training, rng));
    return LayerState{h, h};
  }
  // Propagation reads the memory cell, never the hidden state.
  Tensor message = inner_forward(tape.dropout(state.memory, dropout_p, training, rng));
  Tensor gate_in = tape.concat_cols({state.hidden, message});
  Tensor gates = tape.sigmoid(tape.add_bias(tape.matmul(gate_in, gate_weight), gate_bias));
  Tensor alpha_h = tape.slice_cols(gates, 0, 1);
  Tensor alpha_m = tape.slice_cols(gates, 1, 1);
  Tensor alpha_c = tape.slice_cols(gates, 2, 1);
  LayerState next;
  next.hidden = tape.add(tape.scale_rows(state.hidden, alpha_h), tape.scale_rows(message, alpha_m));
  next.memory = tape.scale_rows(message, alpha_c);
  return next;
}

std::vector<Tensor> MmpWrapper::parameters() const {
  std::vector<Tensor> ps = inner_gcn ? inner_gcn->parameters() : inner_gat->parameters();
  ps.push_back(gate_weight);
  ps.push_back(gate_bias);
  return ps;
}

LayerState init_state(Tape& tape, const Tensor& x, const Tensor& proj) {
  Tensor h0 = tape.matmul(x, proj);
  return LayerState{h0, h0};
}

Tensor jk_combine(Tape& tape, const std::vector<Tensor>& layer_outputs) {
  if (layer_outputs.empty()) throw std::invalid_argument("jk_combine: no layer outputs");
  if (layer_outputs.size() == 1) return layer_outputs.front();
  return tape.concat_cols(layer_outputs);
}

Model::Model(const ModelConfig& cfg, Eigen::Index in_dim, int num_classes, Rng& rng) : cfg_(cfg) {
  if (cfg.num_layers < 1) throw std::invalid_argument("Model: num_layers must be >= 1");
  if (cfg.conv == ConvKind::kMlp) {
    mlp_w1_ = Tensor::parameter(glorot_uniform(in_dim, cfg.hidden, rng));
    mlp_b1_ = Tensor::parameter(Mat::Zero(1, cfg.hidden));
    mlp_w2_ = Tensor::parameter(glorot_uniform(cfg.hidden, num_classes, rng));
    mlp_b2_ = Tensor::parameter(Mat::Zero(1, num_classes));
    return;
  }
  proj_ = Tensor::parameter(glorot_uniform(in_dim, cfg.hidden, rng));
  for (int l = 0; l < cfg.num_layers; ++l) {
    if (cfg.conv == ConvKind::kGcn) {
      auto layer = std::make_shared<GcnLayer>(cfg.hidden, cfg.hidden, rng);
      if (cfg.wrapper == WrapperKind::kMmp) {
        wrappers_.emplace_back(layer, cfg.hidden, rng);
        wrappers_.back().bypass_memory = cfg.bypass_memory;
      }
      gcn_layers_.push_back(std::move(layer));
    } else {
      auto layer = std::make_shared<GatLayer>(cfg.hidden, cfg.hidden, cfg.gat_heads, rng);
      if (cfg.wrapper == WrapperKind::kMmp) {
        wrappers_.emplace_back(layer, cfg.hidden, rng);
        wrappers_.back().bypass_memory = cfg.bypass_memory;
      }
      gat_layers_.push_back(std::move(layer));
    }
  }
  const Eigen::Index head_in =
      cfg.wrapper == WrapperKind::kJk ? cfg.hidden * cfg.num_layers : cfg.hidden;
  head_weight_ = Tensor::parameter(glorot_uniform(head_in, num_classes, rng));
  head_bias_ = Tensor::parameter(Mat::Zero(1, num_classes));
}

ForwardResult Model::forward(Tape& tape, const GraphContext& ctx, const Tensor& x, bool training,
                             Rng& rng) const {
  ForwardResult res;
  if (cfg_.conv == ConvKind::kMlp) {
    Tensor h = tape.dropout(x, cfg_.dropout, training, rng);
    h = tape.relu(tape.add_bias(tape.matmul(h, mlp_w1_), mlp_b1_));
    res.states.push_back(LayerState{h, Tensor{}});
    h = tape.dropout(h, cfg_.dropout, training, rng);
    res.logits = tape.add_bias(tape.matmul(h, mlp_w2_), mlp_b2_);
    return res;
  }

  Tensor xin = tape.dropout(x, cfg_.dropout, training, rng);
  if (cfg_.wrapper == WrapperKind::kMmp) {
    LayerState state = init_state(tape, xin, proj_);
    res.states.push_back(state);
    for (const auto& wrapper : wrappers_) {
      state = wrapper.forward(tape, ctx, state, training, cfg_.dropout, rng);
      res.states.push_back(state);
    }
    Tensor head_in = tape.dropout(state.hidden, cfg_.dropout, training, rng);
    res.logits = tape.add_bias(tape.matmul(head_in, head_weight_), head_bias_);
    return res;
  }

  Tensor h = tape.matmul(xin, proj_);
  res.states.push_back(LayerState{h, Tensor{}});
  std::vector<Tensor> layer_outputs;
  for (int l = 0; l < cfg_.num_layers; ++l) {
    Tensor hin = tape.dropout(h, cfg_.dropout, training, rng);
    h = cfg_.conv == ConvKind::kGcn ? gcn_layers_[l]->forward(tape, ctx, hin)
                                    : gat_layers_[l]->forward(tape, ctx, hin);
    res.states.push_back(LayerState{h, Tensor{}});
    layer_outputs.push_back(h);
  }
  Tensor head_in = cfg_.wrapper == WrapperKind::kJk ? jk_combine(tape, layer_outputs) : h;
  head_in = tape.dropout(head_in, cfg_.dropout, training, rng);
  res.logits = tape.add_bias(tape.matmul(head_in, head_weight_), head_bias_);
  return res;
}

std::vector<Tensor> Model::parameters() const {
  std::vector<Tensor> ps;
  if (cfg_.conv == ConvKind::kMlp) return {mlp_w1_, mlp_b1_, mlp_w2_, mlp_b2_};
  ps.push_back(proj_);
  if (cfg_.wrapper == WrapperKind::kMmp) {
    for (const auto& w : wrappers_) {
      auto sub = w.parameters();
      ps.insert(ps.end(), sub.begin(), sub.end());
    }
  } else {
    for (const auto& l : gcn_layers_) {
      auto sub = l->parameters();
      ps.insert(ps.end(), sub.begin(), sub.end());
    }
    for (const auto& l : gat_layers_) {
      auto sub = l->parameters();
      ps.insert(ps.end(), sub.begin(), sub.end());
    }
  }
  ps.push_back(head_weight_);
  ps.push_back(head_bias_);
  return ps;
}

std::vector<Mat> Model::snapshot() const {
  std::vector<Mat> snap;
  for (const Tensor& p : parameters()) snap.push_back(p.value());
  return snap;
}

void Model::restore(const std::vector<Mat>& snap) {
  auto ps = parameters();
  if (snap.size() != ps.size()) throw std::invalid_argument("Model::restore: snapshot size mismatch");
  for (std::size_t i = 0; i < ps.size(); ++i) ps[i].value() = snap[i];
}

}  // namespace mmp
