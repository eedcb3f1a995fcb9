#pragma once

#include "mmp/graph.hpp"
#include "mmp/tensor.hpp"

#include <memory>
#include <string>
#include <vector>

namespace mmp {

enum class ConvKind { kGcn, kGat, kMlp };
enum class WrapperKind { kNone, kMmp, kJk, kDropEdge };

ConvKind parse_conv_kind(const std::string& s);
WrapperKind parse_wrapper_kind(const std::string& s);
std::string to_string(ConvKind k);
std::string to_string(WrapperKind k);

// Everything a layer needs to aggregate over the current graph view. For
// DropEdge the context is rebuilt from the surviving edges each epoch.
struct GraphContext {
  NormalizedAdjacency norm;
  CsrMatrix self_loop_structure;  // symmetric adjacency + self-loops, for attention

  static GraphContext from_graph(const Graph& g);
};

// Per-layer hidden state; memory holds C and is defined only for MMP models.
struct LayerState {
  Tensor hidden;
  Tensor memory;
};

struct GcnLayer {
  Tensor weight;  // d_in x d_out
  Tensor bias;    // 1 x d_out
  bool use_relu = true;

  GcnLayer(Eigen::Index d_in, Eigen::Index d_out, Rng& rng, bool use_relu = true);
  // sigma(A_hat x W + b)
  Tensor forward(Tape& tape, const GraphContext& ctx, const Tensor& x) const;
  std::vector<Tensor> parameters() const { return {weight, bias}; }
};

struct GatLayer {
  std::vector<Tensor> head_weights;     // per head, d_in x (d_out/heads)
  std::vector<Tensor> head_attn_src;    // per head, (d_out/heads) x 1
  std::vector<Tensor> head_attn_dst;    // per head, (d_out/heads) x 1
  Tensor bias;                          // 1 x d_out
  double leaky_slope = 0.2;
  bool average_heads = false;           // concat when false
  bool use_relu = true;

  GatLayer(Eigen::Index d_in, Eigen::Index d_out, int heads, Rng& rng, bool use_relu = true,
           bool average_heads = false, double leaky_slope = 0.2);
  Tensor forward(Tape& tape, const GraphContext& ctx, const Tensor& x) const;
  std::vector<Tensor> parameters() const;
  Eigen::Index output_dim() const;
};

// Wraps a GCN or GAT layer so that propagation reads the memory cell: the
// inner convolution is applied to C, not H, and per-node scalar gates mix
// the result back into hidden state and memory.
struct MmpWrapper {
  std::shared_ptr<GcnLayer> inner_gcn;
  std::shared_ptr<GatLayer> inner_gat;
  Tensor gate_weight;  // 2d x 3
  Tensor gate_bias;    // 1 x 3
  // Debug switch: skip gates and memory, run the inner conv directly on H.
  bool bypass_memory = false;

  MmpWrapper(std::shared_ptr<GcnLayer> inner, Eigen::Index dim, Rng& rng);
  MmpWrapper(std::shared_ptr<GatLayer> inner, Eigen::Index dim, Rng& rng);

  LayerState forward(Tape& tape, const GraphContext& ctx, const LayerState& state, bool training,
                     double dropout_p, Rng& rng) const;
  std::vector<Tensor> parameters() const;
};

// H0 = x * proj (no activation), C0 = H0.
LayerState init_state(Tape& tape, const Tensor& x, const Tensor& proj);

// Column concatenation of all layer outputs, in layer order.
Tensor jk_combine(Tape& tape, const std::vector<Tensor>& layer_outputs);

struct ModelConfig {
  ConvKind conv = ConvKind::kGcn;
  WrapperKind wrapper = WrapperKind::kNone;
  int num_layers = 2;
  Eigen::Index hidden = 64;
  double dropout = 0.5;
  double lr = 0.05;
  double weight_decay = 0.0005;
  int max_epochs = 500;
  int patience = 100;
  double lambda = 0.0;
  std::uint64_t seed = 0;
  int gat_heads = 8;
  double dropedge_p = 0.5;
  bool include_layer0_decouple = false;
  bool mean_reduction = false;       // cross-entropy reduction; sum by default
  bool early_stop_on_loss = false;   // validation accuracy by default
  bool bypass_memory = false;
};

struct ForwardResult {
  Tensor logits;
  // One entry per conv layer, plus the initial state at index 0; memory
  // tensors are defined only for MMP models.
  std::vector<LayerState> states;
};

// Full model: projection, num_layers graph convolutions (optionally wrapped),
// and a linear classifier head. The same skeleton is used with and without
// the MMP wrapper so weights can be shared when comparing the two paths.
class Model {
 public:
  Model(const ModelConfig& cfg, Eigen::Index in_dim, int num_classes, Rng& rng);

  ForwardResult forward(Tape& tape, const GraphContext& ctx, const Tensor& x, bool training,
                        Rng& rng) const;
  std::vector<Tensor> parameters() const;
  const ModelConfig& config() const { return cfg_; }

  // Copies parameter values into / out of a snapshot (for best-epoch restore).
  std::vector<Mat> snapshot() const;
  void restore(const std::vector<Mat>& snap);

 private:
  ModelConfig cfg_;
  Tensor proj_;  // in_dim x hidden; undefined for MLP
  std::vector<std::shared_ptr<GcnLayer>> gcn_layers_;
  std::vector<std::shared_ptr<GatLayer>> gat_layers_;
  std::vector<MmpWrapper> wrappers_;
  // MLP path: two dense layers.
  Tensor mlp_w1_, mlp_b1_, mlp_w2_, mlp_b2_;
  Tensor head_weight_, head_bias_;
};

}  // namespace mmp
