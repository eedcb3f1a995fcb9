// Acceptance gate: one self-contained check per shipping criterion, each
// printing exactly one PASS/FAIL line. Run with a criterion number 1-9 to
// execute a single check, or with no argument to run all of them.
//
// Criteria 3-7 exercise the published benchmark datasets. When a bundle is
// absent from the data directory the check fails with a BLOCKED diagnostic
// naming the missing bundle; it never silently skips or fabricates a result.

#include "mmp/dataset.hpp"
#include "mmp/graph.hpp"
#include "mmp/layers.hpp"
#include "mmp/losses.hpp"
#include "mmp/tensor.hpp"
#include "mmp/trainer.hpp"
#include "testutil.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace fs = std::filesystem;
using namespace mmp;
using testutil::finite_difference;
using testutil::max_rel_error;
using testutil::random_mat;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

fs::path data_dir() {
  if (const char* env = std::getenv("MMP_DATA_DIR")) return env;
  return "data";
}

std::optional<DatasetBundle> try_load(const std::string& name, std::string* why,
                                      bool row_normalize = false) {
  try {
    return load_dataset(data_dir() / name, row_normalize);
  } catch (const std::exception& e) {
    *why = e.what();
    return std::nullopt;
  }
}

std::string blocked(const std::vector<std::string>& names) {
  std::string out = "BLOCKED: dataset bundle(s) not found under '" + data_dir().string() + "': ";
  for (std::size_t i = 0; i < names.size(); ++i) out += (i ? ", " : "") + names[i];
  out += ". Obtain the raw distributions and run `mmp convert` to produce the bundles.";
  return out;
}

int default_jobs() {
  unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

// ---------------------------------------------------------------------------
// Criterion 1: gradient correctness of every differentiable op and of the
// full 2-layer GCN+MMP model, central finite differences, rel error < 1e-4.
// ---------------------------------------------------------------------------

// Scalarizes an op output by a fixed non-uniform weighting so every entry of
// the output contributes a distinct gradient path. The weights depend only on
// the output shape, so repeated evaluations of the same expression (as during
// finite differencing) see the same scalar function.
Tensor weighted_sum(Tape& tape, const Tensor& out) {
  Mat w(out.rows(), out.cols());
  for (Eigen::Index i = 0; i < w.rows(); ++i)
    for (Eigen::Index j = 0; j < w.cols(); ++j)
      w(i, j) = 0.3 + 0.05 * static_cast<double>((31 * i + 17 * j) % 13);
  return tape.sum(tape.mul(out, Tensor::constant(std::move(w))));
}

bool check_op(const std::string& name,
              const std::function<Tensor(Tape&, std::vector<Tensor>&)>& build,
              std::vector<Mat> inputs, std::string* failures, double tol = 1e-4,
              double floor = 1e-6) {
  auto eval = [&](const std::vector<Mat>& vals, std::vector<Tensor>* out_params) {
    Tape tape;
    std::vector<Tensor> params;
    params.reserve(vals.size());
    for (const auto& v : vals) params.push_back(Tensor::parameter(v));
    Tensor loss = build(tape, params);
    if (out_params) {
      tape.backward(loss);
      *out_params = params;
    }
    return loss.scalar();
  };

  std::vector<Tensor> params;
  eval(inputs, &params);
  bool ok = true;
  for (std::size_t which = 0; which < inputs.size(); ++which) {
    Mat analytic = params[which].grad();
    auto f = [&](const Mat& v) {
      auto vals = inputs;
      vals[which] = v;
      return eval(vals, nullptr);
    };
    double err = max_rel_error(analytic, finite_difference(f, inputs[which]), floor);
    if (err >= tol) {
      ok = false;
      *failures += " " + name + "[arg" + std::to_string(which) + " err=" + fmt(err) + "]";
    }
  }
  return ok;
}

Outcome criterion_gradients() {
  auto start = std::chrono::steady_clock::now();
  Rng seed_rng(101);
  std::string failures;
  bool ok = true;
  auto g = testutil::random_graph(10, 8, 3, 0.3, 102);
  auto ctx = GraphContext::from_graph(g);

  auto m = [&](Eigen::Index r, Eigen::Index c, double lo = -1.0, double hi = 1.0) {
    return random_mat(r, c, seed_rng, lo, hi);
  };
  // Keep relu/leaky_relu/abs inputs away from their kinks.
  auto away = [&](Eigen::Index r, Eigen::Index c) {
    Mat x = m(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
      for (Eigen::Index j = 0; j < c; ++j)
        if (std::fabs(x(i, j)) < 0.05) x(i, j) = x(i, j) < 0 ? -0.05 : 0.05;
    return x;
  };
  ok &= check_op("matmul", [&](Tape& t, std::vector<Tensor>& p) {
    return weighted_sum(t, t.matmul(p[0], p[1]));
  }, {m(5, 4), m(4, 3)}, &failures);
  ok &= check_op("spmm", [&](Tape& t, std::vector<Tensor>& p) {
    return weighted_sum(t, t.spmm(ctx.norm.matrix, p[0]));
  }, {m(10, 8)}, &failures);
  ok &= check_op("add", [&](Tape& t, std::vector<Tensor>& p) {
    return weighted_sum(t, t.add(p[0], p[1]));
  }, {m(6, 4), m(6, 4)}, &failures);
  ok &= check_op("sub", [&](Tape& t, std::vector<Tensor>& p) {
    return weighted_sum(t, t.sub(p[0], p[1]));
  }, {m(6, 4), m(6, 4)}, &failures);
  ok &= check_op("mul", [&](Tape& t, std::vector<Tensor>& p) {
    return weighted_sum(t, t.mul(p[0], p[1]));
  }, {m(6, 4), m(6, 4)}, &failures);
  ok &= check_op("add_bias", [&](Tape& t, std::vector<Tensor>& p) {
    return weighted_sum(t, t.add_bias(p[0], p[1]));
  }, {m(6, 4), m(1, 4)}, &failures);
  ok &= check_op("scale_rows", [&](Tape& t, std::vector<Tensor>& p) {
    return weighted_sum(t, t.scale_rows(p[0], p[1]));
  }, {m(6, 4), m(6, 1)}, &failures);
  ok &= check_op("scale", [&](Tape& t, std::vector<Tensor>& p) {
    return weighted_sum(t, t.scale(p[0], 0.37));
  }, {m(6, 4)}, &failures);
  ok &= check_op("relu", [&](Tape& t, std::vector<Tensor>& p) {
    return weighted_sum(t, t.relu(p[0]));
  }, {away(6, 4)}, &failures);
  ok &= check_op("leaky_relu", [&](Tape& t, std::vector<Tensor>& p) {
    return weighted_sum(t, t.leaky_relu(p[0], 0.2));
  }, {away(6, 4)}, &failures);
  ok &= check_op("sigmoid", [&](Tape& t, std::vector<Tensor>& p) {
    return weighted_sum(t, t.sigmoid(p[0]));
  }, {m(6, 4)}, &failures);
  ok &= check_op("abs", [&](Tape& t, std::vector<Tensor>& p) {
    return weighted_sum(t, t.abs(p[0]));
  }, {away(6, 4)}, &failures);
  ok &= check_op("concat_cols", [&](Tape& t, std::vector<Tensor>& p) {
    return weighted_sum(t, t.concat_cols({p[0], p[1], p[2]}));
  }, {m(5, 2), m(5, 3), m(5, 1)}, &failures);
  ok &= check_op("slice_cols", [&](Tape& t, std::vector<Tensor>& p) {
    return weighted_sum(t, t.slice_cols(p[0], 1, 3));
  }, {m(5, 6)}, &failures);
  ok &= check_op("sum", [&](Tape& t, std::vector<Tensor>& p) {
    return t.sum(p[0]);
  }, {m(6, 4)}, &failures);
  ok &= check_op("dropout", [&](Tape& t, std::vector<Tensor>& p) {
    Rng fixed(7);  // identical mask across the perturbed evaluations
    return weighted_sum(t, t.dropout(p[0], 0.4, true, fixed));
  }, {m(6, 4)}, &failures);
  {
    std::vector<int> labels = {0, 2, 1, 0, 1, 2};
    std::vector<bool> mask = {true, true, false, true, true, true};
    ok &= check_op("softmax_cross_entropy", [&](Tape& t, std::vector<Tensor>& p) {
      return t.softmax_cross_entropy(p[0], labels, mask);
    }, {m(6, 3)}, &failures);
  }
  ok &= check_op("cosine_similarity_rows", [&](Tape& t, std::vector<Tensor>& p) {
    return weighted_sum(t, t.cosine_similarity_rows(p[0], p[1]));
  }, {m(6, 4), m(6, 4)}, &failures);
  ok &= check_op("attention_aggregate", [&](Tape& t, std::vector<Tensor>& p) {
    return weighted_sum(
        t, t.attention_aggregate(ctx.self_loop_structure, p[0], p[1], p[2], 0.2));
  }, {m(10, 4), m(10, 1), m(10, 1)}, &failures);

  // Full 2-layer GCN+MMP model including the decoupling terms. A slightly
  // larger rel-error floor absorbs finite-difference cancellation noise on
  // near-zero gradient entries of the deep composite loss.
  {
    ModelConfig cfg;
    cfg.hidden = 6;
    cfg.dropout = 0.0;
    cfg.wrapper = WrapperKind::kMmp;
    cfg.lambda = 0.7;
    Rng rng(104);
    Model model(cfg, 8, 3, rng);
    std::vector<bool> mask(10, true);
    std::vector<Mat> base = model.snapshot();

    auto eval = [&](const std::vector<Mat>& vals, std::size_t which, Mat* out_grad) {
      model.restore(vals);
      Tape tape;
      Rng r(0);
      auto fwd = model.forward(tape, ctx, Tensor::constant(g.features()), false, r);
      Tensor semi = tape.softmax_cross_entropy(fwd.logits, g.labels(), mask);
      Tensor dec = decoupling_loss(tape, fwd.states, false);
      Tensor total = final_loss(tape, semi, dec, cfg.lambda);
      if (out_grad) {
        for (auto& p : model.parameters()) p.zero_grad();
        tape.backward(total);
        *out_grad = model.parameters()[which].grad();
      }
      double v = total.scalar();
      model.restore(base);
      return v;
    };
    for (std::size_t which = 0; which < base.size(); ++which) {
      Mat analytic;
      eval(base, which, &analytic);
      auto f = [&](const Mat& v) {
        auto vals = base;
        vals[which] = v;
        return eval(vals, 0, nullptr);
      };
      double err = max_rel_error(analytic, finite_difference(f, base[which]), 1e-5);
      if (err >= 1e-4) {
        ok = false;
        failures += " model[param" + std::to_string(which) + " err=" + fmt(err) + "]";
      }
    }
  }

  double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (sec >= 60.0) {
    ok = false;
    failures += " runtime " + fmt(sec) + "s exceeds 60s budget";
  }
  if (ok)
    return {true, "all ops and the full GCN+MMP model match central finite differences "
                  "(rel err < 1e-4, " + fmt(sec) + "s)"};
  return {false, "finite-difference mismatches:" + failures};
}

// ---------------------------------------------------------------------------
// Criterion 2: GCN+MMP with bypass_memory equals plain GCN within 1e-12 on a
// 50-node random graph with shared weights.
// ---------------------------------------------------------------------------

Outcome criterion_degeneracy() {
  auto g = testutil::random_graph(50, 16, 4, 0.1, 201);
  auto ctx = GraphContext::from_graph(g);

  ModelConfig plain_cfg;
  plain_cfg.hidden = 12;
  plain_cfg.dropout = 0.0;
  Rng rng_a(202);
  Model plain(plain_cfg, 16, 4, rng_a);

  ModelConfig mmp_cfg = plain_cfg;
  mmp_cfg.wrapper = WrapperKind::kMmp;
  mmp_cfg.bypass_memory = true;
  Rng rng_b(203);
  Model wrapped(mmp_cfg, 16, 4, rng_b);

  // Copy shared weights across; the wrapped model additionally carries gate
  // parameters (2h x 3 and 1 x 3) that the bypass path never touches.
  auto plain_snap = plain.snapshot();
  auto wrapped_snap = wrapped.snapshot();
  std::size_t src = 0;
  for (auto& p : wrapped_snap) {
    bool gate_shape = (p.rows() == 2 * mmp_cfg.hidden && p.cols() == 3) ||
                      (p.rows() == 1 && p.cols() == 3);
    if (gate_shape) continue;
    p = plain_snap.at(src++);
  }
  if (src != plain_snap.size())
    return {false, "parameter layout mismatch between plain and wrapped models"};
  wrapped.restore(wrapped_snap);

  Tape ta, tb;
  Rng r1(0), r2(0);
  Mat a = plain.forward(ta, ctx, Tensor::constant(g.features()), false, r1).logits.value();
  Mat b = wrapped.forward(tb, ctx, Tensor::constant(g.features()), false, r2).logits.value();
  double diff = (a - b).cwiseAbs().maxCoeff();
  if (diff < 1e-12)
    return {true, "bypass-memory GCN+MMP equals plain GCN, max |diff| = " + fmt(diff)};
  return {false, "logit mismatch, max |diff| = " + fmt(diff) + " (tolerance 1e-12)"};
}

// ---------------------------------------------------------------------------
// Criterion 3: homophily of loaded datasets within +-0.02 of published values.
// ---------------------------------------------------------------------------

Outcome criterion_homophily() {
  const std::vector<std::pair<std::string, double>> expected = {
      {"texas", 0.11},     {"wisconsin", 0.21}, {"actor", 0.22},
      {"squirrel", 0.22},  {"chameleon", 0.23}, {"cornell", 0.30},
      {"citeseer", 0.74},  {"pubmed", 0.80},    {"cora", 0.81}};
  std::vector<std::string> missing;
  std::string mismatches, values;
  for (const auto& [name, want] : expected) {
    std::string why;
    auto bundle = try_load(name, &why);
    if (!bundle) {
      missing.push_back(name);
      continue;
    }
    double h = edge_homophily(bundle->graph);
    values += " " + name + "=" + fmt(h);
    if (std::fabs(h - want) > 0.02)
      mismatches += " " + name + " h=" + fmt(h) + " expected " + fmt(want) + "+-0.02";
  }
  if (!missing.empty()) return {false, blocked(missing)};
  if (mismatches.empty()) return {true, "all homophily ratios within +-0.02:" + values};
  return {false, "homophily out of band:" + mismatches};
}

// ---------------------------------------------------------------------------
// Criterion 4: plain GCN on Cora, 10 splits, mean test accuracy in [.84,.90].
// ---------------------------------------------------------------------------

Outcome criterion_cora_band() {
  std::string why;
  auto bundle = try_load("cora", &why, /*row_normalize=*/true);
  if (!bundle) return {false, blocked({"cora"})};
  ModelConfig cfg;
  cfg.seed = 1;
  auto splits = generate_splits(bundle->graph, 10, 0.48, 0.32, cfg.seed);
  auto summary = evaluate_splits(bundle->graph, splits, cfg, default_jobs());
  std::string stats = "Cora GCN mean=" + fmt(summary.mean) + " stdev=" + fmt(summary.stdev);
  if (summary.mean >= 0.84 && summary.mean <= 0.90)
    return {true, stats + " within [0.84, 0.90]"};
  return {false, stats + " outside [0.84, 0.90]"};
}

// ---------------------------------------------------------------------------
// Criteria 5-7 share one experiment driver.
// ---------------------------------------------------------------------------

const std::vector<double> kLambdaGrid = {0.0, 0.1, 0.2, 0.4, 0.6, 0.8, 1.0};

SplitSummary run_mmp(const Graph& g, const SplitSet& splits, std::uint64_t seed,
                     bool select_best_lambda, double* lambda_out = nullptr) {
  ModelConfig cfg;
  cfg.wrapper = WrapperKind::kMmp;
  cfg.seed = seed;
  cfg.lambda = select_best_lambda ? select_lambda(g, splits, cfg, kLambdaGrid, default_jobs())
                                  : 0.0;
  if (lambda_out) *lambda_out = cfg.lambda;
  return evaluate_splits(g, splits, cfg, default_jobs());
}

SplitSummary run_plain(const Graph& g, const SplitSet& splits, std::uint64_t seed) {
  ModelConfig cfg;
  cfg.seed = seed;
  return evaluate_splits(g, splits, cfg, default_jobs());
}

Outcome criterion_heterophily_gain() {
  std::vector<std::string> missing;
  std::string detail;
  bool ok = true;
  for (const std::string name : {"texas", "wisconsin"}) {
    std::string why;
    auto bundle = try_load(name, &why, /*row_normalize=*/true);
    if (!bundle) {
      missing.push_back(name);
      continue;
    }
    auto splits = generate_splits(bundle->graph, 10, 0.48, 0.32, 1);
    auto gcn = run_plain(bundle->graph, splits, 1);
    auto mmp = run_mmp(bundle->graph, splits, 1, /*select_best_lambda=*/true);
    double gain = mmp.mean - gcn.mean;
    detail += " " + name + ": GCN=" + fmt(gcn.mean) + " GCN+MMP=" + fmt(mmp.mean) +
              " delta=" + fmt(gain);
    if (gain < 0.10) ok = false;
  }
  if (!missing.empty()) return {false, blocked(missing)};
  if (ok) return {true, "GCN+MMP beats GCN by >= 10 points on both:" + detail};
  return {false, "improvement below 10 points:" + detail};
}

Outcome criterion_noise_robustness() {
  std::string why;
  auto bundle = try_load("cora", &why, /*row_normalize=*/true);
  if (!bundle) return {false, blocked({"cora"})};
  Graph noisy = add_random_edges(bundle->graph, 5.0, 42);
  auto splits = generate_splits(noisy, 10, 0.48, 0.32, 1);
  auto gcn = run_plain(noisy, splits, 1);
  auto mmp = run_mmp(noisy, splits, 1, /*select_best_lambda=*/true);
  std::string stats = "Cora +500% edges: GCN=" + fmt(gcn.mean) + " GCN+MMP=" + fmt(mmp.mean);
  if (mmp.mean > gcn.mean) return {true, stats};
  return {false, stats + " (expected GCN+MMP > GCN)"};
}

Outcome criterion_lambda_property() {
  std::string why;
  auto bundle = try_load("texas", &why, /*row_normalize=*/true);
  if (!bundle) return {false, blocked({"texas"})};
  auto splits = generate_splits(bundle->graph, 10, 0.48, 0.32, 1);
  double lambda = 0.0;
  auto best = run_mmp(bundle->graph, splits, 1, /*select_best_lambda=*/true, &lambda);
  auto zero = run_mmp(bundle->graph, splits, 1, /*select_best_lambda=*/false);
  std::string stats = "Texas MMP: lambda=" + fmt(lambda) + " mean=" + fmt(best.mean) +
                      " vs lambda=0 mean=" + fmt(zero.mean);
  if (best.mean >= zero.mean) return {true, stats};
  return {false, stats + " (soft criterion: investigate seed noise before rejecting)"};
}

// ---------------------------------------------------------------------------
// Criterion 8: two identical `classify --seed 7` invocations of the CLI emit
// byte-identical CSVs. The CLI path comes from $MMP_CLI.
// ---------------------------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Outcome criterion_determinism() {
  const char* cli = std::getenv("MMP_CLI");
  if (!cli) return {false, "MMP_CLI is not set; point it at the mmp CLI binary"};
  fs::path tmp = fs::temp_directory_path() / "mmp_acceptance_determinism";
  fs::remove_all(tmp);
  fs::create_directories(tmp);
  auto g = testutil::clustered_graph(40, 6, 2, 0.3, 0.05, 3.0, 61);
  save_dataset(tmp / "synthetic", "synthetic", g);

  auto run = [&](const fs::path& out) {
    std::string cmd = std::string("\"") + cli + "\" classify --dataset synthetic --data-dir \"" +
                      tmp.string() + "\" --wrapper mmp --lambda 0.2 --seed 7 --splits 3 " +
                      "--patience 10 --out \"" + out.string() + "\" > \"" +
                      (out.string() + ".log") + "\" 2>&1";
    return std::system(cmd.c_str());
  };
  fs::path out1 = tmp / "run1.csv", out2 = tmp / "run2.csv";
  if (run(out1) != 0 || run(out2) != 0)
    return {false, "classify run failed; see logs under " + tmp.string()};
  std::string a = slurp(out1), b = slurp(out2);
  if (a.empty()) return {false, "classify produced an empty CSV at " + out1.string()};
  if (a == b) return {true, "repeated classify --seed 7 runs emitted byte-identical CSVs (" +
                            std::to_string(a.size()) + " bytes)"};
  return {false, "CSV bytes differ between identical runs (" + out1.string() + " vs " +
                 out2.string() + ")"};
}

// ---------------------------------------------------------------------------
// Criterion 9: exact oracle equivalences within 1e-12 on small instances.
// ---------------------------------------------------------------------------

Outcome criterion_oracles() {
  std::string failures;

  // spmm vs dense matmul.
  {
    auto g = testutil::random_graph(50, 12, 3, 0.1, 901);
    auto norm = gcn_normalize(g);
    Rng rng(902);
    Mat x = random_mat(50, 12, rng);
    Tape tape;
    Mat sparse = tape.spmm(norm.matrix, Tensor::constant(x)).value();
    Mat dense = norm.matrix.densify() * x;
    double diff = (sparse - dense).cwiseAbs().maxCoeff();
    if (diff >= 1e-12) failures += " spmm-vs-dense diff=" + fmt(diff);
  }

  // Decoupling loss vs scalar brute force.
  {
    Rng rng(903);
    std::vector<LayerState> states;
    for (int l = 0; l < 3; ++l)
      states.push_back({Tensor::constant(random_mat(7, 5, rng)),
                        Tensor::constant(random_mat(7, 5, rng))});
    Tape tape;
    double got = decoupling_loss(tape, states, /*include_layer0=*/false).scalar();
    double want = 0.0;
    for (std::size_t l = 1; l < states.size(); ++l) {
      const Mat& c = states[l].memory.value();
      const Mat& h = states[l].hidden.value();
      for (Eigen::Index i = 0; i < c.rows(); ++i) {
        double dot = 0, nc = 0, nh = 0;
        for (Eigen::Index j = 0; j < c.cols(); ++j) {
          dot += c(i, j) * h(i, j);
          nc += c(i, j) * c(i, j);
          nh += h(i, j) * h(i, j);
        }
        want += std::fabs(dot / std::max(std::sqrt(nc) * std::sqrt(nh), 1e-8));
      }
    }
    if (std::fabs(got - want) >= 1e-12)
      failures += " decoupling-vs-bruteforce diff=" + fmt(std::fabs(got - want));
  }

  // Splits vs per-class counting.
  {
    auto g = testutil::random_graph(50, 4, 4, 0.1, 904);
    auto splits = generate_splits(g, 5, 0.48, 0.32, 905);
    for (const auto& s : splits) {
      std::vector<int> train_c(4, 0), val_c(4, 0), test_c(4, 0), total_c(4, 0);
      for (int lbl : g.labels()) ++total_c[lbl];
      for (auto i : s.train) ++train_c[g.labels()[i]];
      for (auto i : s.val) ++val_c[g.labels()[i]];
      for (auto i : s.test) ++test_c[g.labels()[i]];
      for (int c = 0; c < 4; ++c) {
        int want_train = static_cast<int>(std::lround(0.48 * total_c[c]));
        int want_val = static_cast<int>(std::lround(0.32 * total_c[c]));
        int want_test = total_c[c] - want_train - want_val;
        if (train_c[c] != want_train || val_c[c] != want_val || test_c[c] != want_test) {
          failures += " split-class-" + std::to_string(c) + " counts (" +
                      std::to_string(train_c[c]) + "," + std::to_string(val_c[c]) + "," +
                      std::to_string(test_c[c]) + ") want (" + std::to_string(want_train) + "," +
                      std::to_string(want_val) + "," + std::to_string(want_test) + ")";
          break;
        }
      }
      // Partition check: disjoint cover of all nodes.
      std::vector<int> seen(50, 0);
      for (auto i : s.train) ++seen[i];
      for (auto i : s.val) ++seen[i];
      for (auto i : s.test) ++seen[i];
      for (int i = 0; i < 50; ++i)
        if (seen[i] != 1) {
          failures += " split-not-a-partition node " + std::to_string(i);
          break;
        }
    }
  }

  if (failures.empty())
    return {true, "spmm, decoupling loss, and split generation all match their oracles exactly"};
  return {false, "oracle mismatches:" + failures};
}

struct Criterion {
  int id;
  const char* name;
  Outcome (*run)();
};

const Criterion kCriteria[] = {
    {1, "gradient correctness", criterion_gradients},
    {2, "degeneracy equivalence", criterion_degeneracy},
    {3, "homophily reproduction", criterion_homophily},
    {4, "homophilous accuracy band", criterion_cora_band},
    {5, "heterophilous improvement", criterion_heterophily_gain},
    {6, "noise robustness", criterion_noise_robustness},
    {7, "lambda regularization", criterion_lambda_property},
    {8, "determinism", criterion_determinism},
    {9, "oracle equivalence", criterion_oracles},
};

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  if (argc > 1) {
    only = std::atoi(argv[1]);
    if (only < 1 || only > 9) {
      std::cerr << "usage: " << argv[0] << " [criterion 1-9]\n";
      return 2;
    }
  }
  bool all_pass = true;
  for (const auto& c : kCriteria) {
    if (only != 0 && c.id != only) continue;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("unexpected exception: ") + e.what()};
    }
    all_pass &= o.pass;
    std::cout << "criterion " << c.id << " (" << c.name << "): " << (o.pass ? "PASS" : "FAIL")
              << " — " << o.detail << "\n";
  }
  return all_pass ? 0 : 1;
}
