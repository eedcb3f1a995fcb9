// Experiment CLI: node-classification runs, edge-noise robustness sweeps,
// lambda sensitivity sweeps, homophily reporting, dataset conversion.

#include <CLI11.hpp>

#include "mmp/dataset.hpp"
#include "mmp/graph.hpp"
#include "mmp/losses.hpp"
#include "mmp/trainer.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

namespace fs = std::filesystem;
using namespace mmp;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRunFailure = 1;
constexpr int kExitUsage = 2;

const std::vector<double> kLambdaGrid = {0.0, 0.1, 0.2, 0.4, 0.6, 0.8, 1.0};
const std::vector<double> kNoiseRatios = {0.0, 0.25, 0.5, 0.75, 1.0, 2.0, 3.0, 4.0, 5.0};

struct CommonOpts {
  std::string dataset;
  std::string data_dir;
  std::string conv = "gcn";
  std::string wrapper = "none";
  double lambda = 0.0;
  bool lambda_given = false;
  std::uint64_t seed = 0;
  int splits = 10;
  int patience = 100;
  int jobs = 1;
  bool row_normalize = false;
  bool include_layer0 = false;
  std::string out;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool needs_model = true) {
  cmd->add_option("--dataset", o.dataset, "Dataset bundle name under the data directory")
      ->required();
  cmd->add_option("--data-dir", o.data_dir,
                  "Directory holding dataset bundles (default: $MMP_DATA_DIR or ./data)");
  if (needs_model) {
    cmd->add_option("--conv", o.conv, "Convolution kind: gcn, gat, mlp")
        ->check(CLI::IsMember({"gcn", "gat", "mlp"}));
    cmd->add_option("--wrapper", o.wrapper, "Plug-in wrapper: none, mmp, jk, dropedge")
        ->check(CLI::IsMember({"none", "mmp", "jk", "dropedge"}));
    cmd->add_option("--lambda", o.lambda, "Decoupling regularization weight")
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--patience", o.patience, "Early-stop patience in epochs");
    cmd->add_option("--jobs", o.jobs, "Max parallel runs")->check(CLI::PositiveNumber);
    cmd->add_flag("--include-layer0-decouple", o.include_layer0,
                  "Include layer 0 in the decoupling loss");
  }
  cmd->add_option("--seed", o.seed, "Base RNG seed");
  cmd->add_option("--splits", o.splits, "Number of random splits")->check(CLI::PositiveNumber);
  cmd->add_flag("--row-normalize", o.row_normalize, "L1-normalize feature rows on load");
}

fs::path resolve_data_dir(const CommonOpts& o) {
  if (!o.data_dir.empty()) return o.data_dir;
  if (const char* env = std::getenv("MMP_DATA_DIR")) return env;
  return "data";
}

DatasetBundle load_bundle(const CommonOpts& o) {
  const fs::path dir = resolve_data_dir(o) / fs::path(o.dataset);
  if (!fs::exists(dir / "meta.json")) {
    throw CLI::ValidationError("--dataset", "no dataset bundle at " + dir.string());
  }
  auto bundle = load_dataset(dir, o.row_normalize);
  if (bundle.dropped_edges > 0) {
    std::cerr << "warning: dropped " << bundle.dropped_edges
              << " duplicate/self-loop edges while loading " << o.dataset << "\n";
  }
  return bundle;
}

ModelConfig make_config(const CommonOpts& o) {
  ModelConfig cfg;
  cfg.conv = parse_conv_kind(o.conv);
  cfg.wrapper = parse_wrapper_kind(o.wrapper);
  cfg.lambda = o.lambda;
  cfg.seed = o.seed;
  cfg.patience = o.patience;
  cfg.include_layer0_decouple = o.include_layer0;
  return cfg;
}

std::string model_name(const ModelConfig& cfg) {
  std::string s = to_string(cfg.conv);
  if (cfg.wrapper != WrapperKind::kNone) s += "+" + to_string(cfg.wrapper);
  return s;
}

std::string num(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

// Buffered so a failed run never leaves a partial CSV behind.
void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open output file " + path);
  f << content;
}

int cmd_classify(const CommonOpts& o, const std::vector<double>& lambda_grid) {
  auto bundle = load_bundle(o);
  ModelConfig cfg = make_config(o);
  auto splits = generate_splits(bundle.graph, o.splits, 0.48, 0.32, o.seed);

  if (cfg.wrapper == WrapperKind::kMmp && !o.lambda_given) {
    cfg.lambda = select_lambda(bundle.graph, splits, cfg,
                               lambda_grid.empty() ? kLambdaGrid : lambda_grid, o.jobs);
    std::cout << "selected lambda = " << num(cfg.lambda) << "\n";
  }
  auto summary = evaluate_splits(bundle.graph, splits, cfg, o.jobs);

  std::ostringstream csv;
  csv << "dataset,model,wrapper,lambda,split,test_acc,best_epoch,seed\n";
  for (std::size_t i = 0; i < summary.runs.size(); ++i) {
    const auto& r = summary.runs[i];
    csv << bundle.name << ',' << to_string(cfg.conv) << ',' << to_string(cfg.wrapper) << ','
        << num(cfg.lambda) << ',' << i << ',' << num(r.test_accuracy) << ',' << r.best_epoch
        << ',' << r.seed << '\n';
  }
  if (!o.out.empty()) write_file(o.out, csv.str());

  std::cout << "dataset=" << bundle.name << " model=" << model_name(cfg)
            << " lambda=" << num(cfg.lambda) << "\n";
  std::cout << "test accuracy mean=" << num(summary.mean) << " stdev=" << num(summary.stdev)
            << " over " << summary.runs.size() << " splits\n";
  return kExitOk;
}

int cmd_noise(const CommonOpts& o, std::vector<double> ratios) {
  auto bundle = load_bundle(o);
  ModelConfig cfg = make_config(o);
  if (ratios.empty()) ratios = kNoiseRatios;
  auto splits = generate_splits(bundle.graph, o.splits, 0.48, 0.32, o.seed);

  std::ostringstream csv;
  csv << "ratio,model,mean_acc,stdev\n";
  for (std::size_t ri = 0; ri < ratios.size(); ++ri) {
    std::vector<RunResult> runs(splits.size());
    std::vector<double> accs(splits.size());
    for (std::size_t si = 0; si < splits.size(); ++si) {
      // Per-split perturbation seed; ratio 0 reproduces the clean graph.
      const std::uint64_t noise_seed = o.seed + 7919 * (ri + 1) + si;
      Graph noisy = add_random_edges(bundle.graph, ratios[ri], noise_seed);
      ModelConfig c = cfg;
      c.seed = o.seed + si;
      runs[si] = train_once(noisy, splits[si], c);
      accs[si] = runs[si].test_accuracy;
    }
    double mean = 0.0;
    for (double a : accs) mean += a;
    mean /= static_cast<double>(accs.size());
    double ss = 0.0;
    for (double a : accs) ss += (a - mean) * (a - mean);
    const double stdev =
        accs.size() > 1 ? std::sqrt(ss / static_cast<double>(accs.size() - 1)) : 0.0;
    csv << num(ratios[ri]) << ',' << model_name(cfg) << ',' << num(mean) << ',' << num(stdev)
        << '\n';
    std::cout << "ratio=" << num(ratios[ri]) << " mean_acc=" << num(mean)
              << " stdev=" << num(stdev) << "\n";
  }
  if (!o.out.empty()) write_file(o.out, csv.str());
  return kExitOk;
}

int cmd_lambda_sweep(const CommonOpts& o, std::vector<double> grid) {
  auto bundle = load_bundle(o);
  ModelConfig cfg = make_config(o);
  if (grid.empty()) grid = kLambdaGrid;
  auto splits = generate_splits(bundle.graph, o.splits, 0.48, 0.32, o.seed);

  std::ostringstream csv;
  csv << "lambda,mean_acc,stdev\n";
  for (double lambda : grid) {
    ModelConfig c = cfg;
    c.lambda = lambda;
    auto summary = evaluate_splits(bundle.graph, splits, c, o.jobs);
    csv << num(lambda) << ',' << num(summary.mean) << ',' << num(summary.stdev) << '\n';
    std::cout << "lambda=" << num(lambda) << " mean_acc=" << num(summary.mean)
              << " stdev=" << num(summary.stdev) << "\n";
  }
  if (!o.out.empty()) write_file(o.out, csv.str());
  return kExitOk;
}

int cmd_homophily(const CommonOpts& o) {
  auto bundle = load_bundle(o);
  std::cout << bundle.name << " h=" << num(edge_homophily(bundle.graph)) << "\n";
  return kExitOk;
}

int cmd_convert(const std::string& format, const std::string& in_dir, const std::string& out_dir,
                std::string name) {
  auto fmt = parse_format_tag(format);
  if (!fmt) throw CLI::ValidationError("--format", "unknown format tag " + format);
  if (name.empty()) name = fs::path(out_dir).filename().string();
  convert_external(in_dir, *fmt, out_dir, name);
  std::cout << "wrote canonical bundle " << name << " to " << out_dir << "\n";
  return kExitOk;
}

// Reshapes a CSV into gnuplot-style blocks: one block per group value,
// rows "x y [err]" sorted numerically by x.
int cmd_plotdata(const std::string& in, const std::string& out, const std::string& group_col,
                 const std::string& x_col, const std::string& y_col, const std::string& err_col) {
  std::ifstream f(in);
  if (!f) throw std::runtime_error("cannot open " + in);
  std::string line;
  if (!std::getline(f, line)) throw std::runtime_error("empty CSV " + in);
  std::vector<std::string> header;
  {
    std::istringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) header.push_back(field);
  }
  auto col_index = [&](const std::string& name) -> int {
    if (name.empty()) return -1;
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<int>(i);
    throw std::runtime_error("no column '" + name + "' in " + in);
  };
  const int gi = col_index(group_col), xi = col_index(x_col), yi = col_index(y_col),
            ei = col_index(err_col);

  std::map<std::string, std::vector<std::vector<std::string>>> groups;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::istringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    groups[gi >= 0 ? fields[gi] : ""].push_back(fields);
  }
  std::ostringstream txt;
  for (auto& [key, rows] : groups) {
    std::sort(rows.begin(), rows.end(),
              [&](const auto& a, const auto& b) { return std::stod(a[xi]) < std::stod(b[xi]); });
    if (!key.empty()) txt << "# " << group_col << "=" << key << "\n";
    for (const auto& r : rows) {
      txt << r[xi] << ' ' << r[yi];
      if (ei >= 0) txt << ' ' << r[ei];
      txt << '\n';
    }
    txt << '\n';
  }
  if (out.empty())
    std::cout << txt.str();
  else
    write_file(out, txt.str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Memory-based message passing experiments"};
  app.require_subcommand(1);

  CommonOpts classify_opts, noise_opts, sweep_opts, hom_opts;
  std::vector<double> lambda_grid, noise_ratios, sweep_grid;

  auto* classify = app.add_subcommand("classify", "10-split node classification run");
  add_common(classify, classify_opts);
  classify->add_option("--lambda-grid", lambda_grid,
                       "Validation grid for lambda selection (wrapper=mmp)");
  classify->add_option("--out", classify_opts.out, "Per-split results CSV path");

  auto* noise = app.add_subcommand("noise", "Edge-addition robustness sweep");
  add_common(noise, noise_opts);
  noise->add_option("--ratios", noise_ratios, "Added-edge ratios (default 0..5 paper grid)");
  noise->add_option("--out", noise_opts.out, "noise.csv path");

  auto* sweep = app.add_subcommand("lambda-sweep", "Accuracy versus lambda");
  add_common(sweep, sweep_opts);
  sweep->add_option("--grid", sweep_grid, "Lambda grid (default paper grid)");
  sweep->add_option("--out", sweep_opts.out, "lambda.csv path");

  auto* hom = app.add_subcommand("homophily", "Print the edge homophily ratio");
  add_common(hom, hom_opts, /*needs_model=*/false);

  std::string cv_format, cv_in, cv_out, cv_name;
  auto* convert = app.add_subcommand("convert", "Convert a raw dataset to the canonical bundle");
  convert->add_option("--format", cv_format, "planetoid-text or webkb-text")->required();
  convert->add_option("--in", cv_in, "Raw dataset directory")->required();
  convert->add_option("--out", cv_out, "Output bundle directory")->required();
  convert->add_option("--name", cv_name, "Bundle name (default: output directory name)");

  std::string pd_in, pd_out, pd_group, pd_x, pd_y, pd_err;
  auto* plotdata = app.add_subcommand("plotdata", "Reshape a results CSV into gnuplot columns");
  plotdata->add_option("--in", pd_in, "Input CSV")->required();
  plotdata->add_option("--out", pd_out, "Output text file (default: stdout)");
  plotdata->add_option("--group", pd_group, "Column to split blocks on");
  plotdata->add_option("--x", pd_x, "X column")->required();
  plotdata->add_option("--y", pd_y, "Y column")->required();
  plotdata->add_option("--err", pd_err, "Optional error column");

  try {
    app.parse(argc, argv);
    classify_opts.lambda_given = classify->count("--lambda") > 0;

    if (classify->parsed()) return cmd_classify(classify_opts, lambda_grid);
    if (noise->parsed()) return cmd_noise(noise_opts, noise_ratios);
    if (sweep->parsed()) return cmd_lambda_sweep(sweep_opts, sweep_grid);
    if (hom->parsed()) return cmd_homophily(hom_opts);
    if (convert->parsed()) return cmd_convert(cv_format, cv_in, cv_out, cv_name);
    if (plotdata->parsed()) return cmd_plotdata(pd_in, pd_out, pd_group, pd_x, pd_y, pd_err);
    return kExitUsage;
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRunFailure;
  }
}
