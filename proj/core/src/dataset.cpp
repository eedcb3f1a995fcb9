#include "mmp/dataset.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <map>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace mmp {

namespace {

using json = nlohmann::json;

std::string shortest_repr(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::vector<std::string> split_on(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, sep)) out.push_back(field);
  return out;
}

std::ifstream open_or_throw(const std::filesystem::path& p) {
  std::ifstream f(p);
  if (!f) throw std::runtime_error("missing file: " + p.string());
  return f;
}

struct RawNode {
  std::string id;
  std::vector<double> features;
  std::string label;
};

// Shared tail of both converters: assign indices in file order, map label
// strings to classes in sorted order, symmetrize edges, write the bundle.
void write_canonical(const std::filesystem::path& out_dir, const std::string& name,
                     const std::vector<RawNode>& nodes,
                     const std::vector<std::pair<std::string, std::string>>& raw_edges) {
  if (nodes.empty()) throw std::runtime_error("convert: no nodes in input");
  const std::size_t dim = nodes.front().features.size();
  std::map<std::string, std::int32_t> index;
  std::map<std::string, int> label_ids;
  for (const auto& nd : nodes) {
    if (nd.features.size() != dim)
      throw std::runtime_error("convert: ragged feature row for node " + nd.id);
    if (!index.emplace(nd.id, static_cast<std::int32_t>(index.size())).second)
      throw std::runtime_error("convert: duplicate node id " + nd.id);
    label_ids.emplace(nd.label, 0);
  }
  int next = 0;
  for (auto& [_, cls] : label_ids) cls = next++;

  std::filesystem::create_directories(out_dir);
  std::ofstream nf(out_dir / "nodes.tsv");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    nf << i << '\t' << label_ids.at(nodes[i].label) << '\t';
    for (std::size_t j = 0; j < dim; ++j) {
      if (j) nf << ' ';
      nf << shortest_repr(nodes[i].features[j]);
    }
    nf << '\n';
  }
  std::ofstream ef(out_dir / "edges.tsv");
  std::set<std::pair<std::int32_t, std::int32_t>> seen;
  for (const auto& [a, b] : raw_edges) {
    auto ia = index.find(a), ib = index.find(b);
    if (ia == index.end()) throw std::runtime_error("convert: edge references unknown node " + a);
    if (ib == index.end()) throw std::runtime_error("convert: edge references unknown node " + b);
    std::int32_t u = ia->second, v = ib->second;
    if (u == v) continue;
    if (u > v) std::swap(u, v);
    if (seen.insert({u, v}).second) ef << u << '\t' << v << '\n';
  }
  json meta = {{"name", name},
               {"num_nodes", nodes.size()},
               {"feature_dim", dim},
               {"num_classes", label_ids.size()}};
  std::ofstream mf(out_dir / "meta.json");
  mf << meta.dump(2) << '\n';
}

void convert_planetoid_text(const std::filesystem::path& raw_dir,
                            const std::filesystem::path& out_dir, const std::string& name) {
  std::filesystem::path content, cites;
  for (const auto& e : std::filesystem::directory_iterator(raw_dir)) {
    if (e.path().extension() == ".content") content = e.path();
    if (e.path().extension() == ".cites") cites = e.path();
  }
  if (content.empty() || cites.empty())
    throw std::runtime_error("planetoid-text: expected *.content and *.cites in " +
                             raw_dir.string());
  std::vector<RawNode> nodes;
  {
    auto f = open_or_throw(content);
    std::string line;
    while (std::getline(f, line)) {
      if (line.empty()) continue;
      auto fields = split_on(line, '\t');
      if (fields.size() < 3)
        throw std::runtime_error("planetoid-text: malformed content line: " + line);
      RawNode nd;
      nd.id = fields.front();
      nd.label = fields.back();
      for (std::size_t i = 1; i + 1 < fields.size(); ++i) nd.features.push_back(std::stod(fields[i]));
      nodes.push_back(std::move(nd));
    }
  }
  std::vector<std::pair<std::string, std::string>> edges;
  {
    auto f = open_or_throw(cites);
    std::string line;
    while (std::getline(f, line)) {
      if (line.empty()) continue;
      auto fields = split_on(line, '\t');
      if (fields.size() != 2) throw std::runtime_error("planetoid-text: malformed cite: " + line);
      edges.emplace_back(fields[0], fields[1]);
    }
  }
  write_canonical(out_dir, name, nodes, edges);
}

void convert_webkb_text(const std::filesystem::path& raw_dir,
                        const std::filesystem::path& out_dir, const std::string& name) {
  std::vector<RawNode> nodes;
  {
    auto f = open_or_throw(raw_dir / "out1_node_feature_label.txt");
    std::string line;
    std::getline(f, line);  // header: node_id<TAB>feature<TAB>label
    while (std::getline(f, line)) {
      if (line.empty()) continue;
      auto fields = split_on(line, '\t');
      if (fields.size() != 3) throw std::runtime_error("webkb-text: malformed node line: " + line);
      RawNode nd;
      nd.id = fields[0];
      for (const auto& v : split_on(fields[1], ',')) nd.features.push_back(std::stod(v));
      nd.label = fields[2];
      nodes.push_back(std::move(nd));
    }
  }
  std::vector<std::pair<std::string, std::string>> edges;
  {
    auto f = open_or_throw(raw_dir / "out1_graph_edges.txt");
    std::string line;
    std::getline(f, line);  // header
    while (std::getline(f, line)) {
      if (line.empty()) continue;
      auto fields = split_on(line, '\t');
      if (fields.size() != 2) throw std::runtime_error("webkb-text: malformed edge line: " + line);
      edges.emplace_back(fields[0], fields[1]);
    }
  }
  write_canonical(out_dir, name, nodes, edges);
}

}  // namespace

DatasetBundle load_dataset(const std::filesystem::path& dir, bool row_normalize) {
  json meta;
  {
    auto f = open_or_throw(dir / "meta.json");
    f >> meta;
  }
  const auto n = meta.at("num_nodes").get<Eigen::Index>();
  const auto dim = meta.at("feature_dim").get<Eigen::Index>();
  const int num_classes = meta.at("num_classes").get<int>();
  const auto name = meta.at("name").get<std::string>();

  Mat features = Mat::Zero(n, dim);
  std::vector<int> labels(n, -1);
  std::vector<bool> present(n, false);
  {
    auto f = open_or_throw(dir / "nodes.tsv");
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(f, line)) {
      ++lineno;
      if (line.empty()) continue;
      auto fields = split_on(line, '\t');
      if (fields.size() != 3)
        throw std::runtime_error("nodes.tsv:" + std::to_string(lineno) + ": expected 3 fields");
      const long id = std::stol(fields[0]);
      if (id < 0 || id >= n)
        throw std::runtime_error("nodes.tsv:" + std::to_string(lineno) + ": node id out of range");
      const int label = std::stoi(fields[1]);
      if (label < 0 || label >= num_classes)
        throw std::runtime_error("nodes.tsv:" + std::to_string(lineno) + ": label " +
                                 std::to_string(label) + " out of declared range");
      std::istringstream fs(fields[2]);
      double v;
      Eigen::Index j = 0;
      while (fs >> v) {
        if (j >= dim)
          throw std::runtime_error("nodes.tsv:" + std::to_string(lineno) + ": ragged feature row");
        features(id, j++) = v;
      }
      if (j != dim)
        throw std::runtime_error("nodes.tsv:" + std::to_string(lineno) + ": ragged feature row");
      labels[id] = label;
      present[id] = true;
    }
  }
  for (Eigen::Index i = 0; i < n; ++i)
    if (!present[i]) throw std::runtime_error("nodes.tsv: node " + std::to_string(i) + " missing");

  std::vector<std::pair<std::int32_t, std::int32_t>> edges;
  std::size_t dropped = 0;
  {
    auto f = open_or_throw(dir / "edges.tsv");
    std::string line;
    std::size_t lineno = 0;
    std::set<std::pair<std::int32_t, std::int32_t>> seen;
    while (std::getline(f, line)) {
      ++lineno;
      if (line.empty()) continue;
      auto fields = split_on(line, '\t');
      if (fields.size() != 2)
        throw std::runtime_error("edges.tsv:" + std::to_string(lineno) + ": expected 2 fields");
      const long a = std::stol(fields[0]), b = std::stol(fields[1]);
      if (a < 0 || a >= n || b < 0 || b >= n)
        throw std::runtime_error("edges.tsv:" + std::to_string(lineno) +
                                 ": node id absent from nodes.tsv");
      if (a == b) {
        ++dropped;
        continue;
      }
      auto u = static_cast<std::int32_t>(std::min(a, b));
      auto v = static_cast<std::int32_t>(std::max(a, b));
      if (seen.insert({u, v}).second)
        edges.emplace_back(u, v);
      else
        ++dropped;
    }
  }

  if (row_normalize) {
    // L1 row normalization; all-zero rows stay zero.
    for (Eigen::Index i = 0; i < n; ++i) {
      const double s = features.row(i).cwiseAbs().sum();
      if (s > 0.0) features.row(i) /= s;
    }
  }

  return DatasetBundle{name, Graph(std::move(features), std::move(labels), num_classes,
                                   std::move(edges)),
                       "loaded from " + dir.string(), dropped};
}

void save_dataset(const std::filesystem::path& dir, const std::string& name, const Graph& g) {
  std::filesystem::create_directories(dir);
  std::ofstream nf(dir / "nodes.tsv");
  for (Eigen::Index i = 0; i < g.num_nodes(); ++i) {
    nf << i << '\t' << g.labels()[i] << '\t';
    for (Eigen::Index j = 0; j < g.feature_dim(); ++j) {
      if (j) nf << ' ';
      nf << shortest_repr(g.features()(i, j));
    }
    nf << '\n';
  }
  std::ofstream ef(dir / "edges.tsv");
  for (auto [a, b] : g.edges()) ef << a << '\t' << b << '\n';
  json meta = {{"name", name},
               {"num_nodes", g.num_nodes()},
               {"feature_dim", g.feature_dim()},
               {"num_classes", g.num_classes()}};
  std::ofstream mf(dir / "meta.json");
  mf << meta.dump(2) << '\n';
}

std::optional<RawFormat> parse_format_tag(const std::string& tag) {
  if (tag == "planetoid-text") return RawFormat::kPlanetoidText;
  if (tag == "webkb-text") return RawFormat::kWebkbText;
  return std::nullopt;
}

void convert_external(const std::filesystem::path& raw_dir, RawFormat format,
                      const std::filesystem::path& out_dir, const std::string& name) {
  switch (format) {
    case RawFormat::kPlanetoidText:
      convert_planetoid_text(raw_dir, out_dir, name);
      return;
    case RawFormat::kWebkbText:
      convert_webkb_text(raw_dir, out_dir, name);
      return;
  }
  throw std::runtime_error("convert: unknown format tag");
}

}  // namespace mmp
