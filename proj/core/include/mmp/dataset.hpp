#pragma once

#include "mmp/graph.hpp"

#include <filesystem>
#include <optional>
#include <string>

namespace mmp {

struct DatasetBundle {
  std::string name;
  Graph graph;
  std::string provenance;
  // Input edges that were dropped as duplicates or self-loops while loading.
  std::size_t dropped_edges = 0;
};

// Canonical on-disk bundle:
//   nodes.tsv  one node per line: id<TAB>label<TAB>f_1 f_2 ... f_d
//   edges.tsv  one edge per line: src<TAB>dst (listing (j,i) too is accepted)
//   meta.json  {"name", "num_nodes", "feature_dim", "num_classes"}
DatasetBundle load_dataset(const std::filesystem::path& dir, bool row_normalize = false);

void save_dataset(const std::filesystem::path& dir, const std::string& name, const Graph& g);

enum class RawFormat { kPlanetoidText, kWebkbText };

std::optional<RawFormat> parse_format_tag(const std::string& tag);

// Converts a raw text distribution into a canonical bundle at out_dir.
//   planetoid-text: <name>.content (id<TAB>f...<TAB>label) + <name>.cites
//   webkb-text: out1_node_feature_label.txt + out1_graph_edges.txt (Geom-GCN layout)
void convert_external(const std::filesystem::path& raw_dir, RawFormat format,
                      const std::filesystem::path& out_dir, const std::string& name);

}  // namespace mmp
