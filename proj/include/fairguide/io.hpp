#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fairguide/graph.hpp"

namespace fairguide {

// Dataset file names inside a dataset directory.
inline constexpr const char* kEdgeFile = "edges.tsv";
inline constexpr const char* kFeatureFile = "features.csv";
inline constexpr const char* kSensitiveFile = "sensitive.txt";
inline constexpr const char* kLabelFile = "labels.txt";

// Edge list: one "i<TAB>j" per line, '#' starts a comment. Directed input is
// symmetrized; reciprocal pairs and duplicates collapse to one edge.
// Features: CSV, row r = node r, optional header. Sensitive: one 0/1 per
// line. Labels: one integer per line, -1 = unlabeled.
Graph load_graph(const std::string& edge_path, const std::string& feature_path,
                 const std::string& sensitive_path,
                 const std::optional<std::string>& label_path = std::nullopt);

// Loads all four files from a dataset directory (labels optional on disk).
Graph load_dataset(const std::string& dir);

void save_edges(const Graph& g, const std::string& path);
void save_dataset(const Graph& g, const std::string& dir);

// Addition log: "# iteration k" headers followed by "i<TAB>j" lines.
void save_additions(const std::vector<EdgeBatch>& batches,
                    const std::string& path);
std::vector<EdgeBatch> load_additions(const std::string& path);

// Low-level helpers shared by the writers; fixed formatting keeps repeated
// runs byte-identical.
std::string format_double(double v);
void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace fairguide
