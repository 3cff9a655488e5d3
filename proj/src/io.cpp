#include "fairguide/io.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fairguide {

namespace {

std::string strip(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

long parse_long(const std::string& tok, const std::string& path, int line_no) {
  long v = 0;
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || p != tok.data() + tok.size())
    throw ValidationError(path + ":" + std::to_string(line_no) +
                          ": malformed integer '" + tok + "'");
  return v;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  return in;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot open " + path + " for writing");
  out << content;
  out.close();
  if (!out) throw ValidationError("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Graph load_graph(const std::string& edge_path, const std::string& feature_path,
                 const std::string& sensitive_path,
                 const std::optional<std::string>& label_path) {
  // Features first: the row count fixes N.
  std::vector<std::vector<double>> rows;
  {
    auto in = open_input(feature_path);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      std::string s = strip(line);
      if (s.empty()) continue;
      std::vector<double> row;
      std::stringstream ls(s);
      std::string tok;
      bool numeric = true;
      while (std::getline(ls, tok, ',')) {
        tok = strip(tok);
        try {
          std::size_t used = 0;
          double v = std::stod(tok, &used);
          if (used != tok.size()) throw std::invalid_argument(tok);
          row.push_back(v);
        } catch (const std::exception&) {
          numeric = false;
          break;
        }
      }
      if (!numeric) {
        if (line_no == 1) continue;  // header row
        throw ValidationError(feature_path + ":" + std::to_string(line_no) +
                              ": malformed float");
      }
      if (!rows.empty() && row.size() != rows.front().size())
        throw ValidationError(feature_path + ":" + std::to_string(line_no) +
                              ": inconsistent column count");
      rows.push_back(std::move(row));
    }
  }
  const int n = static_cast<int>(rows.size());
  if (n == 0) throw ValidationError(feature_path + ": no feature rows");
  const int m = static_cast<int>(rows.front().size());
  Mat features(n, m);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) features(i, j) = rows[i][j];

  std::vector<std::pair<int, int>> pairs;
  {
    auto in = open_input(edge_path);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      auto hash = line.find('#');
      if (hash != std::string::npos) line = line.substr(0, hash);
      std::string s = strip(line);
      if (s.empty()) continue;
      std::stringstream ls(s);
      std::string a, b, extra;
      if (!(ls >> a >> b) || (ls >> extra))
        throw ValidationError(edge_path + ":" + std::to_string(line_no) +
                              ": expected 'i<TAB>j'");
      long u = parse_long(a, edge_path, line_no);
      long v = parse_long(b, edge_path, line_no);
      if (u < 0 || u >= n)
        throw ValidationError(edge_path + ":" + std::to_string(line_no) +
                              ": node " + std::to_string(u) + " out of range");
      if (v < 0 || v >= n)
        throw ValidationError(edge_path + ":" + std::to_string(line_no) +
                              ": node " + std::to_string(v) + " out of range");
      if (u == v)
        throw ValidationError(edge_path + ":" + std::to_string(line_no) +
                              ": self-loop at node " + std::to_string(u));
      pairs.emplace_back(static_cast<int>(u), static_cast<int>(v));
    }
  }

  std::vector<int> sensitive;
  {
    auto in = open_input(sensitive_path);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      std::string s = strip(line);
      if (s.empty()) continue;
      long v = parse_long(s, sensitive_path, line_no);
      if (v != 0 && v != 1)
        throw ValidationError(sensitive_path + ":" + std::to_string(line_no) +
                              ": sensitive value outside {0,1}");
      sensitive.push_back(static_cast<int>(v));
    }
    if (static_cast<int>(sensitive.size()) != n)
      throw ValidationError(sensitive_path + ": expected " +
                            std::to_string(n) + " lines, got " +
                            std::to_string(sensitive.size()));
  }

  std::vector<int> labels;
  if (label_path) {
    auto in = open_input(*label_path);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      std::string s = strip(line);
      if (s.empty()) continue;
      long v = parse_long(s, *label_path, line_no);
      if (v < -1)
        throw ValidationError(*label_path + ":" + std::to_string(line_no) +
                              ": label below -1");
      labels.push_back(static_cast<int>(v));
    }
    if (static_cast<int>(labels.size()) != n)
      throw ValidationError(*label_path + ": expected " + std::to_string(n) +
                            " lines, got " + std::to_string(labels.size()));
  }

  return make_graph(n, pairs, std::move(features), std::move(sensitive),
                    std::move(labels));
}

Graph load_dataset(const std::string& dir) {
  namespace fs = std::filesystem;
  fs::path base(dir);
  std::optional<std::string> labels;
  if (fs::exists(base / kLabelFile)) labels = (base / kLabelFile).string();
  return load_graph((base / kEdgeFile).string(), (base / kFeatureFile).string(),
                    (base / kSensitiveFile).string(), labels);
}

void save_edges(const Graph& g, const std::string& path) {
  std::string out;
  out.reserve(static_cast<std::size_t>(g.num_edges) * 12);
  for (auto [i, j] : g.edges()) {
    out += std::to_string(i);
    out += '\t';
    out += std::to_string(j);
    out += '\n';
  }
  write_text_file(path, out);
}

void save_dataset(const Graph& g, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::path base(dir);
  std::error_code ec;
  fs::create_directories(base, ec);
  save_edges(g, (base / kEdgeFile).string());

  std::string feat;
  const int m = static_cast<int>(g.features.cols());
  for (int j = 0; j < m; ++j) {
    if (j) feat += ',';
    feat += "f" + std::to_string(j);
  }
  feat += '\n';
  for (int i = 0; i < g.num_nodes; ++i) {
    for (int j = 0; j < m; ++j) {
      if (j) feat += ',';
      feat += format_double(g.features(i, j));
    }
    feat += '\n';
  }
  write_text_file((base / kFeatureFile).string(), feat);

  std::string sens;
  for (int i = 0; i < g.num_nodes; ++i) {
    sens += std::to_string(g.sensitive[i]);
    sens += '\n';
  }
  write_text_file((base / kSensitiveFile).string(), sens);

  if (g.has_labels()) {
    std::string lab;
    for (int i = 0; i < g.num_nodes; ++i) {
      lab += std::to_string(g.labels[i]);
      lab += '\n';
    }
    write_text_file((base / kLabelFile).string(), lab);
  }
}

void save_additions(const std::vector<EdgeBatch>& batches,
                    const std::string& path) {
  std::string out;
  for (const auto& batch : batches) {
    out += "# iteration " + std::to_string(batch.iteration_index) + "\n";
    for (auto [i, j] : batch.pairs) {
      out += std::to_string(i);
      out += '\t';
      out += std::to_string(j);
      out += '\n';
    }
  }
  write_text_file(path, out);
}

std::vector<EdgeBatch> load_additions(const std::string& path) {
  auto in = open_input(path);
  std::vector<EdgeBatch> batches;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string s = strip(line);
    if (s.empty()) continue;
    if (s.rfind("# iteration", 0) == 0) {
      EdgeBatch b;
      b.iteration_index =
          static_cast<int>(parse_long(strip(s.substr(11)), path, line_no));
      batches.push_back(std::move(b));
      continue;
    }
    if (s[0] == '#') continue;
    if (batches.empty())
      throw ValidationError(path + ":" + std::to_string(line_no) +
                            ": edge before any iteration header");
    std::stringstream ls(s);
    std::string a, b;
    if (!(ls >> a >> b))
      throw ValidationError(path + ":" + std::to_string(line_no) +
                            ": expected 'i<TAB>j'");
    batches.back().pairs.emplace_back(
        static_cast<int>(parse_long(a, path, line_no)),
        static_cast<int>(parse_long(b, path, line_no)));
  }
  return batches;
}

}  // namespace fairguide
