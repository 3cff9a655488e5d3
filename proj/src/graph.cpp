#include "fairguide/graph.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

namespace fairguide {

bool Graph::has_edge(int i, int j) const {
  const auto& row = adj[i];
  return std::binary_search(row.begin(), row.end(), j);
}

std::vector<std::pair<int, int>> Graph::edges() const {
  std::vector<std::pair<int, int>> out;
  out.reserve(static_cast<std::size_t>(num_edges));
  for (int i = 0; i < num_nodes; ++i) {
    for (int j : adj[i]) {
      if (j > i) out.emplace_back(i, j);
    }
  }
  return out;
}

void Graph::validate() const {
  if (num_nodes < 0) throw ValidationError("negative node count");
  if (static_cast<int>(adj.size()) != num_nodes)
    throw ValidationError("adjacency size does not match node count");
  long half_edges = 0;
  for (int i = 0; i < num_nodes; ++i) {
    const auto& row = adj[i];
    for (std::size_t p = 0; p < row.size(); ++p) {
      int j = row[p];
      if (j < 0 || j >= num_nodes)
        throw ValidationError("neighbor id out of range: node " +
                              std::to_string(j));
      if (j == i)
        throw ValidationError("self-loop at node " + std::to_string(i));
      if (p > 0 && row[p - 1] >= j)
        throw ValidationError("adjacency row " + std::to_string(i) +
                              " not sorted/unique");
      if (!std::binary_search(adj[j].begin(), adj[j].end(), i))
        throw ValidationError("asymmetric entry (" + std::to_string(i) + "," +
                              std::to_string(j) + ")");
    }
    half_edges += static_cast<long>(row.size());
  }
  if (half_edges != 2 * num_edges)
    throw ValidationError("edge count inconsistent with adjacency");
  if (features.rows() != num_nodes)
    throw ValidationError("feature row count does not match node count");
  if (static_cast<int>(sensitive.size()) != num_nodes)
    throw ValidationError("sensitive attribute length does not match node count");
  for (int i = 0; i < num_nodes; ++i) {
    if (sensitive[i] != 0 && sensitive[i] != 1)
      throw ValidationError("sensitive value outside {0,1} at node " +
                            std::to_string(i));
  }
  if (!labels.empty() && static_cast<int>(labels.size()) != num_nodes)
    throw ValidationError("label length does not match node count");
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < -1)
      throw ValidationError("label below -1 at node " + std::to_string(i));
  }
}

Graph make_graph(int num_nodes, const std::vector<std::pair<int, int>>& pairs,
                 Mat features, std::vector<int> sensitive,
                 std::vector<int> labels) {
  Graph g;
  g.num_nodes = num_nodes;
  g.adj.assign(static_cast<std::size_t>(num_nodes), {});
  std::set<std::pair<int, int>> seen;
  for (auto [a, b] : pairs) {
    if (a < 0 || a >= num_nodes)
      throw ValidationError("edge endpoint out of range: node " +
                            std::to_string(a));
    if (b < 0 || b >= num_nodes)
      throw ValidationError("edge endpoint out of range: node " +
                            std::to_string(b));
    if (a == b) throw ValidationError("self-loop at node " + std::to_string(a));
    if (a > b) std::swap(a, b);
    seen.emplace(a, b);
  }
  for (auto [a, b] : seen) {
    g.adj[a].push_back(b);
    g.adj[b].push_back(a);
  }
  for (auto& row : g.adj) std::sort(row.begin(), row.end());
  g.num_edges = static_cast<long>(seen.size());
  g.features = std::move(features);
  g.sensitive = std::move(sensitive);
  g.labels = std::move(labels);
  g.validate();
  return g;
}

Mat CsrMatrix::multiply(const Mat& x) const {
  Mat out = Mat::Zero(n, x.cols());
  for (int u = 0; u < n; ++u) {
    for (long p = indptr[u]; p < indptr[u + 1]; ++p) {
      out.row(u) += values[p] * x.row(indices[p]);
    }
  }
  return out;
}

Mat CsrMatrix::dense() const {
  Mat out = Mat::Zero(n, n);
  for (int u = 0; u < n; ++u)
    for (long p = indptr[u]; p < indptr[u + 1]; ++p)
      out(u, indices[p]) = values[p];
  return out;
}

NormAdj normalized_adjacency(const Graph& g) {
  const int n = g.num_nodes;
  NormAdj norm;
  norm.degrees = Vec(n);
  for (int i = 0; i < n; ++i)
    norm.degrees[i] = 1.0 + static_cast<double>(g.adj[i].size());

  CsrMatrix& m = norm.matrix;
  m.n = n;
  m.indptr.assign(static_cast<std::size_t>(n) + 1, 0);
  long nnz = 0;
  for (int i = 0; i < n; ++i) {
    nnz += static_cast<long>(g.adj[i].size()) + 1;  // + diagonal
    m.indptr[i + 1] = nnz;
  }
  m.indices.resize(static_cast<std::size_t>(nnz));
  m.values.resize(static_cast<std::size_t>(nnz));
  for (int i = 0; i < n; ++i) {
    long p = m.indptr[i];
    double di = norm.degrees[i];
    bool diag_done = false;
    for (int j : g.adj[i]) {
      if (!diag_done && j > i) {
        m.indices[p] = i;
        m.values[p] = 1.0 / di;
        ++p;
        diag_done = true;
      }
      m.indices[p] = j;
      m.values[p] = 1.0 / std::sqrt(di * norm.degrees[j]);
      ++p;
    }
    if (!diag_done) {
      m.indices[p] = i;
      m.values[p] = 1.0 / di;
      ++p;
    }
  }
  return norm;
}

std::vector<std::pair<int, int>> candidate_edges(const Graph& g) {
  std::vector<std::pair<int, int>> out;
  out.reserve(static_cast<std::size_t>(candidate_count(g)));
  for_each_candidate(g, [&](int i, int j) { out.emplace_back(i, j); });
  return out;
}

long candidate_count(const Graph& g) {
  long n = g.num_nodes;
  return n * (n - 1) / 2 - g.num_edges;
}

Graph add_edges(const Graph& g, const EdgeBatch& batch) {
  std::set<std::pair<int, int>> fresh;
  for (auto [a, b] : batch.pairs) {
    if (a > b) std::swap(a, b);
    if (a < 0 || b >= g.num_nodes)
      throw ValidationError("batch endpoint out of range: (" +
                            std::to_string(a) + "," + std::to_string(b) + ")");
    if (a == b)
      throw ValidationError("batch self-pair at node " + std::to_string(a));
    if (g.has_edge(a, b))
      throw ValidationError("edge (" + std::to_string(a) + "," +
                            std::to_string(b) + ") already present");
    if (!fresh.emplace(a, b).second)
      throw ValidationError("duplicate pair (" + std::to_string(a) + "," +
                            std::to_string(b) + ") within batch");
  }
  Graph out = g;
  for (auto [a, b] : fresh) {
    auto& ra = out.adj[a];
    ra.insert(std::upper_bound(ra.begin(), ra.end(), b), b);
    auto& rb = out.adj[b];
    rb.insert(std::upper_bound(rb.begin(), rb.end(), a), a);
  }
  out.num_edges += static_cast<long>(fresh.size());
  return out;
}

}  // namespace fairguide
