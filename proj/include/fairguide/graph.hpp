#pragma once

#include <utility>
#include <vector>

#include "fairguide/common.hpp"

namespace fairguide {

// Undirected attributed graph. Adjacency is kept as sorted neighbor lists
// mirrored for both orientations (CSR-style); entries are implicitly 1.
// Immutable after construction: mutation goes through add_edges, which
// returns a new value.
struct Graph {
  int num_nodes = 0;
  long num_edges = 0;                  // undirected edge count
  std::vector<std::vector<int>> adj;   // sorted, no self-loops, no duplicates
  Mat features;                        // N x M
  std::vector<int> sensitive;          // {0,1} per node
  std::vector<int> labels;             // -1 = unlabeled; empty if absent

  bool has_edge(int i, int j) const;
  int degree(int i) const { return static_cast<int>(adj[i].size()); }
  bool has_labels() const { return !labels.empty(); }

  // Unordered edges as (i,j) with i<j, lexicographically sorted.
  std::vector<std::pair<int, int>> edges() const;

  // Checks symmetry, zero diagonal, binariness (sorted unique lists), id
  // bounds and attribute domains. Throws ValidationError.
  void validate() const;
};

// Builds a validated graph from possibly directed/duplicated pairs:
// symmetrizes, deduplicates, rejects self-loops and out-of-range ids.
Graph make_graph(int num_nodes, const std::vector<std::pair<int, int>>& pairs,
                 Mat features, std::vector<int> sensitive,
                 std::vector<int> labels = {});

// Sparse symmetric matrix in CSR form.
struct CsrMatrix {
  int n = 0;
  std::vector<long> indptr;
  std::vector<int> indices;
  std::vector<double> values;

  // Row-major dense product: out = this * x.
  Mat multiply(const Mat& x) const;
  Mat dense() const;
};

// D^{-1/2} (A + I) D^{-1/2} with D the degree matrix of A + I.
struct NormAdj {
  CsrMatrix matrix;
  Vec degrees;  // degree of A + I per node (>= 1)
};

NormAdj normalized_adjacency(const Graph& g);

// A batch of links added in one pipeline round.
struct EdgeBatch {
  std::vector<std::pair<int, int>> pairs;  // i<j
  int iteration_index = 0;
  bool truncated = false;  // fewer candidates than requested k
};

// Unordered non-edges (i,j), i<j, lexicographic. Count = N(N-1)/2 - |E|.
std::vector<std::pair<int, int>> candidate_edges(const Graph& g);
long candidate_count(const Graph& g);

// Streaming enumeration of non-edges in the same lexicographic order,
// without materializing the candidate list.
template <class Fn>
void for_each_candidate(const Graph& g, Fn&& fn) {
  for (int i = 0; i < g.num_nodes; ++i) {
    const auto& row = g.adj[i];
    std::size_t p = 0;
    while (p < row.size() && row[p] <= i) ++p;
    for (int j = i + 1; j < g.num_nodes; ++j) {
      if (p < row.size() && row[p] == j) {
        ++p;
        continue;
      }
      fn(i, j);
    }
  }
}

// Addition-only mutation. Atomic: any invalid pair (existing edge, self-pair,
// duplicate within the batch, id out of range) rejects the whole batch.
Graph add_edges(const Graph& g, const EdgeBatch& batch);

}  // namespace fairguide
