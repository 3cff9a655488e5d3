#pragma once

#include <utility>
#include <vector>

#include "fairguide/eval.hpp"
#include "fairguide/graph.hpp"
#include "fairguide/rng.hpp"

namespace testutil {

using fairguide::Graph;
using fairguide::Mat;

// Graph with constant unit features and alternating sensitive attribute.
inline Graph tiny_graph(int n, const std::vector<std::pair<int, int>>& edges,
                        std::vector<int> sensitive = {},
                        std::vector<int> labels = {}) {
  Mat x = Mat::Ones(n, 2);
  for (int i = 0; i < n; ++i) x(i, 1) = static_cast<double>(i);
  if (sensitive.empty()) {
    sensitive.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) sensitive[static_cast<std::size_t>(i)] = i % 2;
  }
  return fairguide::make_graph(n, edges, std::move(x), std::move(sensitive),
                               std::move(labels));
}

// Erdos-Renyi-ish random graph grown over a random spanning tree, so it is
// always connected.
inline Graph random_connected_graph(int n, double extra_p, std::uint64_t seed) {
  fairguide::Rng rng(seed);
  std::vector<std::pair<int, int>> edges;
  for (int v = 1; v < n; ++v) {
    int u = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(v)));
    edges.emplace_back(u, v);
  }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (rng.uniform() < extra_p) edges.emplace_back(i, j);
  Mat x(n, 3);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < 3; ++j) x(i, j) = rng.normal();
  std::vector<int> sensitive(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    sensitive[static_cast<std::size_t>(i)] = rng.uniform() < 0.5 ? 0 : 1;
  // Guarantee both groups.
  sensitive[0] = 0;
  sensitive[static_cast<std::size_t>(n - 1)] = 1;
  return fairguide::make_graph(n, edges, std::move(x), std::move(sensitive));
}

inline fairguide::SbmSpec small_sbm_spec(std::uint64_t seed, int n = 20) {
  fairguide::SbmSpec spec;
  spec.n = n;
  spec.num_blocks = 2;
  spec.p_in = 0.4;
  spec.p_out = 0.1;
  spec.group_block_alignment = 0.9;
  spec.feature_dim = 6;
  spec.feature_signal = 1.5;
  spec.label_noise = 0.1;
  spec.seed = seed;
  return spec;
}

}  // namespace testutil
