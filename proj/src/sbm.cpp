#include <algorithm>
#include <cmath>

#include "fairguide/eval.hpp"
#include "fairguide/community.hpp"
#include "fairguide/rng.hpp"

namespace fairguide {

void SbmSpec::validate() const {
  if (num_blocks < 2 || n < num_blocks)
    throw ValidationError("sbm: need N >= num_blocks >= 2");
  auto prob = [](double p, const char* name) {
    if (p < 0.0 || p > 1.0)
      throw ValidationError(std::string("sbm: ") + name +
                            " must lie in [0,1]");
  };
  prob(p_in, "p_in");
  prob(p_out, "p_out");
  prob(group_block_alignment, "alignment");
  prob(label_noise, "label_noise");
  if (feature_dim < 1) throw ValidationError("sbm: feature_dim must be >= 1");
}

Graph generate_sbm(const SbmSpec& spec) {
  spec.validate();
  Rng rng(derive_seed(spec.seed, "sbm"));
  const int n = spec.n;

  auto block_of = [&](int i) { return i % spec.num_blocks; };

  // Draw order is fixed: edges (one uniform per pair, lexicographic), then
  // sensitive attributes, features and labels per node.
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      double p = block_of(i) == block_of(j) ? spec.p_in : spec.p_out;
      if (rng.uniform() < p) pairs.emplace_back(i, j);
    }
  }

  std::vector<int> sensitive(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    int majority = block_of(i) % 2;
    bool keep = rng.uniform() < spec.group_block_alignment;
    sensitive[static_cast<std::size_t>(i)] = keep ? majority : 1 - majority;
  }

  Mat features(n, spec.feature_dim);
  for (int i = 0; i < n; ++i) {
    int b = block_of(i);
    for (int m = 0; m < spec.feature_dim; ++m) {
      double mean = (m % spec.num_blocks) == b ? spec.feature_signal : 0.0;
      features(i, m) = mean + rng.normal();
    }
  }

  std::vector<int> labels(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    int base = block_of(i) % 2;
    bool flip = rng.uniform() < spec.label_noise;
    labels[static_cast<std::size_t>(i)] = flip ? 1 - base : base;
  }

  return make_graph(n, pairs, std::move(features), std::move(sensitive),
                    std::move(labels));
}

Graph baseline_random_add(const Graph& g, long n_links, std::uint64_t seed) {
  if (n_links < 0) throw ValidationError("random add: negative link count");
  const long available = candidate_count(g);
  if (n_links > available)
    throw ValidationError("random add: " + std::to_string(n_links) +
                          " links requested but only " +
                          std::to_string(available) + " candidates");
  if (n_links == 0) return g;

  std::vector<std::pair<int, int>> candidates = candidate_edges(g);
  Rng rng(derive_seed(seed, "random-add"));
  // Partial Fisher-Yates: the first n_links slots become the sample.
  for (long t = 0; t < n_links; ++t) {
    std::uint64_t span = static_cast<std::uint64_t>(candidates.size()) -
                         static_cast<std::uint64_t>(t);
    long pick = t + static_cast<long>(rng.uniform_int(span));
    std::swap(candidates[static_cast<std::size_t>(t)],
              candidates[static_cast<std::size_t>(pick)]);
  }
  EdgeBatch batch;
  batch.pairs.assign(candidates.begin(), candidates.begin() + n_links);
  std::sort(batch.pairs.begin(), batch.pairs.end());
  return add_edges(g, batch);
}

Graph baseline_linkpred_add(const Graph& g, long n_links, std::uint64_t seed) {
  (void)seed;  // ranking is deterministic; parameter kept for interface parity
  if (n_links < 0) throw ValidationError("linkpred add: negative link count");
  const long available = candidate_count(g);
  if (n_links > available)
    throw ValidationError("linkpred add: " + std::to_string(n_links) +
                          " links requested but only " +
                          std::to_string(available) + " candidates");
  if (n_links == 0) return g;

  NormAdj norm = normalized_adjacency(g);
  Mat embed = norm.matrix.multiply(
      norm.matrix.multiply(standardize_columns(g.features)));
  Vec norms = embed.rowwise().norm();

  struct Ranked {
    double sim;
    int i, j;
  };
  std::vector<Ranked> ranked;
  ranked.reserve(static_cast<std::size_t>(available));
  for_each_candidate(g, [&](int i, int j) {
    double denom = norms[i] * norms[j];
    double sim = denom > 0.0 ? embed.row(i).dot(embed.row(j)) / denom : 0.0;
    ranked.push_back({sim, i, j});
  });
  auto better = [](const Ranked& a, const Ranked& b) {
    if (a.sim != b.sim) return a.sim > b.sim;
    return std::pair(a.i, a.j) < std::pair(b.i, b.j);
  };
  std::partial_sort(ranked.begin(), ranked.begin() + n_links, ranked.end(),
                    better);

  EdgeBatch batch;
  batch.pairs.reserve(static_cast<std::size_t>(n_links));
  for (long t = 0; t < n_links; ++t)
    batch.pairs.emplace_back(ranked[static_cast<std::size_t>(t)].i,
                             ranked[static_cast<std::size_t>(t)].j);
  std::sort(batch.pairs.begin(), batch.pairs.end());
  return add_edges(g, batch);
}

}  // namespace fairguide
