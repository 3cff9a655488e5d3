#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fairguide/community.hpp"
#include "fairguide/graph.hpp"
#include "fairguide/meta_gradient.hpp"
#include "fairguide/rng.hpp"

namespace fairguide {

struct GuideConfig {
  long budget = 100;        // total links to add
  int batch_k = 100;        // links per iteration; final batch may shrink
  double beta = 4.0;        // cross-group boost
  double tau = 1.0;         // Gumbel temperature (order-preserving for top-k)
  double epsilon = 1e-12;   // underflow guard inside the log
  double alpha = 0.1;       // restart probability
  int k_steps = 10;         // propagation depth
  int communities = 10;
  AutoencoderConfig autoencoder;
  int kmeans_iters = 100;
  std::uint64_t seed = 10;
  std::string community_cache;  // optional path; empty disables caching

  void validate() const;
};

struct ScoredCandidate {
  int i = 0;
  int j = 0;
  double value = 0.0;
};

// Per-candidate score -grad * (1 + beta * [s_i != s_j]); candidates whose
// score is not strictly positive are excluded (the log in the Gumbel step is
// undefined for them and they would not reduce the loss). Lexicographic
// candidate order.
std::vector<ScoredCandidate> adjusted_scores(const MetaGradient& grad,
                                             const Graph& g, double beta);

// (log(score + eps) + gumbel) / tau, consuming one Gumbel draw per candidate
// in the given order.
std::vector<ScoredCandidate> gumbel_perturb(std::vector<ScoredCandidate> scores,
                                            double tau, double epsilon,
                                            Rng& rng);

// k largest perturbed scores; ties break to the lexicographically smaller
// pair. Sets truncated when fewer than k candidates were available.
EdgeBatch select_topk(const std::vector<ScoredCandidate>& perturbed, int k);

struct IterationStats {
  int iteration = 0;
  double dsp_before = 0.0;
  double dsp_after = 0.0;
  int batch_size = 0;
  double cross_group_fraction = 0.0;
  double seconds = 0.0;
  long tiny_score_count = 0;  // kept candidates whose score fell below epsilon
};

struct GuideResult {
  std::vector<EdgeBatch> additions;
  std::vector<double> loss_trace;  // length = iterations + 1
  std::vector<IterationStats> iterations;
  Graph final_graph;
  bool exhausted = false;      // stopped early: no positive-score candidates
  double init_seconds = 0.0;   // autoencoder + K-means time
  long links_added = 0;
};

// Algorithm: fix C_init once (autoencoder + K-means), then loop
// propagate -> soft loss -> meta-gradient -> adjusted scores -> Gumbel
// perturbation -> top-k -> batch addition, until the budget is spent or no
// bias-reducing candidate remains.
GuideResult guide(const Graph& g, const GuideConfig& cfg);

void save_trace_csv(const GuideResult& result, const std::string& path);

}  // namespace fairguide
