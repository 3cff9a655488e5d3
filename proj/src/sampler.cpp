#include "fairguide/sampler.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>

#include "fairguide/io.hpp"
#include "fairguide/metrics.hpp"

namespace fairguide {

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

bool perturbed_less(const ScoredCandidate& a, const ScoredCandidate& b) {
  // "Greater" candidate first: larger value, then lexicographically smaller.
  if (a.value != b.value) return a.value > b.value;
  return std::pair(a.i, a.j) < std::pair(b.i, b.j);
}

}  // namespace

void GuideConfig::validate() const {
  if (budget < 0) throw ValidationError("guide: budget must be >= 0");
  if (batch_k < 1) throw ValidationError("guide: batch size must be >= 1");
  if (beta < 0.0) throw ValidationError("guide: beta must be >= 0");
  if (tau <= 0.0) throw ValidationError("guide: tau must be > 0");
  if (epsilon <= 0.0) throw ValidationError("guide: epsilon must be > 0");
  if (alpha < 0.0 || alpha > 1.0)
    throw ValidationError("guide: alpha must lie in [0,1]");
  if (k_steps < 1) throw ValidationError("guide: K must be >= 1");
  if (communities < 1) throw ValidationError("guide: C must be >= 1");
}

std::vector<ScoredCandidate> adjusted_scores(const MetaGradient& grad,
                                             const Graph& g, double beta) {
  std::vector<ScoredCandidate> out;
  grad.visit_candidates(g, [&](int i, int j, double value) {
    double boost = g.sensitive[static_cast<std::size_t>(i)] !=
                           g.sensitive[static_cast<std::size_t>(j)]
                       ? 1.0 + beta
                       : 1.0;
    double score = -value * boost;
    if (score > 0.0) out.push_back({i, j, score});
  });
  return out;
}

std::vector<ScoredCandidate> gumbel_perturb(std::vector<ScoredCandidate> scores,
                                            double tau, double epsilon,
                                            Rng& rng) {
  if (tau <= 0.0) throw ValidationError("gumbel_perturb: tau must be > 0");
  for (auto& s : scores) {
    if (!(s.value > 0.0))
      throw NumericalError("gumbel_perturb: non-positive score for (" +
                           std::to_string(s.i) + "," + std::to_string(s.j) +
                           ")");
    s.value = (std::log(s.value + epsilon) + rng.gumbel()) / tau;
  }
  return scores;
}

EdgeBatch select_topk(const std::vector<ScoredCandidate>& perturbed, int k) {
  if (k < 1) throw ValidationError("select_topk: k must be >= 1");
  EdgeBatch batch;
  if (perturbed.empty()) {
    batch.truncated = true;
    return batch;
  }
  // Bounded heap; the front is the worst-ranked kept candidate.
  std::vector<ScoredCandidate> heap;
  heap.reserve(static_cast<std::size_t>(k));
  for (const auto& c : perturbed) {
    if (static_cast<int>(heap.size()) < k) {
      heap.push_back(c);
      std::push_heap(heap.begin(), heap.end(), perturbed_less);
    } else if (perturbed_less(c, heap.front())) {
      std::pop_heap(heap.begin(), heap.end(), perturbed_less);
      heap.back() = c;
      std::push_heap(heap.begin(), heap.end(), perturbed_less);
    }
  }
  std::sort_heap(heap.begin(), heap.end(), perturbed_less);
  batch.pairs.reserve(heap.size());
  for (const auto& c : heap) batch.pairs.emplace_back(c.i, c.j);
  batch.truncated = heap.size() < static_cast<std::size_t>(k);
  return batch;
}

GuideResult guide(const Graph& g, const GuideConfig& cfg) {
  cfg.validate();
  if (cfg.budget > candidate_count(g))
    throw ValidationError("guide: budget " + std::to_string(cfg.budget) +
                          " exceeds " + std::to_string(candidate_count(g)) +
                          " candidate pairs");

  GuideResult result;
  auto t0 = std::chrono::steady_clock::now();

  // C_init is fixed once, before the loop.
  CommunityInit init;
  AutoencoderConfig ae = cfg.autoencoder;
  ae.seed = cfg.seed;
  CommunityCacheKey cache_key{feature_digest(g.features), ae, cfg.communities,
                              cfg.seed, cfg.kmeans_iters};
  bool cached = !cfg.community_cache.empty() &&
                load_community_cache(cfg.community_cache, cache_key, &init);
  if (!cached) {
    Mat standardized = standardize_columns(g.features);
    AutoencoderModel model = train_autoencoder(standardized, ae);
    Mat latent = model.encode(standardized);
    init = kmeans(latent, cfg.communities, cfg.seed, cfg.kmeans_iters);
    if (!cfg.community_cache.empty())
      save_community_cache(cfg.community_cache, cache_key, init);
  }
  result.init_seconds = seconds_since(t0);

  Graph current = g;
  double loss = pseudo_task_loss(current, init, cfg.alpha, cfg.k_steps);
  result.loss_trace.push_back(loss);

  int iteration = 0;
  while (result.links_added < cfg.budget) {
    auto iter_start = std::chrono::steady_clock::now();
    MetaGradient grad = meta_gradient(current, init, cfg.alpha, cfg.k_steps);
    std::vector<ScoredCandidate> scores = adjusted_scores(grad, current, cfg.beta);
    if (scores.empty()) {
      result.exhausted = true;
      break;
    }
    long tiny = 0;
    for (const auto& s : scores)
      if (s.value < cfg.epsilon) ++tiny;
    Rng gumbel_rng(derive_seed(cfg.seed, "gumbel",
                               static_cast<std::uint64_t>(iteration)));
    std::vector<ScoredCandidate> perturbed =
        gumbel_perturb(std::move(scores), cfg.tau, cfg.epsilon, gumbel_rng);
    const long remaining = cfg.budget - result.links_added;
    const int k = static_cast<int>(std::min<long>(cfg.batch_k, remaining));
    EdgeBatch batch = select_topk(perturbed, k);
    batch.iteration_index = iteration;
    if (batch.pairs.empty()) {
      result.exhausted = true;
      break;
    }

    current = add_edges(current, batch);
    double next_loss = pseudo_task_loss(current, init, cfg.alpha, cfg.k_steps);

    long cross = 0;
    for (auto [i, j] : batch.pairs)
      if (g.sensitive[static_cast<std::size_t>(i)] !=
          g.sensitive[static_cast<std::size_t>(j)])
        ++cross;

    IterationStats stats;
    stats.iteration = iteration;
    stats.dsp_before = loss;
    stats.dsp_after = next_loss;
    stats.batch_size = static_cast<int>(batch.pairs.size());
    stats.cross_group_fraction =
        static_cast<double>(cross) / static_cast<double>(batch.pairs.size());
    stats.seconds = seconds_since(iter_start);
    stats.tiny_score_count = tiny;
    result.iterations.push_back(stats);

    result.links_added += static_cast<long>(batch.pairs.size());
    const bool truncated = batch.truncated;
    result.additions.push_back(std::move(batch));
    result.loss_trace.push_back(next_loss);
    loss = next_loss;
    if (truncated) {
      result.exhausted = true;
      break;
    }
    ++iteration;
  }

  result.final_graph = std::move(current);
  return result;
}

void save_trace_csv(const GuideResult& result, const std::string& path) {
  std::string out =
      "iteration,soft_dsp_before,soft_dsp_after,batch_size,cross_group_fraction\n";
  for (const auto& it : result.iterations) {
    out += std::to_string(it.iteration);
    out += ',';
    out += format_double(it.dsp_before);
    out += ',';
    out += format_double(it.dsp_after);
    out += ',';
    out += std::to_string(it.batch_size);
    out += ',';
    out += format_double(it.cross_group_fraction);
    out += '\n';
  }
  write_text_file(path, out);
}

}  // namespace fairguide
