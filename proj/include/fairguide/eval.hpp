#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fairguide/graph.hpp"

namespace fairguide {

// Synthetic stand-in for the real datasets: stochastic block model with
// block-aligned sensitive attributes, Gaussian block-mean features and
// block-derived noisy binary labels.
struct SbmSpec {
  int n = 200;
  int num_blocks = 2;
  double p_in = 0.1;
  double p_out = 0.005;
  double group_block_alignment = 0.8;  // P(s = block majority attribute)
  int feature_dim = 16;
  double feature_signal = 1.0;  // per-block mean shift
  double label_noise = 0.1;     // P(label flipped from block label)
  std::uint64_t seed = 10;

  void validate() const;
};

// Blocks round-robin (node i -> block i mod B); block b's majority attribute
// and noiseless label are both b mod 2.
Graph generate_sbm(const SbmSpec& spec);

// Uniform sample without replacement from the candidate non-edges.
Graph baseline_random_add(const Graph& g, long n_links, std::uint64_t seed);

// Ranks candidates by cosine similarity of two-hop propagated standardized
// features (a dependency-free stand-in for a trained graph autoencoder) and
// adds the top n_links.
Graph baseline_linkpred_add(const Graph& g, long n_links, std::uint64_t seed);

struct GcnConfig {
  int hidden = 128;
  int epochs = 1000;
  double lr = 1e-3;
  std::uint64_t seed = 10;
};

struct Split {
  std::vector<int> train, val, test;
};

// 25% of labeled nodes to validation, 25% to test, rest to train.
Split make_split(const std::vector<int>& labels, std::uint64_t seed);

struct GcnOutput {
  std::vector<int> preds;     // argmax class per node
  std::vector<double> prob1;  // class-1 probability per node
  double best_val_f1 = 0.0;
  int best_epoch = -1;
};

// Two-layer graph convolution (A X W1 -> ReLU -> A H W2) trained with
// softmax cross-entropy and Adam on manually derived gradients; the weights
// with the best validation F1 produce the returned predictions.
GcnOutput train_gcn(const Graph& g, const Split& split, const GcnConfig& cfg);

// Two-phase modularity optimization (local moves + coarsening). Node visit
// order is a seeded shuffle; ties break to the smaller community id.
std::vector<int> louvain(const Graph& g, std::uint64_t seed);

double modularity(const Graph& g, const std::vector<int>& communities);

// Binary F1 for class 1. Zero denominators yield 0 unless there are neither
// actual nor predicted positives, which scores 1.
double f1_binary(std::span<const int> y_true, std::span<const int> y_pred);

// Rank-statistic (Mann-Whitney) AUC with midranks; nullopt when the labels
// are single-class.
std::optional<double> auc_score(std::span<const int> y_true,
                                std::span<const double> scores);

struct MetricSummary {
  double mean = 0.0;
  double stddev = 0.0;
  bool defined = true;
};

struct EvalColumn {
  std::string name;
  MetricSummary f1, auc, dsp, deo, dsp_cd;
};

struct EvalOptions {
  std::vector<std::uint64_t> seeds = {10, 20, 30, 40, 50};
  GcnConfig gcn;
  int jobs = 1;
};

// For each seed: one split, one GCN per graph (node-classification metrics on
// the test split) and one Louvain run per graph (multi-class statistical
// parity over detected communities). Metrics are aggregated as mean and
// population standard deviation over seeds.
std::vector<EvalColumn> evaluate(
    const std::vector<std::pair<std::string, const Graph*>>& graphs,
    const EvalOptions& options);

// Percentages with one decimal, aligned columns.
void write_report_table(std::ostream& os, const std::vector<EvalColumn>& cols);
// Machine-readable "column.metric.mean=" lines, six decimals.
void write_report_kv(std::ostream& os, const std::vector<EvalColumn>& cols);

}  // namespace fairguide
