#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fairguide/graph.hpp"

namespace fairguide {

struct AutoencoderConfig {
  int hidden = 128;
  int latent = 64;
  int epochs = 200;
  double lr = 1e-3;
  std::uint64_t seed = 10;
};

// MLP autoencoder: M -> hidden (tanh) -> latent, mirrored decoder with a
// linear output, trained full-batch on mean-squared reconstruction error
// with RMSProp (momentum-free adaptive steps).
struct AutoencoderModel {
  Mat enc_w1, enc_w2, dec_w1, dec_w2;
  Vec enc_b1, enc_b2, dec_b1, dec_b2;
  std::vector<double> loss_trace;

  Mat encode(const Mat& x) const;
  Mat reconstruct(const Mat& x) const;
};

AutoencoderModel train_autoencoder(const Mat& x, const AutoencoderConfig& cfg);

// Per-column zero mean, unit variance; constant columns map to zero.
Mat standardize_columns(const Mat& x);

// Hard initial community labels from K-means over latent codes.
struct CommunityInit {
  std::vector<int> labels;
  Mat onehot;     // N x C
  Mat centroids;  // C x L
  int num_communities = 0;
};

// Lloyd iterations with k-means++ seeding. Nearest-centroid ties break to the
// lowest centroid index; an emptied cluster is re-seeded at the point
// farthest from its assigned centroid.
CommunityInit kmeans(const Mat& latent, int num_communities,
                     std::uint64_t seed, int max_iters = 100);

// Soft community assignment: row-wise softmax of the K-step propagation
//   Z = (1-a)^K A^K C0 + a * sum_{i<K} (1-a)^i A^i C0
// computed by the recurrence Z_t = (1-a) A Z_{t-1} + a C0.
struct CommunityAssignment {
  Mat soft;  // N x C, row-stochastic
  double alpha = 0.1;
  int depth = 10;
};

CommunityAssignment propagate(const CommunityInit& init, const NormAdj& norm,
                              double alpha, int k_steps);

// Row-wise softmax with max subtraction.
Mat softmax_rows(const Mat& z);

// delta_sp_soft of the propagated assignment on g's sensitive attribute.
double pseudo_task_loss(const Graph& g, const CommunityInit& init,
                        double alpha, int k_steps);

// Binary cache so repeated guide runs skip autoencoder + K-means. The key
// covers everything the init depends on; a stale or foreign file is ignored.
struct CommunityCacheKey {
  std::uint64_t feature_digest = 0;
  AutoencoderConfig autoencoder;
  int num_communities = 0;
  std::uint64_t kmeans_seed = 0;
  int kmeans_iters = 0;
};

bool load_community_cache(const std::string& path, const CommunityCacheKey& key,
                          CommunityInit* out);
void save_community_cache(const std::string& path, const CommunityCacheKey& key,
                          const CommunityInit& init);

std::uint64_t feature_digest(const Mat& x);

}  // namespace fairguide
