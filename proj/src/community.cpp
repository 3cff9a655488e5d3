#include "fairguide/community.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>

#include "fairguide/metrics.hpp"
#include "fairguide/rng.hpp"

namespace fairguide {

namespace {

Mat glorot(int rows, int cols, Rng& rng) {
  Mat w(rows, cols);
  double scale = std::sqrt(1.0 / static_cast<double>(rows));
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) w(i, j) = rng.normal() * scale;
  return w;
}

struct RmsProp {
  double lr;
  double decay = 0.9;
  double eps = 1e-8;

  void step(Mat& w, const Mat& g, Mat& v) const {
    v = decay * v + (1.0 - decay) * g.cwiseProduct(g);
    w -= lr * g.cwiseQuotient((v.cwiseSqrt().array() + eps).matrix());
  }
  void step(Vec& b, const Vec& g, Vec& v) const {
    v = decay * v + (1.0 - decay) * g.cwiseProduct(g);
    b -= lr * g.cwiseQuotient((v.cwiseSqrt().array() + eps).matrix());
  }
};

}  // namespace

Mat standardize_columns(const Mat& x) {
  Mat out = x;
  const int n = static_cast<int>(x.rows());
  for (int j = 0; j < x.cols(); ++j) {
    double mean = x.col(j).mean();
    double var = (x.col(j).array() - mean).square().sum() / n;
    double sd = std::sqrt(var);
    if (sd > 0.0)
      out.col(j) = (x.col(j).array() - mean) / sd;
    else
      out.col(j).setZero();
  }
  return out;
}

Mat AutoencoderModel::encode(const Mat& x) const {
  Mat h = ((x * enc_w1).rowwise() + enc_b1.transpose()).array().tanh();
  return (h * enc_w2).rowwise() + enc_b2.transpose();
}

Mat AutoencoderModel::reconstruct(const Mat& x) const {
  Mat z = encode(x);
  Mat h = ((z * dec_w1).rowwise() + dec_b1.transpose()).array().tanh();
  return (h * dec_w2).rowwise() + dec_b2.transpose();
}

AutoencoderModel train_autoencoder(const Mat& x, const AutoencoderConfig& cfg) {
  if (x.cols() < 1) throw ValidationError("autoencoder: need at least one feature");
  if (cfg.hidden < 1 || cfg.latent < 1 || cfg.epochs < 1 || cfg.lr <= 0.0)
    throw ValidationError("autoencoder: config values must be positive");

  const int n = static_cast<int>(x.rows());
  const int m = static_cast<int>(x.cols());
  Rng rng(derive_seed(cfg.seed, "autoencoder"));

  AutoencoderModel md;
  md.enc_w1 = glorot(m, cfg.hidden, rng);
  md.enc_b1 = Vec::Zero(cfg.hidden);
  md.enc_w2 = glorot(cfg.hidden, cfg.latent, rng);
  md.enc_b2 = Vec::Zero(cfg.latent);
  md.dec_w1 = glorot(cfg.latent, cfg.hidden, rng);
  md.dec_b1 = Vec::Zero(cfg.hidden);
  md.dec_w2 = glorot(cfg.hidden, m, rng);
  md.dec_b2 = Vec::Zero(m);

  RmsProp opt{cfg.lr};
  Mat v_ew1 = Mat::Zero(m, cfg.hidden), v_ew2 = Mat::Zero(cfg.hidden, cfg.latent);
  Mat v_dw1 = Mat::Zero(cfg.latent, cfg.hidden), v_dw2 = Mat::Zero(cfg.hidden, m);
  Vec v_eb1 = Vec::Zero(cfg.hidden), v_eb2 = Vec::Zero(cfg.latent);
  Vec v_db1 = Vec::Zero(cfg.hidden), v_db2 = Vec::Zero(m);

  const double denom = static_cast<double>(n) * static_cast<double>(m);
  md.loss_trace.reserve(static_cast<std::size_t>(cfg.epochs));
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    // Forward.
    Mat h1 = ((x * md.enc_w1).rowwise() + md.enc_b1.transpose()).array().tanh();
    Mat z = (h1 * md.enc_w2).rowwise() + md.enc_b2.transpose();
    Mat h2 = ((z * md.dec_w1).rowwise() + md.dec_b1.transpose()).array().tanh();
    Mat xhat = (h2 * md.dec_w2).rowwise() + md.dec_b2.transpose();
    Mat err = xhat - x;
    double loss = err.squaredNorm() / denom;
    if (!std::isfinite(loss))
      throw NumericalError("autoencoder diverged at epoch " +
                           std::to_string(epoch));
    md.loss_trace.push_back(loss);

    // Backward (MSE = mean over all entries).
    Mat g_xhat = (2.0 / denom) * err;
    Mat g_dw2 = h2.transpose() * g_xhat;
    Vec g_db2 = g_xhat.colwise().sum();
    Mat g_h2 = (g_xhat * md.dec_w2.transpose()).cwiseProduct(
        (1.0 - h2.array().square()).matrix());
    Mat g_dw1 = z.transpose() * g_h2;
    Vec g_db1 = g_h2.colwise().sum();
    Mat g_z = g_h2 * md.dec_w1.transpose();
    Mat g_ew2 = h1.transpose() * g_z;
    Vec g_eb2 = g_z.colwise().sum();
    Mat g_h1 = (g_z * md.enc_w2.transpose()).cwiseProduct(
        (1.0 - h1.array().square()).matrix());
    Mat g_ew1 = x.transpose() * g_h1;
    Vec g_eb1 = g_h1.colwise().sum();

    opt.step(md.enc_w1, g_ew1, v_ew1);
    opt.step(md.enc_b1, g_eb1, v_eb1);
    opt.step(md.enc_w2, g_ew2, v_ew2);
    opt.step(md.enc_b2, g_eb2, v_eb2);
    opt.step(md.dec_w1, g_dw1, v_dw1);
    opt.step(md.dec_b1, g_db1, v_db1);
    opt.step(md.dec_w2, g_dw2, v_dw2);
    opt.step(md.dec_b2, g_db2, v_db2);
  }
  return md;
}

CommunityInit kmeans(const Mat& latent, int num_communities, std::uint64_t seed,
                     int max_iters) {
  const int n = static_cast<int>(latent.rows());
  const int c = num_communities;
  if (c < 1 || n < c)
    throw ValidationError("kmeans: need N >= C >= 1");
  Rng rng(derive_seed(seed, "kmeans"));

  Mat centroids(c, latent.cols());
  // k-means++ seeding.
  std::vector<double> d2(static_cast<std::size_t>(n),
                         std::numeric_limits<double>::infinity());
  int first = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(n)));
  centroids.row(0) = latent.row(first);
  for (int k = 1; k < c; ++k) {
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      double d = (latent.row(i) - centroids.row(k - 1)).squaredNorm();
      d2[static_cast<std::size_t>(i)] =
          std::min(d2[static_cast<std::size_t>(i)], d);
      total += d2[static_cast<std::size_t>(i)];
    }
    int chosen = 0;
    if (total > 0.0) {
      double target = rng.uniform() * total;
      double acc = 0.0;
      for (int i = 0; i < n; ++i) {
        acc += d2[static_cast<std::size_t>(i)];
        if (acc >= target) {
          chosen = i;
          break;
        }
      }
    } else {
      // Degenerate data: every remaining point coincides with a centroid.
      chosen = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(n)));
    }
    centroids.row(k) = latent.row(chosen);
  }

  std::vector<int> labels(static_cast<std::size_t>(n), 0);
  for (int iter = 0; iter < max_iters; ++iter) {
    bool changed = false;
    // Assign: strict < keeps ties on the lowest centroid index.
    for (int i = 0; i < n; ++i) {
      int best = 0;
      double best_d = (latent.row(i) - centroids.row(0)).squaredNorm();
      for (int k = 1; k < c; ++k) {
        double d = (latent.row(i) - centroids.row(k)).squaredNorm();
        if (d < best_d) {
          best_d = d;
          best = k;
        }
      }
      if (labels[static_cast<std::size_t>(i)] != best) {
        labels[static_cast<std::size_t>(i)] = best;
        changed = true;
      }
    }
    // Update.
    Mat sums = Mat::Zero(c, latent.cols());
    std::vector<long> counts(static_cast<std::size_t>(c), 0);
    for (int i = 0; i < n; ++i) {
      sums.row(labels[static_cast<std::size_t>(i)]) += latent.row(i);
      ++counts[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])];
    }
    for (int k = 0; k < c; ++k) {
      if (counts[static_cast<std::size_t>(k)] > 0) {
        centroids.row(k) =
            sums.row(k) / static_cast<double>(counts[static_cast<std::size_t>(k)]);
      } else {
        // Re-seed an emptied cluster at the point farthest from its centroid.
        int far = 0;
        double far_d = -1.0;
        for (int i = 0; i < n; ++i) {
          double d =
              (latent.row(i) -
               centroids.row(labels[static_cast<std::size_t>(i)])).squaredNorm();
          if (d > far_d) {
            far_d = d;
            far = i;
          }
        }
        centroids.row(k) = latent.row(far);
        labels[static_cast<std::size_t>(far)] = k;
        changed = true;
      }
    }
    if (!changed && iter > 0) break;
  }

  CommunityInit init;
  init.labels = std::move(labels);
  init.centroids = std::move(centroids);
  init.num_communities = c;
  init.onehot = Mat::Zero(n, c);
  for (int i = 0; i < n; ++i)
    init.onehot(i, init.labels[static_cast<std::size_t>(i)]) = 1.0;
  return init;
}

Mat softmax_rows(const Mat& z) {
  Mat out(z.rows(), z.cols());
  for (int i = 0; i < z.rows(); ++i) {
    double mx = z.row(i).maxCoeff();
    Eigen::Array<double, 1, Eigen::Dynamic> e = (z.row(i).array() - mx).exp();
    out.row(i) = (e / e.sum()).matrix();
  }
  return out;
}

CommunityAssignment propagate(const CommunityInit& init, const NormAdj& norm,
                              double alpha, int k_steps) {
  if (alpha < 0.0 || alpha > 1.0)
    throw ValidationError("propagate: alpha must lie in [0,1]");
  if (k_steps < 1) throw ValidationError("propagate: K must be >= 1");
  Mat z = init.onehot;
  for (int t = 0; t < k_steps; ++t)
    z = (1.0 - alpha) * norm.matrix.multiply(z) + alpha * init.onehot;
  CommunityAssignment out;
  out.soft = softmax_rows(z);
  out.alpha = alpha;
  out.depth = k_steps;
  return out;
}

double pseudo_task_loss(const Graph& g, const CommunityInit& init, double alpha,
                        int k_steps) {
  NormAdj norm = normalized_adjacency(g);
  CommunityAssignment c = propagate(init, norm, alpha, k_steps);
  return delta_sp_soft(c.soft, g.sensitive);
}

std::uint64_t feature_digest(const Mat& x) {
  std::uint64_t h = fnv1a64(&x, 0);  // seed value only
  long dims[2] = {x.rows(), x.cols()};
  h = fnv1a64(dims, sizeof(dims), h);
  for (int i = 0; i < x.rows(); ++i)
    h = fnv1a64(x.row(i).data(), sizeof(double) * static_cast<std::size_t>(x.cols()), h);
  return h;
}

namespace {

constexpr char kCacheMagic[4] = {'F', 'G', 'C', 'I'};
constexpr std::uint32_t kCacheVersion = 1;

std::uint64_t cache_key_digest(const CommunityCacheKey& key) {
  std::uint64_t h = key.feature_digest;
  h = fnv1a64(&key.autoencoder.hidden, sizeof(int), h);
  h = fnv1a64(&key.autoencoder.latent, sizeof(int), h);
  h = fnv1a64(&key.autoencoder.epochs, sizeof(int), h);
  h = fnv1a64(&key.autoencoder.lr, sizeof(double), h);
  h = fnv1a64(&key.autoencoder.seed, sizeof(std::uint64_t), h);
  h = fnv1a64(&key.num_communities, sizeof(int), h);
  h = fnv1a64(&key.kmeans_seed, sizeof(std::uint64_t), h);
  h = fnv1a64(&key.kmeans_iters, sizeof(int), h);
  return h;
}

}  // namespace

bool load_community_cache(const std::string& path, const CommunityCacheKey& key,
                          CommunityInit* out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  char magic[4];
  std::uint32_t version = 0;
  std::uint64_t digest = 0;
  std::int64_t n = 0, c = 0, l = 0;
  in.read(magic, 4);
  in.read(reinterpret_cast<char*>(&version), sizeof(version));
  in.read(reinterpret_cast<char*>(&digest), sizeof(digest));
  in.read(reinterpret_cast<char*>(&n), sizeof(n));
  in.read(reinterpret_cast<char*>(&c), sizeof(c));
  in.read(reinterpret_cast<char*>(&l), sizeof(l));
  if (!in || std::memcmp(magic, kCacheMagic, 4) != 0 ||
      version != kCacheVersion || digest != cache_key_digest(key))
    return false;
  CommunityInit init;
  init.num_communities = static_cast<int>(c);
  init.labels.resize(static_cast<std::size_t>(n));
  in.read(reinterpret_cast<char*>(init.labels.data()),
          static_cast<std::streamsize>(sizeof(int) * init.labels.size()));
  init.centroids = Mat(c, l);
  in.read(reinterpret_cast<char*>(init.centroids.data()),
          static_cast<std::streamsize>(sizeof(double) *
                                       static_cast<std::size_t>(c * l)));
  if (!in) return false;
  init.onehot = Mat::Zero(n, c);
  for (std::int64_t i = 0; i < n; ++i) {
    int lab = init.labels[static_cast<std::size_t>(i)];
    if (lab < 0 || lab >= c) return false;
    init.onehot(i, lab) = 1.0;
  }
  *out = std::move(init);
  return true;
}

void save_community_cache(const std::string& path, const CommunityCacheKey& key,
                          const CommunityInit& init) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot open " + path + " for writing");
  std::uint32_t version = kCacheVersion;
  std::uint64_t digest = cache_key_digest(key);
  std::int64_t n = static_cast<std::int64_t>(init.labels.size());
  std::int64_t c = init.num_communities;
  std::int64_t l = init.centroids.cols();
  out.write(kCacheMagic, 4);
  out.write(reinterpret_cast<const char*>(&version), sizeof(version));
  out.write(reinterpret_cast<const char*>(&digest), sizeof(digest));
  out.write(reinterpret_cast<const char*>(&n), sizeof(n));
  out.write(reinterpret_cast<const char*>(&c), sizeof(c));
  out.write(reinterpret_cast<const char*>(&l), sizeof(l));
  out.write(reinterpret_cast<const char*>(init.labels.data()),
            static_cast<std::streamsize>(sizeof(int) * init.labels.size()));
  out.write(reinterpret_cast<const char*>(init.centroids.data()),
            static_cast<std::streamsize>(sizeof(double) *
                                         static_cast<std::size_t>(c * l)));
  if (!out) throw ValidationError("write failed: " + path);
}

}  // namespace fairguide
