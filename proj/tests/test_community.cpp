#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numeric>

#include "fairguide/community.hpp"
#include "fairguide/eval.hpp"
#include "fairguide/metrics.hpp"
#include "fairguide/rng.hpp"
#include "helpers.hpp"

using namespace fairguide;

namespace {

CommunityInit onehot_init(const std::vector<int>& labels, int c) {
  CommunityInit init;
  init.labels = labels;
  init.num_communities = c;
  init.onehot = Mat::Zero(static_cast<long>(labels.size()), c);
  for (std::size_t i = 0; i < labels.size(); ++i)
    init.onehot(static_cast<long>(i), labels[i]) = 1.0;
  init.centroids = Mat::Zero(c, 1);
  return init;
}

}  // namespace

TEST_CASE("autoencoder: identical rows give identical latent codes") {
  Mat x(6, 4);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 4; ++j) x(i, j) = 0.3 * j;
  AutoencoderConfig cfg;
  cfg.hidden = 8;
  cfg.latent = 3;
  cfg.epochs = 20;
  cfg.seed = 3;
  AutoencoderModel md = train_autoencoder(x, cfg);
  Mat z = md.encode(x);
  for (int i = 1; i < 6; ++i)
    CHECK((z.row(i) - z.row(0)).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("autoencoder training reduces the reconstruction loss") {
  Mat x = Mat::Identity(8, 8);
  AutoencoderConfig cfg;
  cfg.hidden = 16;
  cfg.latent = 8;
  cfg.epochs = 300;
  cfg.seed = 5;
  AutoencoderModel md = train_autoencoder(x, cfg);
  CHECK(md.loss_trace.back() < md.loss_trace.front());
  // Non-increasing in the moving-average sense: every later 20-epoch window
  // stays below the opening window (small plateau oscillations are fine).
  auto window = [&](std::size_t start) {
    double sum = 0;
    for (std::size_t i = start; i < start + 20; ++i) sum += md.loss_trace[i];
    return sum / 20;
  };
  double first = window(0);
  for (std::size_t start = 20; start + 20 <= md.loss_trace.size(); start += 20)
    CHECK(window(start) <= first);
}

TEST_CASE("autoencoder is bit-deterministic per seed") {
  Mat x(10, 5);
  Rng rng(77);
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 5; ++j) x(i, j) = rng.normal();
  AutoencoderConfig cfg;
  cfg.hidden = 6;
  cfg.latent = 2;
  cfg.epochs = 50;
  cfg.seed = 9;
  AutoencoderModel a = train_autoencoder(x, cfg);
  AutoencoderModel b = train_autoencoder(x, cfg);
  CHECK((a.enc_w1 - b.enc_w1).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.dec_w2 - b.dec_w2).cwiseAbs().maxCoeff() == 0.0);
  CHECK(a.loss_trace == b.loss_trace);
}

TEST_CASE("kmeans separates two well-separated clouds") {
  Rng rng(21);
  Mat pts(40, 2);
  for (int i = 0; i < 20; ++i) {
    pts(i, 0) = rng.normal() * 0.05;
    pts(i, 1) = rng.normal() * 0.05;
    pts(20 + i, 0) = 10.0 + rng.normal() * 0.05;
    pts(20 + i, 1) = 10.0 + rng.normal() * 0.05;
  }
  CommunityInit init = kmeans(pts, 2, 4);
  for (int i = 1; i < 20; ++i) {
    CHECK(init.labels[static_cast<std::size_t>(i)] == init.labels[0]);
    CHECK(init.labels[static_cast<std::size_t>(20 + i)] == init.labels[20]);
  }
  CHECK(init.labels[0] != init.labels[20]);
}

TEST_CASE("kmeans with C=1 returns the mean centroid") {
  Mat pts(5, 2);
  pts << 0, 0, 1, 0, 2, 0, 3, 0, 4, 0;
  CommunityInit init = kmeans(pts, 1, 8);
  for (int l : init.labels) CHECK(l == 0);
  CHECK(init.centroids(0, 0) == doctest::Approx(2.0));
  CHECK(init.centroids(0, 1) == doctest::Approx(0.0));
}

TEST_CASE("kmeans with C=N gives zero inertia") {
  Mat pts(6, 1);
  pts << 0, 1, 2, 3, 4, 5;
  CommunityInit init = kmeans(pts, 6, 15);
  std::vector<int> seen(6, 0);
  double inertia = 0.0;
  for (int i = 0; i < 6; ++i) {
    int l = init.labels[static_cast<std::size_t>(i)];
    ++seen[static_cast<std::size_t>(l)];
    inertia += (pts.row(i) - init.centroids.row(l)).squaredNorm();
  }
  for (int c : seen) CHECK(c == 1);
  CHECK(inertia == doctest::Approx(0.0));
}

TEST_CASE("kmeans onehot agrees with labels") {
  Rng rng(31);
  Mat pts(15, 3);
  for (int i = 0; i < 15; ++i)
    for (int j = 0; j < 3; ++j) pts(i, j) = rng.normal();
  CommunityInit init = kmeans(pts, 4, 2);
  for (int i = 0; i < 15; ++i) {
    CHECK(init.onehot.row(i).sum() == 1.0);
    CHECK(init.onehot(i, init.labels[static_cast<std::size_t>(i)]) == 1.0);
  }
}

TEST_CASE("propagate with alpha=1 is softmax of the init") {
  Graph g = testutil::random_connected_graph(12, 0.2, 3);
  CommunityInit init = onehot_init(
      {0, 1, 2, 0, 1, 2, 0, 1, 2, 0, 1, 2}, 3);
  NormAdj norm = normalized_adjacency(g);
  CommunityAssignment got = propagate(init, norm, 1.0, 5);
  Mat want = softmax_rows(init.onehot);
  CHECK((got.soft - want).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("restart identity: edgeless graph propagates to softmax(C_init)") {
  // A = 0 makes the normalized matrix the identity, so the geometric restart
  // weights must telescope to 1 for any K and alpha.
  Graph g = testutil::tiny_graph(5, {});
  CommunityInit init = onehot_init({0, 1, 0, 1, 0}, 2);
  NormAdj norm = normalized_adjacency(g);
  for (double alpha : {0.0, 0.1, 0.5, 0.9}) {
    for (int k : {1, 3, 10}) {
      CommunityAssignment got = propagate(init, norm, alpha, k);
      Mat want = softmax_rows(init.onehot);
      CHECK((got.soft - want).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("K=1, alpha=0 is a single normalized hop") {
  Graph g = testutil::random_connected_graph(9, 0.25, 8);
  CommunityInit init = onehot_init({0, 1, 0, 1, 0, 1, 0, 1, 0}, 2);
  NormAdj norm = normalized_adjacency(g);
  CommunityAssignment got = propagate(init, norm, 0.0, 1);
  Mat want = softmax_rows(norm.matrix.multiply(init.onehot));
  CHECK((got.soft - want).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("propagate output is row-stochastic to 1e-9") {
  Rng rng(55);
  for (int round = 0; round < 10; ++round) {
    int n = 10 + static_cast<int>(rng.uniform_int(30));
    Graph g = testutil::random_connected_graph(n, 0.1, rng.next_u64());
    std::vector<int> labels(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
      labels[static_cast<std::size_t>(i)] = static_cast<int>(rng.uniform_int(4));
    CommunityInit init = onehot_init(labels, 4);
    CommunityAssignment c =
        propagate(init, normalized_adjacency(g), 0.1, 6);
    for (int i = 0; i < n; ++i) {
      CHECK(std::abs(c.soft.row(i).sum() - 1.0) < 1e-9);
      for (int k = 0; k < 4; ++k) {
        CHECK(c.soft(i, k) > 0.0);
        CHECK(c.soft(i, k) < 1.0);
      }
    }
  }
}

TEST_CASE("propagation is equivariant under node permutation") {
  Rng rng(66);
  for (int round = 0; round < 5; ++round) {
    int n = 8 + static_cast<int>(rng.uniform_int(20));
    Graph g = testutil::random_connected_graph(n, 0.15, rng.next_u64());
    std::vector<int> labels(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
      labels[static_cast<std::size_t>(i)] = static_cast<int>(rng.uniform_int(3));
    CommunityInit init = onehot_init(labels, 3);
    CommunityAssignment base = propagate(init, normalized_adjacency(g), 0.2, 4);

    // Random permutation perm[old] = new.
    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    for (int k = n - 1; k > 0; --k)
      std::swap(perm[static_cast<std::size_t>(k)],
                perm[rng.uniform_int(static_cast<std::uint64_t>(k + 1))]);

    std::vector<std::pair<int, int>> pedges;
    for (auto [i, j] : g.edges())
      pedges.emplace_back(perm[static_cast<std::size_t>(i)],
                          perm[static_cast<std::size_t>(j)]);
    Mat px(n, g.features.cols());
    std::vector<int> psens(static_cast<std::size_t>(n));
    std::vector<int> plabels(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      px.row(perm[static_cast<std::size_t>(i)]) = g.features.row(i);
      psens[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])] =
          g.sensitive[static_cast<std::size_t>(i)];
      plabels[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])] =
          labels[static_cast<std::size_t>(i)];
    }
    Graph pg = make_graph(n, pedges, px, psens);
    CommunityInit pinit = onehot_init(plabels, 3);
    CommunityAssignment permuted =
        propagate(pinit, normalized_adjacency(pg), 0.2, 4);
    for (int i = 0; i < n; ++i)
      CHECK((permuted.soft.row(perm[static_cast<std::size_t>(i)]) -
             base.soft.row(i))
                .cwiseAbs()
                .maxCoeff() < 1e-12);
  }
}

TEST_CASE("deeper propagation smooths the pre-activation rows") {
  Rng rng(91);
  for (int round = 0; round < 5; ++round) {
    int n = 16 + static_cast<int>(rng.uniform_int(20));
    Graph g = testutil::random_connected_graph(n, 0.2, rng.next_u64());
    std::vector<int> labels(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
      labels[static_cast<std::size_t>(i)] = static_cast<int>(rng.uniform_int(3));
    CommunityInit init = onehot_init(labels, 3);
    NormAdj norm = normalized_adjacency(g);

    auto row_variance = [&](int k) {
      Mat z = init.onehot;
      for (int t = 0; t < k; ++t)
        z = 0.7 * norm.matrix.multiply(z) + 0.3 * init.onehot;
      Mat centered = z.rowwise() - z.colwise().mean();
      return centered.squaredNorm() / static_cast<double>(n);
    };
    double prev = row_variance(1);
    for (int k : {2, 4, 8}) {
      double cur = row_variance(k);
      CHECK(cur <= prev + 1e-12);
      prev = cur;
    }
  }
}

TEST_CASE("pseudo task loss is small for sensitive attributes independent of structure") {
  SbmSpec spec = testutil::small_sbm_spec(3, 500);
  spec.p_in = 0.05;
  spec.p_out = 0.01;
  Graph g = generate_sbm(spec);
  std::vector<int> labels(500);
  Rng lrng(123);
  for (auto& l : labels) l = static_cast<int>(lrng.uniform_int(5));
  CommunityInit init = onehot_init(labels, 5);
  CommunityAssignment c = propagate(init, normalized_adjacency(g), 0.1, 10);

  Rng rng(321);
  double total = 0.0;
  const int rounds = 100;
  for (int round = 0; round < rounds; ++round) {
    std::vector<int> s(500);
    for (auto& v : s) v = static_cast<int>(rng.uniform_int(2));
    s[0] = 0;
    s[1] = 1;
    total += delta_sp_soft(c.soft, s);
  }
  CHECK(total / rounds < 0.1);
}

TEST_CASE("cliques aligned with groups reach the softmax-sharpness maximum") {
  // Two disjoint K_5 cliques; inside a clique the normalized matrix averages
  // uniformly, so a clique-constant init is a fixed point and the loss equals
  // the one-hot softmax bound (e-1)/(e+1) for C=2.
  std::vector<std::pair<int, int>> edges;
  for (int b = 0; b < 2; ++b)
    for (int i = 0; i < 5; ++i)
      for (int j = i + 1; j < 5; ++j) edges.emplace_back(b * 5 + i, b * 5 + j);
  std::vector<int> sens(10, 0);
  for (int i = 5; i < 10; ++i) sens[static_cast<std::size_t>(i)] = 1;
  Graph g = testutil::tiny_graph(10, edges, sens);
  std::vector<int> labels(10, 0);
  for (int i = 5; i < 10; ++i) labels[static_cast<std::size_t>(i)] = 1;
  CommunityInit init = onehot_init(labels, 2);
  double loss = pseudo_task_loss(g, init, 0.3, 6);
  double bound = (std::exp(1.0) - 1.0) / (std::exp(1.0) + 1.0);
  CHECK(loss == doctest::Approx(bound).epsilon(1e-9));
}

TEST_CASE("community cache round-trips and rejects stale keys") {
  namespace fs = std::filesystem;
  fs::path path = fs::temp_directory_path() / "fairguide_cache_test.bin";
  fs::remove(path);
  CommunityInit init = onehot_init({0, 1, 2, 1, 0}, 3);
  init.centroids = Mat::Random(3, 4);
  CommunityCacheKey key;
  key.feature_digest = 12345;
  key.num_communities = 3;
  key.kmeans_seed = 7;
  key.kmeans_iters = 100;
  save_community_cache(path.string(), key, init);

  CommunityInit loaded;
  REQUIRE(load_community_cache(path.string(), key, &loaded));
  CHECK(loaded.labels == init.labels);
  CHECK((loaded.centroids - init.centroids).cwiseAbs().maxCoeff() == 0.0);
  CHECK((loaded.onehot - init.onehot).cwiseAbs().maxCoeff() == 0.0);

  CommunityCacheKey other = key;
  other.feature_digest = 999;
  CHECK_FALSE(load_community_cache(path.string(), other, &loaded));
  fs::remove(path);
}
