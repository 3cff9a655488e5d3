#include <doctest.h>

#include <cmath>
#include <vector>

#include "fairguide/community.hpp"
#include "fairguide/meta_gradient.hpp"
#include "fairguide/metrics.hpp"
#include "fairguide/rng.hpp"
#include "helpers.hpp"

using namespace fairguide;

namespace {

CommunityInit random_init(int n, int c, Rng& rng) {
  CommunityInit init;
  init.num_communities = c;
  init.labels.resize(static_cast<std::size_t>(n));
  init.onehot = Mat::Zero(n, c);
  for (int i = 0; i < n; ++i) {
    init.labels[static_cast<std::size_t>(i)] =
        static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(c)));
    init.onehot(i, init.labels[static_cast<std::size_t>(i)]) = 1.0;
  }
  init.centroids = Mat::Zero(c, 1);
  return init;
}

Mat random_stochastic(int n, int c, Rng& rng) {
  Mat m(n, c);
  for (int i = 0; i < n; ++i) {
    double sum = 0.0;
    for (int k = 0; k < c; ++k) {
      m(i, k) = 0.05 + rng.uniform();
      sum += m(i, k);
    }
    m.row(i) /= sum;
  }
  return m;
}

}  // namespace

TEST_CASE("loss gradient w.r.t. assignment: identical rows give zero") {
  Mat soft(4, 3);
  for (int i = 0; i < 4; ++i) {
    soft(i, 0) = 0.2;
    soft(i, 1) = 0.3;
    soft(i, 2) = 0.5;
  }
  std::vector<int> s = {0, 1, 0, 1};
  Mat g = grad_loss_wrt_assignment(soft, s);
  CHECK(g.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("loss gradient w.r.t. assignment: single class is degenerate") {
  Mat soft = Mat::Ones(2, 1);
  std::vector<int> s = {0, 1};
  Mat g = grad_loss_wrt_assignment(soft, s);
  CHECK(g.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("loss gradient w.r.t. assignment matches finite differences") {
  Rng rng(23);
  const int n = 6, c = 3;
  Mat soft = random_stochastic(n, c, rng);
  std::vector<int> s = {0, 0, 0, 1, 1, 1};
  Mat grad = grad_loss_wrt_assignment(soft, s);
  // The loss is piecewise linear in C, so a small central difference is
  // exact away from sign changes; h stays inside the row-sum tolerance.
  const double h = 1e-7;
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < c; ++k) {
      Mat plus = soft, minus = soft;
      plus(i, k) += h;
      minus(i, k) -= h;
      double fd = (delta_sp_soft(plus, s) - delta_sp_soft(minus, s)) / (2 * h);
      CHECK(grad(i, k) == doctest::Approx(fd).epsilon(1e-6));
    }
  }
}

TEST_CASE("meta-gradient is exactly zero at alpha=1") {
  Rng rng(31);
  Graph g = testutil::random_connected_graph(12, 0.2, 7);
  CommunityInit init = random_init(12, 3, rng);
  MetaGradient grad = meta_gradient(g, init, 1.0, 4);
  CHECK(grad.dense().cwiseAbs().maxCoeff() == 0.0);
  CHECK(finite_difference_oracle(g, init, 1.0, 4, 0, 5, 1e-5) == 0.0);
}

TEST_CASE("meta-gradient matches the symmetric finite-difference oracle") {
  Rng rng(37);
  for (std::uint64_t seed : {101u, 102u, 103u}) {
    SbmSpec spec = testutil::small_sbm_spec(seed, 16);
    Graph g = generate_sbm(spec);
    CommunityInit init = random_init(g.num_nodes, 4, rng);
    for (double alpha : {0.1, 0.5}) {
      for (int k : {1, 3}) {
        MetaGradient grad = meta_gradient(g, init, alpha, k);
        int checked = 0;
        for_each_candidate(g, [&](int i, int j) {
          if (rng.uniform() > 0.3 || checked >= 60) return;
          ++checked;
          double analytic = grad.entry(i, j);
          double fd = finite_difference_oracle(g, init, alpha, k, i, j, 1e-5);
          CHECK(std::abs(analytic - fd) <=
                std::max(1e-6, 1e-4 * std::abs(fd)));
        });
        CHECK(checked > 20);
      }
    }
  }
}

TEST_CASE("oracle also covers existing edges") {
  Rng rng(41);
  Graph g = testutil::random_connected_graph(10, 0.3, 11);
  CommunityInit init = random_init(10, 3, rng);
  MetaGradient grad = meta_gradient(g, init, 0.2, 3);
  for (auto [i, j] : g.edges()) {
    double analytic = grad.entry(i, j);
    double fd = finite_difference_oracle(g, init, 0.2, 3, i, j, 1e-5);
    CHECK(std::abs(analytic - fd) <= std::max(1e-6, 1e-4 * std::abs(fd)));
  }
}

TEST_CASE("halving the step shrinks the central-difference error ~4x") {
  Rng rng(43);
  Graph g = testutil::random_connected_graph(10, 0.25, 13);
  CommunityInit init = random_init(10, 3, rng);
  MetaGradient grad = meta_gradient(g, init, 0.3, 3);

  // Pick the candidate with the largest gradient so truncation dominates
  // rounding, then compare errors at h and h/2 (second-order convergence).
  int bi = -1, bj = -1;
  double best = -1.0;
  for_each_candidate(g, [&](int i, int j) {
    double v = std::abs(grad.entry(i, j));
    if (v > best) {
      best = v;
      bi = i;
      bj = j;
    }
  });
  REQUIRE(bi >= 0);
  double analytic = grad.entry(bi, bj);
  double e1 = std::abs(finite_difference_oracle(g, init, 0.3, 3, bi, bj, 0.02) -
                       analytic);
  double e2 = std::abs(finite_difference_oracle(g, init, 0.3, 3, bi, bj, 0.01) -
                       analytic);
  REQUIRE(e1 > 1e-12);  // step large enough that truncation error is visible
  double ratio = e1 / e2;
  CHECK(ratio > 2.0);
  CHECK(ratio < 8.0);
}

TEST_CASE("component-constant structure gives zero candidate gradients inside a component") {
  // Two disjoint 6-cycles; s and C_init constant within each component. On a
  // regular component the row sums of the normalized matrix stay 1, and the
  // first-order effect of a within-component chord cancels between its direct
  // and degree terms, so every within-component candidate gradient is zero.
  std::vector<std::pair<int, int>> edges;
  for (int b = 0; b < 2; ++b) {
    int base = b * 6;
    for (int i = 0; i < 6; ++i) edges.emplace_back(base + i, base + (i + 1) % 6);
  }
  std::vector<int> sens(12, 0);
  for (int i = 6; i < 12; ++i) sens[static_cast<std::size_t>(i)] = 1;
  Graph g = testutil::tiny_graph(12, edges, sens);
  CommunityInit init;
  init.num_communities = 2;
  init.labels.assign(12, 0);
  for (int i = 6; i < 12; ++i) init.labels[static_cast<std::size_t>(i)] = 1;
  init.onehot = Mat::Zero(12, 2);
  for (int i = 0; i < 12; ++i) init.onehot(i, init.labels[static_cast<std::size_t>(i)]) = 1.0;
  init.centroids = Mat::Zero(2, 1);

  MetaGradient grad = meta_gradient(g, init, 0.2, 4);
  for_each_candidate(g, [&](int i, int j) {
    if (sens[static_cast<std::size_t>(i)] == sens[static_cast<std::size_t>(j)])
      CHECK(std::abs(grad.entry(i, j)) < 1e-9);
  });
}

TEST_CASE("gradient output is symmetric with a zero diagonal and finite") {
  Rng rng(47);
  Graph g = testutil::random_connected_graph(14, 0.2, 17);
  CommunityInit init = random_init(14, 4, rng);
  MetaGradient grad = meta_gradient(g, init, 0.15, 4);
  Mat dense = grad.dense();
  CHECK((dense - dense.transpose()).cwiseAbs().maxCoeff() == 0.0);
  for (int i = 0; i < 14; ++i) CHECK(dense(i, i) == 0.0);
  CHECK(dense.allFinite());
}

TEST_CASE("visit_candidates agrees with point queries") {
  Rng rng(53);
  Graph g = testutil::random_connected_graph(20, 0.15, 19);
  CommunityInit init = random_init(20, 3, rng);
  MetaGradient grad = meta_gradient(g, init, 0.1, 5);
  long count = 0;
  grad.visit_candidates(g, [&](int i, int j, double value) {
    ++count;
    CHECK(value == doctest::Approx(grad.entry(i, j)).epsilon(1e-12));
  });
  CHECK(count == candidate_count(g));
}

TEST_CASE("scaling the loss scales every gradient entry linearly") {
  Rng rng(59);
  Graph g = testutil::random_connected_graph(11, 0.25, 23);
  CommunityInit init = random_init(11, 3, rng);
  MetaGradient base = meta_gradient(g, init, 0.2, 3, 1.0);
  MetaGradient scaled = meta_gradient(g, init, 0.2, 3, 3.5);
  for_each_candidate(g, [&](int i, int j) {
    CHECK(scaled.entry(i, j) ==
          doctest::Approx(3.5 * base.entry(i, j)).epsilon(1e-12));
  });
}

TEST_CASE("snapshot hash tracks the evaluation point") {
  Rng rng(61);
  Graph g = testutil::random_connected_graph(9, 0.3, 29);
  CommunityInit init = random_init(9, 2, rng);
  MetaGradient a = meta_gradient(g, init, 0.1, 2);
  MetaGradient b = meta_gradient(g, init, 0.1, 2);
  MetaGradient c = meta_gradient(g, init, 0.1, 3);
  CHECK(a.snapshot_hash() == b.snapshot_hash());
  CHECK(a.snapshot_hash() != c.snapshot_hash());
}

TEST_CASE("most negative entries are sorted and candidates only") {
  Rng rng(67);
  Graph g = testutil::random_connected_graph(15, 0.2, 31);
  CommunityInit init = random_init(15, 3, rng);
  MetaGradient grad = meta_gradient(g, init, 0.1, 4);
  auto top = most_negative_entries(grad, g, 5);
  REQUIRE(top.size() <= 5);
  for (std::size_t t = 1; t < top.size(); ++t)
    CHECK(top[t - 1].value <= top[t].value);
  for (const auto& e : top) CHECK(!g.has_edge(e.i, e.j));
}
