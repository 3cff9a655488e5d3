#include "fairguide/meta_gradient.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "fairguide/metrics.hpp"

namespace fairguide {

Mat grad_loss_wrt_assignment(const Mat& soft, std::span<const int> sensitive) {
  const int n = static_cast<int>(soft.rows());
  const int c = static_cast<int>(soft.cols());
  long gsize[2] = {0, 0};
  for (int i = 0; i < n; ++i) ++gsize[sensitive[static_cast<std::size_t>(i)]];
  if (gsize[0] == 0 || gsize[1] == 0)
    throw ValidationError("undefined metric: a sensitive group is empty");

  Vec mean0 = Vec::Zero(c), mean1 = Vec::Zero(c);
  for (int i = 0; i < n; ++i) {
    if (sensitive[static_cast<std::size_t>(i)] == 0)
      mean0 += soft.row(i).transpose();
    else
      mean1 += soft.row(i).transpose();
  }
  mean0 /= static_cast<double>(gsize[0]);
  mean1 /= static_cast<double>(gsize[1]);

  Vec sign(c);
  for (int k = 0; k < c; ++k) {
    double d = mean0[k] - mean1[k];
    sign[k] = d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
  }

  Mat grad(n, c);
  const double g0 = 0.5 / static_cast<double>(gsize[0]);
  const double g1 = -0.5 / static_cast<double>(gsize[1]);
  for (int i = 0; i < n; ++i) {
    double scale = sensitive[static_cast<std::size_t>(i)] == 0 ? g0 : g1;
    grad.row(i) = scale * sign.transpose();
  }
  return grad;
}

MetaGradient meta_gradient(const Graph& g, const CommunityInit& init,
                           double alpha, int k_steps, double loss_scale) {
  if (alpha < 0.0 || alpha > 1.0)
    throw ValidationError("meta_gradient: alpha must lie in [0,1]");
  if (k_steps < 1) throw ValidationError("meta_gradient: K must be >= 1");

  const int n = g.num_nodes;
  const int c = init.num_communities;
  const NormAdj norm = normalized_adjacency(g);
  const double keep = 1.0 - alpha;

  // Forward, storing the input of every step.
  std::vector<Mat> states;  // states[t] = Z_t, t = 0..K-1
  states.reserve(static_cast<std::size_t>(k_steps));
  Mat z = init.onehot;
  for (int t = 0; t < k_steps; ++t) {
    states.push_back(z);
    z = keep * norm.matrix.multiply(z) + alpha * init.onehot;
  }
  Mat soft = softmax_rows(z);

  // dL/dC, then through the softmax rows.
  Mat g_soft = grad_loss_wrt_assignment(soft, g.sensitive);
  if (loss_scale != 1.0) g_soft *= loss_scale;
  Mat g_z(n, c);
  for (int i = 0; i < n; ++i) {
    double dot = g_soft.row(i).dot(soft.row(i));
    g_z.row(i) =
        soft.row(i).cwiseProduct((g_soft.row(i).array() - dot).matrix());
  }

  MetaGradient out;
  out.n_ = n;
  out.grad_factor_ = Mat::Zero(n, static_cast<long>(k_steps) * c);
  out.state_factor_ = Mat::Zero(n, static_cast<long>(k_steps) * c);

  // Backward through the recurrence Z_t = (1-a) A Z_{t-1} + a C0.
  Mat grad = g_z;  // dL/dZ_t, starting at t = K
  for (int t = k_steps; t >= 1; --t) {
    out.grad_factor_.middleCols(static_cast<long>(t - 1) * c, c) = keep * grad;
    out.state_factor_.middleCols(static_cast<long>(t - 1) * c, c) =
        states[static_cast<std::size_t>(t - 1)];
    if (t > 1) grad = keep * norm.matrix.multiply(grad);
  }

  out.inv_sqrt_deg_ = norm.degrees.cwiseSqrt().cwiseInverse();

  // Degree-dependence sums over the sparsity pattern of the normalized
  // adjacency (rows and columns collapse by symmetry of the pattern).
  out.pattern_term_ = Vec::Zero(n);
  for (int u = 0; u < n; ++u) {
    double rc = 0.0;
    for (long p = norm.matrix.indptr[u]; p < norm.matrix.indptr[u + 1]; ++p) {
      const int v = norm.matrix.indices[p];
      const double w = norm.matrix.values[p];
      double guv = out.grad_factor_.row(u).dot(out.state_factor_.row(v));
      double gvu = out.grad_factor_.row(v).dot(out.state_factor_.row(u));
      rc += w * (guv + gvu);
    }
    out.pattern_term_[u] = rc / (4.0 * norm.degrees[u]);
  }

  std::uint64_t h = fnv1a64(&n, sizeof(n));
  for (int i = 0; i < n; ++i)
    h = fnv1a64(g.adj[i].data(), sizeof(int) * g.adj[i].size(), h);
  h = fnv1a64(init.labels.data(), sizeof(int) * init.labels.size(), h);
  h = fnv1a64(&alpha, sizeof(alpha), h);
  h = fnv1a64(&k_steps, sizeof(k_steps), h);
  out.snapshot_hash_ = h;

  for (int i = 0; i < out.grad_factor_.rows(); ++i) {
    if (!out.grad_factor_.row(i).allFinite() || !std::isfinite(out.pattern_term_[i]))
      throw NumericalError("non-finite meta-gradient at node " +
                           std::to_string(i));
  }
  return out;
}

double MetaGradient::entry(int i, int j) const {
  if (i == j) return 0.0;
  double gij = grad_factor_.row(i).dot(state_factor_.row(j));
  double gji = grad_factor_.row(j).dot(state_factor_.row(i));
  return 0.5 * (gij + gji) * inv_sqrt_deg_[i] * inv_sqrt_deg_[j] -
         pattern_term_[i] - pattern_term_[j];
}

Mat MetaGradient::dense() const {
  Mat out = Mat::Zero(n_, n_);
  for (int i = 0; i < n_; ++i)
    for (int j = i + 1; j < n_; ++j) out(i, j) = out(j, i) = entry(i, j);
  return out;
}

namespace {

// Independent dense evaluation of the propagation loss, arranged as the
// explicit power series rather than the recurrence.
double dense_loss(const Mat& adjacency, const Mat& onehot, double alpha,
                  int k_steps, std::span<const int> sensitive) {
  const int n = static_cast<int>(adjacency.rows());
  Mat tilde = adjacency + Mat::Identity(n, n);
  Vec deg = tilde.rowwise().sum();
  Vec dinv = deg.cwiseSqrt().cwiseInverse();
  Mat norm = dinv.asDiagonal() * tilde * dinv.asDiagonal();

  Mat power = onehot;  // A^t C0
  Mat z = Mat::Zero(onehot.rows(), onehot.cols());
  double w = 1.0;  // (1-a)^t
  for (int t = 0; t < k_steps; ++t) {
    z += alpha * w * power;
    power = norm * power;
    w *= 1.0 - alpha;
  }
  z += w * power;

  // Row softmax and soft statistical parity, inlined.
  long gsize[2] = {0, 0};
  const int c = static_cast<int>(onehot.cols());
  Vec mean0 = Vec::Zero(c), mean1 = Vec::Zero(c);
  for (int i = 0; i < n; ++i) {
    double mx = z.row(i).maxCoeff();
    Eigen::Array<double, 1, Eigen::Dynamic> e = (z.row(i).array() - mx).exp();
    Eigen::Array<double, 1, Eigen::Dynamic> p = e / e.sum();
    int s = sensitive[static_cast<std::size_t>(i)];
    ++gsize[s];
    if (s == 0)
      mean0 += p.matrix().transpose();
    else
      mean1 += p.matrix().transpose();
  }
  mean0 /= static_cast<double>(gsize[0]);
  mean1 /= static_cast<double>(gsize[1]);
  return 0.5 * (mean0 - mean1).cwiseAbs().sum();
}

}  // namespace

double finite_difference_oracle(const Graph& g, const CommunityInit& init,
                                double alpha, int k_steps, int i, int j,
                                double h) {
  if (i == j) throw ValidationError("finite_difference_oracle: need i != j");
  if (h <= 0.0) throw ValidationError("finite_difference_oracle: need h > 0");
  const int n = g.num_nodes;
  Mat adjacency = Mat::Zero(n, n);
  for (int u = 0; u < n; ++u)
    for (int v : g.adj[u]) adjacency(u, v) = 1.0;

  Mat plus = adjacency;
  plus(i, j) += h;
  plus(j, i) += h;
  Mat minus = adjacency;
  minus(i, j) -= h;
  minus(j, i) -= h;

  double lp = dense_loss(plus, init.onehot, alpha, k_steps, g.sensitive);
  double lm = dense_loss(minus, init.onehot, alpha, k_steps, g.sensitive);
  return (lp - lm) / (4.0 * h);
}

std::vector<GradientEntry> most_negative_entries(const MetaGradient& grad,
                                                 const Graph& g, int k) {
  std::vector<GradientEntry> heap;
  auto cmp = [](const GradientEntry& a, const GradientEntry& b) {
    if (a.value != b.value) return a.value < b.value;
    return std::pair(a.i, a.j) < std::pair(b.i, b.j);
  };
  grad.visit_candidates(g, [&](int i, int j, double value) {
    GradientEntry e{i, j, value};
    if (static_cast<int>(heap.size()) < k) {
      heap.push_back(e);
      std::push_heap(heap.begin(), heap.end(), cmp);
    } else if (!heap.empty() && cmp(e, heap.front())) {
      std::pop_heap(heap.begin(), heap.end(), cmp);
      heap.back() = e;
      std::push_heap(heap.begin(), heap.end(), cmp);
    }
  });
  std::sort_heap(heap.begin(), heap.end(), cmp);
  return heap;
}

}  // namespace fairguide
