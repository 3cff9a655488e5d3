#pragma once

#include <cstdint>
#include <span>

#include "fairguide/community.hpp"
#include "fairguide/graph.hpp"

namespace fairguide {

// Exact reverse-mode derivative of the soft statistical-parity loss with
// respect to adjacency entries, through (i) the row-softmax, (ii) the K-step
// restart recurrence, and (iii) the degree normalization of A + I.
//
// The gradient of the loss w.r.t. the normalized adjacency is the low-rank
// sum  G = (1-a) * sum_t  grad_t * state_{t-1}^T  with N x C factors, so the
// full N x N matrix is never materialized. The symmetrized entry for a pair
// (i,j) -- matching the central difference of a simultaneous perturbation of
// A_ij and A_ji divided by 4h -- is
//
//   0.5*(G_ij + G_ji)/sqrt(d_i d_j) - rc_i/(4 d_i) - rc_j/(4 d_j)
//
// where rc_u collects the degree dependence of row/column u of the
// normalized adjacency.
class MetaGradient {
 public:
  // Symmetrized gradient entry; zero on the diagonal. Works for both
  // candidate pairs and existing edges.
  double entry(int i, int j) const;

  // Dense symmetrized matrix; intended for small test graphs.
  Mat dense() const;

  // Streams (i, j, gradient) over every non-edge i<j in lexicographic order.
  // Runs blocked matrix products internally; this is the path the sampler
  // uses at scale.
  template <class Fn>
  void visit_candidates(const Graph& g, Fn&& fn) const {
    const int block = 128;
    Mat m1, m2;
    for (int i0 = 0; i0 < n_; i0 += block) {
      const int rows = std::min(block, n_ - i0);
      m1.noalias() = grad_factor_.middleRows(i0, rows) * state_factor_.transpose();
      m2.noalias() = state_factor_.middleRows(i0, rows) * grad_factor_.transpose();
      for (int r = 0; r < rows; ++r) {
        const int i = i0 + r;
        const auto& row = g.adj[i];
        std::size_t p = 0;
        while (p < row.size() && row[p] <= i) ++p;
        for (int j = i + 1; j < n_; ++j) {
          if (p < row.size() && row[p] == j) {
            ++p;
            continue;
          }
          double direct =
              0.5 * (m1(r, j) + m2(r, j)) * inv_sqrt_deg_[i] * inv_sqrt_deg_[j];
          fn(i, j, direct - pattern_term_[i] - pattern_term_[j]);
        }
      }
    }
  }

  int num_nodes() const { return n_; }
  std::uint64_t snapshot_hash() const { return snapshot_hash_; }

 private:
  friend MetaGradient meta_gradient(const Graph&, const CommunityInit&, double,
                                    int, double);
  int n_ = 0;
  Mat grad_factor_;   // N x (K*C); block t holds (1-a) * dL/dZ_{t+1}
  Mat state_factor_;  // N x (K*C); block t holds Z_t
  Vec inv_sqrt_deg_;
  Vec pattern_term_;  // rc_u / (4 d_u)
  std::uint64_t snapshot_hash_ = 0;
};

// dL/dC for L = delta_sp_soft(C, s): entry (i,k) is
// +-sign(mean0_k - mean1_k) / (2 * group size of i), subgradient 0 at ties.
Mat grad_loss_wrt_assignment(const Mat& soft, std::span<const int> sensitive);

// Evaluates the full reverse-mode gradient at g's current structure.
// loss_scale multiplies the loss (used by linearity checks and diagnostics).
MetaGradient meta_gradient(const Graph& g, const CommunityInit& init,
                           double alpha, int k_steps, double loss_scale = 1.0);

// Symmetric central difference (L(A + h E_ij + h E_ji) - L(A - ...)) / (4h)
// on an independent dense evaluation of the propagation loss. Accepts any
// off-diagonal pair, edge or non-edge.
double finite_difference_oracle(const Graph& g, const CommunityInit& init,
                                double alpha, int k_steps, int i, int j,
                                double h);

// Top-k most negative gradient entries over candidates (debug dump).
struct GradientEntry {
  int i = 0;
  int j = 0;
  double value = 0.0;
};
std::vector<GradientEntry> most_negative_entries(const MetaGradient& grad,
                                                 const Graph& g, int k);

}  // namespace fairguide
