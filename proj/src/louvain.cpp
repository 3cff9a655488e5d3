#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>

#include "fairguide/eval.hpp"
#include "fairguide/rng.hpp"

namespace fairguide {

namespace {

// Weighted level graph. Self-weight follows the A_uu convention: it already
// counts double in the node degree.
struct LevelGraph {
  std::vector<std::vector<std::pair<int, double>>> adj;
  std::vector<double> selfw;
  std::vector<double> k;  // weighted degree incl. self-weight
  double two_m = 0.0;

  int size() const { return static_cast<int>(adj.size()); }
};

double level_modularity(const LevelGraph& lg, const std::vector<int>& comm) {
  int nc = *std::max_element(comm.begin(), comm.end()) + 1;
  std::vector<double> sum_in(static_cast<std::size_t>(nc), 0.0);
  std::vector<double> sum_tot(static_cast<std::size_t>(nc), 0.0);
  for (int u = 0; u < lg.size(); ++u) {
    sum_tot[static_cast<std::size_t>(comm[static_cast<std::size_t>(u)])] += lg.k[static_cast<std::size_t>(u)];
    sum_in[static_cast<std::size_t>(comm[static_cast<std::size_t>(u)])] += lg.selfw[static_cast<std::size_t>(u)];
    for (auto [v, w] : lg.adj[static_cast<std::size_t>(u)])
      if (comm[static_cast<std::size_t>(u)] == comm[static_cast<std::size_t>(v)])
        sum_in[static_cast<std::size_t>(comm[static_cast<std::size_t>(u)])] += w;
  }
  double q = 0.0;
  for (int c = 0; c < nc; ++c) {
    double tot = sum_tot[static_cast<std::size_t>(c)] / lg.two_m;
    q += sum_in[static_cast<std::size_t>(c)] / lg.two_m - tot * tot;
  }
  return q;
}

// One pass of local moves; returns the community assignment for this level.
std::vector<int> local_moves(const LevelGraph& lg, Rng& rng) {
  const int n = lg.size();
  std::vector<int> comm(static_cast<std::size_t>(n));
  std::iota(comm.begin(), comm.end(), 0);
  std::vector<double> sum_tot(lg.k.begin(), lg.k.end());

  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  for (int t = 0; t + 1 < n; ++t) {
    int pick = t + static_cast<int>(rng.uniform_int(
                       static_cast<std::uint64_t>(n - t)));
    std::swap(order[static_cast<std::size_t>(t)],
              order[static_cast<std::size_t>(pick)]);
  }

  const double m = lg.two_m / 2.0;
  std::vector<double> w_to(static_cast<std::size_t>(n), 0.0);
  bool moved = true;
  while (moved) {
    moved = false;
    for (int u : order) {
      const int old_c = comm[static_cast<std::size_t>(u)];
      // Weights from u to each adjacent community; ids collected in
      // ascending order for deterministic tie-breaks.
      std::vector<int> touched;
      for (auto [v, w] : lg.adj[static_cast<std::size_t>(u)]) {
        int c = comm[static_cast<std::size_t>(v)];
        if (w_to[static_cast<std::size_t>(c)] == 0.0 &&
            std::find(touched.begin(), touched.end(), c) == touched.end())
          touched.push_back(c);
        w_to[static_cast<std::size_t>(c)] += w;
      }
      std::sort(touched.begin(), touched.end());

      sum_tot[static_cast<std::size_t>(old_c)] -= lg.k[static_cast<std::size_t>(u)];
      double best_gain = w_to[static_cast<std::size_t>(old_c)] / m -
                         sum_tot[static_cast<std::size_t>(old_c)] *
                             lg.k[static_cast<std::size_t>(u)] /
                             (2.0 * m * m);
      int best_c = old_c;
      for (int c : touched) {
        if (c == old_c) continue;
        double gain = w_to[static_cast<std::size_t>(c)] / m -
                      sum_tot[static_cast<std::size_t>(c)] *
                          lg.k[static_cast<std::size_t>(u)] / (2.0 * m * m);
        if (gain > best_gain + 1e-12) {
          best_gain = gain;
          best_c = c;
        }
      }
      sum_tot[static_cast<std::size_t>(best_c)] += lg.k[static_cast<std::size_t>(u)];
      if (best_c != old_c) {
        comm[static_cast<std::size_t>(u)] = best_c;
        moved = true;
      }
      for (int c : touched) w_to[static_cast<std::size_t>(c)] = 0.0;
      w_to[static_cast<std::size_t>(old_c)] = 0.0;
    }
  }
  return comm;
}

// Renumber communities to 0..nc-1 by ascending old id.
int compact(std::vector<int>& comm) {
  int mx = *std::max_element(comm.begin(), comm.end());
  std::vector<int> remap(static_cast<std::size_t>(mx) + 1, -1);
  for (int c : comm) remap[static_cast<std::size_t>(c)] = 0;
  int next = 0;
  for (auto& r : remap)
    if (r == 0) r = next++;
  for (auto& c : comm) c = remap[static_cast<std::size_t>(c)];
  return next;
}

LevelGraph coarsen(const LevelGraph& lg, const std::vector<int>& comm, int nc) {
  LevelGraph out;
  out.adj.assign(static_cast<std::size_t>(nc), {});
  out.selfw.assign(static_cast<std::size_t>(nc), 0.0);
  out.k.assign(static_cast<std::size_t>(nc), 0.0);
  out.two_m = lg.two_m;
  std::vector<std::vector<double>> cross(static_cast<std::size_t>(nc));
  for (auto& row : cross) row.assign(static_cast<std::size_t>(nc), 0.0);
  for (int u = 0; u < lg.size(); ++u) {
    int cu = comm[static_cast<std::size_t>(u)];
    out.selfw[static_cast<std::size_t>(cu)] += lg.selfw[static_cast<std::size_t>(u)];
    for (auto [v, w] : lg.adj[static_cast<std::size_t>(u)]) {
      int cv = comm[static_cast<std::size_t>(v)];
      if (cu == cv)
        out.selfw[static_cast<std::size_t>(cu)] += w;  // both orientations sum to 2w
      else
        cross[static_cast<std::size_t>(cu)][static_cast<std::size_t>(cv)] += w;
    }
  }
  for (int c = 0; c < nc; ++c) {
    for (int d = 0; d < nc; ++d)
      if (cross[static_cast<std::size_t>(c)][static_cast<std::size_t>(d)] > 0.0)
        out.adj[static_cast<std::size_t>(c)].emplace_back(
            d, cross[static_cast<std::size_t>(c)][static_cast<std::size_t>(d)]);
    out.k[static_cast<std::size_t>(c)] = out.selfw[static_cast<std::size_t>(c)];
    for (auto [d, w] : out.adj[static_cast<std::size_t>(c)])
      out.k[static_cast<std::size_t>(c)] += w;
  }
  return out;
}

}  // namespace

std::vector<int> louvain(const Graph& g, std::uint64_t seed) {
  const int n = g.num_nodes;
  std::vector<int> partition(static_cast<std::size_t>(n));
  std::iota(partition.begin(), partition.end(), 0);
  if (g.num_edges == 0) {
    std::cerr << "warning: louvain on an edgeless graph; every node is its own"
                 " community\n";
    return partition;
  }

  LevelGraph lg;
  lg.adj.assign(static_cast<std::size_t>(n), {});
  lg.selfw.assign(static_cast<std::size_t>(n), 0.0);
  lg.k.assign(static_cast<std::size_t>(n), 0.0);
  for (int u = 0; u < n; ++u) {
    for (int v : g.adj[u]) lg.adj[static_cast<std::size_t>(u)].emplace_back(v, 1.0);
    lg.k[static_cast<std::size_t>(u)] = static_cast<double>(g.adj[u].size());
  }
  lg.two_m = 2.0 * static_cast<double>(g.num_edges);

  Rng rng(derive_seed(seed, "louvain"));
  double last_q = level_modularity(lg, partition);

  while (true) {
    std::vector<int> comm = local_moves(lg, rng);
    int nc = compact(comm);
    // Lift this level's assignment onto the original nodes.
    std::vector<int> lifted(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
      lifted[static_cast<std::size_t>(i)] =
          comm[static_cast<std::size_t>(partition[static_cast<std::size_t>(i)])];
    LevelGraph coarse = coarsen(lg, comm, nc);
    std::vector<int> identity(static_cast<std::size_t>(nc));
    std::iota(identity.begin(), identity.end(), 0);
    double q = level_modularity(coarse, identity);
    if (q - last_q <= 1e-9) break;
    last_q = q;
    partition = std::move(lifted);
    if (nc == lg.size()) break;  // no merge happened
    lg = std::move(coarse);
  }

  // Relabel by first appearance in node order.
  std::vector<int> remap(partition.size(), -1);
  int next = 0;
  for (auto& c : partition) {
    if (remap[static_cast<std::size_t>(c)] == -1)
      remap[static_cast<std::size_t>(c)] = next++;
    c = remap[static_cast<std::size_t>(c)];
  }
  return partition;
}

double modularity(const Graph& g, const std::vector<int>& communities) {
  if (g.num_edges == 0) return 0.0;
  const double two_m = 2.0 * static_cast<double>(g.num_edges);
  int nc = *std::max_element(communities.begin(), communities.end()) + 1;
  std::vector<double> intra(static_cast<std::size_t>(nc), 0.0);
  std::vector<double> tot(static_cast<std::size_t>(nc), 0.0);
  for (int u = 0; u < g.num_nodes; ++u) {
    tot[static_cast<std::size_t>(communities[static_cast<std::size_t>(u)])] +=
        static_cast<double>(g.adj[u].size());
    for (int v : g.adj[u])
      if (communities[static_cast<std::size_t>(u)] ==
          communities[static_cast<std::size_t>(v)])
        intra[static_cast<std::size_t>(communities[static_cast<std::size_t>(u)])] += 1.0;
  }
  double q = 0.0;
  for (int c = 0; c < nc; ++c) {
    double t = tot[static_cast<std::size_t>(c)] / two_m;
    q += intra[static_cast<std::size_t>(c)] / two_m - t * t;
  }
  return q;
}

}  // namespace fairguide
