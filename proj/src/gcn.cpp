#include <algorithm>
#include <cmath>
#include <numeric>

#include "fairguide/eval.hpp"
#include "fairguide/graph.hpp"
#include "fairguide/rng.hpp"

namespace fairguide {

Split make_split(const std::vector<int>& labels, std::uint64_t seed) {
  std::vector<int> labeled;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] >= 0) labeled.push_back(static_cast<int>(i));
  if (labeled.size() < 4)
    throw ValidationError("split: need at least 4 labeled nodes");

  Rng rng(derive_seed(seed, "split"));
  for (std::size_t t = 0; t + 1 < labeled.size(); ++t) {
    std::size_t pick =
        t + static_cast<std::size_t>(rng.uniform_int(labeled.size() - t));
    std::swap(labeled[t], labeled[pick]);
  }
  const std::size_t quarter = labeled.size() / 4;
  Split split;
  split.val.assign(labeled.begin(), labeled.begin() + quarter);
  split.test.assign(labeled.begin() + quarter, labeled.begin() + 2 * quarter);
  split.train.assign(labeled.begin() + 2 * quarter, labeled.end());
  std::sort(split.val.begin(), split.val.end());
  std::sort(split.test.begin(), split.test.end());
  std::sort(split.train.begin(), split.train.end());
  return split;
}

double f1_binary(std::span<const int> y_true, std::span<const int> y_pred) {
  long tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    if (y_pred[i] == 1 && y_true[i] == 1) ++tp;
    if (y_pred[i] == 1 && y_true[i] != 1) ++fp;
    if (y_pred[i] != 1 && y_true[i] == 1) ++fn;
  }
  if (tp == 0) return fp == 0 && fn == 0 ? 1.0 : 0.0;
  double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  double recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  return 2.0 * precision * recall / (precision + recall);
}

std::optional<double> auc_score(std::span<const int> y_true,
                                std::span<const double> scores) {
  const std::size_t n = y_true.size();
  long n_pos = 0;
  for (int y : y_true) n_pos += y == 1;
  long n_neg = static_cast<long>(n) - n_pos;
  if (n_pos == 0 || n_neg == 0) return std::nullopt;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] < scores[b];
  });

  // Midranks over tied scores.
  double rank_sum_pos = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    double midrank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
    for (std::size_t t = i; t <= j; ++t)
      if (y_true[order[t]] == 1) rank_sum_pos += midrank;
    i = j + 1;
  }
  double u = rank_sum_pos -
             static_cast<double>(n_pos) * (static_cast<double>(n_pos) + 1.0) / 2.0;
  return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

GcnOutput train_gcn(const Graph& g, const Split& split, const GcnConfig& cfg) {
  const int n = g.num_nodes;
  const int m = static_cast<int>(g.features.cols());
  if (!g.has_labels()) throw ValidationError("gcn: graph has no labels");
  for (int i : split.train)
    if (g.labels[static_cast<std::size_t>(i)] != 0 &&
        g.labels[static_cast<std::size_t>(i)] != 1)
      throw ValidationError("gcn: non-binary label at node " + std::to_string(i));

  NormAdj norm = normalized_adjacency(g);
  Mat sx = norm.matrix.multiply(g.features);  // A X, fixed across epochs

  Rng rng(derive_seed(cfg.seed, "gcn"));
  auto glorot = [&](int rows, int cols) {
    Mat w(rows, cols);
    double scale = std::sqrt(1.0 / static_cast<double>(rows));
    for (int r = 0; r < rows; ++r)
      for (int c0 = 0; c0 < cols; ++c0) w(r, c0) = rng.normal() * scale;
    return w;
  };
  Mat w1 = glorot(m, cfg.hidden);
  Vec b1 = Vec::Zero(cfg.hidden);
  Mat w2 = glorot(cfg.hidden, 2);
  Vec b2 = Vec::Zero(2);

  // Adam state.
  struct Adam {
    double lr, beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    int t = 0;
    void step(Mat& w, const Mat& g1, Mat& mm, Mat& vv, double corr1,
              double corr2) const {
      mm = beta1 * mm + (1 - beta1) * g1;
      vv = beta2 * vv + (1 - beta2) * g1.cwiseProduct(g1);
      w -= lr * (mm / corr1).cwiseQuotient(
                    ((vv / corr2).cwiseSqrt().array() + eps).matrix());
    }
    void step(Vec& w, const Vec& g1, Vec& mm, Vec& vv, double corr1,
              double corr2) const {
      mm = beta1 * mm + (1 - beta1) * g1;
      vv = beta2 * vv + (1 - beta2) * g1.cwiseProduct(g1);
      w -= lr * (mm / corr1).cwiseQuotient(
                    ((vv / corr2).cwiseSqrt().array() + eps).matrix());
    }
  } adam{cfg.lr};
  Mat m_w1 = Mat::Zero(m, cfg.hidden), v_w1 = Mat::Zero(m, cfg.hidden);
  Mat m_w2 = Mat::Zero(cfg.hidden, 2), v_w2 = Mat::Zero(cfg.hidden, 2);
  Vec m_b1 = Vec::Zero(cfg.hidden), v_b1 = Vec::Zero(cfg.hidden);
  Vec m_b2 = Vec::Zero(2), v_b2 = Vec::Zero(2);

  const double inv_train = 1.0 / static_cast<double>(split.train.size());
  Mat best_w1 = w1, best_w2 = w2;
  Vec best_b1 = b1, best_b2 = b2;
  double best_val = -1.0;
  int best_epoch = -1;

  std::vector<int> val_true, val_pred;
  val_true.reserve(split.val.size());
  for (int i : split.val) val_true.push_back(g.labels[static_cast<std::size_t>(i)]);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    Mat u1 = (sx * w1).rowwise() + b1.transpose();
    Mat h = u1.cwiseMax(0.0);
    Mat sh = norm.matrix.multiply(h);
    Mat logits = (sh * w2).rowwise() + b2.transpose();
    Mat probs(n, 2);
    for (int i = 0; i < n; ++i) {
      double mx = std::max(logits(i, 0), logits(i, 1));
      double e0 = std::exp(logits(i, 0) - mx);
      double e1 = std::exp(logits(i, 1) - mx);
      probs(i, 0) = e0 / (e0 + e1);
      probs(i, 1) = e1 / (e0 + e1);
    }

    double loss = 0.0;
    for (int i : split.train)
      loss -= std::log(std::max(probs(i, g.labels[static_cast<std::size_t>(i)]),
                                1e-300));
    loss *= inv_train;
    if (!std::isfinite(loss))
      throw NumericalError("gcn diverged at epoch " + std::to_string(epoch));

    // Validation selection.
    val_pred.clear();
    for (int i : split.val)
      val_pred.push_back(probs(i, 1) > probs(i, 0) ? 1 : 0);
    double val_f1 = f1_binary(val_true, val_pred);
    if (val_f1 > best_val) {
      best_val = val_f1;
      best_epoch = epoch;
      best_w1 = w1;
      best_b1 = b1;
      best_w2 = w2;
      best_b2 = b2;
    }

    // Backward.
    Mat g_logits = Mat::Zero(n, 2);
    for (int i : split.train) {
      int y = g.labels[static_cast<std::size_t>(i)];
      g_logits(i, 0) = (probs(i, 0) - (y == 0 ? 1.0 : 0.0)) * inv_train;
      g_logits(i, 1) = (probs(i, 1) - (y == 1 ? 1.0 : 0.0)) * inv_train;
    }
    Mat g_w2 = sh.transpose() * g_logits;
    Vec g_b2 = g_logits.colwise().sum();
    Mat g_sh = g_logits * w2.transpose();
    Mat g_h = norm.matrix.multiply(g_sh);  // symmetric operator
    Mat g_u1 = (u1.array() > 0.0).cast<double>().matrix().cwiseProduct(g_h);
    Mat g_w1 = sx.transpose() * g_u1;
    Vec g_b1 = g_u1.colwise().sum();

    ++adam.t;
    double corr1 = 1.0 - std::pow(adam.beta1, adam.t);
    double corr2 = 1.0 - std::pow(adam.beta2, adam.t);
    adam.step(w1, g_w1, m_w1, v_w1, corr1, corr2);
    adam.step(b1, g_b1, m_b1, v_b1, corr1, corr2);
    adam.step(w2, g_w2, m_w2, v_w2, corr1, corr2);
    adam.step(b2, g_b2, m_b2, v_b2, corr1, corr2);
  }

  // Predictions from the best checkpoint.
  Mat u1 = (sx * best_w1).rowwise() + best_b1.transpose();
  Mat sh = norm.matrix.multiply(u1.cwiseMax(0.0));
  Mat logits = (sh * best_w2).rowwise() + best_b2.transpose();
  GcnOutput out;
  out.preds.resize(static_cast<std::size_t>(n));
  out.prob1.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    double mx = std::max(logits(i, 0), logits(i, 1));
    double e0 = std::exp(logits(i, 0) - mx);
    double e1 = std::exp(logits(i, 1) - mx);
    out.preds[static_cast<std::size_t>(i)] = e1 > e0 ? 1 : 0;
    out.prob1[static_cast<std::size_t>(i)] = e1 / (e0 + e1);
  }
  out.best_val_f1 = best_val;
  out.best_epoch = best_epoch;
  return out;
}

}  // namespace fairguide
