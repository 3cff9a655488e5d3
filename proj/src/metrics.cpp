#include "fairguide/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace fairguide {

namespace {

void check_groups(long n0, long n1) {
  if (n0 == 0) throw ValidationError("undefined metric: sensitive group 0 is empty");
  if (n1 == 0) throw ValidationError("undefined metric: sensitive group 1 is empty");
}

// Shared final reduction; ascending class order so the hard and soft paths
// produce bit-identical results on one-hot inputs.
double tv_distance(const std::vector<double>& p0, const std::vector<double>& p1) {
  double tv = 0.0;
  for (std::size_t k = 0; k < p0.size(); ++k) tv += std::abs(p0[k] - p1[k]);
  return 0.5 * tv;
}

}  // namespace

GroupStats group_class_stats(std::span<const int> assignments,
                             std::span<const int> sensitive, int num_classes) {
  GroupStats st;
  st.rates[0].assign(static_cast<std::size_t>(num_classes), 0.0);
  st.rates[1].assign(static_cast<std::size_t>(num_classes), 0.0);
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    int s = sensitive[i];
    ++st.group_size[s];
    st.rates[s][static_cast<std::size_t>(assignments[i])] += 1.0;
  }
  check_groups(st.group_size[0], st.group_size[1]);
  for (int g = 0; g < 2; ++g)
    for (auto& r : st.rates[g]) r /= static_cast<double>(st.group_size[g]);
  return st;
}

double delta_sp_binary(std::span<const int> preds,
                       std::span<const int> sensitive) {
  long n[2] = {0, 0};
  long pos[2] = {0, 0};
  for (std::size_t i = 0; i < preds.size(); ++i) {
    int s = sensitive[i];
    ++n[s];
    if (preds[i] == 1) ++pos[s];
  }
  check_groups(n[0], n[1]);
  double p0 = static_cast<double>(pos[0]) / static_cast<double>(n[0]);
  double p1 = static_cast<double>(pos[1]) / static_cast<double>(n[1]);
  return std::abs(p0 - p1);
}

double delta_sp_multiclass(std::span<const int> assignments,
                           std::span<const int> sensitive) {
  int num_classes = 0;
  for (int a : assignments) {
    if (a < 0) throw ValidationError("negative class id");
    num_classes = std::max(num_classes, a + 1);
  }
  if (num_classes == 0) num_classes = 1;
  GroupStats st = group_class_stats(assignments, sensitive, num_classes);
  return tv_distance(st.rates[0], st.rates[1]);
}

double delta_sp_soft(const Mat& soft, std::span<const int> sensitive) {
  const int n = static_cast<int>(soft.rows());
  const int c = static_cast<int>(soft.cols());
  long gsize[2] = {0, 0};
  std::vector<double> mean0(static_cast<std::size_t>(c), 0.0);
  std::vector<double> mean1(static_cast<std::size_t>(c), 0.0);
  for (int i = 0; i < n; ++i) {
    double row_sum = soft.row(i).sum();
    if (std::abs(row_sum - 1.0) > 1e-6)
      throw ValidationError("soft assignment row " + std::to_string(i) +
                            " is not stochastic (sum " +
                            std::to_string(row_sum) + ")");
    auto& mean = sensitive[static_cast<std::size_t>(i)] == 0 ? mean0 : mean1;
    ++gsize[sensitive[static_cast<std::size_t>(i)]];
    for (int k = 0; k < c; ++k) mean[static_cast<std::size_t>(k)] += soft(i, k);
  }
  check_groups(gsize[0], gsize[1]);
  for (int k = 0; k < c; ++k) {
    mean0[static_cast<std::size_t>(k)] /= static_cast<double>(gsize[0]);
    mean1[static_cast<std::size_t>(k)] /= static_cast<double>(gsize[1]);
  }
  return tv_distance(mean0, mean1);
}

double delta_eo(std::span<const int> preds, std::span<const int> sensitive,
                std::span<const int> labels) {
  long n[2] = {0, 0};
  long pos[2] = {0, 0};
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (labels[i] != 1) continue;
    int s = sensitive[i];
    ++n[s];
    if (preds[i] == 1) ++pos[s];
  }
  if (n[0] == 0 || n[1] == 0)
    throw ValidationError("undefined metric: a sensitive group has no positives");
  double p0 = static_cast<double>(pos[0]) / static_cast<double>(n[0]);
  double p1 = static_cast<double>(pos[1]) / static_cast<double>(n[1]);
  return std::abs(p0 - p1);
}

double pearson(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n != y.size() || n < 2)
    throw ValidationError("pearson: need two equal-length vectors of size >= 2");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double dx = x[i] - mx;
    double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0)
    throw ValidationError("undefined metric: zero variance in pearson input");
  return sxy / std::sqrt(sxx * syy);
}

CorrelationBound correlation_bound(double alpha, double delta) {
  if (!(alpha >= 0.0) || !(delta >= 0.0) || !(alpha + delta <= M_PI / 2.0))
    throw ValidationError(
        "correlation_bound: need alpha, delta >= 0 and alpha + delta <= pi/2");
  CorrelationBound b;
  b.alpha = alpha;
  b.delta = delta;
  // cos(pi/2 +- t) = -+ sin(t); the sin form keeps the interval exactly
  // symmetric about zero.
  b.hi = std::sin(alpha + delta);
  b.lo = -b.hi;
  return b;
}

}  // namespace fairguide
