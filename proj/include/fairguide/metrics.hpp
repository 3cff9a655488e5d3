#pragma once

#include <span>
#include <vector>

#include "fairguide/common.hpp"

namespace fairguide {

// Per-group class rates. rates[g][k] = P(class k | sensitive group g),
// computed from the class sums so that hard and soft inputs share one code
// path (on one-hot inputs the sums are exact integers).
struct GroupStats {
  long group_size[2] = {0, 0};
  std::vector<double> rates[2];
};

GroupStats group_class_stats(std::span<const int> assignments,
                             std::span<const int> sensitive, int num_classes);

// |P(Yhat=1|s=0) - P(Yhat=1|s=1)| for binary predictions.
double delta_sp_binary(std::span<const int> preds, std::span<const int> sensitive);

// Total-variation form: 1/2 sum_k |P(Yhat=k|s=0) - P(Yhat=k|s=1)|.
double delta_sp_multiclass(std::span<const int> assignments,
                           std::span<const int> sensitive);

// Differentiable surrogate over a row-stochastic soft assignment matrix:
// 1/2 sum_k |mean_{s=0} C[.,k] - mean_{s=1} C[.,k]|. Coincides with
// delta_sp_multiclass on one-hot rows.
double delta_sp_soft(const Mat& soft, std::span<const int> sensitive);

// |P(Yhat=1|s=0,Y=1) - P(Yhat=1|s=1,Y=1)|.
double delta_eo(std::span<const int> preds, std::span<const int> sensitive,
                std::span<const int> labels);

// Sample Pearson correlation; equals the cosine of the centered vectors.
double pearson(std::span<const double> x, std::span<const double> y);

// Interval [cos(pi/2 + delta + alpha), cos(pi/2 - delta - alpha)] bounding
// rho(S, Yhat) when rho(C, Yhat) >= cos(alpha) and rho(S, C) stays within
// delta of zero.
struct CorrelationBound {
  double alpha = 0.0;
  double delta = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

CorrelationBound correlation_bound(double alpha, double delta);

}  // namespace fairguide
