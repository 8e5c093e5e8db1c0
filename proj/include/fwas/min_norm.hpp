#pragma once

// Wolfe's minimum-norm-point algorithm and the hull-to-hull distance built on it.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "fwas/error.hpp"

namespace fwas {

struct MinNormResult {
  Eigen::VectorXd point;         // argmin of the norm over conv(points)
  Eigen::VectorXd coefficients;  // convex weights, one per input column
  int major_cycles = 0;
};

struct MinNormOptions {
  double rel_tol = 1e-10;   // stop when |x|^2 - min_p <x,p> <= rel_tol |x|^2
  double abs_tol = 1e-14;   // ... or below abs_tol * max |p|^2
  int max_cycles = 10000;
};

namespace detail {

// Affine minimiser of the norm over the points indexed by `corral`, returned
// as affine weights summing to one.
inline Eigen::VectorXd affine_min_weights(const Eigen::MatrixXd& P, const std::vector<Eigen::Index>& corral) {
  const auto k = static_cast<Eigen::Index>(corral.size());
  Eigen::VectorXd alpha(k);
  if (k == 1) {
    alpha(0) = 1.0;
    return alpha;
  }
  const Eigen::VectorXd base = P.col(corral[0]);
  Eigen::MatrixXd D(P.rows(), k - 1);
  for (Eigen::Index i = 1; i < k; ++i) D.col(i - 1) = P.col(corral[static_cast<std::size_t>(i)]) - base;
  const Eigen::VectorXd beta = D.completeOrthogonalDecomposition().solve(-base);
  alpha(0) = 1.0 - beta.sum();
  alpha.tail(k - 1) = beta;
  return alpha;
}

}  // namespace detail

/// Columns of `points` are the generators; at least one column is required.
inline MinNormResult min_norm_point(const Eigen::MatrixXd& points, const MinNormOptions& opts = {}) {
  const Eigen::Index k = points.cols();
  if (k == 0) throw InvalidArgument("min_norm_point: empty point set");
  if (!points.allFinite()) throw InvalidArgument("min_norm_point: non-finite point");

  const Eigen::VectorXd sq_norms = points.colwise().squaredNorm().transpose();
  const double scale = sq_norms.maxCoeff();

  Eigen::Index start = 0;
  for (Eigen::Index i = 1; i < k; ++i)
    if (sq_norms(i) < sq_norms(start)) start = i;

  std::vector<Eigen::Index> corral{start};
  std::vector<double> lambda{1.0};
  Eigen::VectorXd x = points.col(start);
  MinNormResult res;

  for (int cycle = 0; cycle < opts.max_cycles; ++cycle) {
    res.major_cycles = cycle + 1;
    const Eigen::VectorXd proj = points.transpose() * x;
    Eigen::Index j = 0;
    for (Eigen::Index i = 1; i < k; ++i)
      if (proj(i) < proj(j)) j = i;
    const double xx = x.squaredNorm();
    if (xx - proj(j) <= std::max(opts.rel_tol * xx, opts.abs_tol * scale)) break;
    if (std::find(corral.begin(), corral.end(), j) != corral.end()) break;  // stalled on rounding

    corral.push_back(j);
    lambda.push_back(0.0);
    bool stalled = false;

    for (;;) {  // minor cycles
      const Eigen::VectorXd alpha = detail::affine_min_weights(points, corral);
      if (alpha.minCoeff() > 1e-14) {
        for (std::size_t i = 0; i < corral.size(); ++i) lambda[i] = alpha(static_cast<Eigen::Index>(i));
        break;
      }
      double theta = std::numeric_limits<double>::infinity();
      std::size_t blocking = corral.size();
      for (std::size_t i = 0; i < corral.size(); ++i) {
        const double a = alpha(static_cast<Eigen::Index>(i));
        if (a <= 1e-14 && lambda[i] - a > 0.0) {
          const double t = lambda[i] / (lambda[i] - a);
          if (t < theta) {
            theta = t;
            blocking = i;
          }
        }
      }
      if (blocking == corral.size()) {  // only the new point is nonpositive; keep the old corral
        corral.pop_back();
        lambda.pop_back();
        stalled = true;
        break;
      }
      theta = std::min(theta, 1.0);
      for (std::size_t i = 0; i < corral.size(); ++i)
        lambda[i] = theta * alpha(static_cast<Eigen::Index>(i)) + (1.0 - theta) * lambda[i];
      lambda[blocking] = 0.0;
      std::vector<Eigen::Index> kept;
      std::vector<double> kept_lambda;
      for (std::size_t i = 0; i < corral.size(); ++i) {
        if (lambda[i] > 1e-15) {
          kept.push_back(corral[i]);
          kept_lambda.push_back(lambda[i]);
        }
      }
      if (kept.empty()) {  // cannot happen in exact arithmetic; keep the newest point
        kept.push_back(corral.back());
        kept_lambda.push_back(1.0);
      }
      corral = std::move(kept);
      lambda = std::move(kept_lambda);
      double total = 0.0;
      for (double l : lambda) total += l;
      for (double& l : lambda) l /= total;
    }

    if (stalled) break;
    x.setZero(points.rows());
    for (std::size_t i = 0; i < corral.size(); ++i) x += lambda[i] * points.col(corral[i]);
    if (x.squaredNorm() >= xx) break;  // no progress left at this precision
  }

  res.coefficients = Eigen::VectorXd::Zero(k);
  for (std::size_t i = 0; i < corral.size(); ++i) res.coefficients(corral[i]) = lambda[i];
  res.point = points * res.coefficients;
  return res;
}

struct HullDistance {
  double distance = 0.0;
  Eigen::VectorXd u;        // closest point of conv(S)
  Eigen::VectorXd v;        // closest point of conv(T)
  Eigen::VectorXd s_weights;
  Eigen::VectorXd t_weights;
};

/// Distance between conv(S) and conv(T) (columns are points), computed as the
/// minimum-norm point of the Minkowski difference generators s_i - t_j.
inline HullDistance polytope_distance(const Eigen::MatrixXd& S, const Eigen::MatrixXd& T,
                                      const MinNormOptions& opts = {}) {
  if (S.cols() == 0 || T.cols() == 0) throw InvalidArgument("polytope_distance: empty point set");
  if (S.rows() != T.rows()) throw DimensionMismatch("polytope_distance: dimension mismatch");
  const Eigen::Index ns = S.cols(), nt = T.cols();
  Eigen::MatrixXd diff(S.rows(), ns * nt);
  for (Eigen::Index i = 0; i < ns; ++i)
    for (Eigen::Index j = 0; j < nt; ++j) diff.col(i * nt + j) = S.col(i) - T.col(j);

  const MinNormResult mn = min_norm_point(diff, opts);
  HullDistance out;
  out.s_weights = Eigen::VectorXd::Zero(ns);
  out.t_weights = Eigen::VectorXd::Zero(nt);
  for (Eigen::Index i = 0; i < ns; ++i)
    for (Eigen::Index j = 0; j < nt; ++j) {
      const double c = mn.coefficients(i * nt + j);
      out.s_weights(i) += c;
      out.t_weights(j) += c;
    }
  out.u = S * out.s_weights;
  out.v = T * out.t_weights;
  out.distance = (out.u - out.v).norm();
  const double scale = std::max(S.cwiseAbs().maxCoeff(), T.cwiseAbs().maxCoeff());
  if (out.distance <= 1e-13 * std::max(1.0, scale)) {
    out.v = out.u;
    out.distance = 0.0;
  }
  return out;
}

}  // namespace fwas
