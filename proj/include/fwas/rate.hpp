#pragma once

// Linear-rate constants for Frank-Wolfe with away steps and checks of a
// recorded trace against them.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "fwas/error.hpp"
#include "fwas/objective.hpp"
#include "fwas/polytope.hpp"
#include "fwas/solver.hpp"

namespace fwas {

struct RateBound {
  double r = 0.0;    // min(raw, 1/2)
  double raw = 0.0;  // before clamping
  std::string kind;  // "generic", "quadratic" or "composite"
  std::map<std::string, double> ingredients;
};

namespace detail {

inline void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) throw InvalidArgument(std::string("rate bound: ") + name + " must be positive");
}

inline RateBound clamp_rate(double raw, std::string kind, std::map<std::string, double> ingredients) {
  RateBound rb;
  rb.raw = raw;
  rb.r = std::min(raw, 0.5);
  rb.kind = std::move(kind);
  rb.ingredients = std::move(ingredients);
  return rb;
}

}  // namespace detail

/// r = min{ mu c^2 / (L diam^2), 1/2 } for a strongly convex objective with
/// L-Lipschitz gradient; c is half the (localized) facial distance.
inline RateBound rate_bound_generic(double mu, double L, double c, double diam) {
  detail::require_positive(mu, "mu");
  detail::require_positive(L, "L");
  detail::require_positive(c, "c");
  detail::require_positive(diam, "diam");
  if (mu > L) throw ConfigurationError("rate bound: mu exceeds L");
  return detail::clamp_rate(mu * c * c / (L * diam * diam), "generic",
                            {{"mu", mu}, {"L", L}, {"c", c}, {"diam", diam}});
}

/// r = min{ bar_phi^2 / (8 diam(Q^(1/2) A)^2), 1/2 } for quadratics with exact line search.
inline RateBound rate_bound_quadratic(double bar_phi, double diam_scaled) {
  detail::require_positive(bar_phi, "bar_phi");
  detail::require_positive(diam_scaled, "diam");
  return detail::clamp_rate(bar_phi * bar_phi / (8.0 * diam_scaled * diam_scaled), "quadratic",
                            {{"bar_phi", bar_phi}, {"diam_scaled", diam_scaled}});
}

/// r = min{ (mu/L) bar_phi^2 / (8 diam(E A)^2), 1/2 } for composite objectives.
inline RateBound rate_bound_composite(double mu, double L, double bar_phi, double diam_EA) {
  detail::require_positive(mu, "mu");
  detail::require_positive(L, "L");
  detail::require_positive(bar_phi, "bar_phi");
  detail::require_positive(diam_EA, "diam");
  if (mu > L) throw ConfigurationError("rate bound: mu exceeds L");
  return detail::clamp_rate((mu / L) * bar_phi * bar_phi / (8.0 * diam_EA * diam_EA), "composite",
                            {{"mu", mu}, {"L", L}, {"bar_phi", bar_phi}, {"diam_EA", diam_EA}});
}

/// Stacked matrix [Q^(1/2) A; b' A] and g = Q^(1/2) u* for a quadratic objective.
struct ScaledData {
  AtomMatrix Abar;
  Eigen::VectorXd g;
  double diam_scaled = 0.0;  // diam(Q^(1/2) A) or diam(E A)
};

inline ScaledData quadratic_scaled_data(const AtomMatrix& A, const Quadratic& q, const Eigen::VectorXd& u_star) {
  const Eigen::MatrixXd R = psd_sqrt(q.Q);
  const Eigen::Index m = A.dim();
  Eigen::MatrixXd Abar(m + 1, A.size());
  Abar.topRows(m) = R * A.matrix();
  Abar.row(m) = q.b.transpose() * A.matrix();
  ScaledData s{AtomMatrix(Abar), R * u_star, 0.0};
  s.diam_scaled = diameter(AtomMatrix(Eigen::MatrixXd(Abar.topRows(m))));
  return s;
}

/// [E A; b' A / mu] and g = grad h(E u*) / mu for a composite objective.
inline ScaledData composite_scaled_data(const AtomMatrix& A, const Composite& c, const Eigen::VectorXd& u_star) {
  const Eigen::Index p = c.E.rows();
  Eigen::MatrixXd Abar(p + 1, A.size());
  Abar.topRows(p) = c.E * A.matrix();
  Abar.row(p) = (c.b.transpose() * A.matrix()) / c.mu;
  ScaledData s{AtomMatrix(Abar), c.h_gradient(c.E * u_star) / c.mu, 0.0};
  s.diam_scaled = diameter(AtomMatrix(Eigen::MatrixXd(Abar.topRows(p))));
  return s;
}

struct RateReport {
  bool passed = true;
  int first_violation = -1;  // iteration index, or -1
  int checked = 0;
  double worst_excess = -std::numeric_limits<double>::infinity();  // max of lhs - rhs
  double r = 0.0;
  double f_star = 0.0;
};

/// Checks f_k - f* <= (1 - r)^(k/2) (f_0 - f*) + slack for every record.
inline RateReport verify_linear_rate(const RunTrace& trace, double r, double f_star, double slack = 0.0) {
  if (trace.records.empty()) throw InvalidArgument("verify_linear_rate: empty trace");
  if (!(r > 0.0 && r <= 1.0)) throw InvalidArgument("verify_linear_rate: r must lie in (0, 1]");
  double f_min = trace.records.front().f;
  for (const auto& rec : trace.records) f_min = std::min(f_min, rec.f);
  if (f_star > f_min + 1e-9 * std::max(1.0, std::abs(f_min)))
    throw InvalidArgument("verify_linear_rate: f* exceeds the smallest recorded value");

  RateReport rep;
  rep.r = r;
  rep.f_star = f_star;
  const double base = trace.records.front().f - f_star;
  const double q = std::log1p(-std::min(r, 1.0 - 1e-300));
  for (const auto& rec : trace.records) {
    const double lhs = rec.f - f_star;
    const double rhs = std::exp(0.5 * rec.k * q) * base + slack;
    ++rep.checked;
    rep.worst_excess = std::max(rep.worst_excess, lhs - rhs);
    if (lhs > rhs && rep.passed) {
      rep.passed = false;
      rep.first_violation = rec.k;
    }
  }
  return rep;
}

struct DropStepAudit {
  bool passed = true;
  int steps = 0;
  int regular_steps = 0;
  int away_steps = 0;
  int drop_steps = 0;  // away steps with gamma = gamma_max < 1
  int first_violation = -1;
  std::string message;
};

/// Support accounting for a trace started at a vertex: a regular step adds at
/// most one atom, an away step never adds one, a full away step (gamma =
/// gamma_max) removes at least one, and drop steps are at most half of all steps.
inline DropStepAudit drop_step_audit(const RunTrace& trace) {
  DropStepAudit a;
  const auto& R = trace.records;
  if (R.empty()) throw InvalidArgument("drop_step_audit: empty trace");
  auto fail = [&a](int k, std::string msg) {
    if (a.passed) {
      a.passed = false;
      a.first_violation = k;
      a.message = std::move(msg);
    }
  };
  if (R.front().support_size != 1) fail(0, "initial point is not a vertex");
  for (std::size_t i = 0; i + 1 < R.size(); ++i) {
    const auto& cur = R[i];
    const int change = R[i + 1].support_size - cur.support_size;
    ++a.steps;
    if (cur.step_kind == StepKind::regular) {
      ++a.regular_steps;
      if (change > 1) fail(cur.k, "regular step grew the support by more than one");
    } else if (cur.step_kind == StepKind::away) {
      ++a.away_steps;
      const bool full = cur.gamma == cur.gamma_max;
      if (full && cur.gamma_max < 1.0) ++a.drop_steps;
      if (full && change > -1) fail(cur.k, "full away step did not drop an atom");
      if (!full && change > 0) fail(cur.k, "away step grew the support");
    } else {
      fail(cur.k, "step recorded without a kind");
    }
  }
  if (2 * a.drop_steps > a.steps) fail(R.back().k, "more drop steps than half of all steps");
  return a;
}

}  // namespace fwas
