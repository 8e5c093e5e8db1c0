#pragma once

// Frank-Wolfe with away steps over conv(A), iterating on simplex weights x
// with u = A x.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "fwas/error.hpp"
#include "fwas/objective.hpp"
#include "fwas/polytope.hpp"

namespace fwas {

enum class StepKind { regular, away, none };
enum class StepRule { automatic, lipschitz, exact_quadratic, composite };

inline const char* to_string(StepKind k) {
  switch (k) {
    case StepKind::regular: return "regular";
    case StepKind::away: return "away";
    case StepKind::none: return "none";
  }
  return "?";
}

inline const char* to_string(StepRule r) {
  switch (r) {
    case StepRule::automatic: return "automatic";
    case StepRule::lipschitz: return "lipschitz";
    case StepRule::exact_quadratic: return "exact-quadratic";
    case StepRule::composite: return "composite";
  }
  return "?";
}

/// The direction chosen at one iteration.
struct Direction {
  StepKind kind = StepKind::regular;
  Eigen::VectorXd v;
  Eigen::Index j = 0;      // argmin_i <grad, a_i>
  Eigen::Index ell = 0;    // argmax over the support of <grad, a_i>
  double gamma_max = 1.0;
  double fw_term = 0.0;    // <grad, a_j - u>
  double away_term = 0.0;  // <grad, u - a_ell>
};

/// Regular step toward a_j unless the away direction u - a_ell is strictly
/// better or the support is a single atom. Ties go to the away step;
/// argmin/argmax ties go to the lowest index.
inline Direction select_direction(const AtomMatrix& A, const SimplexPoint& x, const Eigen::VectorXd& u,
                                  const Eigen::VectorXd& grad) {
  if (x.size() != A.size()) throw DimensionMismatch("select_direction: weight length differs from atom count");
  if (grad.size() != A.dim() || u.size() != A.dim()) throw DimensionMismatch("select_direction: gradient dimension");
  if (!grad.allFinite()) throw NumericalError("select_direction: non-finite gradient");
  const Eigen::VectorXd s = A.matrix().transpose() * grad;
  Direction d;
  for (Eigen::Index i = 1; i < s.size(); ++i)
    if (s(i) < s(d.j)) d.j = i;
  const IndexSet& I = x.support();
  d.ell = I.front();
  for (auto i : I)
    if (s(i) > s(d.ell)) d.ell = i;
  const double gu = grad.dot(u);
  d.fw_term = s(d.j) - gu;
  d.away_term = gu - s(d.ell);
  if (d.fw_term < d.away_term || I.size() == 1) {
    d.kind = StepKind::regular;
    d.v = A.matrix().col(d.j) - u;
    d.gamma_max = 1.0;
  } else {
    d.kind = StepKind::away;
    d.v = u - A.matrix().col(d.ell);
    const double xl = x[d.ell];
    if (!(xl < 1.0)) throw NumericalError("select_direction: away step from a vertex");
    d.gamma_max = xl / (1.0 - xl);
  }
  return d;
}

/// min{ -<grad, v> / (L |v|^2), gamma_max }, clamped below at 0.
inline double step_lipschitz(const Eigen::VectorXd& grad, const Eigen::VectorXd& v, double L, double gamma_max) {
  const double vv = v.squaredNorm();
  if (!(vv > 0.0)) throw InvalidArgument("step_lipschitz: zero direction");
  if (!(L > 0.0)) throw InvalidArgument("step_lipschitz: L must be positive");
  return std::clamp(-grad.dot(v) / (L * vv), 0.0, gamma_max);
}

/// Exact line search for 1/2 <u, Q u> + <b, u> along v on [0, gamma_max].
inline double step_exact_quadratic(const Eigen::MatrixXd& Q, const Eigen::VectorXd& b, const Eigen::VectorXd& u,
                                   const Eigen::VectorXd& v, double gamma_max) {
  const double curv = v.dot(Q * v);
  if (!(curv > 0.0)) return gamma_max;
  return std::clamp(-(Q * u + b).dot(v) / curv, 0.0, gamma_max);
}

/// min{ -<grad, v> / (L |E v|^2), gamma_max }, or gamma_max when E v = 0.
inline double step_composite(const Eigen::MatrixXd& E, double L, const Eigen::VectorXd& grad,
                             const Eigen::VectorXd& v, double gamma_max) {
  if (!(L > 0.0)) throw InvalidArgument("step_composite: L must be positive");
  const double ev = (E * v).squaredNorm();
  if (!(ev > 0.0)) return gamma_max;
  return std::clamp(-grad.dot(v) / (L * ev), 0.0, gamma_max);
}

struct SolverConfig {
  StepRule rule = StepRule::automatic;
  double gap_tol = 1e-12;
  int max_iter = 100000;
  double lipschitz = 0.0;    // overrides the Lipschitz constant for the lipschitz rule when > 0
  bool keep_iterates = true;  // store x_k and u_k in every record
};

/// State at iteration k and the step taken from it (kind none on the last record).
struct IterateRecord {
  int k = 0;
  Eigen::VectorXd x;
  Eigen::VectorXd u;
  double f = 0.0;
  StepKind step_kind = StepKind::none;
  double gamma = 0.0;
  double gamma_max = 0.0;
  double fw_term = 0.0;    // <grad, a_j - u>
  double away_term = 0.0;  // <grad, u - a_ell>
  Eigen::Index j = 0;
  Eigen::Index ell = 0;
  int support_size = 0;

  /// Frank-Wolfe gap <grad, u - a_j>.
  double fw_gap() const { return 0.0 - fw_term; }
};

struct RunTrace {
  std::vector<IterateRecord> records;
  StepRule rule = StepRule::automatic;
  bool converged = false;
  std::string stop_reason;
  Eigen::VectorXd final_x;
  Eigen::VectorXd final_u;

  double final_f() const { return records.back().f; }
  int steps() const { return static_cast<int>(records.size()) - 1; }
};

inline StepRule resolve_rule(const Objective& obj, StepRule rule) {
  if (rule != StepRule::automatic) {
    if (rule == StepRule::exact_quadratic && !std::holds_alternative<Quadratic>(obj))
      throw ConfigurationError("exact line search needs a quadratic objective");
    if (rule == StepRule::composite && !std::holds_alternative<Composite>(obj))
      throw ConfigurationError("composite step needs a composite objective");
    return rule;
  }
  if (std::holds_alternative<Quadratic>(obj)) return StepRule::exact_quadratic;
  if (std::holds_alternative<Composite>(obj)) return StepRule::composite;
  return StepRule::lipschitz;
}

/// Lipschitz constant of the gradient used by the lipschitz rule.
inline double gradient_lipschitz(const Objective& obj) {
  if (const auto* q = std::get_if<Quadratic>(&obj)) return eigen_range(q->Q).second;
  if (const auto* c = std::get_if<Composite>(&obj)) {
    const double s = c->E.size() ? Eigen::JacobiSVD<Eigen::MatrixXd>(c->E).singularValues()(0) : 0.0;
    return c->L * s * s;
  }
  return std::get<SmoothObjective>(obj).L;
}

/// Runs Frank-Wolfe with away steps from the vertex x0 until the FW gap is at
/// most gap_tol or max_iter steps have been taken.
inline RunTrace run(const AtomMatrix& A, const Objective& obj, const SimplexPoint& x0, const SolverConfig& cfg = {}) {
  validate(obj);
  if (objective_dim(obj) != A.dim()) throw DimensionMismatch("run: objective dimension differs from atom dimension");
  if (x0.size() != A.size()) throw DimensionMismatch("run: x0 length differs from atom count");
  if (!x0.is_vertex() || x0.weights().maxCoeff() != 1.0) throw InvalidArgument("run: x0 must be a vertex of the simplex");
  if (cfg.max_iter < 0) throw ConfigurationError("run: max_iter must be nonnegative");
  if (!(cfg.gap_tol >= 0.0)) throw ConfigurationError("run: gap_tol must be nonnegative");

  RunTrace trace;
  trace.rule = resolve_rule(obj, cfg.rule);
  double L = 0.0;
  if (trace.rule == StepRule::lipschitz) {
    L = cfg.lipschitz > 0.0 ? cfg.lipschitz : gradient_lipschitz(obj);
    if (!(L > 0.0)) throw ConfigurationError("run: lipschitz rule needs a positive Lipschitz constant");
  }

  const Eigen::Index n = A.size();
  Eigen::VectorXd x = x0.weights();
  Eigen::VectorXd u = A.matrix().col(x0.support().front());
  // u is updated along with x rather than recomputed as A x, which keeps
  // small objective values accurate relative to their size.
  for (int k = 0;; ++k) {
    const SimplexPoint xs(x);
    const Eigen::VectorXd grad = gradient(obj, u);
    const Direction dir = select_direction(A, xs, u, grad);

    IterateRecord rec;
    rec.k = k;
    rec.f = value(obj, u);
    rec.fw_term = dir.fw_term;
    rec.away_term = dir.away_term;
    rec.j = dir.j;
    rec.ell = dir.ell;
    rec.support_size = static_cast<int>(xs.support().size());
    if (cfg.keep_iterates || k == 0) {
      rec.x = x;
      rec.u = u;
    }

    if (rec.fw_gap() <= cfg.gap_tol) {
      trace.converged = true;
      trace.stop_reason = "fw gap below tolerance";
      trace.records.push_back(std::move(rec));
      break;
    }
    if (k >= cfg.max_iter) {
      trace.stop_reason = "iteration limit";
      trace.records.push_back(std::move(rec));
      break;
    }

    double gamma = 0.0;
    switch (trace.rule) {
      case StepRule::lipschitz: gamma = step_lipschitz(grad, dir.v, L, dir.gamma_max); break;
      case StepRule::exact_quadratic: {
        const auto& q = std::get<Quadratic>(obj);
        gamma = step_exact_quadratic(q.Q, q.b, u, dir.v, dir.gamma_max);
        break;
      }
      case StepRule::composite: {
        const auto& c = std::get<Composite>(obj);
        gamma = step_composite(c.E, c.L, grad, dir.v, dir.gamma_max);
        break;
      }
      case StepRule::automatic: break;
    }
    rec.step_kind = dir.kind;
    rec.gamma = gamma;
    rec.gamma_max = dir.gamma_max;
    trace.records.push_back(std::move(rec));

    if (dir.kind == StepKind::regular) {
      if (gamma == 1.0) {
        x = Eigen::VectorXd::Unit(n, dir.j);
        u = A.matrix().col(dir.j);
      } else {
        x *= (1.0 - gamma);
        x(dir.j) += gamma;
        u += gamma * dir.v;
      }
    } else {
      x *= (1.0 + gamma);
      x(dir.ell) -= gamma;
      if (gamma == dir.gamma_max) x(dir.ell) = 0.0;
      u += gamma * dir.v;
    }
    for (Eigen::Index i = 0; i < n; ++i)
      if (x(i) <= kSupportThreshold) x(i) = 0.0;
    x /= x.sum();
  }
  trace.final_x = x;
  trace.final_u = u;
  return trace;
}

/// Certified bracket on f*: best value seen and max_k (f_k - gap_k).
struct OptimalValue {
  double f_best = 0.0;
  double f_lower = 0.0;
  Eigen::VectorXd u;
  Eigen::VectorXd x;
};

/// Runs the solver to a tight gap and reports the bracket on f*; the lower
/// end is certified by convexity since f* >= f_k - <grad f(u_k), u_k - a_j>.
inline OptimalValue presolve(const AtomMatrix& A, const Objective& obj, double gap_tol = 1e-14,
                             int max_iter = 200000) {
  SolverConfig cfg;
  cfg.gap_tol = gap_tol;
  cfg.max_iter = max_iter;
  cfg.keep_iterates = false;
  const RunTrace tr = run(A, obj, SimplexPoint::vertex(A.size(), 0), cfg);
  OptimalValue out;
  out.f_best = tr.records.front().f;
  out.f_lower = -std::numeric_limits<double>::infinity();
  for (const auto& r : tr.records) {
    out.f_best = std::min(out.f_best, r.f);
    out.f_lower = std::max(out.f_lower, r.f - r.fw_gap());
  }
  out.u = tr.final_u;
  out.x = tr.final_x;
  return out;
}

}  // namespace fwas
