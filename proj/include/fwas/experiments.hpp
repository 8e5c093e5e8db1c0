#pragma once

// Named instances with known condition measures and the reproduction runs
// that compare per-iteration decrease ratios with their predicted bounds.

#include <Eigen/Dense>

#include <cmath>
#include <map>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "fwas/condition.hpp"
#include "fwas/error.hpp"
#include "fwas/objective.hpp"
#include "fwas/polytope.hpp"
#include "fwas/rate.hpp"
#include "fwas/solver.hpp"

namespace fwas {
namespace instances {

inline const double kPi = std::acos(-1.0);

/// Vertices of the unit cube {0, 1}^m, atom j has coordinates given by the bits of j.
inline AtomMatrix cube(int m) {
  if (m < 1 || m > 6) throw InvalidArgument("cube: dimension must lie in [1, 6]");
  const int n = 1 << m;
  Eigen::MatrixXd A(m, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < m; ++i) A(i, j) = (j >> i) & 1;
  return AtomMatrix(A);
}

inline AtomMatrix standard_simplex(int m) {
  if (m < 2) throw InvalidArgument("standard_simplex: dimension must be at least 2");
  return AtomMatrix(Eigen::MatrixXd::Identity(m, m));
}

inline double cube_phi(int m) { return 1.0 / std::sqrt(static_cast<double>(m)); }

inline double simplex_phi(int m) {
  const double md = m;
  return m % 2 == 0 ? 2.0 / std::sqrt(md) : 2.0 / std::sqrt(md - 1.0 / md);
}

/// Columns (cos 2 theta, sin 2 theta), (1, 0), (-1, 0); facial distance sin(theta).
inline AtomMatrix wedge(double theta) {
  Eigen::MatrixXd A(2, 3);
  A << std::cos(2 * theta), 1, -1, std::sin(2 * theta), 0, 0;
  return AtomMatrix(A);
}

/// First row (M, 0, ..., 0), second row (1/2, 1/2, 1/3, ..., 1/n).
inline AtomMatrix far_vertex(double M, int n) {
  if (n < 3) throw InvalidArgument("far_vertex: need at least three atoms");
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(2, n);
  A(0, 0) = M;
  A(1, 0) = 0.5;
  for (int j = 1; j < n; ++j) A(1, j) = 1.0 / (j + 1);
  return AtomMatrix(A);
}

/// A = [[t, t, -t], [t, 0, 0]] with f(u) = u_1^2 / 2 + u_2; optimum 0 at u = 0.
struct QuadraticInstance {
  AtomMatrix A;
  Quadratic objective;
  double f_star = 0.0;
};

inline QuadraticInstance flat_quadratic(double t) {
  if (!(t > 0.0)) throw InvalidArgument("flat_quadratic: t must be positive");
  Eigen::MatrixXd A(2, 3);
  A << t, t, -t, t, 0, 0;
  Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(2, 2);
  Q(0, 0) = 1.0;
  return {AtomMatrix(A), Quadratic{Q, Eigen::Vector2d(0, 1)}, 0.0};
}

/// Closed-form scaled measure of the flat quadratic instance.
inline double flat_quadratic_bar_phi(double t) { return t < 0.125 ? 2.0 * t : std::sqrt(t - 1.0 / 16.0); }

/// The two-row matrix [[t, t, -t], [t, 0, 0]] used with g = 0.
inline AtomMatrix hat_ratio_abar(double t) {
  Eigen::MatrixXd A(2, 3);
  A << t, t, -t, t, 0, 0;
  return AtomMatrix(A);
}

inline double hat_ratio_local_phi(double t) { return 2.0 * t / std::sqrt(4.0 * t + 1.0); }

/// A = [[0, 1], [0, t]] with f(u) = u_1^2 / 2 + u_2; optimum 0 at the first atom.
inline QuadraticInstance clamp_instance(double t) {
  if (!(t > 0.0)) throw InvalidArgument("clamp_instance: t must be positive");
  Eigen::MatrixXd A(2, 2);
  A << 0, 1, 0, t;
  Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(2, 2);
  Q(0, 0) = 1.0;
  return {AtomMatrix(A), Quadratic{Q, Eigen::Vector2d(0, 1)}, 0.0};
}

inline double clamp_bar_phi(double t) { return std::sqrt(1.0 + t); }

}  // namespace instances

struct RatioRow {
  int k = 0;
  double ratio = 0.0;
  double bound = 0.0;
};

struct CheckLine {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ExperimentResult {
  std::string id;
  std::map<std::string, double> params;
  std::vector<RatioRow> rows;
  std::vector<CheckLine> checks;
  std::vector<std::pair<std::string, double>> values;
  std::optional<RunTrace> trace;
  std::string plot_title;
  std::string ratio_label = "1 - f(k+1)/f(k)";
  std::string bound_label = "bound";

  bool passed() const {
    for (const auto& c : checks)
      if (!c.passed) return false;
    return true;
  }
};

using ExperimentParams = std::map<std::string, double>;

namespace detail {

inline double param(const ExperimentParams& p, const std::string& key, double fallback) {
  const auto it = p.find(key);
  return it == p.end() ? fallback : it->second;
}

inline std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

// Per-step ratios 1 - (f_{k+1} - f*)/(f_k - f*) for k in [k_lo, k_hi).
inline std::vector<RatioRow> ratio_rows(const RunTrace& tr, double f_star, double bound, int k_lo, int k_hi) {
  std::vector<RatioRow> rows;
  for (int k = k_lo; k < k_hi && k + 1 < static_cast<int>(tr.records.size()); ++k) {
    const double a = tr.records[static_cast<std::size_t>(k)].f - f_star;
    const double b = tr.records[static_cast<std::size_t>(k) + 1].f - f_star;
    rows.push_back({k, 1.0 - b / a, bound});
  }
  return rows;
}

// An empty window passes only when the caller says the window itself is empty.
inline CheckLine ratio_window_check(const std::vector<RatioRow>& rows, const std::string& name,
                                    bool window_empty = false) {
  if (rows.empty() && window_empty) return {name, true, "validity window is empty"};
  CheckLine c{name, !rows.empty(), ""};
  std::size_t bad = 0;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& r : rows) {
    lo = std::min(lo, r.ratio);
    hi = std::max(hi, r.ratio);
    if (!(r.ratio > 0.0 && r.ratio <= r.bound)) {
      if (!bad) c.detail = "first violation at k=" + std::to_string(r.k) + " ratio " + num(r.ratio) + "; ";
      ++bad;
    }
  }
  c.passed = c.passed && bad == 0;
  c.detail += std::to_string(rows.size()) + " ratios in [" + num(lo) + ", " + num(hi) + "], bound " +
              (rows.empty() ? std::string("-") : num(rows.front().bound));
  return c;
}

inline CheckLine near_check(const std::string& name, double got, double want, double tol) {
  return {name, std::abs(got - want) <= tol,
          "got " + num(got) + ", expected " + num(want) + " (tol " + num(tol) + ")"};
}

}  // namespace detail

/// Facial distance of the unit cube against 1/sqrt(m).
inline ExperimentResult reproduce_phi_cube(const ExperimentParams& p) {
  const int m = static_cast<int>(detail::param(p, "m", 3));
  ExperimentResult res;
  res.id = "phi-cube";
  res.params = {{"m", m}};
  const auto rep = facial_distance(instances::cube(m));
  res.values = {{"phi", rep.value}, {"closed_form", instances::cube_phi(m)}};
  res.checks.push_back(detail::near_check("facial distance equals 1/sqrt(m)", rep.value, instances::cube_phi(m), 1e-8));
  return res;
}

/// Facial distance of the standard simplex against 2/sqrt(m) (m even) or 2/sqrt(m - 1/m) (m odd).
inline ExperimentResult reproduce_phi_simplex(const ExperimentParams& p) {
  const int m = static_cast<int>(detail::param(p, "m", 4));
  ExperimentResult res;
  res.id = "phi-simplex";
  res.params = {{"m", m}};
  const auto rep = facial_distance(instances::standard_simplex(m));
  res.values = {{"phi", rep.value}, {"closed_form", instances::simplex_phi(m)}};
  res.checks.push_back(
      detail::near_check("facial distance matches the simplex closed form", rep.value, instances::simplex_phi(m), 1e-8));
  return res;
}

/// Wedge with f = |u|^2 / 2 from the first atom; every ratio for k >= 1 must lie in (0, 9 sin^2 theta].
inline ExperimentResult reproduce_ex_strong(const ExperimentParams& p) {
  const double theta = detail::param(p, "theta", instances::kPi / 10);
  if (!(theta > 0.0 && theta < instances::kPi / 6)) throw InvalidArgument("ex-strong: theta must lie in (0, pi/6)");
  ExperimentResult res;
  res.id = "ex-strong";
  SolverConfig cfg;
  cfg.gap_tol = detail::param(p, "gap_tol", 1e-12);
  cfg.max_iter = static_cast<int>(detail::param(p, "max_iter", 2000000));
  cfg.keep_iterates = false;
  res.params = {{"theta", theta}, {"gap_tol", cfg.gap_tol}, {"max_iter", cfg.max_iter}};
  const AtomMatrix A = instances::wedge(theta);
  const Quadratic obj{Eigen::MatrixXd::Identity(2, 2), Eigen::VectorXd::Zero(2)};
  RunTrace tr = run(A, obj, SimplexPoint::vertex(3, 0), cfg);
  const double bound = 9.0 * std::sin(theta) * std::sin(theta);
  res.rows = detail::ratio_rows(tr, 0.0, bound, 1, std::numeric_limits<int>::max());
  res.checks.push_back(detail::ratio_window_check(res.rows, "ratio in (0, 9 sin^2 theta] for all k >= 1"));

  bool alternates = true;
  for (std::size_t k = 1; k + 1 < tr.records.size(); ++k) {
    const auto& r = tr.records[k];
    const bool ok = (k % 2 == 1) ? (r.step_kind == StepKind::regular && r.j == 1)
                                 : (r.step_kind == StepKind::away && r.ell == 0);
    alternates = alternates && ok;
  }
  res.checks.push_back({"alternates regular toward a_2 and away from a_1", alternates,
                        std::to_string(tr.steps()) + " steps"});
  const double decay = tr.final_f() / tr.records.front().f;
  res.checks.push_back({"objective decays geometrically to the gap tolerance", tr.converged && decay < 1e-6,
                        "f_final/f_0 = " + detail::num(decay) + ", " + tr.stop_reason});
  res.values = {{"phi_closed_form", std::sin(theta)}, {"bound", bound}, {"steps", tr.steps()},
                {"f_final", tr.final_f()}};
  res.plot_title = "wedge, theta = " + detail::num(theta);
  res.bound_label = "9 sin^2(theta)";
  res.trace = std::move(tr);
  return res;
}

/// Flat quadratic from the first atom; ratios for 1 <= k < t/4 (capped by the
/// iteration limit) must lie in (0, 4/t]. Also brackets the closed-form scaled measure.
inline ExperimentResult reproduce_ex_quadratic(const ExperimentParams& p) {
  const double t = detail::param(p, "t", 200.0);
  const auto inst = instances::flat_quadratic(t);
  ExperimentResult res;
  res.id = "ex-quadratic";
  SolverConfig cfg;
  cfg.max_iter = static_cast<int>(detail::param(p, "max_iter", 10000));
  cfg.gap_tol = detail::param(p, "gap_tol", 1e-12);
  cfg.keep_iterates = false;
  res.params = {{"t", t}, {"max_iter", cfg.max_iter}, {"gap_tol", cfg.gap_tol}};
  RunTrace tr = run(inst.A, inst.objective, SimplexPoint::vertex(3, 0), cfg);
  const int window = static_cast<int>(std::min<double>(std::ceil(t / 4.0), cfg.max_iter));
  res.rows = detail::ratio_rows(tr, inst.f_star, 4.0 / t, 1, window);
  res.checks.push_back(detail::ratio_window_check(res.rows, "ratio in (0, 4/t] for 1 <= k < t/4", window <= 1));

  const bool with_bounds = detail::param(p, "bounds", 1.0) != 0.0;
  const double closed = instances::flat_quadratic_bar_phi(t);
  res.values = {{"bar_phi_closed_form", closed},
                {"diam_scaled", 2.0 * t},
                {"rate_quadratic", rate_bound_quadratic(closed, 2.0 * t).r},
                {"steps", tr.steps()}};
  if (with_bounds) {
    const auto sd = quadratic_scaled_data(inst.A, inst.objective, Eigen::VectorXd::Zero(2));
    const auto b = bar_phi_bounds(sd.Abar, sd.g, static_cast<int>(detail::param(p, "samples", 200)));
    res.values.emplace_back("bar_phi_lower", b.lower);
    res.values.emplace_back("bar_phi_upper", b.upper);
    res.checks.push_back({"scaled measure bounds bracket the closed form",
                          b.lower <= closed * (1 + 1e-9) && closed <= b.upper * (1 + 1e-9),
                          "[" + detail::num(b.lower) + ", " + detail::num(b.upper) + "] vs " + detail::num(closed)});
  }
  res.plot_title = "flat quadratic, t = " + detail::num(t);
  res.bound_label = "4/t";
  res.trace = std::move(tr);
  return res;
}

/// Localized facial distance of the hat matrix against the scaled measure, both in closed form,
/// with the localized value confirmed by the pair machinery.
inline ExperimentResult reproduce_ex_hat_ratio(const ExperimentParams& p) {
  const double t = detail::param(p, "t", 1000.0);
  if (!(t > 0.0)) throw InvalidArgument("ex-hat-ratio: t must be positive");
  ExperimentResult res;
  res.id = "ex-hat-ratio";
  res.params = {{"t", t}};
  const double local = instances::hat_ratio_local_phi(t);
  const double bar = instances::flat_quadratic_bar_phi(t);
  const double ratio = local / bar;

  const auto s = scaled_instance(instances::hat_ratio_abar(t), Eigen::VectorXd::Zero(1));
  const AtomMatrix hat = hat_matrix(s);
  std::vector<SimplexPoint> Z;
  for (auto j : s.Zg_face) Z.push_back(SimplexPoint::vertex(3, j));
  const auto lower = local_phi_lower_bound(hat, Z);
  // upper end: the pair measure at the localized witness (z = second atom, x on the first-third edge)
  const auto pair = phi_pair(hat, lower.witness.w, lower.witness.y);

  res.values = {{"local_phi_closed_form", local}, {"bar_phi_closed_form", bar}, {"ratio", ratio},
                {"local_phi_lower", lower.value}, {"local_phi_pair", pair.value}};
  res.checks.push_back({"ratio at least 0.999", ratio >= 0.999, "ratio " + detail::num(ratio)});
  res.checks.push_back(detail::near_check("localized bound matches closed form", lower.value, local, 1e-6));
  res.checks.push_back(detail::near_check("pair measure at witness matches closed form", pair.value, local, 1e-6));
  return res;
}

/// Two-atom quadratic whose raw quadratic rate (1 + t)/8 may exceed 1/2.
inline ExperimentResult reproduce_ex_clamp(const ExperimentParams& p) {
  const double t = detail::param(p, "t", 3.0);
  const auto inst = instances::clamp_instance(t);
  ExperimentResult res;
  res.id = "ex-clamp";
  res.params = {{"t", t}};
  const auto sd = quadratic_scaled_data(inst.A, inst.objective, inst.A.atom(0));
  const double pair = bar_phi_pair(sd.Abar, sd.g, SimplexPoint::vertex(2, 1), SimplexPoint::vertex(2, 0)).value;
  const auto rb = rate_bound_quadratic(instances::clamp_bar_phi(t), sd.diam_scaled);
  SolverConfig cfg;
  RunTrace tr = run(inst.A, inst.objective, SimplexPoint::vertex(2, 1), cfg);
  const auto vr = verify_linear_rate(tr, rb.r, inst.f_star);
  res.values = {{"bar_phi_pair", pair}, {"bar_phi_closed_form", instances::clamp_bar_phi(t)},
                {"diam_scaled", sd.diam_scaled}, {"raw_rate", rb.raw}, {"rate", rb.r}, {"steps", tr.steps()}};
  res.checks.push_back(detail::near_check("pair value equals sqrt(1 + t)", pair, instances::clamp_bar_phi(t), 1e-8));
  res.checks.push_back(detail::near_check("raw rate equals (1 + t)/8", rb.raw, (1.0 + t) / 8.0, 1e-12));
  res.checks.push_back({"clamped rate is 1/2", rb.r == 0.5, "r = " + detail::num(rb.r)});
  res.checks.push_back({"linear rate holds with r = 1/2", vr.passed,
                        std::to_string(vr.checked) + " iterates, worst excess " + detail::num(vr.worst_excess)});
  res.rows = detail::ratio_rows(tr, inst.f_star, rb.r, 0, std::numeric_limits<int>::max());
  res.trace = std::move(tr);
  return res;
}

struct GenericRate {
  RateBound rate;
  double local_phi = 0.0;  // lower bound on the localized facial distance at the optimum
  double diam = 0.0;
  IndexSet optimal_face;   // atoms minimizing <grad f(u*), a> within tolerance
};

/// Rate constant for a strongly convex quadratic, localized at the face of conv(A)
/// exposed by the gradient at an (approximate) optimum.
inline GenericRate generic_rate_at_optimum(const AtomMatrix& A, const Quadratic& q, const OptimalValue& opt) {
  const auto [mu, L] = eigen_range(q.Q);
  if (!(mu > 0.0)) throw ConfigurationError("generic rate: Q must be positive definite");
  const Eigen::VectorXd s = A.matrix().transpose() * gradient(q, opt.u);
  const double scale = std::max(1.0, s.cwiseAbs().maxCoeff());
  GenericRate g;
  std::vector<SimplexPoint> Z;
  for (Eigen::Index j = 0; j < A.size(); ++j)
    if (s(j) <= s.minCoeff() + 1e-7 * scale) {
      Z.push_back(SimplexPoint::vertex(A.size(), j));
      g.optimal_face.push_back(j);
    }
  g.local_phi = local_phi_lower_bound(A, Z).value;
  g.diam = diameter(A);
  g.rate = rate_bound_generic(mu, L, g.local_phi / 2.0, g.diam);
  return g;
}

struct LinearRateCase {
  AtomMatrix A;
  Quadratic objective;
  double mu = 0.0;
  double L = 0.0;
  double f_best = 0.0;
  double f_lower = 0.0;
  IndexSet optimal_face;  // atoms minimizing <grad f(u*), a> within tolerance
  double local_phi = 0.0;
  double diam = 0.0;
  RateBound rate;
  RunTrace trace;
  RateReport report;
  DropStepAudit audit;
};

/// Gaussian atoms in R^m and Q = M M' + alpha I with Gaussian M and b.
inline std::pair<AtomMatrix, Quadratic> random_strongly_convex_quadratic(std::mt19937_64& rng, int m, int n,
                                                                         double alpha) {
  std::normal_distribution<double> N(0.0, 1.0);
  Eigen::MatrixXd A(m, n), M(m, m);
  Eigen::VectorXd b(m);
  for (Eigen::Index i = 0; i < A.size(); ++i) A(i) = N(rng);
  for (Eigen::Index i = 0; i < M.size(); ++i) M(i) = N(rng);
  for (Eigen::Index i = 0; i < m; ++i) b(i) = N(rng);
  Eigen::MatrixXd Q = M * M.transpose() + alpha * Eigen::MatrixXd::Identity(m, m);
  Q = 0.5 * (Q + Q.transpose());
  return {AtomMatrix(A), Quadratic{Q, b}};
}

/// Runs the Lipschitz-step solver from the first atom and checks the linear rate with
/// r = min{ mu (Phi(A, Z*)/2)^2 / (L diam^2), 1/2 }, where Phi(A, Z*) is replaced by its
/// lower bound over the face exposed by grad f(u*). f* is certified by a long presolve.
inline LinearRateCase check_linear_rate_case(const AtomMatrix& A, const Quadratic& q, int max_iter = 20000) {
  LinearRateCase c{A, q};
  const auto [lmin, lmax] = eigen_range(q.Q);
  c.mu = lmin;
  c.L = lmax;
  if (!(c.mu > 0.0)) throw InvalidArgument("check_linear_rate_case: Q must be positive definite");
  const OptimalValue opt = presolve(A, q);
  c.f_best = opt.f_best;
  c.f_lower = opt.f_lower;

  const GenericRate g = generic_rate_at_optimum(A, q, opt);
  c.optimal_face = g.optimal_face;
  c.local_phi = g.local_phi;
  c.diam = g.diam;
  c.rate = g.rate;

  SolverConfig cfg;
  cfg.rule = StepRule::lipschitz;
  cfg.max_iter = max_iter;
  cfg.keep_iterates = false;
  c.trace = run(A, q, SimplexPoint::vertex(A.size(), 0), cfg);
  const double slack = (c.f_best - c.f_lower) + 1e-12 * std::max(1.0, std::abs(c.f_best));
  c.report = verify_linear_rate(c.trace, c.rate.r, c.f_lower, slack);
  c.audit = drop_step_audit(c.trace);
  return c;
}

/// Random strongly convex quadratic over random atoms; checks the linear rate and the
/// drop-step accounting on the solver trace.
inline ExperimentResult reproduce_custom(const ExperimentParams& p) {
  const int m = static_cast<int>(detail::param(p, "m", 2));
  const int n = static_cast<int>(detail::param(p, "n", 6));
  const double alpha = detail::param(p, "alpha", 0.5);
  const auto seed = static_cast<std::uint64_t>(detail::param(p, "seed", 1));
  if (m < 1 || n < 2 || n > kFaceEnumLimit) throw InvalidArgument("custom: need m >= 1 and 2 <= n <= 20");
  if (!(alpha > 0.0)) throw InvalidArgument("custom: alpha must be positive");
  ExperimentResult res;
  res.id = "custom";
  res.params = {{"m", m}, {"n", n}, {"alpha", alpha}, {"seed", static_cast<double>(seed)}};
  std::mt19937_64 rng(seed);
  auto [A, q] = random_strongly_convex_quadratic(rng, m, n, alpha);
  LinearRateCase c = check_linear_rate_case(A, q);
  res.values = {{"mu", c.mu},          {"L", c.L},       {"local_phi_lower", c.local_phi}, {"diam", c.diam},
                {"rate", c.rate.r},    {"f_best", c.f_best}, {"f_lower", c.f_lower},
                {"steps", c.trace.steps()}, {"drop_steps", c.audit.drop_steps}};
  res.checks.push_back({"linear rate holds at every iterate", c.report.passed,
                        std::to_string(c.report.checked) + " iterates, worst excess " +
                            detail::num(c.report.worst_excess)});
  res.checks.push_back({"drop-step audit", c.audit.passed,
                        c.audit.passed ? std::to_string(c.audit.drop_steps) + " drop steps in " +
                                             std::to_string(c.audit.steps)
                                       : c.audit.message});
  res.rows = detail::ratio_rows(c.trace, c.f_lower, c.rate.r, 0, std::numeric_limits<int>::max());
  res.trace = std::move(c.trace);
  return res;
}

inline ExperimentResult reproduce(const std::string& id, const ExperimentParams& p = {}) {
  if (id == "phi-cube") return reproduce_phi_cube(p);
  if (id == "phi-simplex") return reproduce_phi_simplex(p);
  if (id == "ex-strong") return reproduce_ex_strong(p);
  if (id == "ex-quadratic") return reproduce_ex_quadratic(p);
  if (id == "ex-hat-ratio") return reproduce_ex_hat_ratio(p);
  if (id == "ex-clamp") return reproduce_ex_clamp(p);
  if (id == "custom") return reproduce_custom(p);
  throw InvalidArgument("unknown experiment id: " + id);
}

inline const std::vector<std::string>& experiment_ids() {
  static const std::vector<std::string> ids{"phi-cube",     "phi-simplex", "ex-strong", "ex-quadratic",
                                            "ex-hat-ratio", "ex-clamp",    "custom"};
  return ids;
}

}  // namespace fwas
