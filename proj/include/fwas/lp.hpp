#pragma once

// Dense two-phase primal simplex with Bland's rule.
//
// The instances solved here are tiny (a few dozen columns), so the solver
// keeps a full tableau and, once a basis is optimal, recomputes primal and
// dual values directly from the original data to get rid of accumulated
// pivoting error.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "fwas/error.hpp"

namespace fwas::lp {

enum class Sense { minimize, maximize };
enum class VarBound { free, nonnegative };
enum class Status { optimal, infeasible, unbounded, numerical_error };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::optimal: return "optimal";
    case Status::infeasible: return "infeasible";
    case Status::unbounded: return "unbounded";
    case Status::numerical_error: return "numerical_error";
  }
  return "unknown";
}

/// optimize  cost . x
/// s.t.      eq_rows x  = eq_rhs
///           ge_rows x >= ge_rhs
///           x_j free or x_j >= 0 per `bounds`
struct LinearProgram {
  Sense sense = Sense::minimize;
  Eigen::VectorXd cost;
  Eigen::MatrixXd eq_rows;
  Eigen::VectorXd eq_rhs;
  Eigen::MatrixXd ge_rows;
  Eigen::VectorXd ge_rhs;
  std::vector<VarBound> bounds;

  LinearProgram() = default;
  LinearProgram(Sense s, Eigen::Index num_vars, VarBound bound = VarBound::nonnegative)
      : sense(s),
        cost(Eigen::VectorXd::Zero(num_vars)),
        eq_rows(0, num_vars),
        eq_rhs(0),
        ge_rows(0, num_vars),
        ge_rhs(0),
        bounds(static_cast<std::size_t>(num_vars), bound) {}

  Eigen::Index num_vars() const { return cost.size(); }

  void add_eq(const Eigen::RowVectorXd& row, double rhs) {
    append(eq_rows, eq_rhs, row, rhs);
  }
  void add_ge(const Eigen::RowVectorXd& row, double rhs) {
    append(ge_rows, ge_rhs, row, rhs);
  }
  void add_le(const Eigen::RowVectorXd& row, double rhs) {
    append(ge_rows, ge_rhs, -row, -rhs);
  }

  void validate() const {
    const auto n = num_vars();
    if (static_cast<Eigen::Index>(bounds.size()) != n)
      throw DimensionMismatch("LinearProgram: bounds size differs from cost size");
    if (eq_rows.cols() != n || ge_rows.cols() != n)
      throw DimensionMismatch("LinearProgram: constraint width differs from cost size");
    if (eq_rows.rows() != eq_rhs.size() || ge_rows.rows() != ge_rhs.size())
      throw DimensionMismatch("LinearProgram: row count differs from rhs size");
    if (!cost.allFinite() || !eq_rows.allFinite() || !ge_rows.allFinite() ||
        !eq_rhs.allFinite() || !ge_rhs.allFinite())
      throw InvalidArgument("LinearProgram: non-finite coefficient");
  }

 private:
  static void append(Eigen::MatrixXd& rows, Eigen::VectorXd& rhs,
                     const Eigen::RowVectorXd& row, double value) {
    if (rows.cols() != row.size())
      throw DimensionMismatch("LinearProgram: row width differs from variable count");
    rows.conservativeResize(rows.rows() + 1, Eigen::NoChange);
    rows.row(rows.rows() - 1) = row;
    rhs.conservativeResize(rhs.size() + 1);
    rhs(rhs.size() - 1) = value;
  }
};

/// Dual values follow the convention objective == eq_rhs.eq_duals + ge_rhs.ge_duals.
/// For a minimization ge_duals >= 0, for a maximization ge_duals <= 0.
struct LPSolution {
  Status status = Status::numerical_error;
  Eigen::VectorXd primal;
  Eigen::VectorXd eq_duals;
  Eigen::VectorXd ge_duals;
  double objective = std::numeric_limits<double>::quiet_NaN();
  double dual_objective = std::numeric_limits<double>::quiet_NaN();
  int iterations = 0;

  bool optimal() const { return status == Status::optimal; }
};

struct SimplexOptions {
  double pivot_tol = 1e-9;        // smallest admissible pivot magnitude
  double optimality_tol = 1e-11;  // reduced-cost threshold for entering
  double feasibility_tol = 1e-9;  // phase-one residual accepted as feasible
  double certificate_tol = 1e-7;  // post-refinement sign checks
  int max_iterations = 50000;
  std::ostream* log = nullptr;    // tableau dump when non-null
};

namespace detail {

inline SimplexOptions& default_options_storage() {
  static SimplexOptions opts;
  return opts;
}

}  // namespace detail

/// Process-wide defaults used by every solve that does not pass options.
/// Only the CLI debug flags touch this.
inline const SimplexOptions& default_options() { return detail::default_options_storage(); }
inline void set_default_options(const SimplexOptions& opts) {
  detail::default_options_storage() = opts;
}

namespace detail {

class Tableau {
 public:
  // Rows 0..R-1 are constraints, row R holds reduced costs; last column is the rhs.
  Tableau(const Eigen::MatrixXd& A, const Eigen::VectorXd& b)
      : rows_(A.rows()), structural_(A.cols()), t_(A.rows() + 1, A.cols() + A.rows() + 1),
        basis_(static_cast<std::size_t>(A.rows())) {
    t_.setZero();
    t_.topLeftCorner(rows_, structural_) = A;
    t_.block(0, structural_, rows_, rows_).setIdentity();
    t_.topRightCorner(rows_, 1) = b;
    for (Eigen::Index i = 0; i < rows_; ++i) basis_[static_cast<std::size_t>(i)] = structural_ + i;
  }

  Eigen::Index rhs_col() const { return structural_ + rows_; }
  Eigen::Index rows() const { return rows_; }
  Eigen::Index structural() const { return structural_; }
  const std::vector<Eigen::Index>& basis() const { return basis_; }
  double objective() const { return -t_(rows_, rhs_col()); }

  void set_costs(const Eigen::VectorXd& c_all) {
    // reduced costs d_j = c_j - c_B^T (B^-1 A)_j, stored so that the rhs cell holds -c_B^T x_B
    t_.row(rows_).setZero();
    t_.row(rows_).head(c_all.size()) = c_all.transpose();
    for (Eigen::Index i = 0; i < rows_; ++i) {
      const double cb = c_all(basis_[static_cast<std::size_t>(i)]);
      if (cb != 0.0) t_.row(rows_) -= cb * t_.row(i);
    }
  }

  // Bland's rule over columns [0, eligible_cols).
  // Bland's rule. A column with no admissible pivot only proves unboundedness
  // when its reduced cost is clearly negative; a reduced cost within roundoff
  // of zero is skipped instead.
  Status iterate(Eigen::Index eligible_cols, const SimplexOptions& opts, int& iterations) {
    const double ray_tol = 1e3 * opts.optimality_tol;
    for (;;) {
      if (iterations >= opts.max_iterations) return Status::numerical_error;
      Eigen::Index entering = -1, leaving = -1;
      for (Eigen::Index j = 0; j < eligible_cols && leaving < 0; ++j) {
        if (!(t_(rows_, j) < -opts.optimality_tol)) continue;
        leaving = ratio_test(j, opts);
        if (leaving >= 0) {
          entering = j;
        } else if (t_(rows_, j) < -ray_tol) {
          return Status::unbounded;
        }
      }
      if (entering < 0) return Status::optimal;
      pivot(leaving, entering);
      ++iterations;
      if (opts.log) dump(*opts.log, iterations);
    }
  }

  // Row leaving the basis when column c enters, or -1 when none qualifies.
  Eigen::Index ratio_test(Eigen::Index c, const SimplexOptions& opts) const {
    Eigen::Index leaving = -1;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < rows_; ++i) {
      const double a = t_(i, c);
      if (a <= opts.pivot_tol) continue;
      const double ratio = std::max(t_(i, rhs_col()), 0.0) / a;
      const double slack = 1e-12 * std::max(1.0, std::abs(best_ratio));
      if (leaving < 0 || ratio < best_ratio - slack ||
          (ratio <= best_ratio + slack &&
           basis_[static_cast<std::size_t>(i)] < basis_[static_cast<std::size_t>(leaving)])) {
        leaving = i;
        best_ratio = std::min(best_ratio, ratio);
      }
    }
    return leaving;
  }

  void pivot(Eigen::Index r, Eigen::Index c) {
    t_.row(r) /= t_(r, c);
    for (Eigen::Index i = 0; i <= rows_; ++i) {
      if (i == r) continue;
      const double f = t_(i, c);
      if (f != 0.0) t_.row(i) -= f * t_.row(r);
    }
    t_(r, c) = 1.0;
    basis_[static_cast<std::size_t>(r)] = c;
  }

  double at(Eigen::Index i, Eigen::Index j) const { return t_(i, j); }

  void dump(std::ostream& os, int iteration) const {
    os << "-- simplex tableau after pivot " << iteration << " (basis:";
    for (auto b : basis_) os << ' ' << b;
    os << ")\n" << std::setprecision(6) << t_ << "\n";
  }

 private:
  Eigen::Index rows_;
  Eigen::Index structural_;
  Eigen::MatrixXd t_;
  std::vector<Eigen::Index> basis_;
};

}  // namespace detail

inline LPSolution solve_lp(const LinearProgram& lp, const SimplexOptions& opts) {
  lp.validate();
  const Eigen::Index n = lp.num_vars();
  const Eigen::Index n_eq = lp.eq_rows.rows();
  const Eigen::Index n_ge = lp.ge_rows.rows();
  const Eigen::Index R = n_eq + n_ge;

  // Standard form: split free variables, add one surplus column per >= row.
  std::vector<Eigen::Index> plus_col(static_cast<std::size_t>(n)), minus_col(static_cast<std::size_t>(n), -1);
  Eigen::Index cols = 0;
  for (Eigen::Index j = 0; j < n; ++j) {
    plus_col[static_cast<std::size_t>(j)] = cols++;
    if (lp.bounds[static_cast<std::size_t>(j)] == VarBound::free) minus_col[static_cast<std::size_t>(j)] = cols++;
  }
  const Eigen::Index surplus_start = cols;
  cols += n_ge;

  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(R, cols);
  Eigen::VectorXd b(R);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(cols);
  const double sense_sign = lp.sense == Sense::minimize ? 1.0 : -1.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto pj = plus_col[static_cast<std::size_t>(j)];
    const auto mj = minus_col[static_cast<std::size_t>(j)];
    c(pj) = sense_sign * lp.cost(j);
    if (mj >= 0) c(mj) = -sense_sign * lp.cost(j);
    for (Eigen::Index i = 0; i < R; ++i) {
      const double a = i < n_eq ? lp.eq_rows(i, j) : lp.ge_rows(i - n_eq, j);
      M(i, pj) = a;
      if (mj >= 0) M(i, mj) = -a;
    }
  }
  for (Eigen::Index i = 0; i < R; ++i) b(i) = i < n_eq ? lp.eq_rhs(i) : lp.ge_rhs(i - n_eq);
  for (Eigen::Index k = 0; k < n_ge; ++k) M(n_eq + k, surplus_start + k) = -1.0;

  Eigen::VectorXd row_sign = Eigen::VectorXd::Ones(R);
  for (Eigen::Index i = 0; i < R; ++i) {
    if (b(i) < 0.0) {
      row_sign(i) = -1.0;
      M.row(i) *= -1.0;
      b(i) = -b(i);
    }
  }

  LPSolution sol;
  sol.primal = Eigen::VectorXd::Zero(n);
  sol.eq_duals = Eigen::VectorXd::Zero(n_eq);
  sol.ge_duals = Eigen::VectorXd::Zero(n_ge);

  detail::Tableau tab(M, b);
  const Eigen::Index total_cols = cols + R;

  // Phase one: minimise the sum of artificials.
  Eigen::VectorXd phase1 = Eigen::VectorXd::Zero(total_cols);
  phase1.tail(R).setOnes();
  tab.set_costs(phase1);
  int iterations = 0;
  Status st = tab.iterate(total_cols, opts, iterations);
  sol.iterations = iterations;
  if (st != Status::optimal) {
    sol.status = Status::numerical_error;
    return sol;
  }
  const double b_scale = 1.0 + (R > 0 ? b.cwiseAbs().maxCoeff() : 0.0);
  if (tab.objective() > opts.feasibility_tol * b_scale) {
    sol.status = Status::infeasible;
    return sol;
  }

  // Drive artificials out of the basis; rows where that fails are redundant
  // and keep their artificial at level zero.
  for (Eigen::Index i = 0; i < R; ++i) {
    if (tab.basis()[static_cast<std::size_t>(i)] < cols) continue;
    for (Eigen::Index j = 0; j < cols; ++j) {
      if (std::abs(tab.at(i, j)) > opts.pivot_tol) {
        tab.pivot(i, j);
        break;
      }
    }
  }

  Eigen::VectorXd phase2 = Eigen::VectorXd::Zero(total_cols);
  phase2.head(cols) = c;
  tab.set_costs(phase2);
  st = tab.iterate(cols, opts, iterations);
  sol.iterations = iterations;
  if (st == Status::unbounded) {
    sol.status = Status::unbounded;
    return sol;
  }
  if (st != Status::optimal) {
    sol.status = Status::numerical_error;
    return sol;
  }

  // Refine from the original data: B x_B = b and B^T y = c_B.
  Eigen::MatrixXd B(R, R);
  Eigen::VectorXd cB(R);
  for (Eigen::Index i = 0; i < R; ++i) {
    const auto col = tab.basis()[static_cast<std::size_t>(i)];
    if (col < cols) {
      B.col(i) = M.col(col);
      cB(i) = c(col);
    } else {
      B.col(i) = Eigen::VectorXd::Unit(R, col - cols);
      cB(i) = 0.0;
    }
  }
  Eigen::VectorXd x_std = Eigen::VectorXd::Zero(cols);
  Eigen::VectorXd y_std = Eigen::VectorXd::Zero(R);
  if (R > 0) {
    Eigen::FullPivLU<Eigen::MatrixXd> lu(B);
    if (!lu.isInvertible()) {
      sol.status = Status::numerical_error;
      return sol;
    }
    const Eigen::VectorXd xB = lu.solve(b);
    y_std = lu.transpose().solve(cB);
    for (Eigen::Index i = 0; i < R; ++i) {
      const auto col = tab.basis()[static_cast<std::size_t>(i)];
      if (col < cols) x_std(col) = xB(i);
      else if (std::abs(xB(i)) > opts.certificate_tol * b_scale) {
        sol.status = Status::numerical_error;
        return sol;
      }
    }
  }

  const double x_scale = 1.0 + x_std.cwiseAbs().maxCoeff();
  if (x_std.minCoeff() < -opts.certificate_tol * x_scale) {
    sol.status = Status::numerical_error;
    return sol;
  }
  x_std = x_std.cwiseMax(0.0);
  const Eigen::VectorXd reduced = c - M.transpose() * y_std;
  const double c_scale = 1.0 + (cols > 0 ? c.cwiseAbs().maxCoeff() : 0.0);
  if (cols > 0 && reduced.minCoeff() < -opts.certificate_tol * c_scale * (1.0 + y_std.cwiseAbs().maxCoeff())) {
    sol.status = Status::numerical_error;
    return sol;
  }

  for (Eigen::Index j = 0; j < n; ++j) {
    const auto pj = plus_col[static_cast<std::size_t>(j)];
    const auto mj = minus_col[static_cast<std::size_t>(j)];
    sol.primal(j) = x_std(pj) - (mj >= 0 ? x_std(mj) : 0.0);
  }
  const Eigen::VectorXd y = sense_sign * row_sign.cwiseProduct(y_std);
  sol.eq_duals = y.head(n_eq);
  sol.ge_duals = y.tail(n_ge);
  sol.objective = lp.cost.dot(sol.primal);
  sol.dual_objective = lp.eq_rhs.dot(sol.eq_duals) + lp.ge_rhs.dot(sol.ge_duals);
  sol.status = Status::optimal;
  return sol;
}

inline LPSolution solve_lp(const LinearProgram& lp) { return solve_lp(lp, default_options()); }

/// Largest violation of the constraints and sign restrictions at `x`.
inline double primal_residual(const LinearProgram& lp, const Eigen::VectorXd& x) {
  double r = 0.0;
  if (lp.eq_rows.rows() > 0) r = std::max(r, (lp.eq_rows * x - lp.eq_rhs).cwiseAbs().maxCoeff());
  if (lp.ge_rows.rows() > 0) r = std::max(r, (lp.ge_rhs - lp.ge_rows * x).maxCoeff());
  for (Eigen::Index j = 0; j < x.size(); ++j)
    if (lp.bounds[static_cast<std::size_t>(j)] == VarBound::nonnegative) r = std::max(r, -x(j));
  return r;
}

/// Largest complementary-slackness product over the >= rows and the sign-restricted variables.
inline double complementarity_residual(const LinearProgram& lp, const LPSolution& sol) {
  double r = 0.0;
  if (lp.ge_rows.rows() > 0) {
    const Eigen::VectorXd slack = lp.ge_rows * sol.primal - lp.ge_rhs;
    r = std::max(r, slack.cwiseProduct(sol.ge_duals).cwiseAbs().maxCoeff());
  }
  const double sign = lp.sense == Sense::minimize ? 1.0 : -1.0;
  const Eigen::VectorXd reduced = sign * (lp.cost - lp.eq_rows.transpose() * sol.eq_duals -
                                          lp.ge_rows.transpose() * sol.ge_duals);
  for (Eigen::Index j = 0; j < lp.num_vars(); ++j)
    r = std::max(r, std::abs(reduced(j) * sol.primal(j)));
  return r;
}

}  // namespace fwas::lp
