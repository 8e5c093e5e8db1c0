#pragma once

// Condition measures of a finite atom set: the pair measure Phi(A, x, z) and
// its dual, the facial distance Phi(A), a localized lower bound, pyramidal
// directional width, and the scaled measures used for quadratic objectives.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "fwas/error.hpp"
#include "fwas/faces.hpp"
#include "fwas/lp.hpp"
#include "fwas/min_norm.hpp"
#include "fwas/parallel.hpp"
#include "fwas/polytope.hpp"

namespace fwas {

struct PhiReport {
  double value = 0.0;
  FaceDescriptor minimizing_face;  // filled by facial_distance and the local bound
  WitnessPair witness;
  Eigen::VectorXd optimal_p;       // filled by the pair measures
};

struct ScaledInstance {
  AtomMatrix Abar;
  Eigen::VectorXd g;
  IndexSet Zg_face;
  double delta_g = 0.0;
  Eigen::VectorXd values;  // <(g, 1), abar_j> per atom
};

/// Distance between a proper face and the hull of the remaining atoms.
struct FaceDistance {
  FaceDescriptor face;
  HullDistance distance;  // u in conv(face), v in conv(complement)
};

namespace detail {

inline constexpr double kPairNormFloor = 1e-10;

// min t + tau  s.t.  t >= <p, m_i> (i in I),  tau >= -<p, m_j> (all j),  <d, p> = 1.
// The ge-row duals are the weights w (on I) and y (on all atoms); the equality
// dual is lambda with M_I w - M y = lambda d.
inline PhiReport phi_min_max(const Eigen::MatrixXd& M, const IndexSet& I, const Eigen::VectorXd& d) {
  const Eigen::Index m = M.rows(), n = M.cols();
  const Eigen::Index nv = m + 2;
  lp::LinearProgram prog(lp::Sense::minimize, nv, lp::VarBound::free);
  prog.cost(m) = 1.0;
  prog.cost(m + 1) = 1.0;
  for (auto i : I) {
    Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(nv);
    row.head(m) = -M.col(i).transpose();
    row(m) = 1.0;
    prog.add_ge(row, 0.0);
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(nv);
    row.head(m) = M.col(j).transpose();
    row(m + 1) = 1.0;
    prog.add_ge(row, 0.0);
  }
  Eigen::RowVectorXd drow = Eigen::RowVectorXd::Zero(nv);
  drow.head(m) = d.transpose();
  prog.add_eq(drow, 1.0);

  const lp::LPSolution sol = lp::solve_lp(prog);
  if (!sol.optimal())
    throw NumericalError(std::string("pair measure LP ended with status ") + lp::to_string(sol.status));

  PhiReport rep;
  rep.value = sol.objective;
  rep.optimal_p = sol.primal.head(m);
  const auto ni = static_cast<Eigen::Index>(I.size());
  Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
  for (Eigen::Index k = 0; k < ni; ++k) w(I[static_cast<std::size_t>(k)]) = std::max(0.0, sol.ge_duals(k));
  Eigen::VectorXd y = sol.ge_duals.segment(ni, n).cwiseMax(0.0);
  rep.witness.w = SimplexPoint::normalized(w);
  rep.witness.y = SimplexPoint::normalized(y);
  rep.witness.u = M * rep.witness.w.weights();
  rep.witness.v = M * rep.witness.y.weights();
  return rep;
}

// max lambda  s.t.  M_I w - M y = lambda d,  1'w = 1,  1'y = 1,  w, y, lambda >= 0.
inline double phi_longest_segment(const Eigen::MatrixXd& M, const IndexSet& I, const Eigen::VectorXd& d) {
  const Eigen::Index m = M.rows(), n = M.cols();
  const auto ni = static_cast<Eigen::Index>(I.size());
  const Eigen::Index nv = ni + n + 1;
  lp::LinearProgram prog(lp::Sense::maximize, nv);
  prog.cost(nv - 1) = 1.0;
  for (Eigen::Index r = 0; r < m; ++r) {
    Eigen::RowVectorXd row(nv);
    for (Eigen::Index k = 0; k < ni; ++k) row(k) = M(r, I[static_cast<std::size_t>(k)]);
    row.segment(ni, n) = -M.row(r);
    row(nv - 1) = -d(r);
    prog.add_eq(row, 0.0);
  }
  Eigen::RowVectorXd sw = Eigen::RowVectorXd::Zero(nv), sy = Eigen::RowVectorXd::Zero(nv);
  sw.head(ni).setOnes();
  sy.segment(ni, n).setOnes();
  prog.add_eq(sw, 1.0);
  prog.add_eq(sy, 1.0);
  const lp::LPSolution sol = lp::solve_lp(prog);
  if (!sol.optimal())
    throw NumericalError(std::string("longest segment LP ended with status ") + lp::to_string(sol.status));
  return sol.objective;
}

inline void check_pair(const AtomMatrix& A, const SimplexPoint& x, const SimplexPoint& z, const char* who) {
  if (x.size() != A.size() || z.size() != A.size())
    throw DimensionMismatch(std::string(who) + ": weight length differs from atom count");
}

inline Eigen::VectorXd unit_difference(const AtomMatrix& A, const SimplexPoint& x, const SimplexPoint& z,
                                       const char* who) {
  const Eigen::VectorXd diff = A.matrix() * (x.weights() - z.weights());
  const double nrm = diff.norm();
  if (!(nrm > kPairNormFloor)) throw InvalidArgument(std::string(who) + ": A(x - z) vanishes");
  return diff / nrm;
}

}  // namespace detail

/// Phi(A, x, z) = min over <p, d> = 1 of max_{i in I(x), j} <p, a_i - a_j>,
/// d = A(x - z)/|A(x - z)|, with dual witnesses w (supported in I(x)) and y.
inline PhiReport phi_pair(const AtomMatrix& A, const SimplexPoint& x, const SimplexPoint& z) {
  detail::check_pair(A, x, z, "phi_pair");
  const Eigen::VectorXd d = detail::unit_difference(A, x, z, "phi_pair");
  return detail::phi_min_max(A.matrix(), x.support(), d);
}

/// Same quantity from the longest-segment side: max lambda with A(w - y) = lambda d, I(w) in I(x).
inline double phi_pair_dual(const AtomMatrix& A, const SimplexPoint& x, const SimplexPoint& z) {
  detail::check_pair(A, x, z, "phi_pair_dual");
  const Eigen::VectorXd d = detail::unit_difference(A, x, z, "phi_pair_dual");
  return detail::phi_longest_segment(A.matrix(), x.support(), d);
}

/// dist(F, conv(A \ F)) for every proper face F, in face order.
inline std::vector<FaceDistance> face_distance_table(const AtomMatrix& A, Eigen::Index limit = kFaceEnumLimit) {
  std::vector<FaceDescriptor> faces = enumerate_proper_faces(A, limit);
  std::vector<FaceDistance> table(faces.size());
  parallel_for(faces.size(), [&](std::size_t k) {
    const IndexSet rest = complement(faces[k].atom_indices, A.size());
    table[k].distance = polytope_distance(A.columns(faces[k].atom_indices), A.columns(rest));
  });
  for (std::size_t k = 0; k < faces.size(); ++k) table[k].face = std::move(faces[k]);
  return table;
}

namespace detail {

// Smallest entry of the table; the earliest face wins ties.
inline PhiReport min_face_entry(const AtomMatrix& A, const std::vector<FaceDistance>& table,
                                const std::vector<std::size_t>& candidates) {
  if (candidates.empty()) throw NumericalError("facial distance: no candidate faces");
  std::size_t best = candidates.front();
  for (auto k : candidates)
    if (table[k].distance.distance < table[best].distance.distance) best = k;
  const FaceDistance& e = table[best];
  const IndexSet rest = complement(e.face.atom_indices, A.size());
  PhiReport rep;
  rep.value = e.distance.distance;
  rep.minimizing_face = e.face;
  // u lies in the complement hull, v in the face
  rep.witness.u = e.distance.v;
  rep.witness.v = e.distance.u;
  rep.witness.w = scatter_weights(A.size(), rest, e.distance.t_weights);
  rep.witness.y = scatter_weights(A.size(), e.face.atom_indices, e.distance.s_weights);
  return rep;
}

}  // namespace detail

/// Phi(A): the smallest distance between a proper face and the hull of the other atoms.
inline PhiReport facial_distance(const AtomMatrix& A, Eigen::Index limit = kFaceEnumLimit) {
  const auto table = face_distance_table(A, limit);
  std::vector<std::size_t> all(table.size());
  for (std::size_t k = 0; k < all.size(); ++k) all[k] = k;
  return detail::min_face_entry(A, table, all);
}

/// Smallest face containing the given points (columns); std::nullopt when
/// only the whole polytope contains them.
inline std::optional<FaceDescriptor> smallest_containing_face(const AtomMatrix& A, const Eigen::MatrixXd& points) {
  if (points.rows() != A.dim()) throw DimensionMismatch("smallest_containing_face: point dimension differs");
  if (points.cols() == 0) throw InvalidArgument("smallest_containing_face: no points");
  for (Eigen::Index k = 0; k < points.cols(); ++k)
    if (!in_hull(A.matrix(), points.col(k)))
      throw InvalidArgument("smallest_containing_face: point " + std::to_string(k) + " lies outside conv(A)");
  FaceDescriptor f = minimal_face(A, points);
  if (static_cast<Eigen::Index>(f.atom_indices.size()) == A.size()) return std::nullopt;
  return f;
}

/// Lower bound on the localized measure Phi(A, Z): the minimum of
/// dist(G, conv(A \ G)) over the faces G of the smallest face containing A Z.
inline PhiReport local_phi_lower_bound(const AtomMatrix& A, const std::vector<SimplexPoint>& Z,
                                       Eigen::Index limit = kFaceEnumLimit) {
  if (Z.empty()) throw InvalidArgument("local_phi_lower_bound: empty Z");
  Eigen::MatrixXd pts(A.dim(), static_cast<Eigen::Index>(Z.size()));
  for (std::size_t k = 0; k < Z.size(); ++k) pts.col(static_cast<Eigen::Index>(k)) = combine(A, Z[k]);
  const auto F = smallest_containing_face(A, pts);
  const auto table = face_distance_table(A, limit);
  std::vector<std::size_t> inside;
  for (std::size_t k = 0; k < table.size(); ++k) {
    if (!F || std::includes(F->atom_indices.begin(), F->atom_indices.end(), table[k].face.atom_indices.begin(),
                            table[k].face.atom_indices.end()))
      inside.push_back(k);
  }
  return detail::min_face_entry(A, table, inside);
}

/// Pyramidal directional width of A along r at base point u:
/// min over S with u in conv(S) of max_{a in A, s in S} <r/|r|, a - s>.
///
/// Only the upper level sets {a : <r, a> >= tau} matter: they are the largest
/// subsets with a given minimum, so the best S is the highest level set whose
/// hull still contains u.
inline double pdirw(const AtomMatrix& A, const Eigen::VectorXd& r, const Eigen::VectorXd& u) {
  if (r.size() != A.dim() || u.size() != A.dim()) throw DimensionMismatch("pdirw: dimension mismatch");
  const double rn = r.norm();
  if (!(rn > 0.0)) throw InvalidArgument("pdirw: zero direction");
  if (!in_hull(A.matrix(), u)) throw InvalidArgument("pdirw: base point outside conv(A)");
  const Eigen::VectorXd vals = A.matrix().transpose() * (r / rn);
  const double top = vals.maxCoeff();
  const double eps = 1e-12 * std::max(1.0, vals.cwiseAbs().maxCoeff());

  std::vector<double> levels(vals.data(), vals.data() + vals.size());
  std::sort(levels.begin(), levels.end(), std::greater<>());
  for (double tau : levels) {
    IndexSet S;
    for (Eigen::Index j = 0; j < A.size(); ++j)
      if (vals(j) >= tau - eps) S.push_back(j);
    if (in_hull(A.columns(S), u)) return top - tau;
  }
  return top - levels.back();
}

/// ||vbar||_g = sqrt(|v|^2 + |<g, v> + vbar_{m+1}|), v the first m entries.
inline double norm_g(const Eigen::VectorXd& vbar, const Eigen::VectorXd& g) {
  const Eigen::Index m = g.size();
  if (vbar.size() != m + 1) throw DimensionMismatch("norm_g: expected a vector of length m + 1");
  const Eigen::VectorXd v = vbar.head(m);
  return std::sqrt(v.squaredNorm() + std::abs(g.dot(v) + vbar(m)));
}

inline constexpr double kZgTolerance = 1e-9;

/// Z(g): atoms minimising <(g, 1), abar_j>, and the spread delta(g) of that functional.
inline ScaledInstance scaled_instance(const AtomMatrix& Abar, const Eigen::VectorXd& g) {
  if (Abar.dim() != g.size() + 1) throw DimensionMismatch("scaled_instance: Abar must have m + 1 rows");
  ScaledInstance s;
  s.Abar = Abar;
  s.g = g;
  const Eigen::Index m = g.size();
  s.values = (Abar.matrix().topRows(m).transpose() * g) + Abar.matrix().row(m).transpose();
  const double lo = s.values.minCoeff(), hi = s.values.maxCoeff();
  const double tol = kZgTolerance * std::max(1.0, s.values.cwiseAbs().maxCoeff());
  for (Eigen::Index j = 0; j < Abar.size(); ++j)
    if (s.values(j) <= lo + tol) s.Zg_face.push_back(j);
  s.delta_g = hi - lo;
  return s;
}

namespace detail {

// Checks that z lies on the Z(g) face and returns it with the off-face mass removed.
inline SimplexPoint project_to_zg(const ScaledInstance& s, const SimplexPoint& z) {
  if (z.size() != s.Abar.size()) throw DimensionMismatch("Z(g) projection: weight length differs from atom count");
  const double lo = s.values.minCoeff();
  const double gap = z.weights().dot(s.values) - lo;
  if (gap > kZgTolerance * std::max(1.0, s.values.cwiseAbs().maxCoeff()))
    throw InvalidArgument("z does not lie in Z(g): functional gap " + std::to_string(gap));
  Eigen::VectorXd w = Eigen::VectorXd::Zero(z.size());
  for (auto j : s.Zg_face) w(j) = z[j];
  return SimplexPoint::normalized(std::move(w));
}

inline Eigen::VectorXd unit_g_difference(const ScaledInstance& s, const SimplexPoint& x, const SimplexPoint& z) {
  const Eigen::VectorXd diff = s.Abar.matrix() * (x.weights() - z.weights());
  const double nrm = norm_g(diff, s.g);
  if (!(nrm > kPairNormFloor)) throw InvalidArgument("bar_phi_pair: Abar(x - z) vanishes");
  return diff / nrm;
}

}  // namespace detail

/// The scaled pair measure: the pair LP on Abar with direction
/// dbar = Abar(x - z)/||Abar(x - z)||_g. z must lie in Z(g).
inline PhiReport bar_phi_pair(const AtomMatrix& Abar, const Eigen::VectorXd& g, const SimplexPoint& x,
                              const SimplexPoint& z) {
  const ScaledInstance s = scaled_instance(Abar, g);
  detail::check_pair(Abar, x, z, "bar_phi_pair");
  const SimplexPoint zp = detail::project_to_zg(s, z);
  const Eigen::VectorXd d = detail::unit_g_difference(s, x, zp);
  return detail::phi_min_max(Abar.matrix(), x.support(), d);
}

/// Longest-segment form of the scaled pair measure.
inline double bar_phi_pair_dual(const AtomMatrix& Abar, const Eigen::VectorXd& g, const SimplexPoint& x,
                                const SimplexPoint& z) {
  const ScaledInstance s = scaled_instance(Abar, g);
  detail::check_pair(Abar, x, z, "bar_phi_pair_dual");
  const SimplexPoint zp = detail::project_to_zg(s, z);
  const Eigen::VectorXd d = detail::unit_g_difference(s, x, zp);
  return detail::phi_longest_segment(Abar.matrix(), x.support(), d);
}

/// Abar with its last row replaced by (<g, rows> + last)/sqrt(delta(g)); requires delta(g) > 0.
inline AtomMatrix hat_matrix(const ScaledInstance& s) {
  if (!(s.delta_g > 0.0)) throw InvalidArgument("hat_matrix: delta(g) must be positive");
  Eigen::MatrixXd H = s.Abar.matrix();
  H.row(H.rows() - 1) = s.values.transpose() / std::sqrt(s.delta_g);
  return AtomMatrix(std::move(H));
}

struct BarPhiBounds {
  double lower = 0.0;
  double upper = std::numeric_limits<double>::infinity();
  Eigen::VectorXd argmin_x;  // candidate pair attaining `upper`
  Eigen::VectorXd argmin_z;
  int pairs_evaluated = 0;
};

/// Bracket for the global scaled measure. The lower end is the localized
/// face bound on A (delta(g) = 0) or on the hat matrix (delta(g) > 0) over
/// Z(g); the upper end is the smallest pair value over vertex pairs,
/// midpoints and `samples` seeded random pairs.
inline BarPhiBounds bar_phi_bounds(const AtomMatrix& Abar, const Eigen::VectorXd& g, int samples = 200,
                                   unsigned seed = 1) {
  if (!Abar.has_two_distinct_columns()) throw DegenerateInstance("bar_phi_bounds: all atoms coincide");
  const ScaledInstance s = scaled_instance(Abar, g);
  const Eigen::Index n = Abar.size(), m = g.size();
  BarPhiBounds out;

  std::vector<SimplexPoint> Z;
  for (auto j : s.Zg_face) Z.push_back(SimplexPoint::vertex(n, j));
  if (s.delta_g > 0.0) {
    out.lower = local_phi_lower_bound(hat_matrix(s), Z).value;
  } else {
    out.lower = local_phi_lower_bound(AtomMatrix(Abar.matrix().topRows(m)), Z).value;
  }

  std::vector<Eigen::VectorXd> xs, zs;
  for (Eigen::Index i = 0; i < n; ++i) {
    xs.push_back(Eigen::VectorXd::Unit(n, i));
    for (Eigen::Index k = i + 1; k < n; ++k)
      xs.push_back(0.5 * (Eigen::VectorXd::Unit(n, i) + Eigen::VectorXd::Unit(n, k)));
  }
  for (std::size_t a = 0; a < s.Zg_face.size(); ++a) {
    zs.push_back(Eigen::VectorXd::Unit(n, s.Zg_face[a]));
    for (std::size_t b = a + 1; b < s.Zg_face.size(); ++b)
      zs.push_back(0.5 * (Eigen::VectorXd::Unit(n, s.Zg_face[a]) + Eigen::VectorXd::Unit(n, s.Zg_face[b])));
  }
  const double floor = detail::kPairNormFloor * std::max(1.0, Abar.matrix().cwiseAbs().maxCoeff());
  auto consider = [&](const Eigen::VectorXd& xv, const Eigen::VectorXd& zv) {
    const SimplexPoint x = SimplexPoint::normalized(xv);
    const SimplexPoint z = SimplexPoint::normalized(zv);
    if (norm_g(Abar.matrix() * (x.weights() - z.weights()), g) <= floor) return;
    const double val = bar_phi_pair(Abar, g, x, z).value;
    ++out.pairs_evaluated;
    if (val < out.upper) {
      out.upper = val;
      out.argmin_x = x.weights();
      out.argmin_z = z.weights();
    }
  };
  for (const auto& xv : xs)
    for (const auto& zv : zs) consider(xv, zv);

  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> expo(1.0);
  for (int k = 0; k < samples; ++k) {
    Eigen::VectorXd x(n);
    for (Eigen::Index i = 0; i < n; ++i) x(i) = expo(rng);
    Eigen::VectorXd z = Eigen::VectorXd::Zero(n);
    for (auto j : s.Zg_face) z(j) = expo(rng);
    consider(x / x.sum(), z / z.sum());
  }
  return out;
}

}  // namespace fwas
