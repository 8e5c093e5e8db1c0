#pragma once

// Face lattice of conv(A): minimal faces via a margin LP and full
// enumeration of proper faces by closed-set enumeration.

#include <Eigen/Dense>

#include <algorithm>
#include <cstdint>
#include <vector>

#include "fwas/error.hpp"
#include "fwas/lp.hpp"
#include "fwas/min_norm.hpp"
#include "fwas/polytope.hpp"

namespace fwas {

inline constexpr Eigen::Index kFaceEnumLimit = 20;

/// Minimal face of conv(A) containing the anchor points (columns of `anchors`).
///
/// Solves  max sum_j s_j  s.t.  <p, anchor> = c,  <p, a_j> - c >= s_j,  0 <= s_j <= 1.
/// Some exposing functional separates every atom outside the minimal face, so
/// at the optimum s_j = 1 off the face and s_j = 0 on it. The returned
/// descriptor covers all atoms when no proper face contains the anchors.
inline FaceDescriptor minimal_face(const AtomMatrix& A, const Eigen::MatrixXd& anchors) {
  const Eigen::Index m = A.dim(), n = A.size();
  if (anchors.rows() != m) throw DimensionMismatch("minimal_face: anchor dimension differs from atoms");
  FaceDescriptor face;
  if (anchors.cols() == 0) {
    face.functional = Eigen::VectorXd::Zero(m);
    face.offset = -1.0;
    return face;
  }

  // variables: p (m, free) | c (free) | s (n, >= 0)
  const Eigen::Index nv = m + 1 + n;
  lp::LinearProgram prog(lp::Sense::maximize, nv, lp::VarBound::nonnegative);
  for (Eigen::Index i = 0; i <= m; ++i) prog.bounds[static_cast<std::size_t>(i)] = lp::VarBound::free;
  prog.cost.tail(n).setOnes();
  for (Eigen::Index k = 0; k < anchors.cols(); ++k) {
    Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(nv);
    row.head(m) = anchors.col(k).transpose();
    row(m) = -1.0;
    prog.add_eq(row, 0.0);
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(nv);
    row.head(m) = A.matrix().col(j).transpose();
    row(m) = -1.0;
    row(m + 1 + j) = -1.0;
    prog.add_ge(row, 0.0);
    Eigen::RowVectorXd cap = Eigen::RowVectorXd::Zero(nv);
    cap(m + 1 + j) = 1.0;
    prog.add_le(cap, 1.0);
  }
  const lp::LPSolution sol = lp::solve_lp(prog);
  if (!sol.optimal())
    throw NumericalError(std::string("minimal_face: margin LP ended with status ") + lp::to_string(sol.status));

  face.functional = sol.primal.head(m);
  face.offset = sol.primal(m);
  for (Eigen::Index j = 0; j < n; ++j)
    if (sol.primal(m + 1 + j) < 0.5) face.atom_indices.push_back(j);
  return face;
}

/// Minimal face containing the listed atoms.
inline FaceDescriptor face_closure(const AtomMatrix& A, const IndexSet& atoms) {
  return minimal_face(A, A.columns(atoms));
}

namespace detail {

inline std::uint64_t to_mask(const IndexSet& s) {
  std::uint64_t m = 0;
  for (auto i : s) m |= std::uint64_t{1} << i;
  return m;
}

inline IndexSet from_mask(std::uint64_t mask, Eigen::Index n) {
  IndexSet s;
  for (Eigen::Index i = 0; i < n; ++i)
    if (mask & (std::uint64_t{1} << i)) s.push_back(i);
  return s;
}

}  // namespace detail

/// Every proper nonempty face of conv(A), as maximal atom-index sets with an
/// exposing functional, in lexicographic order of the index sets.
///
/// Faces are the closed sets of the closure "minimal face containing these
/// atoms"; Ganter's next-closure walk visits each closed set once using at
/// most n closure evaluations per face.
inline std::vector<FaceDescriptor> enumerate_proper_faces(const AtomMatrix& A,
                                                          Eigen::Index limit = kFaceEnumLimit) {
  const Eigen::Index n = A.size();
  if (limit > 63) limit = 63;
  if (n > limit)
    throw InstanceTooLarge("enumerate_proper_faces: " + std::to_string(n) + " atoms exceeds limit " +
                           std::to_string(limit));
  if (!A.has_two_distinct_columns())
    throw DegenerateInstance("enumerate_proper_faces: all atoms coincide");

  const std::uint64_t all = (n == 64) ? ~std::uint64_t{0} : ((std::uint64_t{1} << n) - 1);
  std::vector<FaceDescriptor> faces;
  std::uint64_t current = 0;  // the empty face is closed
  while (current != all) {
    bool advanced = false;
    for (Eigen::Index i = n - 1; i >= 0; --i) {
      const std::uint64_t bit = std::uint64_t{1} << i;
      if (current & bit) {
        current &= ~bit;
        continue;
      }
      FaceDescriptor cand = face_closure(A, detail::from_mask(current | bit, n));
      const std::uint64_t closed = detail::to_mask(cand.atom_indices);
      const std::uint64_t added = closed & ~current;
      if ((added & (bit - 1)) == 0) {
        current = closed;
        if (current != all) faces.push_back(std::move(cand));
        advanced = true;
        break;
      }
    }
    if (!advanced) throw NumericalError("enumerate_proper_faces: closure walk did not advance");
  }
  std::sort(faces.begin(), faces.end(),
            [](const FaceDescriptor& a, const FaceDescriptor& b) { return a.atom_indices < b.atom_indices; });
  return faces;
}

/// Flags atom i as a vertex unless a_i lies in the hull of the atoms that differ from it.
inline std::vector<bool> is_vertex_set(const AtomMatrix& A) {
  const Eigen::Index m = A.dim(), n = A.size();
  std::vector<bool> flags(static_cast<std::size_t>(n), true);
  for (Eigen::Index i = 0; i < n; ++i) {
    IndexSet others;
    for (Eigen::Index j = 0; j < n; ++j)
      if (A.matrix().col(j) != A.matrix().col(i)) others.push_back(j);
    if (others.empty()) continue;
    const auto k = static_cast<Eigen::Index>(others.size());
    lp::LinearProgram prog(lp::Sense::minimize, k);
    const Eigen::MatrixXd sub = A.columns(others);
    for (Eigen::Index r = 0; r < m; ++r) prog.add_eq(sub.row(r), A.matrix()(r, i));
    prog.add_eq(Eigen::RowVectorXd::Ones(k), 1.0);
    const lp::LPSolution sol = lp::solve_lp(prog);
    if (sol.status == lp::Status::numerical_error) throw NumericalError("is_vertex_set: LP breakdown");
    flags[static_cast<std::size_t>(i)] = sol.status != lp::Status::optimal;
  }
  return flags;
}

/// Euclidean distance from `u` to conv(points).
inline double hull_distance(const Eigen::MatrixXd& points, const Eigen::VectorXd& u) {
  return min_norm_point(points.colwise() - u).point.norm();
}

inline bool in_hull(const Eigen::MatrixXd& points, const Eigen::VectorXd& u, double tol = 1e-9) {
  const double scale = std::max(1.0, points.cwiseAbs().maxCoeff());
  return hull_distance(points, u) <= tol * scale;
}

}  // namespace fwas
