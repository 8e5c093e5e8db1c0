#pragma once

// Atom matrices, points of the standard simplex, faces and witnesses.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "fwas/error.hpp"

namespace fwas {

using IndexSet = std::vector<Eigen::Index>;

/// Weights at or below this value are outside the support I(x).
inline constexpr double kSupportThreshold = 1e-12;

/// The atom set A, stored as an m x n matrix whose column j is atom a_j.
class AtomMatrix {
 public:
  AtomMatrix() = default;
  explicit AtomMatrix(Eigen::MatrixXd columns) : cols_(std::move(columns)) {
    if (cols_.cols() < 1) throw InvalidArgument("AtomMatrix: need at least one atom");
    if (cols_.rows() < 1) throw InvalidArgument("AtomMatrix: ambient dimension must be positive");
    if (!cols_.allFinite()) throw InvalidArgument("AtomMatrix: non-finite atom coordinate");
  }

  Eigen::Index dim() const { return cols_.rows(); }
  Eigen::Index size() const { return cols_.cols(); }
  const Eigen::MatrixXd& matrix() const { return cols_; }
  Eigen::VectorXd atom(Eigen::Index j) const { return cols_.col(j); }

  bool has_two_distinct_columns() const {
    for (Eigen::Index j = 1; j < size(); ++j)
      if (cols_.col(j) != cols_.col(0)) return true;
    return false;
  }

  /// Columns listed in `idx`, in that order.
  Eigen::MatrixXd columns(const IndexSet& idx) const {
    Eigen::MatrixXd out(dim(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) out.col(static_cast<Eigen::Index>(k)) = cols_.col(idx[k]);
    return out;
  }

 private:
  Eigen::MatrixXd cols_;
};

/// A point of the standard simplex together with its support.
class SimplexPoint {
 public:
  SimplexPoint() = default;
  explicit SimplexPoint(Eigen::VectorXd weights) : w_(std::move(weights)) {
    if (w_.size() < 1) throw InvalidArgument("SimplexPoint: empty weight vector");
    if (!w_.allFinite()) throw InvalidArgument("SimplexPoint: non-finite weight");
    if (w_.minCoeff() < 0.0) throw InvalidArgument("SimplexPoint: negative weight");
    if (std::abs(w_.sum() - 1.0) > 1e-12) throw InvalidArgument("SimplexPoint: weights do not sum to one");
    for (Eigen::Index i = 0; i < w_.size(); ++i)
      if (w_(i) > kSupportThreshold) support_.push_back(i);
  }

  /// Clips negatives and tiny weights to zero, then rescales onto the simplex.
  static SimplexPoint normalized(Eigen::VectorXd v) {
    for (Eigen::Index i = 0; i < v.size(); ++i)
      if (!(v(i) > kSupportThreshold)) v(i) = 0.0;
    const double s = v.sum();
    if (!(s > 0.0)) throw InvalidArgument("SimplexPoint::normalized: no positive weight");
    v /= s;
    return SimplexPoint(std::move(v));
  }

  static SimplexPoint vertex(Eigen::Index n, Eigen::Index i) {
    if (i < 0 || i >= n) throw InvalidArgument("SimplexPoint::vertex: index out of range");
    return SimplexPoint(Eigen::VectorXd::Unit(n, i));
  }

  static SimplexPoint barycenter(Eigen::Index n) {
    return SimplexPoint(Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n)));
  }

  const Eigen::VectorXd& weights() const { return w_; }
  double operator[](Eigen::Index i) const { return w_(i); }
  Eigen::Index size() const { return w_.size(); }
  const IndexSet& support() const { return support_; }
  bool is_vertex() const { return support_.size() == 1; }

 private:
  Eigen::VectorXd w_;
  IndexSet support_;
};

/// An exposed face: <functional, a_i> == offset for i in atom_indices and
/// > offset for every other atom.
struct FaceDescriptor {
  IndexSet atom_indices;
  Eigen::VectorXd functional;
  double offset = 0.0;
};

/// Points u = A w and v = A y realising a condition measure.
struct WitnessPair {
  Eigen::VectorXd u;
  Eigen::VectorXd v;
  SimplexPoint w;
  SimplexPoint y;
};

inline IndexSet support(const SimplexPoint& x) { return x.support(); }

/// u = A x.
inline Eigen::VectorXd combine(const AtomMatrix& A, const SimplexPoint& x) {
  if (A.size() != x.size()) throw DimensionMismatch("combine: atom count differs from weight count");
  return A.matrix() * x.weights();
}

inline double diameter(const AtomMatrix& A) {
  double best = 0.0;
  for (Eigen::Index i = 0; i < A.size(); ++i)
    for (Eigen::Index j = i + 1; j < A.size(); ++j)
      best = std::max(best, (A.matrix().col(i) - A.matrix().col(j)).squaredNorm());
  return std::sqrt(best);
}

/// Complement of `idx` in {0, ..., n-1}; `idx` must be sorted.
inline IndexSet complement(const IndexSet& idx, Eigen::Index n) {
  IndexSet out;
  std::size_t k = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (k < idx.size() && idx[k] == i) ++k;
    else out.push_back(i);
  }
  return out;
}

/// Embeds weights given on `idx` into a full-length simplex point.
inline SimplexPoint scatter_weights(Eigen::Index n, const IndexSet& idx, const Eigen::VectorXd& local) {
  Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
  for (std::size_t k = 0; k < idx.size(); ++k) w(idx[k]) = local(static_cast<Eigen::Index>(k));
  return SimplexPoint::normalized(std::move(w));
}

inline std::string format_index_set(const IndexSet& s) {
  std::string out = "{";
  for (std::size_t k = 0; k < s.size(); ++k) {
    if (k) out += ",";
    out += std::to_string(s[k]);
  }
  return out + "}";
}

}  // namespace fwas
