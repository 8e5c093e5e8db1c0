#pragma once

// Objectives f(u) over conv(A): convex quadratics, composites h(Eu) + <b, u>,
// and generic smooth functions given by callbacks.

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <variant>

#include "fwas/error.hpp"

namespace fwas {

using ValueFn = std::function<double(const Eigen::VectorXd&)>;
using GradientFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

/// f(u) = 1/2 <u, Q u> + <b, u>.
struct Quadratic {
  Eigen::MatrixXd Q;
  Eigen::VectorXd b;
};

/// f(u) = h(E u) + <b, u>, h mu-strongly convex with L-Lipschitz gradient.
struct Composite {
  Eigen::MatrixXd E;
  Eigen::VectorXd b;
  ValueFn h;
  GradientFn h_gradient;
  double mu = 1.0;
  double L = 1.0;
  std::string h_name;
};

struct SmoothObjective {
  ValueFn f;
  GradientFn gradient;
  Eigen::Index dim = 0;
  double L = 0.0;
  std::optional<double> mu;
};

using Objective = std::variant<Quadratic, Composite, SmoothObjective>;

inline constexpr double kSymmetryTol = 1e-10;
inline constexpr double kEigenClip = 1e-10;

/// h(w) = 1/2 |w|^2 (mu = L = 1).
inline Composite half_squared_norm_composite(Eigen::MatrixXd E, Eigen::VectorXd b) {
  Composite c;
  c.E = std::move(E);
  c.b = std::move(b);
  c.h = [](const Eigen::VectorXd& w) { return 0.5 * w.squaredNorm(); };
  c.h_gradient = [](const Eigen::VectorXd& w) { return w; };
  c.mu = 1.0;
  c.L = 1.0;
  c.h_name = "half-squared-norm";
  return c;
}

/// Symmetric PSD square root; eigenvalues below kEigenClip in magnitude are set to zero.
inline Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& Q) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (Q + Q.transpose()));
  Eigen::VectorXd ev = es.eigenvalues();
  for (Eigen::Index i = 0; i < ev.size(); ++i) ev(i) = ev(i) < kEigenClip ? 0.0 : std::sqrt(ev(i));
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

/// Extreme eigenvalues (min, max) of a symmetric matrix.
inline std::pair<double, double> eigen_range(const Eigen::MatrixXd& Q) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (Q + Q.transpose()), Eigen::EigenvaluesOnly);
  return {es.eigenvalues().minCoeff(), es.eigenvalues().maxCoeff()};
}

inline Eigen::Index objective_dim(const Objective& obj) {
  return std::visit(
      [](const auto& o) -> Eigen::Index {
        using T = std::decay_t<decltype(o)>;
        if constexpr (std::is_same_v<T, Quadratic>) return o.Q.rows();
        else if constexpr (std::is_same_v<T, Composite>) return o.E.cols();
        else return o.dim;
      },
      obj);
}

/// Throws InvalidArgument / DimensionMismatch / ConfigurationError on malformed objectives.
inline void validate(const Objective& obj) {
  std::visit(
      [](const auto& o) {
        using T = std::decay_t<decltype(o)>;
        if constexpr (std::is_same_v<T, Quadratic>) {
          if (o.Q.rows() != o.Q.cols()) throw DimensionMismatch("quadratic: Q must be square");
          if (o.b.size() != o.Q.rows()) throw DimensionMismatch("quadratic: b length differs from Q");
          if (!o.Q.allFinite() || !o.b.allFinite()) throw InvalidArgument("quadratic: non-finite entry");
          const double scale = std::max(1.0, o.Q.cwiseAbs().maxCoeff());
          if ((o.Q - o.Q.transpose()).cwiseAbs().maxCoeff() > kSymmetryTol * scale)
            throw InvalidArgument("quadratic: Q is not symmetric");
          if (o.Q.size() > 0 && eigen_range(o.Q).first < -kEigenClip * scale)
            throw InvalidArgument("quadratic: Q is not positive semidefinite");
        } else if constexpr (std::is_same_v<T, Composite>) {
          if (o.b.size() != o.E.cols()) throw DimensionMismatch("composite: b length differs from E columns");
          if (!o.h || !o.h_gradient) throw InvalidArgument("composite: missing h callbacks");
          if (!(o.mu > 0.0) || !(o.L > 0.0)) throw InvalidArgument("composite: mu and L must be positive");
          if (o.mu > o.L) throw ConfigurationError("composite: mu exceeds L");
        } else {
          if (!o.f || !o.gradient) throw InvalidArgument("smooth objective: missing callbacks");
          if (o.dim < 1) throw InvalidArgument("smooth objective: dimension must be positive");
          if (!(o.L > 0.0)) throw InvalidArgument("smooth objective: L must be positive");
          if (o.mu && (!(*o.mu > 0.0))) throw InvalidArgument("smooth objective: mu must be positive");
          if (o.mu && *o.mu > o.L) throw ConfigurationError("smooth objective: mu exceeds L");
        }
      },
      obj);
}

inline double value(const Objective& obj, const Eigen::VectorXd& u) {
  return std::visit(
      [&u](const auto& o) -> double {
        using T = std::decay_t<decltype(o)>;
        if constexpr (std::is_same_v<T, Quadratic>) return 0.5 * u.dot(o.Q * u) + o.b.dot(u);
        else if constexpr (std::is_same_v<T, Composite>) return o.h(o.E * u) + o.b.dot(u);
        else return o.f(u);
      },
      obj);
}

inline Eigen::VectorXd gradient(const Objective& obj, const Eigen::VectorXd& u) {
  return std::visit(
      [&u](const auto& o) -> Eigen::VectorXd {
        using T = std::decay_t<decltype(o)>;
        if constexpr (std::is_same_v<T, Quadratic>) return o.Q * u + o.b;
        else if constexpr (std::is_same_v<T, Composite>) return o.E.transpose() * o.h_gradient(o.E * u) + o.b;
        else return o.gradient(u);
      },
      obj);
}

}  // namespace fwas
