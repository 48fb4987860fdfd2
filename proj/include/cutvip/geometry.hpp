#pragma once

// Half-spaces H(x, y) = {u : <u - y, x - y> <= 0} and (relaxed) projections onto them.
// Everything here is a pure function templated on the Eigen scalar type.

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "cutvip/errors.hpp"

namespace cutvip {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Point = Vector<double>;

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& v) {
  return v.allFinite();
}

inline void require_same_dimension(Eigen::Index a, Eigen::Index b, const char* where) {
  if (a != b) {
    throw InputError(std::string(where) + ": dimension mismatch (" + std::to_string(a) + " vs " +
                     std::to_string(b) + ")");
  }
}

/// Cut half-space with an unnormalized normal. A degenerate half-space is the whole space.
template <typename Scalar>
struct HalfSpace {
  Vector<Scalar> anchor;
  Vector<Scalar> normal;
  bool degenerate = false;

  Eigen::Index dimension() const { return anchor.size(); }

  static HalfSpace whole_space(Eigen::Index n) {
    return HalfSpace{Vector<Scalar>::Zero(n), Vector<Scalar>::Zero(n), true};
  }

  /// {u : <a, u> <= b}; the anchor is the foot of the origin on the boundary.
  template <typename Derived>
  static HalfSpace from_inequality(const Eigen::MatrixBase<Derived>& a, Scalar b) {
    const Scalar a2 = a.squaredNorm();
    if (!(a2 > Scalar(0))) throw InputError("HalfSpace::from_inequality: zero normal");
    return HalfSpace{(b / a2) * a, a, false};
  }

  /// Signed value <u - anchor, normal>; membership is value <= 0.
  template <typename Derived>
  Scalar value(const Eigen::MatrixBase<Derived>& u) const {
    if (degenerate) return Scalar(0);
    return (u - anchor).dot(normal);
  }

  template <typename Derived>
  bool contains(const Eigen::MatrixBase<Derived>& u, Scalar slack = Scalar(0)) const {
    return degenerate || value(u) <= slack;
  }
};

/// Degeneracy threshold for the cut H(x, tx): 1e-14 * max(1, |x|).
template <typename Derived>
typename Derived::Scalar degeneracy_threshold(const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  return Scalar(1e-14) * std::max(Scalar(1), x.norm());
}

/// H(x, tx) with anchor tx and normal x - tx.
template <typename DerivedX, typename DerivedT>
HalfSpace<typename DerivedX::Scalar> halfspace_from_cut(const Eigen::MatrixBase<DerivedX>& x,
                                                        const Eigen::MatrixBase<DerivedT>& tx) {
  using Scalar = typename DerivedX::Scalar;
  require_same_dimension(x.size(), tx.size(), "halfspace_from_cut");
  HalfSpace<Scalar> h{tx, x - tx, false};
  h.degenerate = h.normal.norm() <= degeneracy_threshold(x);
  return h;
}

template <typename Derived>
Vector<typename Derived::Scalar> project_halfspace(
    const Eigen::MatrixBase<Derived>& u, const HalfSpace<typename Derived::Scalar>& h) {
  using Scalar = typename Derived::Scalar;
  if (h.degenerate) return u;
  require_same_dimension(u.size(), h.dimension(), "project_halfspace");
  const Scalar v = h.value(u);
  if (v <= Scalar(0)) return u;
  return u - (v / h.normal.squaredNorm()) * h.normal;
}

/// u + alpha (P_H(u) - u), alpha in [0, 2].
template <typename Derived>
Vector<typename Derived::Scalar> relaxed_project(const Eigen::MatrixBase<Derived>& u,
                                                 const HalfSpace<typename Derived::Scalar>& h,
                                                 typename Derived::Scalar alpha) {
  using Scalar = typename Derived::Scalar;
  if (!(alpha >= Scalar(0) && alpha <= Scalar(2))) {
    throw InputError("relaxed_project: alpha must lie in [0, 2]");
  }
  Vector<Scalar> p = project_halfspace(u, h);
  return u + alpha * (p - u);
}

/// Euclidean distance from u to h (0 for members and for the whole space).
template <typename Derived>
typename Derived::Scalar distance_to_halfspace(const Eigen::MatrixBase<Derived>& u,
                                               const HalfSpace<typename Derived::Scalar>& h) {
  using Scalar = typename Derived::Scalar;
  if (h.degenerate) return Scalar(0);
  return std::max(Scalar(0), h.value(u)) / h.normal.norm();
}

}  // namespace cutvip
