#pragma once

#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "affdim/error.hpp"

namespace affdim {

template <typename Scalar>
using Matrix2 = Eigen::Matrix<Scalar, 2, 2>;
template <typename Scalar>
using Vector2 = Eigen::Matrix<Scalar, 2, 1>;
template <typename Scalar>
using Matrix3 = Eigen::Matrix<Scalar, 3, 3>;
template <typename Scalar>
using Vector6 = Eigen::Matrix<Scalar, 6, 1>;

using Matrix2d = Matrix2<double>;
using Vector2d = Vector2<double>;
using Matrix3d = Matrix3<double>;
using Vector6d = Vector6<double>;

/// An invertible affine map x -> A x + b of the plane.
template <typename Scalar>
struct AffineMap {
  Matrix2<Scalar> linear;
  Vector2<Scalar> translation;

  AffineMap() : linear(Matrix2<Scalar>::Identity()), translation(Vector2<Scalar>::Zero()) {}
  AffineMap(const Matrix2<Scalar>& a, const Vector2<Scalar>& b) : linear(a), translation(b) {}

  static AffineMap Identity() { return AffineMap(); }
  static AffineMap Linear(const Matrix2<Scalar>& a) { return AffineMap(a, Vector2<Scalar>::Zero()); }
  static AffineMap Translation(const Vector2<Scalar>& b) {
    return AffineMap(Matrix2<Scalar>::Identity(), b);
  }

  Vector2<Scalar> operator()(const Vector2<Scalar>& x) const { return linear * x + translation; }

  /// Homogeneous 3x3 form [[A, b], [0, 1]].
  Matrix3<Scalar> embedding() const {
    Matrix3<Scalar> m = Matrix3<Scalar>::Identity();
    m.template topLeftCorner<2, 2>() = linear;
    m.template topRightCorner<2, 1>() = translation;
    return m;
  }

  /// The six free coordinates (a11, a12, a21, a22, b1, b2) of the embedding.
  Vector6<Scalar> coordinates() const {
    Vector6<Scalar> c;
    c << linear(0, 0), linear(0, 1), linear(1, 0), linear(1, 1), translation(0), translation(1);
    return c;
  }

  Scalar determinant() const { return linear.determinant(); }
};

using AffineMap2d = AffineMap<double>;

/// A line through the origin, stored by its angle in [0, pi).
template <typename Scalar>
class ProjectivePoint {
 public:
  ProjectivePoint() = default;
  explicit ProjectivePoint(Scalar angle) : angle_(reduce(angle)) {}

  static ProjectivePoint from_vector(const Vector2<Scalar>& v) {
    return ProjectivePoint(std::atan2(v(1), v(0)));
  }

  Scalar angle() const { return angle_; }
  Vector2<Scalar> unit() const { return Vector2<Scalar>(snap(std::cos(angle_)), snap(std::sin(angle_))); }
  Vector2<Scalar> normal() const { return Vector2<Scalar>(-snap(std::sin(angle_)), snap(std::cos(angle_))); }
  ProjectivePoint perp() const { return ProjectivePoint(angle_ + std::numbers::pi_v<Scalar> / 2); }
  Matrix2<Scalar> projector() const {
    const Vector2<Scalar> u = unit();
    return u * u.transpose();
  }

  friend bool operator==(const ProjectivePoint& a, const ProjectivePoint& b) {
    return a.angle_ == b.angle_;
  }

 private:
  // cos(pi/2) is 6e-17 in double; snap it so axis lines project exactly.
  static Scalar snap(Scalar c) { return std::abs(c) < 1e-15 ? Scalar(0) : c; }

  static Scalar reduce(Scalar angle) {
    constexpr Scalar pi = std::numbers::pi_v<Scalar>;
    Scalar r = std::fmod(angle, pi);
    if (r < 0) r += pi;
    if (r >= pi) r -= pi;
    return r;
  }

  Scalar angle_ = 0;
};

using ProjectivePointd = ProjectivePoint<double>;

/// A = V * diag(alpha1, alpha2) * U with V a rotation whose first column lies
/// in the closed upper half-plane.
template <typename Scalar>
struct Svd2 {
  Matrix2<Scalar> V;
  Vector2<Scalar> singular;  // alpha1 >= alpha2 > 0
  Matrix2<Scalar> U;

  Scalar alpha1() const { return singular(0); }
  Scalar alpha2() const { return singular(1); }
  Matrix2<Scalar> D() const { return singular.asDiagonal(); }
  Matrix2<Scalar> reconstruct() const { return V * D() * U; }
};

namespace detail {

template <typename Scalar>
struct Gram2 {
  Scalar top;    // largest eigenvalue of A A^T
  Scalar angle;  // its eigendirection, in (-pi/2, pi/2]
};

// Closed-form top eigenpair of the symmetric matrix A A^T.
template <typename Scalar>
Gram2<Scalar> gram_top(const Matrix2<Scalar>& a) {
  const Scalar p = a(0, 0) * a(0, 0) + a(0, 1) * a(0, 1);
  const Scalar r = a(1, 0) * a(1, 0) + a(1, 1) * a(1, 1);
  const Scalar q = a(0, 0) * a(1, 0) + a(0, 1) * a(1, 1);
  const Scalar half_diff = (p - r) / 2;
  return {(p + r) / 2 + std::hypot(half_diff, q), std::atan2(2 * q, p - r) / 2};
}

}  // namespace detail

/// Both singular values without the factor matrices. Never throws; alpha2 is 0
/// for singular input.
template <typename Scalar>
Vector2<Scalar> singular_values(const Matrix2<Scalar>& a) {
  const Scalar a1 = std::sqrt(detail::gram_top(a).top);
  const Scalar det = std::abs(a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0));
  return Vector2<Scalar>(a1, a1 > 0 ? det / a1 : Scalar(0));
}

template <typename Scalar>
Scalar operator_norm(const Matrix2<Scalar>& a) {
  return std::sqrt(detail::gram_top(a).top);
}

template <typename Scalar>
Svd2<Scalar> svd2(const Matrix2<Scalar>& a) {
  const auto gram = detail::gram_top(a);
  const Scalar alpha1 = std::sqrt(gram.top);
  const Scalar det = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
  if (!(alpha1 > 0) || std::abs(det) < Scalar(1e-14) * alpha1 * alpha1) {
    throw Error(ErrorCode::SingularMatrix, "svd2: |det A| below 1e-14 * |A|^2");
  }
  const ProjectivePoint<Scalar> major(gram.angle);
  const Scalar c = std::cos(major.angle());
  const Scalar s = std::sin(major.angle());

  Svd2<Scalar> out;
  out.V << c, -s, s, c;
  out.singular << alpha1, std::abs(det) / alpha1;
  out.U = out.singular.cwiseInverse().asDiagonal() * out.V.transpose() * a;
  return out;
}

/// L(A): the direction of the major axis of A(unit ball).
template <typename Scalar>
ProjectivePoint<Scalar> major_direction(const Matrix2<Scalar>& a) {
  const auto gram = detail::gram_top(a);
  const Scalar alpha1 = std::sqrt(gram.top);
  const Scalar det = std::abs(a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0));
  const Scalar alpha2 = alpha1 > 0 ? det / alpha1 : Scalar(0);
  if (!(alpha1 - alpha2 > Scalar(1e-12) * alpha1)) {
    throw Error(ErrorCode::EqualSingularValues, "major_direction: alpha1 == alpha2");
  }
  return ProjectivePoint<Scalar>(gram.angle);
}

/// Operator-norm distance between the orthogonal projections onto v and w.
template <typename Scalar>
Scalar rp1_distance(const ProjectivePoint<Scalar>& v, const ProjectivePoint<Scalar>& w) {
  const Matrix2<Scalar> d = v.projector() - w.projector();
  // d is symmetric and traceless, so its eigenvalues are +-hypot(d00, d01).
  return std::hypot(d(0, 0), d(0, 1));
}

template <typename Scalar>
struct ProjectionComposition {
  Scalar scale;                        // |pi_W o A|
  ProjectivePoint<Scalar> direction;   // the pulled-back line A^* W
  Scalar offset;                       // coordinate of pi_W(b) along W
  int sign;                            // pi_W A x = sign * scale * <dir, x> (in W coordinates)
};

template <typename Scalar>
ProjectionComposition<Scalar> projection_of_composition(const ProjectivePoint<Scalar>& w,
                                                        const AffineMap<Scalar>& phi) {
  const Scalar det = phi.linear.determinant();
  if (std::abs(det) < Scalar(1e-14) * phi.linear.squaredNorm()) {
    throw Error(ErrorCode::SingularMatrix, "projection_of_composition: singular linear part");
  }
  const Vector2<Scalar> v = phi.linear.transpose() * w.unit();
  const auto dir = ProjectivePoint<Scalar>::from_vector(v);
  return {v.norm(), dir, w.unit().dot(phi.translation), v.dot(dir.unit()) >= 0 ? 1 : -1};
}

template <typename Scalar>
AffineMap<Scalar> compose(const AffineMap<Scalar>& f, const AffineMap<Scalar>& g) {
  return AffineMap<Scalar>(f.linear * g.linear, f.linear * g.translation + f.translation);
}

template <typename Scalar>
Matrix2<Scalar> inverse2(const Matrix2<Scalar>& a) {
  const Scalar det = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
  if (det == 0 || std::abs(det) < Scalar(1e-300)) {
    throw Error(ErrorCode::SingularMatrix, "inverse of a singular 2x2 matrix");
  }
  Matrix2<Scalar> inv;
  inv << a(1, 1), -a(0, 1), -a(1, 0), a(0, 0);
  return inv / det;
}

template <typename Scalar>
AffineMap<Scalar> invert(const AffineMap<Scalar>& f) {
  const Matrix2<Scalar> inv = inverse2(f.linear);
  return AffineMap<Scalar>(inv, -(inv * f.translation));
}

/// Frobenius distance between the 3x3 embeddings.
template <typename Scalar>
Scalar norm_distance(const AffineMap<Scalar>& f, const AffineMap<Scalar>& g) {
  return std::sqrt((f.linear - g.linear).squaredNorm() + (f.translation - g.translation).squaredNorm());
}

/// rho(h) = |M(h) - I|_F + |M(h)^-1 - I|_F.
template <typename Scalar>
Scalar distance_from_identity(const AffineMap<Scalar>& h) {
  const AffineMap<Scalar> hinv = invert(h);
  const Matrix2<Scalar> id = Matrix2<Scalar>::Identity();
  return std::sqrt((h.linear - id).squaredNorm() + h.translation.squaredNorm()) +
         std::sqrt((hinv.linear - id).squaredNorm() + hinv.translation.squaredNorm());
}

/// Left-invariant distance rho(g^-1 f).
template <typename Scalar>
Scalar invariant_distance(const AffineMap<Scalar>& f, const AffineMap<Scalar>& g) {
  return distance_from_identity(compose(invert(g), f));
}

template <typename Scalar>
Matrix2<Scalar> rotation(Scalar angle) {
  Matrix2<Scalar> r;
  r << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
  return r;
}

}  // namespace affdim
