#pragma once

// Closed-form single-u partial-swap collision maps in the affine Bloch
// representation. Everything here is a pure function of its arguments and is
// templated on the scalar type so that the same formulas can be evaluated in
// extended precision.

#include <cmath>

#include "collision/types.hpp"

namespace collision {

/// Matrix of r -> -(u x r), i.e.
///
///     [  0   u_z  -u_y ]
///     [ -u_z  0    u_x ]
///     [  u_y -u_x  0   ]
template <typename Scalar> Matrix3<Scalar> cross_matrix(const Vector3<Scalar>& u) {
  Matrix3<Scalar> b;
  b << Scalar(0), u.z(), -u.y(),
       -u.z(), Scalar(0), u.x(),
       u.y(), -u.x(), Scalar(0);
  return b;
}

/// One collision with an ancilla in state u:
/// r -> c^2 r + s^2 u - c s (u x r).
template <typename Scalar>
AffineQubitMapT<Scalar> single_collision_map(const BlochVectorT<Scalar>& u,
                                             const CollisionParamsT<Scalar>& p) {
  const Scalar c = p.c();
  const Scalar s = p.s();
  const Matrix3<Scalar> linear =
      c * c * Matrix3<Scalar>::Identity() + c * s * cross_matrix<Scalar>(u.vector());
  return AffineQubitMapT<Scalar>(s * s * u.vector(), linear);
}

template <typename Scalar>
ContinuousParamsT<Scalar> continuous_params(const BlochVectorT<Scalar>& u,
                                            const CollisionParamsT<Scalar>& p) {
  using std::atan2;
  using std::log1p;
  const Scalar c = p.c();
  const Scalar s = p.s();
  const Scalar len = u.norm();
  // ln c = ln(1 - s^2)/2 and ln cos(Omega) = -ln(1 + (s u / c)^2)/2 keep full
  // relative precision for small eta.
  const Scalar ratio = s * len / c;
  ContinuousParamsT<Scalar> cp;
  cp.gamma_total = -log1p(-s * s) / p.tau;
  cp.gamma_u = log1p(ratio * ratio) / (Scalar(2) * p.tau);
  cp.omega_per_collision = atan2(s * len, c);
  cp.omega_u = cp.omega_per_collision / p.tau;
  return cp;
}

/// n collisions with the same ancilla state, in closed form:
/// translation u (1 - c^{2n}) and
///
///     c^n A^n = R^n [cos(n W) I + sin(n W) B/u]
///             + (c^{2n} - R^n cos(n W)) u u^T / u^2,
///
/// with R = sqrt(c^2 (c^2 + u^2 s^2)) and W = atan(s u / c).
template <typename Scalar>
AffineQubitMapT<Scalar> n_collision_map(const BlochVectorT<Scalar>& u,
                                        const CollisionParamsT<Scalar>& p, long n) {
  using std::atan2;
  using std::cos;
  using std::pow;
  using std::sin;
  if (n < 1) throw InvalidArgument("number of collisions must be positive");

  const Scalar c = p.c();
  const Scalar s = p.s();
  const Scalar len = u.norm();
  const Scalar nn = static_cast<Scalar>(n);
  const Scalar c2n = pow(c * c, nn);
  const Vector3<Scalar> translation = u.vector() * (Scalar(1) - c2n);

  if (static_cast<double>(len) < kTinyBlochLength)
    return AffineQubitMapT<Scalar>(translation, c2n * Matrix3<Scalar>::Identity());

  const Vector3<Scalar> dir = u.vector() / len;
  const Scalar radial = pow(c * c * (c * c + len * len * s * s), nn / Scalar(2));
  const Scalar angle = nn * atan2(s * len, c);
  const Scalar ca = cos(angle);
  const Scalar sa = sin(angle);
  const Matrix3<Scalar> linear =
      radial * (ca * Matrix3<Scalar>::Identity() + sa * cross_matrix<Scalar>(dir)) +
      (c2n - radial * ca) * dir * dir.transpose();
  return AffineQubitMapT<Scalar>(translation, linear);
}

namespace detail {

// Scalar factors of the continuous map, A_t = a I + b B/u + (d - a) u u^T/u^2.
template <typename Scalar> struct ContinuousFactors {
  Scalar a; // e^{-(Gamma - gamma_u) t} cos(omega_u t)
  Scalar b; // e^{-(Gamma - gamma_u) t} sin(omega_u t)
  Scalar d; // e^{-Gamma t}
};

template <typename Scalar>
ContinuousFactors<Scalar> continuous_factors(const ContinuousParamsT<Scalar>& cp, Scalar t) {
  using std::cos;
  using std::exp;
  using std::sin;
  const Scalar transverse = exp(-cp.transverse_decay() * t);
  const Scalar phase = cp.omega_u * t;
  return {transverse * cos(phase), transverse * sin(phase), exp(-cp.gamma_total * t)};
}

inline void require_nonnegative_time(double t) {
  if (!(t >= 0.0)) throw InvalidArgument("time must be non-negative");
}

} // namespace detail

/// Continuous-time interpolation E_t(u) of the n-collision maps; coincides with
/// n_collision_map at t = n tau.
template <typename Scalar>
AffineQubitMapT<Scalar> continuous_map(const BlochVectorT<Scalar>& u,
                                       const ContinuousParamsT<Scalar>& cp, Scalar t) {
  detail::require_nonnegative_time(static_cast<double>(t));
  const auto f = detail::continuous_factors(cp, t);
  const Vector3<Scalar> translation = u.vector() * (Scalar(1) - f.d);
  const Scalar len = u.norm();
  if (static_cast<double>(len) < kTinyBlochLength)
    return AffineQubitMapT<Scalar>(translation, f.d * Matrix3<Scalar>::Identity());

  const Vector3<Scalar> dir = u.vector() / len;
  const Matrix3<Scalar> linear = f.a * Matrix3<Scalar>::Identity() +
                                 f.b * cross_matrix<Scalar>(dir) +
                                 (f.d - f.a) * dir * dir.transpose();
  return AffineQubitMapT<Scalar>(translation, linear);
}

template <typename Scalar>
AffineQubitMapT<Scalar> continuous_map(const BlochVectorT<Scalar>& u,
                                       const CollisionParamsT<Scalar>& p, Scalar t) {
  return continuous_map(u, continuous_params(u, p), t);
}

/// Entrywise analytic d/dt of continuous_map. Row 0 is zero.
template <typename Scalar>
Matrix4<Scalar> continuous_map_derivative(const BlochVectorT<Scalar>& u,
                                          const ContinuousParamsT<Scalar>& cp, Scalar t) {
  detail::require_nonnegative_time(static_cast<double>(t));
  const auto f = detail::continuous_factors(cp, t);
  const Scalar decay = -cp.transverse_decay();
  const Scalar da = decay * f.a - cp.omega_u * f.b;
  const Scalar db = decay * f.b + cp.omega_u * f.a;
  const Scalar dd = -cp.gamma_total * f.d;

  Matrix4<Scalar> out = Matrix4<Scalar>::Zero();
  out.template block<3, 1>(1, 0) = -dd * u.vector();
  const Scalar len = u.norm();
  if (static_cast<double>(len) < kTinyBlochLength) {
    out.template block<3, 3>(1, 1) = dd * Matrix3<Scalar>::Identity();
    return out;
  }
  const Vector3<Scalar> dir = u.vector() / len;
  out.template block<3, 3>(1, 1) = da * Matrix3<Scalar>::Identity() +
                                   db * cross_matrix<Scalar>(dir) +
                                   (dd - da) * dir * dir.transpose();
  return out;
}

template <typename Scalar>
Matrix4<Scalar> continuous_map_derivative(const BlochVectorT<Scalar>& u,
                                          const CollisionParamsT<Scalar>& p, Scalar t) {
  return continuous_map_derivative(u, continuous_params(u, p), t);
}

/// Affine inverse by direct cofactor inversion of the 3x3 block.
/// Throws SingularMap when |det T| falls below singular_det_tolerance(T).
template <typename Scalar> AffineQubitMapT<Scalar> invert_map(const AffineQubitMapT<Scalar>& m) {
  using std::abs;
  const Matrix3<Scalar> t = m.linear();
  Matrix3<Scalar> adj;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      const int r0 = (j + 1) % 3, r1 = (j + 2) % 3;
      const int c0 = (i + 1) % 3, c1 = (i + 2) % 3;
      adj(i, j) = t(r0, c0) * t(r1, c1) - t(r0, c1) * t(r1, c0);
    }
  }
  const Scalar det = t.row(0).dot(adj.col(0));
  if (!(abs(det) >= singular_det_tolerance(t)))
    throw SingularMap("affine block is singular (det = " +
                      std::to_string(static_cast<double>(det)) + ")");
  const Matrix3<Scalar> inv = adj / det;
  return AffineQubitMapT<Scalar>(-inv * m.translation(), inv);
}

/// Inverse of E_t(u) through the split A_t = C + k v v^T with C = a I + b B/u,
/// v = u/|u| and k = d - a, using the Sherman-Morrison formula.
///
/// Only defined where C is invertible (cos(omega_u t) != 0); throws
/// SingularMap otherwise even if A_t itself is invertible.
template <typename Scalar>
AffineQubitMapT<Scalar> invert_continuous_map_sherman_morrison(const BlochVectorT<Scalar>& u,
                                                               const CollisionParamsT<Scalar>& p,
                                                               Scalar t) {
  using std::abs;
  detail::require_nonnegative_time(static_cast<double>(t));
  const auto cp = continuous_params(u, p);
  const auto f = detail::continuous_factors(cp, t);
  const Vector3<Scalar> translation = u.vector() * (Scalar(1) - f.d);
  const Scalar len = u.norm();

  Matrix3<Scalar> inv;
  if (static_cast<double>(len) < kTinyBlochLength) {
    inv = Matrix3<Scalar>::Identity() / f.d;
  } else {
    const Vector3<Scalar> v = u.vector() / len;
    const Matrix3<Scalar> j = cross_matrix<Scalar>(v);
    const Matrix3<Scalar> vvt = v * v.transpose();
    const Matrix3<Scalar> c_block = f.a * Matrix3<Scalar>::Identity() + f.b * j;
    const Scalar planar = f.a * f.a + f.b * f.b;
    if (!(abs(c_block.determinant()) >= singular_det_tolerance(c_block)))
      throw SingularMap("Sherman-Morrison split has a singular C block");
    // (a I + b J)^{-1} = v v^T / a + (a (I - v v^T) - b J) / (a^2 + b^2)
    const Matrix3<Scalar> c_inv =
        vvt / f.a + (f.a * (Matrix3<Scalar>::Identity() - vvt) - f.b * j) / planar;
    const Scalar k = f.d - f.a;
    const Vector3<Scalar> cv = c_inv * v;
    const Eigen::Matrix<Scalar, 1, 3> vc = v.transpose() * c_inv;
    const Scalar denom = Scalar(1) + k * v.dot(cv);
    if (!(abs(denom) > Scalar(1e-14)))
      throw SingularMap("Sherman-Morrison denominator vanishes");
    inv = c_inv - (k / denom) * cv * vc;
  }
  return AffineQubitMapT<Scalar>(-inv * translation, inv);
}

/// r -> T r + s on the Bloch vector of rho.
inline DensityMatrix apply_map(const AffineQubitMap& m, const DensityMatrix& rho) {
  return DensityMatrix(m.apply(rho.bloch()));
}

} // namespace collision
