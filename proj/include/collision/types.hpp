#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace collision {

template <typename Scalar> using Vector3 = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar> using Matrix3 = Eigen::Matrix<Scalar, 3, 3>;
template <typename Scalar> using Vector4 = Eigen::Matrix<Scalar, 4, 1>;
template <typename Scalar> using Matrix4 = Eigen::Matrix<Scalar, 4, 4>;

using Vector3d = Vector3<double>;
using Matrix3d = Matrix3<double>;
using Vector4d = Vector4<double>;
using Matrix4d = Matrix4<double>;
using Matrix2cd = Eigen::Matrix2cd;
using Matrix3cd = Eigen::Matrix3cd;
using Matrix4cd = Eigen::Matrix4cd;

// Errors ---------------------------------------------------------------------

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
  using Error::Error;
};

/// The affine block of a map is (numerically) singular; the dynamics is not
/// invertible at this time.
class SingularMap : public Error {
public:
  using Error::Error;
};

class EmptySupport : public Error {
public:
  using Error::Error;
};

class IntegrationThroughSingularity : public Error {
public:
  using Error::Error;
};

// Tolerances -----------------------------------------------------------------

/// Below this Bloch-vector length the analytic u -> 0 limit of the closed
/// forms is used.
inline constexpr double kTinyBlochLength = 1e-9;

inline constexpr double kBlochNormSlack = 1e-12;

// BlochVector ----------------------------------------------------------------

/// Real 3-vector inside the closed unit ball.
template <typename Scalar> class BlochVectorT {
public:
  BlochVectorT() : v_(Vector3<Scalar>::Zero()) {}
  BlochVectorT(Scalar x, Scalar y, Scalar z) : BlochVectorT(Vector3<Scalar>(x, y, z)) {}
  explicit BlochVectorT(const Vector3<Scalar>& v) : v_(v) {
    using std::isfinite;
    if (!isfinite(static_cast<double>(v.norm())) ||
        static_cast<double>(v.norm()) > 1.0 + kBlochNormSlack)
      throw InvalidArgument("Bloch vector outside the unit ball (|u| = " +
                            std::to_string(static_cast<double>(v.norm())) + ")");
  }

  const Vector3<Scalar>& vector() const { return v_; }
  Scalar x() const { return v_.x(); }
  Scalar y() const { return v_.y(); }
  Scalar z() const { return v_.z(); }
  Scalar norm() const { return v_.norm(); }

  bool operator==(const BlochVectorT& other) const { return v_ == other.v_; }

private:
  Vector3<Scalar> v_;
};

using BlochVector = BlochVectorT<double>;

// CollisionParams ------------------------------------------------------------

/// Partial-swap angle eta and collision duration tau.
template <typename Scalar> struct CollisionParamsT {
  Scalar eta;
  Scalar tau;

  CollisionParamsT(Scalar eta_, Scalar tau_) : eta(eta_), tau(tau_) {
    using std::abs;
    const double half_pi = 1.5707963267948966;
    if (!(tau_ > Scalar(0)))
      throw InvalidArgument("collision duration tau must be positive");
    if (!(abs(static_cast<double>(eta_)) < half_pi))
      throw InvalidArgument("partial-swap angle eta must lie in (-pi/2, pi/2)");
  }

  Scalar c() const { using std::cos; return cos(eta); }
  Scalar s() const { using std::sin; return sin(eta); }
};

using CollisionParams = CollisionParamsT<double>;

/// Continuous-time rates of a single-u collision family.
///
/// gamma_total is the u-independent contraction rate, gamma_u the growth rate
/// of the components transverse to u, omega_u the precession frequency about
/// u and omega_per_collision the precession angle per collision.
template <typename Scalar> struct ContinuousParamsT {
  Scalar gamma_total;
  Scalar gamma_u;
  Scalar omega_u;
  Scalar omega_per_collision;

  /// Net decay rate of the transverse components, Gamma - gamma_u.
  Scalar transverse_decay() const { return gamma_total - gamma_u; }
};

using ContinuousParams = ContinuousParamsT<double>;

// AffineQubitMap -------------------------------------------------------------

/// Trace-preserving qubit map acting on (1, r) as
///
///     [ 1  0 ]
///     [ s  T ]
///
/// Row 0 is (1, 0, 0, 0) by construction.
template <typename Scalar> class AffineQubitMapT {
public:
  AffineQubitMapT() : m_(Matrix4<Scalar>::Identity()) {}

  AffineQubitMapT(const Vector3<Scalar>& translation, const Matrix3<Scalar>& linear) {
    m_.setZero();
    m_(0, 0) = Scalar(1);
    m_.template block<3, 1>(1, 0) = translation;
    m_.template block<3, 3>(1, 1) = linear;
  }

  /// Throws InvalidArgument unless row 0 is exactly (1, 0, 0, 0).
  static AffineQubitMapT from_matrix(const Matrix4<Scalar>& m) {
    if (m(0, 0) != Scalar(1) || m(0, 1) != Scalar(0) || m(0, 2) != Scalar(0) ||
        m(0, 3) != Scalar(0))
      throw InvalidArgument("affine qubit map must have first row (1, 0, 0, 0)");
    return AffineQubitMapT(m.template block<3, 1>(1, 0), m.template block<3, 3>(1, 1));
  }

  static AffineQubitMapT identity() { return AffineQubitMapT(); }

  const Matrix4<Scalar>& matrix() const { return m_; }
  Vector3<Scalar> translation() const { return m_.template block<3, 1>(1, 0); }
  Matrix3<Scalar> linear() const { return m_.template block<3, 3>(1, 1); }

  Vector3<Scalar> apply(const Vector3<Scalar>& r) const { return linear() * r + translation(); }

  Scalar determinant() const { return linear().determinant(); }

  AffineQubitMapT operator*(const AffineQubitMapT& rhs) const {
    return AffineQubitMapT(linear() * rhs.translation() + translation(),
                           linear() * rhs.linear());
  }

private:
  Matrix4<Scalar> m_;
};

using AffineQubitMap = AffineQubitMapT<double>;

// DensityMatrix --------------------------------------------------------------

/// Qubit state (I + r.sigma)/2.
class DensityMatrix {
public:
  DensityMatrix() : DensityMatrix(Vector3d::Zero()) {}

  explicit DensityMatrix(const Vector3d& bloch) : bloch_(bloch) {
    if (!bloch.allFinite() || bloch.norm() > 1.0 + kBlochNormSlack)
      throw InvalidArgument("density matrix Bloch vector outside the unit ball");
  }

  /// Validates Hermiticity, unit trace and positivity (eigenvalues >= -1e-12).
  static DensityMatrix from_matrix(const Matrix2cd& rho);

  static DensityMatrix maximally_mixed() { return DensityMatrix(); }

  const Vector3d& bloch() const { return bloch_; }
  Matrix2cd matrix() const;

private:
  Vector3d bloch_;
};

namespace pauli {

inline Matrix2cd x() {
  Matrix2cd m;
  m << 0, 1, 1, 0;
  return m;
}

inline Matrix2cd y() {
  using namespace std::complex_literals;
  Matrix2cd m;
  m << 0, -1i, 1i, 0;
  return m;
}

inline Matrix2cd z() {
  Matrix2cd m;
  m << 1, 0, 0, -1;
  return m;
}

/// sigma_1, sigma_2, sigma_3 for index 0, 1, 2.
inline Matrix2cd sigma(int j) {
  switch (j) {
  case 0: return x();
  case 1: return y();
  case 2: return z();
  default: throw InvalidArgument("Pauli index out of range");
  }
}

} // namespace pauli

inline Matrix2cd DensityMatrix::matrix() const {
  Matrix2cd rho = Matrix2cd::Identity();
  for (int j = 0; j < 3; ++j) rho += bloch_(j) * pauli::sigma(j);
  return rho / 2.0;
}

inline DensityMatrix DensityMatrix::from_matrix(const Matrix2cd& rho) {
  constexpr double tol = 1e-12;
  if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > tol)
    throw InvalidArgument("density matrix is not Hermitian");
  if (std::abs(rho.trace() - 1.0) > tol)
    throw InvalidArgument("density matrix trace differs from 1");
  Eigen::SelfAdjointEigenSolver<Matrix2cd> es(rho, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -tol)
    throw InvalidArgument("density matrix has a negative eigenvalue");
  Vector3d r;
  for (int j = 0; j < 3; ++j) r(j) = (rho * pauli::sigma(j)).trace().real();
  if (r.norm() > 1.0) r /= r.norm();
  return DensityMatrix(r);
}

/// Scale-aware threshold below which |det T| is treated as zero.
template <typename Scalar> Scalar singular_det_tolerance(const Matrix3<Scalar>& linear) {
  using std::max;
  using std::pow;
  const Scalar inf_norm = linear.cwiseAbs().rowwise().sum().maxCoeff();
  return Scalar(1e-12) * max(Scalar(1), pow(inf_norm, 3));
}

} // namespace collision
