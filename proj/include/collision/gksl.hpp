#pragma once

#include <array>
#include <functional>
#include <vector>

#include "collision/types.hpp"

namespace collision {

/// Time-local generator in the affine representation,
///
///     [ 0  0 ]
///     [ l  L ]
class Generator {
public:
  Generator() : m_(Matrix4d::Zero()) {}

  /// Row 0 of m is overwritten with zeros.
  explicit Generator(const Matrix4d& m) : m_(m) { m_.row(0).setZero(); }

  const Matrix4d& matrix() const { return m_; }
  Vector3d translation_rate() const { return m_.block<3, 1>(1, 0); }
  Matrix3d block() const { return m_.block<3, 3>(1, 1); }

private:
  Matrix4d m_;
};

/// Hamiltonian coefficients h_j and the Hermitian dissipator matrix c_jk of
///
///   d rho/dt = -i [sum_j h_j sigma_j, rho]
///              + sum_jk c_jk (sigma_j rho sigma_k - {sigma_k sigma_j, rho}/2).
struct GKSLCoefficients {
  Vector3d h = Vector3d::Zero();
  Matrix3cd c = Matrix3cd::Zero();
};

/// Eigen-decomposition of the dissipator matrix. lambda is sorted descending;
/// zeta[a] = sum_j V(j, a) sigma_j / sqrt(2) with V the unitary eigenvector
/// matrix, so that Tr(zeta_a^dagger zeta_b) = delta_ab. The zeta are Hermitian
/// whenever c is real.
struct CanonicalDecomposition {
  std::array<double, 3> lambda{};
  std::array<Matrix2cd, 3> zeta{};
  Matrix3cd eigenvectors = Matrix3cd::Identity();
  Vector3d h = Vector3d::Zero();
};

/// L_t = (dE_t/dt) E_t^{-1}; `inverse` must be the inverse of the map whose
/// derivative is `derivative`.
Generator generator(const Matrix4d& derivative, const AffineQubitMap& inverse);

GKSLCoefficients gksl_coefficients(const Generator& g);

CanonicalDecomposition canonical_rates(const GKSLCoefficients& gc);

/// Maps time to the generator at that time; may throw SingularMap.
using GeneratorProvider = std::function<Generator(double)>;

struct EvolveOptions {
  /// Fixed fourth-order Runge-Kutta step; the final step into each grid time
  /// is shortened to land on it exactly.
  double step = 0.01;
  /// Known non-invertible times of the underlying map family; an interval of
  /// the grid containing one is refused.
  std::vector<double> singular_times;
};

/// Integrates d(1, r)/dt = L_t (1, r) from rho0 and returns the state at every
/// grid time. The grid must start at 0 and be increasing. Throws
/// IntegrationThroughSingularity if the provider reports a singular map or a
/// known singular time lies inside the integration range.
std::vector<DensityMatrix> evolve_master_equation(const GeneratorProvider& rates,
                                                  const DensityMatrix& rho0,
                                                  const std::vector<double>& t_grid,
                                                  const EvolveOptions& options = {});

} // namespace collision
