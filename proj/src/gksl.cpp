#include "collision/gksl.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace collision {

Generator generator(const Matrix4d& derivative, const AffineQubitMap& inverse) {
  return Generator(derivative * inverse.matrix());
}

// (j, k, l) runs over the cyclic permutations of (1, 2, 3); generator indices
// 1..3 address the L block and index 0 the translation rate.
GKSLCoefficients gksl_coefficients(const Generator& g) {
  using namespace std::complex_literals;
  const Matrix4d& m = g.matrix();
  GKSLCoefficients gc;
  for (int j = 1; j <= 3; ++j) {
    const int k = j % 3 + 1;
    const int l = k % 3 + 1;
    gc.h(j - 1) = 0.25 * (m(l, k) - m(k, l));
    gc.c(j - 1, j - 1) = 0.25 * (m(j, j) - m(k, k) - m(l, l));
    // epsilon_{jkl} = +1 for the cyclic order
    const std::complex<double> cjk = 0.25 * (m(j, k) + m(k, j) - 1i * m(l, 0));
    gc.c(j - 1, k - 1) = cjk;
    gc.c(k - 1, j - 1) = std::conj(cjk);
  }
  return gc;
}

CanonicalDecomposition canonical_rates(const GKSLCoefficients& gc) {
  // Hermitian part only; c is Hermitian by construction.
  const Matrix3cd herm = 0.5 * (gc.c + gc.c.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix3cd> es(herm);
  if (es.info() != Eigen::Success) throw Error("eigen-decomposition of c failed");

  // Eigen returns ascending order.
  CanonicalDecomposition out;
  out.h = gc.h;
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (int a = 0; a < 3; ++a) {
    const int src = 2 - a;
    out.lambda[a] = es.eigenvalues()(src);
    out.eigenvectors.col(a) = es.eigenvectors().col(src);
    Matrix2cd z = Matrix2cd::Zero();
    for (int j = 0; j < 3; ++j) z += out.eigenvectors(j, a) * pauli::sigma(j);
    out.zeta[a] = z * inv_sqrt2;
  }
  return out;
}

namespace {

Vector4d rk4_step(const GeneratorProvider& rates, double t, double h, const Vector4d& y,
                  const Matrix4d& l_start, Matrix4d* l_end) {
  const Matrix4d l_mid = rates(t + 0.5 * h).matrix();
  *l_end = rates(t + h).matrix();
  const Vector4d k1 = l_start * y;
  const Vector4d k2 = l_mid * (y + 0.5 * h * k1);
  const Vector4d k3 = l_mid * (y + 0.5 * h * k2);
  const Vector4d k4 = *l_end * (y + h * k3);
  return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

} // namespace

std::vector<DensityMatrix> evolve_master_equation(const GeneratorProvider& rates,
                                                  const DensityMatrix& rho0,
                                                  const std::vector<double>& t_grid,
                                                  const EvolveOptions& options) {
  if (t_grid.empty() || t_grid.front() != 0.0)
    throw InvalidArgument("time grid must start at 0");
  for (std::size_t i = 1; i < t_grid.size(); ++i)
    if (!(t_grid[i] > t_grid[i - 1])) throw InvalidArgument("time grid must be increasing");
  if (!(options.step > 0.0)) throw InvalidArgument("integration step must be positive");

  for (double ts : options.singular_times) {
    if (ts >= t_grid.front() && ts <= t_grid.back())
      throw IntegrationThroughSingularity("map family is not invertible at t = " +
                                          std::to_string(ts));
  }

  std::vector<DensityMatrix> out;
  out.reserve(t_grid.size());
  out.push_back(rho0);

  Vector4d y;
  y << 1.0, rho0.bloch();
  try {
    double t = 0.0;
    Matrix4d l_now = rates(t).matrix();
    for (std::size_t i = 1; i < t_grid.size(); ++i) {
      const double target = t_grid[i];
      while (t < target) {
        double h = options.step;
        // Land exactly on the grid time; absorb a tiny remainder into this step.
        if (t + h >= target - 1e-12 * std::max(1.0, target)) h = target - t;
        Matrix4d l_next;
        y = rk4_step(rates, t, h, y, l_now, &l_next);
        t = (h == target - t) ? target : t + h;
        l_now = l_next;
      }
      out.emplace_back(y.tail<3>());
    }
  } catch (const SingularMap& e) {
    throw IntegrationThroughSingularity(std::string("generator undefined: ") + e.what());
  }
  return out;
}

} // namespace collision
