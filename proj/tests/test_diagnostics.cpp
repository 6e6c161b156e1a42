#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "collision/core_maps.hpp"
#include "collision/diagnostics.hpp"
#include "collision/gksl.hpp"
#include "collision/mixture.hpp"
#include "oracles.hpp"

using namespace collision;

namespace {

std::vector<double> linspace(double hi, int n) {
  std::vector<double> out;
  for (int k = 0; k < n; ++k) out.push_back(hi * k / (n - 1));
  return out;
}

Matrix2cd apply_to_matrix(const AffineQubitMap& m, const Matrix2cd& x) {
  // linear extension through the Pauli expansion x = (x0 I + x.sigma)/2
  const std::complex<double> x0 = x.trace();
  Eigen::Vector3cd v;
  for (int k = 0; k < 3; ++k) v(k) = (x * pauli::sigma(k)).trace();
  const Eigen::Vector3cd image = m.linear().cast<std::complex<double>>() * v +
                                 x0 * m.translation().cast<std::complex<double>>();
  Matrix2cd out = x0 * Matrix2cd::Identity();
  for (int k = 0; k < 3; ++k) out += image(k) * pauli::sigma(k);
  return out / 2.0;
}

MapWithDerivativeFunction with_derivative(const MixtureFamily& f) {
  return [&f](double t) { return f.map_and_derivative(t); };
}

} // namespace

TEST_CASE("trace distance") {
  const DensityMatrix a(Vector3d(0.2, -0.1, 0.5));
  CHECK(trace_distance(a, a) == 0.0);
  CHECK(trace_distance(DensityMatrix(Vector3d(0, 0, 1)), DensityMatrix()) == 0.5);

  std::mt19937_64 rng(41);
  for (int i = 0; i < 100; ++i) {
    const auto x = DensityMatrix::from_matrix(oracle::random_density_matrix(rng));
    const auto y = DensityMatrix::from_matrix(oracle::random_density_matrix(rng));
    const auto z = DensityMatrix::from_matrix(oracle::random_density_matrix(rng));
    CHECK(std::abs(trace_distance(x, y) - oracle::trace_distance_by_eigenvalues(x.matrix(), y.matrix())) < 1e-12);
    CHECK(trace_distance(x, y) == trace_distance(y, x));
    CHECK(trace_distance(x, z) <= trace_distance(x, y) + trace_distance(y, z) + 1e-12);
  }
}

TEST_CASE("trace distance series") {
  const auto grid = linspace(200.0, 101);
  const DensityMatrix up(Vector3d(0, 0, 1)), mixed;

  SUBCASE("point mass is contractive") {
    std::mt19937_64 rng(42);
    for (int i = 0; i < 10; ++i) {
      const BlochVector u(oracle::random_in_ball(rng));
      const CollisionParams p(0.3, 1.0);
      const auto s = trace_distance_series([&](double t) { return continuous_map(u, p, t); },
                                           DensityMatrix(Vector3d(1, 0, 0)), mixed, grid);
      CHECK(s.max_increase <= kBackflowTolerance);
      CHECK_FALSE(s.witness_time.has_value());
      for (double v : s.values) CHECK(v <= 1.0 + 1e-12);
    }
  }
  SUBCASE("symmetric pair along z shows back-flow") {
    const auto pair = BallDistribution::mix(point_mass(BlochVector(0, 0, 0.8)), 0.5,
                                            point_mass(BlochVector(0, 0, -0.8)));
    const MixtureFamily f(pair, CollisionParams(0.3, 1.0));
    const auto s = trace_distance_series([&](double t) { return f.map(t); },
                                         DensityMatrix(Vector3d(1, 0, 0)), mixed, grid);
    REQUIRE(s.witness_time.has_value());
    CHECK(s.max_increase > kBackflowTolerance);
    const auto k = std::find(grid.begin(), grid.end(), *s.witness_time) - grid.begin();
    REQUIRE(k > 0);
    CHECK(s.values[k] - s.values[k - 1] > kBackflowTolerance);
    for (long j = 1; j < k; ++j) CHECK(s.values[j] - s.values[j - 1] <= kBackflowTolerance);
  }
  SUBCASE("first value for the default pair") {
    const auto s = trace_distance_series([](double) { return AffineQubitMap(); }, up, mixed, grid);
    CHECK(s.values[0] == 0.5);
    CHECK(s.max_increase == 0.0);
  }
}

TEST_CASE("Choi matrix") {
  SUBCASE("identity") {
    const auto s = choi_spectrum(AffineQubitMap::identity());
    CHECK(s.eigenvalues[3] == doctest::Approx(2.0));
    for (int k = 0; k < 3; ++k) CHECK(std::abs(s.eigenvalues[k]) < 1e-14);
    CHECK(s.trace == 2.0);
    CHECK(cp_check(s));
  }
  SUBCASE("total depolarization") {
    const auto s = choi_spectrum(AffineQubitMap(Vector3d::Zero(), Matrix3d::Zero()));
    for (double e : s.eigenvalues) CHECK(e == doctest::Approx(0.5));
  }
  SUBCASE("transpose is not CP") {
    const auto s = choi_spectrum(AffineQubitMap(Vector3d::Zero(), Vector3d(1, -1, 1).asDiagonal()));
    CHECK(s.eigenvalues[0] == doctest::Approx(-1.0));
    CHECK_FALSE(cp_check(s));
  }
  SUBCASE("matches assembly from matrix units") {
    std::mt19937_64 rng(43);
    for (int i = 0; i < 30; ++i) {
      const auto dist = oracle::random_distribution(rng, 8);
      const auto m = mixture_map(dist, CollisionParams(0.4, 1.0), 3.0 * i);
      const Matrix4cd oracle_b =
          oracle::choi_by_matrix_units([&](const Matrix2cd& x) { return apply_to_matrix(m, x); });
      CHECK((choi_matrix(m) - oracle_b).cwiseAbs().maxCoeff() < 1e-14);
      const auto s = choi_spectrum(m);
      CHECK(std::abs(s.trace - (s.eigenvalues[0] + s.eigenvalues[1] + s.eigenvalues[2] + s.eigenvalues[3])) < 1e-10);
      CHECK(std::abs(s.trace - 2.0) < 1e-8);
      CHECK(cp_check(s));
    }
  }
}

TEST_CASE("determinant series") {
  std::mt19937_64 rng(44);
  const MixtureFamily f(oracle::random_distribution(rng, 5), CollisionParams(0.2, 1.0));
  const auto s = determinant_series([&](double t) { return f.map(t); }, linspace(50.0, 11));
  CHECK(s.values[0] == 1.0);
  CHECK_FALSE(s.singular[0]);
  for (std::size_t k = 0; k < s.values.size(); ++k)
    CHECK(s.values[k] == doctest::Approx(f.map(s.times[k]).determinant()).epsilon(1e-14));
}

TEST_CASE("determinant rate is Jacobi's formula") {
  std::mt19937_64 rng(45);
  const MixtureFamily f(oracle::random_distribution(rng, 10), CollisionParams(0.3, 1.0));
  for (double t : {0.5, 4.0, 22.0}) {
    const auto [m, d] = f.map_and_derivative(t);
    const double h = 1e-5;
    const double fd = (f.map(t + h).determinant() - f.map(t - h).determinant()) / (2 * h);
    CHECK(determinant_rate(m.linear(), d.block<3, 3>(1, 1)) == doctest::Approx(fd).epsilon(1e-6));
  }
}

TEST_CASE("singular times") {
  const double uz = 0.8;
  const CollisionParams p(0.1, 1.0);
  const double omega = continuous_params(BlochVector(0, 0, uz), p).omega_u;
  const double period = M_PI / omega; // spacing of the zeros of cos(omega t)

  SUBCASE("symmetric pair: double zeros at cos(omega t) = 0") {
    const auto pair = BallDistribution::mix(point_mass(BlochVector(0, 0, uz)), 0.5,
                                            point_mass(BlochVector(0, 0, -uz)));
    const MixtureFamily f(pair, p);
    const auto grid = linspace(3.7 * period, 301);
    const auto zeros = find_singular_times(with_derivative(f), grid);
    REQUIRE(zeros.size() == 4);
    for (std::size_t k = 0; k < zeros.size(); ++k)
      CHECK(zeros[k] == doctest::Approx((k + 0.5) * period).epsilon(1e-7));
  }
  SUBCASE("asymmetric pair: simple zeros found by bisection") {
    const auto pair = BallDistribution::mix(point_mass(BlochVector(0, 0, uz)), 0.5,
                                            point_mass(BlochVector(0, 0, -0.5)));
    const MixtureFamily f(pair, p);
    const auto grid = linspace(3.0 * period, 401);
    const auto zeros = find_singular_times(with_derivative(f), grid);
    for (double t : zeros) {
      const Matrix3d linear = f.map(t).linear();
      CHECK(std::abs(linear.determinant()) < singular_det_tolerance(linear));
    }
    // independent scan for sign changes on a fine grid
    std::size_t changes = 0;
    double prev = 1.0;
    for (int k = 1; k <= 200000; ++k) {
      const double d = f.map(3.0 * period * k / 200000).determinant();
      if ((d < 0) != (prev < 0)) ++changes;
      prev = d;
    }
    CHECK(zeros.size() >= changes);
  }
  SUBCASE("invertible family has none") {
    const MixtureFamily f(point_mass(BlochVector(0.3, 0.3, 0.3)), p);
    CHECK(find_singular_times(with_derivative(f), linspace(200.0, 101)).empty());
  }
}

TEST_CASE("divisibility verdicts") {
  const auto series = [](std::array<double, 3> lambda, int n) {
    std::vector<RateSample> out;
    for (int k = 0; k < n; ++k) out.push_back({double(k), lambda, true});
    return out;
  };
  CHECK(divisibility_report(series({1, 1, 1}, 20), {}, 0.0).verdict == Divisibility::CpDivisible);
  CHECK(divisibility_report(series({1, 1, -0.5}, 20), {}, 0.0).verdict == Divisibility::PDivisibleOnly);
  CHECK(divisibility_report(series({1, -2, -0.5}, 20), {}, 0.0).verdict == Divisibility::Neither);
  CHECK(divisibility_report(series({1, 1, 1}, 9), {}, 0.0).verdict == Divisibility::Undetermined);
  CHECK(divisibility_report(series({1, 1, -1e-8}, 20), {}, 0.0).verdict == Divisibility::CpDivisible);

  SUBCASE("samples near singular times and invalid samples are ignored") {
    auto s = series({1, 1, 1}, 30);
    s[10].lambda = {1, 1, -50};
    s[20].valid = false;
    s[20].lambda = {-9, -9, -9};
    const auto r = divisibility_report(s, {10.5}, 1.0);
    CHECK(r.verdict == Divisibility::CpDivisible);
    CHECK(r.valid_samples == 27);
    CHECK(r.min_rate == 1.0);
    CHECK(r.min_pairwise_sum == 2.0);
  }
  CHECK(to_string(Divisibility::PDivisibleOnly) == "P_DIVISIBLE_ONLY");
}

TEST_CASE("convex mixtures are CP at every time") {
  std::mt19937_64 rng(46);
  std::uniform_real_distribution<double> eta(-1.2, 1.2);
  for (int i = 0; i < 10; ++i) {
    const MixtureFamily f(oracle::random_distribution(rng, 20), CollisionParams(eta(rng), 1.0));
    for (double t : linspace(5.0 / f.gamma_total(), 51)) CHECK(cp_check(choi_spectrum(f.map(t))));
  }
}
