#include "doctest.h"

#include <cmath>
#include <random>
#include <sstream>

#include "collision/mixture.hpp"
#include "oracles.hpp"

using namespace collision;

namespace {

double max_abs(const Matrix4d& m) { return m.cwiseAbs().maxCoeff(); }

double weight_sum(const BallDistribution& d) {
  long double s = 0.0L;
  for (double w : d.weights()) s += w;
  return static_cast<double>(s);
}

GaussianSpec isotropic(double delta, Vector3d center = Vector3d::Zero()) {
  GaussianSpec g;
  g.center = center;
  g.widths = Vector3d::Constant(delta);
  return g;
}

} // namespace

TEST_CASE("Gaussian on the lattice") {
  SUBCASE("narrow Gaussian concentrates on the origin") {
    const auto d = build_gaussian(isotropic(0.01));
    double origin = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i)
      if (d.nodes()[i].norm() == 0.0) origin += d.weights()[i];
    CHECK(origin > 0.999);
  }
  SUBCASE("weights sum to one") {
    for (double delta : {0.01, 0.1, 0.3, 2.0}) CHECK(std::abs(weight_sum(build_gaussian(isotropic(delta))) - 1.0) < 1e-12);
  }
  SUBCASE("offset center mean") {
    const auto d = build_gaussian(isotropic(0.3, Vector3d(0.3, 0, 0)));
    Vector3d mean = Vector3d::Zero();
    for (std::size_t i = 0; i < d.size(); ++i) mean += d.weights()[i] * d.nodes()[i].vector();
    CHECK(mean.x() > 0.25);
    CHECK(mean.x() < 0.30);
    CHECK(std::abs(mean.y()) < 1e-10);
    CHECK(std::abs(mean.z()) < 1e-10);
    CHECK((d.mean() - mean).norm() < 1e-15);
  }
  SUBCASE("nodes lie on the origin-anchored lattice inside the ball") {
    const auto d = build_gaussian(isotropic(0.5));
    CHECK(d.size() > 30000);
    for (const auto& u : d.nodes()) {
      CHECK(u.norm() <= 1.0);
      for (int k = 0; k < 3; ++k) {
        const double steps = u.vector()(k) / 0.05;
        CHECK(std::abs(steps - std::round(steps)) < 1e-9);
      }
    }
  }
  SUBCASE("coarse spacing leaves only the origin") {
    GaussianSpec g = isotropic(0.3);
    g.grid_spacing = 2.5;
    const auto d = build_gaussian(g);
    CHECK(d.size() == 1);
    CHECK(d.nodes()[0].norm() == 0.0);
  }
  SUBCASE("invalid specs") {
    GaussianSpec g = isotropic(0.3);
    g.widths(1) = 0.0;
    CHECK_THROWS_AS(build_gaussian(g), InvalidArgument);
    g = isotropic(0.3, Vector3d(1.0, 0, 0));
    CHECK_THROWS_AS(build_gaussian(g), InvalidArgument);
    g = isotropic(0.3);
    g.grid_spacing = -1.0;
    CHECK_THROWS_AS(build_gaussian(g), InvalidArgument);
  }
}

TEST_CASE("distribution validation") {
  CHECK_THROWS_AS(BallDistribution({}, {}), EmptySupport);
  CHECK_THROWS_AS(BallDistribution({BlochVector()}, {0.5}), InvalidArgument);
  CHECK_THROWS_AS(BallDistribution({BlochVector(), BlochVector(0, 0, 1)}, {1.5, -0.5}), InvalidArgument);
  CHECK_THROWS_AS(BallDistribution({BlochVector()}, {1.0, 0.0}), InvalidArgument);
  CHECK_THROWS_AS(BallDistribution::normalized({BlochVector()}, {0.0}), EmptySupport);

  std::ostringstream os;
  BallDistribution({BlochVector(0.5, 0, 0), BlochVector()}, {0.25, 0.75}).write_csv(os);
  CHECK(os.str() == "u_x,u_y,u_z,weight\n0.5,0,0,0.25\n0,0,0,0.75\n");
}

TEST_CASE("mixture map") {
  const CollisionParams p(0.3, 1.0);

  SUBCASE("t = 0 is the identity") {
    std::mt19937_64 rng(21);
    CHECK(max_abs(mixture_map(oracle::random_distribution(rng, 40), p, 0.0).matrix() - Matrix4d::Identity()) < 1e-15);
  }
  SUBCASE("point mass equals the single-u map") {
    for (const BlochVector& u : {BlochVector(), BlochVector(0.2, -0.7, 0.1), BlochVector(0, 0, 1)})
      for (double t : {0.5, 10.0, 123.0})
        CHECK(max_abs(mixture_map(point_mass(u), p, t).matrix() - continuous_map(u, p, t).matrix()) < 1e-15);
  }
  SUBCASE("node sum and mean-value formulas on the wide isotropic Gaussian") {
    const auto dist = build_gaussian(isotropic(0.3));
    const CollisionParams q(0.01, 1.0);
    const MixtureFamily family(dist, q);
    for (double t : {0.0, 100.0, 5000.0, 30000.0}) {
      const Matrix4d grouped = family.map(t).matrix();
      CHECK(max_abs(grouped - oracle::mixture_by_node_sum(dist, q, t)) < 1e-12);
      CHECK(max_abs(grouped - oracle::mixture_by_mean_values(dist, q, t)) < 1e-12);
    }
  }
  SUBCASE("random distributions against the node sum") {
    std::mt19937_64 rng(22);
    for (int i = 0; i < 10; ++i) {
      const auto dist = oracle::random_distribution(rng, 25);
      for (double t : {0.3, 4.0, 17.0})
        CHECK(max_abs(mixture_map(dist, p, t).matrix() - oracle::mixture_by_node_sum(dist, p, t)) < 1e-13);
    }
  }
  SUBCASE("linearity") {
    std::mt19937_64 rng(23);
    const auto a = oracle::random_distribution(rng, 10);
    const auto b = oracle::random_distribution(rng, 7);
    const double alpha = 0.35;
    const auto mixed = BallDistribution::mix(a, alpha, b);
    for (double t : {1.0, 9.0}) {
      const Matrix4d expected =
          alpha * mixture_map(a, p, t).matrix() + (1 - alpha) * mixture_map(b, p, t).matrix();
      CHECK(max_abs(mixture_map(mixed, p, t).matrix() - expected) < 1e-15);
    }
  }
  SUBCASE("translation entries") {
    std::mt19937_64 rng(24);
    const auto dist = oracle::random_distribution(rng, 30);
    const double gamma = continuous_params(BlochVector(), p).gamma_total;
    for (double t : {0.1, 2.0, 20.0}) {
      const Vector3d expected = (1 - std::exp(-gamma * t)) * dist.mean();
      CHECK((mixture_map(dist, p, t).translation() - expected).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
  SUBCASE("symmetric pair along z loses rank at cos(omega t) = 0") {
    const double uz = 0.8;
    const auto pair = BallDistribution::mix(point_mass(BlochVector(0, 0, uz)), 0.5,
                                            point_mass(BlochVector(0, 0, -uz)));
    const auto cp = continuous_params(BlochVector(0, 0, uz), p);
    for (int k : {1, 3}) {
      const double t = k * M_PI / (2 * cp.omega_u);
      const Matrix3d linear = mixture_map(pair, p, t).linear();
      CHECK(std::abs(linear.determinant()) < 1e-15);
      CHECK(linear.block<2, 2>(0, 0).cwiseAbs().maxCoeff() < 1e-15);
    }
  }
}

TEST_CASE("mixture derivative") {
  const CollisionParams p(0.3, 1.0);
  const double gamma = continuous_params(BlochVector(), p).gamma_total;

  SUBCASE("translation rate at t = 0") {
    std::mt19937_64 rng(25);
    const auto dist = oracle::random_distribution(rng, 20);
    const Matrix4d d = mixture_map_derivative(dist, p, 0.0);
    CHECK((d.block<3, 1>(1, 0) - gamma * dist.mean()).norm() < 1e-15);
  }
  SUBCASE("finite differences") {
    std::mt19937_64 rng(26);
    const auto dist = oracle::random_distribution(rng, 20);
    const MixtureFamily family(dist, p);
    for (double t : {0.0, 0.7, 5.0, 31.0}) {
      const Matrix4d fd =
          oracle::central_difference([&](double s) { return family.map(s).matrix(); }, t, 1e-6);
      CHECK(max_abs(family.derivative(t) - fd) < 1e-6);
      const auto [map, derivative] = family.map_and_derivative(t);
      CHECK(map.matrix() == family.map(t).matrix());
      CHECK(derivative == family.derivative(t));
    }
  }
  SUBCASE("point mass at the origin") {
    const Matrix4d d = mixture_map_derivative(point_mass(BlochVector()), p, 2.0);
    Matrix4d expected = Matrix4d::Zero();
    expected.block<3, 3>(1, 1) = -gamma * std::exp(-gamma * 2.0) * Matrix3d::Identity();
    CHECK(max_abs(d - expected) < 1e-16);
  }
  SUBCASE("node sum of derivatives") {
    std::mt19937_64 rng(27);
    const auto dist = oracle::random_distribution(rng, 15);
    Matrix4d sum = Matrix4d::Zero();
    for (std::size_t i = 0; i < dist.size(); ++i)
      sum += dist.weights()[i] * continuous_map_derivative(dist.nodes()[i], p, 3.5);
    CHECK(max_abs(mixture_map_derivative(dist, p, 3.5) - sum) < 1e-15);
  }
  CHECK_THROWS_AS(mixture_map(point_mass(BlochVector()), p, -0.1), InvalidArgument);
}
