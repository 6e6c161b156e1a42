#include "collision/mixture.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

namespace collision {

namespace {

// Neumaier-compensated sum; the weight lists reach ~3e4 entries.
double compensated_sum(const std::vector<double>& values) {
  double sum = 0.0, comp = 0.0;
  for (double v : values) {
    const double t = sum + v;
    comp += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
    sum = t;
  }
  return sum + comp;
}

} // namespace

void GaussianSpec::validate() const {
  if (!center.allFinite() || !(center.norm() < 1.0))
    throw InvalidArgument("Gaussian center must lie strictly inside the unit ball");
  if (!widths.allFinite() || !(widths.minCoeff() > 0.0))
    throw InvalidArgument("Gaussian widths must be positive");
  if (!std::isfinite(grid_spacing) || !(grid_spacing > 0.0))
    throw InvalidArgument("grid spacing must be positive");
}

BallDistribution::BallDistribution(std::vector<BlochVector> nodes, std::vector<double> weights)
    : nodes_(std::move(nodes)), weights_(std::move(weights)) {
  if (nodes_.empty()) throw EmptySupport("distribution has no nodes");
  if (nodes_.size() != weights_.size())
    throw InvalidArgument("node and weight lists differ in length");
  for (double w : weights_)
    if (!std::isfinite(w) || w < 0.0) throw InvalidArgument("weights must be nonnegative");
  const double total = compensated_sum(weights_);
  if (std::abs(total - 1.0) > 1e-12)
    throw InvalidArgument("weights sum to " + std::to_string(total) + ", not 1");
}

BallDistribution BallDistribution::normalized(std::vector<BlochVector> nodes,
                                              std::vector<double> weights) {
  if (nodes.empty()) throw EmptySupport("distribution has no nodes");
  const double total = compensated_sum(weights);
  if (!std::isfinite(total) || !(total > 0.0))
    throw EmptySupport("distribution has no positive weight");
  for (double& w : weights) w /= total;
  return BallDistribution(std::move(nodes), std::move(weights));
}

BallDistribution BallDistribution::mix(const BallDistribution& first, double alpha,
                                       const BallDistribution& second) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidArgument("mixing weight must lie in [0, 1]");
  std::vector<BlochVector> nodes = first.nodes_;
  nodes.insert(nodes.end(), second.nodes_.begin(), second.nodes_.end());
  std::vector<double> weights;
  weights.reserve(nodes.size());
  for (double w : first.weights_) weights.push_back(alpha * w);
  for (double w : second.weights_) weights.push_back((1.0 - alpha) * w);
  return BallDistribution(std::move(nodes), std::move(weights));
}

Vector3d BallDistribution::mean() const {
  Vector3d m = Vector3d::Zero();
  for (std::size_t i = 0; i < nodes_.size(); ++i) m += weights_[i] * nodes_[i].vector();
  return m;
}

void BallDistribution::write_csv(std::ostream& os) const {
  os << "u_x,u_y,u_z,weight\n";
  char buf[128];
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const auto& u = nodes_[i];
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", u.x(), u.y(), u.z(),
                  weights_[i]);
    os << buf;
  }
}

BallDistribution build_gaussian(const GaussianSpec& spec) {
  spec.validate();
  const double h = spec.grid_spacing;
  const long reach = static_cast<long>(std::floor(1.0 / h + 1e-9));

  std::vector<Vector3d> points;
  std::vector<double> log_density;
  for (long i = -reach; i <= reach; ++i) {
    for (long j = -reach; j <= reach; ++j) {
      for (long k = -reach; k <= reach; ++k) {
        const Vector3d u(h * i, h * j, h * k);
        if (u.squaredNorm() > 1.0 + 1e-12) continue;
        const Vector3d z = (u - spec.center).cwiseQuotient(spec.widths);
        points.push_back(u.squaredNorm() > 1.0 ? Vector3d(u.normalized()) : u);
        log_density.push_back(-0.5 * z.squaredNorm());
      }
    }
  }
  if (points.empty()) throw EmptySupport("no lattice node inside the unit ball");

  const double peak = *std::max_element(log_density.begin(), log_density.end());
  std::vector<BlochVector> nodes;
  std::vector<double> weights;
  for (std::size_t n = 0; n < points.size(); ++n) {
    const double w = std::exp(log_density[n] - peak);
    if (w < 1e-15) continue;
    nodes.emplace_back(points[n]);
    weights.push_back(w);
  }
  return BallDistribution::normalized(std::move(nodes), std::move(weights));
}

BallDistribution point_mass(const BlochVector& u) { return BallDistribution({u}, {1.0}); }

// MixtureFamily ---------------------------------------------------------------
//
// Each node contributes w [a I + b J(v) + (d - a) v v^T] to the affine block,
// where d = e^{-Gamma t} is shared by all nodes. Since J is linear in v the
// sum collapses to
//
//   (sum w a) I + J(sum w b v) + d (sum w v v^T) - sum w a v v^T,
//
// so only the scalars a, b need evaluating per node.

MixtureFamily::MixtureFamily(BallDistribution dist, const CollisionParams& params)
    : dist_(std::move(dist)), params_(params),
      gamma_total_(continuous_params(BlochVector(), params).gamma_total) {
  const auto& nodes = dist_.nodes();
  const auto& weights = dist_.weights();
  mean_ = dist_.mean();
  nodes_.reserve(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const double len = nodes[i].norm();
    if (len < kTinyBlochLength) {
      tiny_weight_ += weights[i];
      continue;
    }
    const auto cp = continuous_params(nodes[i], params_);
    Node node{weights[i], nodes[i].vector() / len, cp.transverse_decay(), cp.omega_u};
    outer_mean_ += node.weight * node.direction * node.direction.transpose();
    nodes_.push_back(node);
  }
}

template <bool WithMap, bool WithDerivative>
void MixtureFamily::accumulate(double t, AffineQubitMap* map, Matrix4d* derivative) const {
  detail::require_nonnegative_time(t);
  const double d = std::exp(-gamma_total_ * t);

  double sum_a = 0.0, sum_da = 0.0;
  Vector3d sum_bv = Vector3d::Zero(), sum_dbv = Vector3d::Zero();
  Matrix3d sum_avv = Matrix3d::Zero(), sum_davv = Matrix3d::Zero();

  for (const Node& node : nodes_) {
    const double envelope = node.weight * std::exp(-node.transverse_decay * t);
    const double phase = node.omega * t;
    const double wa = envelope * std::cos(phase);
    const double wb = envelope * std::sin(phase);
    const Matrix3d vv = node.direction * node.direction.transpose();
    if constexpr (WithMap) {
      sum_a += wa;
      sum_bv += wb * node.direction;
      sum_avv += wa * vv;
    }
    if constexpr (WithDerivative) {
      const double wda = -node.transverse_decay * wa - node.omega * wb;
      const double wdb = -node.transverse_decay * wb + node.omega * wa;
      sum_da += wda;
      sum_dbv += wdb * node.direction;
      sum_davv += wda * vv;
    }
  }

  if constexpr (WithMap) {
    const Matrix3d linear = (sum_a + tiny_weight_ * d) * Matrix3d::Identity() +
                            cross_matrix<double>(sum_bv) + d * outer_mean_ - sum_avv;
    *map = AffineQubitMap((1.0 - d) * mean_, linear);
  }
  if constexpr (WithDerivative) {
    const double dd = -gamma_total_ * d;
    derivative->setZero();
    derivative->block<3, 1>(1, 0) = -dd * mean_;
    derivative->block<3, 3>(1, 1) = (sum_da + tiny_weight_ * dd) * Matrix3d::Identity() +
                                    cross_matrix<double>(sum_dbv) + dd * outer_mean_ - sum_davv;
  }
}

AffineQubitMap MixtureFamily::map(double t) const {
  AffineQubitMap m;
  if (t == 0.0) return m; // the grouped sums only reach the identity to rounding
  accumulate<true, false>(t, &m, nullptr);
  return m;
}

Matrix4d MixtureFamily::derivative(double t) const {
  Matrix4d dm;
  accumulate<false, true>(t, nullptr, &dm);
  return dm;
}

std::pair<AffineQubitMap, Matrix4d> MixtureFamily::map_and_derivative(double t) const {
  std::pair<AffineQubitMap, Matrix4d> out;
  accumulate<true, true>(t, &out.first, &out.second);
  if (t == 0.0) out.first = AffineQubitMap::identity();
  return out;
}

AffineQubitMap mixture_map(const BallDistribution& dist, const CollisionParams& p, double t) {
  return MixtureFamily(dist, p).map(t);
}

Matrix4d mixture_map_derivative(const BallDistribution& dist, const CollisionParams& p,
                                double t) {
  return MixtureFamily(dist, p).derivative(t);
}

} // namespace collision
