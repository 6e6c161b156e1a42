#pragma once

#include <iosfwd>
#include <utility>
#include <vector>

#include "collision/core_maps.hpp"
#include "collision/types.hpp"

namespace collision {

/// Axis-aligned Gaussian restricted to the unit ball, discretized on a cubic
/// lattice through the origin.
struct GaussianSpec {
  Vector3d center = Vector3d::Zero();
  Vector3d widths = Vector3d::Constant(0.3);
  double grid_spacing = 0.05;

  void validate() const;
};

/// Quadrature nodes in the closed unit ball with nonnegative weights summing
/// to one.
class BallDistribution {
public:
  /// Throws InvalidArgument unless the weights are nonnegative and sum to one
  /// within 1e-12, and EmptySupport if there are no nodes.
  BallDistribution(std::vector<BlochVector> nodes, std::vector<double> weights);

  /// Same as the constructor but rescales the weights to sum to one first.
  static BallDistribution normalized(std::vector<BlochVector> nodes, std::vector<double> weights);

  /// alpha * first + (1 - alpha) * second, as one distribution over the
  /// concatenated node lists.
  static BallDistribution mix(const BallDistribution& first, double alpha,
                              const BallDistribution& second);

  const std::vector<BlochVector>& nodes() const { return nodes_; }
  const std::vector<double>& weights() const { return weights_; }
  std::size_t size() const { return nodes_.size(); }

  /// Weighted mean Bloch vector <u>.
  Vector3d mean() const;

  /// CSV with header u_x,u_y,u_z,weight.
  void write_csv(std::ostream& os) const;

private:
  std::vector<BlochVector> nodes_;
  std::vector<double> weights_;
};

/// Lattice nodes (integer multiples of grid_spacing) inside the closed unit
/// ball, weighted by the unnormalized Gaussian density and renormalized.
/// Nodes lighter than 1e-15 of the heaviest node are dropped.
BallDistribution build_gaussian(const GaussianSpec& spec);

BallDistribution point_mass(const BlochVector& u);

/// Convex mixture of continuous single-u maps over a fixed distribution, with
/// the per-node rates precomputed so that repeated evaluation in t is cheap.
/// Node contributions are reduced in the fixed node order.
class MixtureFamily {
public:
  MixtureFamily(BallDistribution dist, const CollisionParams& params);

  AffineQubitMap map(double t) const;
  Matrix4d derivative(double t) const;
  std::pair<AffineQubitMap, Matrix4d> map_and_derivative(double t) const;

  const BallDistribution& distribution() const { return dist_; }
  const CollisionParams& params() const { return params_; }
  /// The u-independent contraction rate Gamma.
  double gamma_total() const { return gamma_total_; }

private:
  struct Node {
    double weight;
    Vector3d direction;
    double transverse_decay;
    double omega;
  };

  template <bool WithMap, bool WithDerivative>
  void accumulate(double t, AffineQubitMap* map, Matrix4d* derivative) const;

  BallDistribution dist_;
  CollisionParams params_;
  double gamma_total_;
  double tiny_weight_ = 0.0;       // weight of nodes treated as u = 0
  Vector3d mean_ = Vector3d::Zero();
  Matrix3d outer_mean_ = Matrix3d::Zero(); // sum over non-tiny nodes of w v v^T
  std::vector<Node> nodes_;
};

AffineQubitMap mixture_map(const BallDistribution& dist, const CollisionParams& p, double t);
Matrix4d mixture_map_derivative(const BallDistribution& dist, const CollisionParams& p, double t);

} // namespace collision
