#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "collision/types.hpp"

namespace collision {

/// Back-flow threshold: an increase of the trace distance between consecutive
/// samples larger than this witnesses non-Markovian evolution.
inline constexpr double kBackflowTolerance = 1e-8;
/// Smallest admissible Choi eigenvalue of a CP map.
inline constexpr double kCpTolerance = 1e-9;
/// Rate sign tests use kRateTolerance * max(1, max |lambda|).
inline constexpr double kRateTolerance = 1e-7;
/// Fewer valid rate samples than this leave divisibility undetermined.
inline constexpr std::size_t kMinRateSamples = 10;

using MapFunction = std::function<AffineQubitMap(double)>;
using MapWithDerivativeFunction = std::function<std::pair<AffineQubitMap, Matrix4d>(double)>;

struct ChoiSpectrum {
  std::array<double, 4> eigenvalues{}; // ascending
  double trace = 0.0;
};

enum class Divisibility { CpDivisible, PDivisibleOnly, Neither, Undetermined };

std::string to_string(Divisibility verdict);

struct DivisibilityReport {
  Divisibility verdict = Divisibility::Undetermined;
  std::vector<double> singular_times;
  double min_rate = 0.0;
  double min_pairwise_sum = 0.0;
  double rate_tolerance = 0.0;
  std::size_t valid_samples = 0;
};

struct TraceDistanceSeries {
  std::vector<double> times;
  std::vector<double> values;
  double max_increase = 0.0;
  std::optional<double> witness_time;
};

struct DeterminantSeries {
  std::vector<double> times;
  std::vector<double> values;
  std::vector<bool> singular; // |det| below singular_det_tolerance at the sample
};

/// Canonical rates at one time; `valid` is false where the map could not be
/// inverted.
struct RateSample {
  double t = 0.0;
  std::array<double, 3> lambda{};
  bool valid = false;
};

/// Half the trace norm of a - b; for qubits |r_a - r_b| / 2.
double trace_distance(const DensityMatrix& a, const DensityMatrix& b);

TraceDistanceSeries trace_distance_series(const MapFunction& family, const DensityMatrix& rho1,
                                          const DensityMatrix& rho2,
                                          const std::vector<double>& t_grid);

/// Dynamical matrix B = sum_ij |i><j| (x) m(|i><j|), with the map extended
/// linearly to all 2x2 matrices through the Pauli expansion. Tr B = 2 for
/// trace-preserving maps and B >= 0 iff the map is CP.
Matrix4cd choi_matrix(const AffineQubitMap& m);

ChoiSpectrum choi_spectrum(const AffineQubitMap& m);

bool cp_check(const ChoiSpectrum& spectrum);

DeterminantSeries determinant_series(const MapFunction& family,
                                     const std::vector<double>& t_grid);

/// d/dt det T through Jacobi's formula tr(adj(T) dT/dt), valid at singular T.
double determinant_rate(const Matrix3d& linear, const Matrix3d& linear_rate);

/// Times where the map determinant vanishes. Sign changes between samples are
/// bisected on det; interior local minima of |det| are refined by bisecting
/// d|det|/dt, and kept when |det| there is below singular_det_tolerance.
/// Samples already below the tolerance are reported as they are.
std::vector<double> find_singular_times(const MapWithDerivativeFunction& family,
                                        const std::vector<double>& t_grid);

/// Divisibility verdict from the rate series. Samples that are invalid or lie
/// within `exclusion_window` of a singular time are ignored.
DivisibilityReport divisibility_report(const std::vector<RateSample>& rates,
                                       const std::vector<double>& singular_times,
                                       double exclusion_window);

} // namespace collision
