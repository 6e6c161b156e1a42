#include "collision/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace collision {

std::string to_string(Divisibility verdict) {
  switch (verdict) {
  case Divisibility::CpDivisible: return "CP_DIVISIBLE";
  case Divisibility::PDivisibleOnly: return "P_DIVISIBLE_ONLY";
  case Divisibility::Neither: return "NEITHER";
  case Divisibility::Undetermined: return "UNDETERMINED";
  }
  return "UNDETERMINED";
}

double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
  return 0.5 * (a.bloch() - b.bloch()).norm();
}

TraceDistanceSeries trace_distance_series(const MapFunction& family, const DensityMatrix& rho1,
                                          const DensityMatrix& rho2,
                                          const std::vector<double>& t_grid) {
  TraceDistanceSeries out;
  out.times = t_grid;
  out.values.reserve(t_grid.size());
  for (double t : t_grid) {
    const AffineQubitMap m = family(t);
    // Both states share the translation, so only T (r1 - r2) matters; going
    // through apply() keeps the definition literal.
    out.values.push_back(0.5 * (m.apply(rho1.bloch()) - m.apply(rho2.bloch())).norm());
  }
  out.max_increase = t_grid.size() < 2 ? 0.0 : -std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k < out.values.size(); ++k) {
    const double rise = out.values[k] - out.values[k - 1];
    out.max_increase = std::max(out.max_increase, rise);
    if (!out.witness_time && rise > kBackflowTolerance) out.witness_time = t_grid[k];
  }
  return out;
}

Matrix4cd choi_matrix(const AffineQubitMap& m) {
  using cvec3 = Eigen::Vector3cd;
  const Matrix3d linear = m.linear();
  const Vector3d shift = m.translation();
  Matrix4cd b = Matrix4cd::Zero();
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      // |i><j| = (x0 I + x.sigma)/2 with x0 = delta_ij, x_k = (sigma_k)_{ji}
      const double x0 = i == j ? 1.0 : 0.0;
      cvec3 x;
      for (int k = 0; k < 3; ++k) x(k) = pauli::sigma(k)(j, i);
      const cvec3 image = linear.cast<std::complex<double>>() * x +
                          x0 * shift.cast<std::complex<double>>();
      Matrix2cd out = x0 * Matrix2cd::Identity();
      for (int k = 0; k < 3; ++k) out += image(k) * pauli::sigma(k);
      b.block<2, 2>(2 * i, 2 * j) = 0.5 * out;
    }
  }
  return b;
}

ChoiSpectrum choi_spectrum(const AffineQubitMap& m) {
  const Matrix4cd b = choi_matrix(m);
  Eigen::SelfAdjointEigenSolver<Matrix4cd> es(0.5 * (b + b.adjoint()), Eigen::EigenvaluesOnly);
  ChoiSpectrum out;
  for (int k = 0; k < 4; ++k) out.eigenvalues[k] = es.eigenvalues()(k);
  out.trace = b.trace().real();
  return out;
}

bool cp_check(const ChoiSpectrum& spectrum) { return spectrum.eigenvalues[0] >= -kCpTolerance; }

DeterminantSeries determinant_series(const MapFunction& family,
                                     const std::vector<double>& t_grid) {
  DeterminantSeries out;
  out.times = t_grid;
  out.values.reserve(t_grid.size());
  out.singular.reserve(t_grid.size());
  for (double t : t_grid) {
    const Matrix3d linear = family(t).linear();
    const double det = linear.determinant();
    out.values.push_back(det);
    out.singular.push_back(std::abs(det) < singular_det_tolerance(linear));
  }
  return out;
}

namespace {

Matrix3d adjugate(const Matrix3d& t) {
  Matrix3d adj;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      const int r0 = (j + 1) % 3, r1 = (j + 2) % 3;
      const int c0 = (i + 1) % 3, c1 = (i + 2) % 3;
      adj(i, j) = t(r0, c0) * t(r1, c1) - t(r0, c1) * t(r1, c0);
    }
  }
  return adj;
}

struct DetSample {
  double det;
  double rate;
  double tolerance;
};

DetSample sample_determinant(const MapWithDerivativeFunction& family, double t) {
  const auto [map, derivative] = family(t);
  const Matrix3d linear = map.linear();
  const Matrix3d linear_rate = derivative.block<3, 3>(1, 1);
  return {linear.determinant(), determinant_rate(linear, linear_rate),
          singular_det_tolerance(linear)};
}

// Bisects a sign change of f on [lo, hi] (f(lo) and f(hi) of opposite sign).
template <typename F> double bisect(F&& f, double lo, double hi, double f_lo) {
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double f_mid = f(mid);
    if (f_mid == 0.0) return mid;
    if ((f_mid < 0.0) == (f_lo < 0.0)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

} // namespace

double determinant_rate(const Matrix3d& linear, const Matrix3d& linear_rate) {
  return (adjugate(linear) * linear_rate).trace();
}

std::vector<double> find_singular_times(const MapWithDerivativeFunction& family,
                                        const std::vector<double>& t_grid) {
  const std::size_t n = t_grid.size();
  std::vector<DetSample> samples;
  samples.reserve(n);
  for (double t : t_grid) samples.push_back(sample_determinant(family, t));

  std::vector<double> found;
  const auto sign_change = [&](std::size_t k) {
    return k + 1 < n && (samples[k].det < 0.0) != (samples[k + 1].det < 0.0) &&
           samples[k].det != 0.0 && samples[k + 1].det != 0.0;
  };

  const auto det_at = [&](double t) { return sample_determinant(family, t).det; };
  for (std::size_t k = 0; k + 1 < n; ++k)
    if (sign_change(k)) found.push_back(bisect(det_at, t_grid[k], t_grid[k + 1], samples[k].det));

  // Minima without a sign change: det touches zero (e.g. a squared factor).
  // The zero is only resolvable by refining the minimum, not from samples.
  const auto refine_minimum = [&](std::size_t k) -> std::optional<double> {
    const double orientation = samples[k].det < 0.0 ? -1.0 : 1.0;
    const auto slope_at = [&](double t) { return orientation * sample_determinant(family, t).rate; };
    const double s_mid = orientation * samples[k].rate;
    double lo, hi, s_lo;
    if (s_mid < 0.0) {
      lo = t_grid[k];
      hi = t_grid[k + 1];
      s_lo = s_mid;
    } else {
      lo = t_grid[k - 1];
      hi = t_grid[k];
      s_lo = orientation * samples[k - 1].rate;
    }
    if (!(s_lo < 0.0) || !(slope_at(hi) > 0.0)) return std::nullopt;
    const double t_min = bisect(slope_at, lo, hi, s_lo);
    const DetSample at_min = sample_determinant(family, t_min);
    if (std::abs(at_min.det) < at_min.tolerance) return t_min;
    return std::nullopt;
  };

  for (std::size_t k = 0; k < n; ++k) {
    if (sign_change(k) || (k > 0 && sign_change(k - 1))) continue;
    const bool flagged = std::abs(samples[k].det) < samples[k].tolerance;
    const double here = std::abs(samples[k].det);
    const bool interior_minimum = k > 0 && k + 1 < n && here <= std::abs(samples[k - 1].det) &&
                                  here <= std::abs(samples[k + 1].det);
    std::optional<double> refined;
    if (interior_minimum && samples[k].det != 0.0) refined = refine_minimum(k);
    if (refined)
      found.push_back(*refined);
    else if (flagged)
      found.push_back(t_grid[k]);
  }

  std::sort(found.begin(), found.end());
  std::vector<double> unique;
  for (double t : found)
    if (unique.empty() || t - unique.back() > 1e-9 * std::max(1.0, std::abs(t)))
      unique.push_back(t);
  return unique;
}

DivisibilityReport divisibility_report(const std::vector<RateSample>& rates,
                                       const std::vector<double>& singular_times,
                                       double exclusion_window) {
  DivisibilityReport out;
  out.singular_times = singular_times;
  double max_abs = 0.0;
  double min_rate = std::numeric_limits<double>::infinity();
  double min_pair = std::numeric_limits<double>::infinity();

  for (const RateSample& s : rates) {
    if (!s.valid) continue;
    const bool near_singular =
        std::any_of(singular_times.begin(), singular_times.end(),
                    [&](double ts) { return std::abs(s.t - ts) <= exclusion_window; });
    if (near_singular) continue;
    ++out.valid_samples;
    for (int a = 0; a < 3; ++a) {
      max_abs = std::max(max_abs, std::abs(s.lambda[a]));
      min_rate = std::min(min_rate, s.lambda[a]);
      for (int b = a + 1; b < 3; ++b) min_pair = std::min(min_pair, s.lambda[a] + s.lambda[b]);
    }
  }

  out.rate_tolerance = kRateTolerance * std::max(1.0, max_abs);
  if (out.valid_samples == 0) {
    out.min_rate = out.min_pairwise_sum = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  out.min_rate = min_rate;
  out.min_pairwise_sum = min_pair;
  if (out.valid_samples < kMinRateSamples) return out;

  if (min_rate >= -out.rate_tolerance)
    out.verdict = Divisibility::CpDivisible;
  else if (min_pair >= -out.rate_tolerance)
    out.verdict = Divisibility::PDivisibleOnly;
  else
    out.verdict = Divisibility::Neither;
  return out;
}

} // namespace collision
