#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "collision/diagnostics.hpp"
#include "collision/mixture.hpp"

namespace collision {

enum class Output { TraceDistance, Determinant, Choi, Rates, RateSums };

std::string to_string(Output output);
Output output_from_string(const std::string& name);

struct ScenarioConfig {
  std::string name;
  double eta = 0.01;
  double tau = 1.0;
  GaussianSpec gaussian;
  /// Defaults to five relaxation times 5/Gamma when unset.
  std::optional<double> t_max;
  int t_samples = 2000;
  std::array<Vector3d, 2> state_pair{Vector3d(0.0, 0.0, 1.0), Vector3d::Zero()};
  std::set<Output> outputs{Output::TraceDistance, Output::Determinant, Output::Choi,
                           Output::Rates, Output::RateSums};

  void validate() const;
  double resolved_t_max() const;
  std::vector<double> time_grid() const;
};

/// JSON with the ScenarioConfig field names; missing fields keep defaults.
ScenarioConfig parse_scenario_config(const std::string& json_text);
std::string scenario_config_to_json(const ScenarioConfig& cfg);

struct ScenarioResult {
  ScenarioConfig config;
  std::size_t node_count = 0;
  double gamma_total = 0.0;
  std::vector<double> times;

  TraceDistanceSeries trace_distance;
  DeterminantSeries determinant;
  std::vector<ChoiSpectrum> choi;
  std::vector<RateSample> rates;
  DivisibilityReport divisibility;

  bool markovian = true;
  bool completely_positive = true;
  double min_choi_eigenvalue = 0.0;
  double choi_trace_max_deviation = 0.0;
  double min_determinant = 0.0;
};

/// Rate samples within this many time-grid steps of a singular time are left
/// out of the divisibility statistics.
inline constexpr double kSingularExclusionSteps = 2.0;

/// Worker threads for per-time-sample evaluation, from COLLISION_THREADS
/// (default 1). Results do not depend on the thread count.
unsigned thread_count_from_env();

ScenarioResult run_scenario(const ScenarioConfig& cfg, unsigned threads = thread_count_from_env());

std::vector<ScenarioConfig> list_builtin_scenarios();

/// Throws InvalidArgument for unknown names.
ScenarioConfig builtin_scenario(const std::string& name);

/// Writes one CSV per requested series plus summary.json into dir (created if
/// needed). Returns the written paths.
std::vector<std::filesystem::path> emit(const ScenarioResult& result,
                                        const std::filesystem::path& dir);

/// The JSON summary written by emit().
std::string summary_json(const ScenarioResult& result);

} // namespace collision
