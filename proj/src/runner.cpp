#include "collision/runner.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <limits>
#include <thread>

#include <json.hpp>

#include "collision/core_maps.hpp"
#include "collision/gksl.hpp"

namespace collision {

using json = nlohmann::ordered_json;

namespace {

constexpr std::array<std::pair<Output, const char*>, 5> kOutputNames{{
    {Output::TraceDistance, "trace_distance"},
    {Output::Determinant, "determinant"},
    {Output::Choi, "choi"},
    {Output::Rates, "rates"},
    {Output::RateSums, "rate_sums"},
}};

Vector3d vector_from_json(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 3)
    throw InvalidArgument(std::string(what) + " must be an array of three numbers");
  return Vector3d(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

json vector_to_json(const Vector3d& v) { return json::array({v.x(), v.y(), v.z()}); }

template <typename F> void parallel_for(std::size_t n, unsigned threads, F&& body) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(threads);
  const std::size_t chunk = (n + threads - 1) / threads;
  for (unsigned w = 0; w < threads; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w * chunk; i < std::min(n, (w + 1) * chunk); ++i) body(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_for_writing(const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error("cannot open " + path.string() + ": " + std::strerror(errno));
  return os;
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

} // namespace

std::string to_string(Output output) {
  for (const auto& [o, name] : kOutputNames)
    if (o == output) return name;
  return "unknown";
}

Output output_from_string(const std::string& name) {
  for (const auto& [o, n] : kOutputNames)
    if (name == n) return o;
  throw InvalidArgument("unknown output '" + name + "'");
}

void ScenarioConfig::validate() const {
  CollisionParams(eta, tau);
  gaussian.validate();
  if (t_samples < 2) throw InvalidArgument("t_samples must be at least 2");
  if (t_max && !(*t_max > 0.0 && std::isfinite(*t_max)))
    throw InvalidArgument("t_max must be positive");
  for (const auto& r : state_pair) DensityMatrix{r};
}

double ScenarioConfig::resolved_t_max() const {
  if (t_max) return *t_max;
  const double gamma = continuous_params(BlochVector(), CollisionParams(eta, tau)).gamma_total;
  if (!(gamma > 0.0)) throw InvalidArgument("t_max must be given when eta = 0");
  return 5.0 / gamma;
}

std::vector<double> ScenarioConfig::time_grid() const {
  const double end = resolved_t_max();
  std::vector<double> grid(static_cast<std::size_t>(t_samples));
  for (int k = 0; k < t_samples; ++k) grid[k] = end * k / (t_samples - 1);
  return grid;
}

ScenarioConfig parse_scenario_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw InvalidArgument(std::string("malformed scenario JSON: ") + e.what());
  }
  if (!j.is_object()) throw InvalidArgument("scenario JSON must be an object");

  ScenarioConfig cfg;
  try {
    cfg.name = j.value("name", std::string("custom"));
    cfg.eta = j.value("eta", cfg.eta);
    cfg.tau = j.value("tau", cfg.tau);
    if (j.contains("gaussian")) {
      const json& g = j["gaussian"];
      if (g.contains("center")) cfg.gaussian.center = vector_from_json(g["center"], "center");
      if (g.contains("widths")) cfg.gaussian.widths = vector_from_json(g["widths"], "widths");
      cfg.gaussian.grid_spacing = g.value("grid_spacing", cfg.gaussian.grid_spacing);
    }
    if (j.contains("t_max") && !j["t_max"].is_null()) cfg.t_max = j["t_max"].get<double>();
    cfg.t_samples = j.value("t_samples", cfg.t_samples);
    if (j.contains("state_pair")) {
      const json& sp = j["state_pair"];
      if (!sp.is_array() || sp.size() != 2)
        throw InvalidArgument("state_pair must hold two Bloch vectors");
      cfg.state_pair = {vector_from_json(sp[0], "state_pair[0]"),
                        vector_from_json(sp[1], "state_pair[1]")};
    }
    if (j.contains("outputs")) {
      cfg.outputs.clear();
      for (const auto& o : j["outputs"]) cfg.outputs.insert(output_from_string(o.get<std::string>()));
    }
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("bad scenario field: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

std::string scenario_config_to_json(const ScenarioConfig& cfg) {
  json j;
  j["name"] = cfg.name;
  j["eta"] = cfg.eta;
  j["tau"] = cfg.tau;
  j["gaussian"] = {{"center", vector_to_json(cfg.gaussian.center)},
                   {"widths", vector_to_json(cfg.gaussian.widths)},
                   {"grid_spacing", cfg.gaussian.grid_spacing}};
  j["t_max"] = cfg.t_max ? json(*cfg.t_max) : json(nullptr);
  j["t_samples"] = cfg.t_samples;
  j["state_pair"] = json::array({vector_to_json(cfg.state_pair[0]), vector_to_json(cfg.state_pair[1])});
  j["outputs"] = json::array();
  for (Output o : cfg.outputs) j["outputs"].push_back(to_string(o));
  return j.dump(2);
}

unsigned thread_count_from_env() {
  const char* env = std::getenv("COLLISION_THREADS");
  if (!env || !*env) return 1;
  char* end = nullptr;
  const long n = std::strtol(env, &end, 10);
  if (*end != '\0' || n < 1) return 1;
  return static_cast<unsigned>(std::min<long>(n, 256));
}

ScenarioResult run_scenario(const ScenarioConfig& cfg, unsigned threads) {
  cfg.validate();
  ScenarioResult result;
  result.config = cfg;
  result.times = cfg.time_grid();
  const auto& grid = result.times;
  const std::size_t n = grid.size();

  const MixtureFamily family(build_gaussian(cfg.gaussian), CollisionParams(cfg.eta, cfg.tau));
  result.node_count = family.distribution().size();
  result.gamma_total = family.gamma_total();

  std::vector<AffineQubitMap> maps(n);
  result.choi.resize(n);
  result.rates.resize(n);
  parallel_for(n, threads, [&](std::size_t k) {
    const double t = grid[k];
    const auto [map, derivative] = family.map_and_derivative(t);
    maps[k] = map;
    result.choi[k] = choi_spectrum(map);
    RateSample& sample = result.rates[k];
    sample.t = t;
    try {
      const auto canonical = canonical_rates(gksl_coefficients(generator(derivative, invert_map(map))));
      sample.lambda = canonical.lambda;
      sample.valid = true;
    } catch (const SingularMap&) {
      sample.lambda.fill(std::numeric_limits<double>::quiet_NaN());
      sample.valid = false;
    }
  });

  const auto lookup = [&](double t) -> AffineQubitMap {
    const auto it = std::lower_bound(grid.begin(), grid.end(), t);
    if (it != grid.end() && *it == t) return maps[static_cast<std::size_t>(it - grid.begin())];
    return family.map(t);
  };
  result.trace_distance = trace_distance_series(lookup, DensityMatrix(cfg.state_pair[0]),
                                                DensityMatrix(cfg.state_pair[1]), grid);
  result.determinant = determinant_series(lookup, grid);

  const auto singular = find_singular_times(
      [&](double t) { return family.map_and_derivative(t); }, grid);
  const double step = grid[1] - grid[0];
  result.divisibility = divisibility_report(result.rates, singular, kSingularExclusionSteps * step);

  result.markovian = !result.trace_distance.witness_time.has_value();
  result.min_choi_eigenvalue = std::numeric_limits<double>::infinity();
  for (const auto& s : result.choi) {
    result.completely_positive = result.completely_positive && cp_check(s);
    result.min_choi_eigenvalue = std::min(result.min_choi_eigenvalue, s.eigenvalues[0]);
    result.choi_trace_max_deviation =
        std::max(result.choi_trace_max_deviation, std::abs(s.trace - 2.0));
  }
  result.min_determinant =
      *std::min_element(result.determinant.values.begin(), result.determinant.values.end());
  return result;
}

std::vector<ScenarioConfig> list_builtin_scenarios() {
  const auto make = [](std::string name, Vector3d center, Vector3d widths) {
    ScenarioConfig cfg;
    cfg.name = std::move(name);
    cfg.gaussian.center = center;
    cfg.gaussian.widths = widths;
    cfg.gaussian.grid_spacing = 0.05;
    return cfg;
  };
  const Vector3d origin = Vector3d::Zero();
  const Vector3d offset(0.3, 0.0, 0.0);
  std::vector<ScenarioConfig> all;
  all.push_back(make("fig1-delta0.3", origin, Vector3d::Constant(0.3)));
  all.push_back(make("fig1-delta0.1", origin, Vector3d::Constant(0.1)));
  all.push_back(make("fig1-delta0.01", origin, Vector3d::Constant(0.01)));
  auto anisotropic = make("fig2-anisotropic", origin, Vector3d(0.01, 0.01, 0.7));
  anisotropic.state_pair = {Vector3d(1.0, 0.0, 0.0), Vector3d::Zero()};
  all.push_back(anisotropic);
  all.push_back(make("fig3-offset", offset, Vector3d::Constant(0.3)));
  all.push_back(make("fig4-disk", offset, Vector3d(0.01, 0.3, 0.3)));
  return all;
}

ScenarioConfig builtin_scenario(const std::string& name) {
  for (auto& cfg : list_builtin_scenarios())
    if (cfg.name == name) return cfg;
  throw InvalidArgument("unknown builtin scenario '" + name + "'");
}

std::string summary_json(const ScenarioResult& r) {
  json j;
  j["name"] = r.config.name;
  j["config"] = json::parse(scenario_config_to_json(r.config));
  j["node_count"] = r.node_count;
  j["gamma"] = r.gamma_total;
  j["t_max"] = r.times.back();
  j["t_samples"] = r.times.size();
  j["markovian"] = r.markovian;
  j["max_trace_distance_increase"] = number_or_null(r.trace_distance.max_increase);
  j["witness_time"] = r.trace_distance.witness_time ? json(*r.trace_distance.witness_time) : json(nullptr);
  j["completely_positive"] = r.completely_positive;
  j["min_choi_eigenvalue"] = r.min_choi_eigenvalue;
  j["choi_trace_max_deviation"] = r.choi_trace_max_deviation;
  j["min_determinant"] = r.min_determinant;
  j["invertible"] = r.divisibility.singular_times.empty() &&
                    std::none_of(r.determinant.singular.begin(), r.determinant.singular.end(),
                                 [](bool b) { return b; });
  j["singular_times"] = r.divisibility.singular_times;
  j["divisibility"] = {{"verdict", to_string(r.divisibility.verdict)},
                       {"min_rate", number_or_null(r.divisibility.min_rate)},
                       {"min_pairwise_sum", number_or_null(r.divisibility.min_pairwise_sum)},
                       {"rate_tolerance", r.divisibility.rate_tolerance},
                       {"valid_samples", r.divisibility.valid_samples}};
  return j.dump(2) + "\n";
}

std::vector<std::filesystem::path> emit(const ScenarioResult& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  const auto& outputs = r.config.outputs;
  const std::size_t n = r.times.size();

  const auto write_csv = [&](const char* file, const std::string& header, auto&& row) {
    const auto path = dir / file;
    auto os = open_for_writing(path);
    os << header << '\n';
    for (std::size_t k = 0; k < n; ++k) os << format_double(r.times[k]) << row(k) << '\n';
    if (!os) throw Error("write failed for " + path.string() + ": " + std::strerror(errno));
    written.push_back(path);
  };

  if (outputs.count(Output::TraceDistance))
    write_csv("trace_distance.csv", "t,trace_distance",
              [&](std::size_t k) { return "," + format_double(r.trace_distance.values[k]); });
  if (outputs.count(Output::Determinant))
    write_csv("determinant.csv", "t,determinant,singular", [&](std::size_t k) {
      return "," + format_double(r.determinant.values[k]) + "," +
             (r.determinant.singular[k] ? "1" : "0");
    });
  if (outputs.count(Output::Choi))
    write_csv("choi.csv", "t,b1,b2,b3,b4,trace", [&](std::size_t k) {
      std::string s;
      for (double b : r.choi[k].eigenvalues) s += "," + format_double(b);
      return s + "," + format_double(r.choi[k].trace);
    });
  if (outputs.count(Output::Rates))
    write_csv("rates.csv", "t,lambda1,lambda2,lambda3,valid", [&](std::size_t k) {
      std::string s;
      for (double l : r.rates[k].lambda) s += "," + format_double(l);
      return s + "," + (r.rates[k].valid ? "1" : "0");
    });
  if (outputs.count(Output::RateSums))
    write_csv("rate_sums.csv", "t,lambda1+lambda2,lambda1+lambda3,lambda2+lambda3",
              [&](std::size_t k) {
                const auto& l = r.rates[k].lambda;
                return "," + format_double(l[0] + l[1]) + "," + format_double(l[0] + l[2]) +
                       "," + format_double(l[1] + l[2]);
              });

  const auto summary_path = dir / "summary.json";
  auto os = open_for_writing(summary_path);
  os << summary_json(r);
  if (!os) throw Error("write failed for " + summary_path.string() + ": " + std::strerror(errno));
  written.push_back(summary_path);
  return written;
}

} // namespace collision
