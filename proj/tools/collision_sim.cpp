// Command-line front end: run a scenario, list builtins, or run the acceptance
// suite.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "acceptance/criteria.hpp"
#include "collision/runner.hpp"

namespace {

collision::ScenarioConfig resolve_target(const std::string& target) {
  std::ifstream in(target);
  if (in) {
    std::stringstream buf;
    buf << in.rdbuf();
    return collision::parse_scenario_config(buf.str());
  }
  return collision::builtin_scenario(target);
}

void print_summary(const collision::ScenarioResult& r) {
  std::printf("scenario            %s\n", r.config.name.c_str());
  std::printf("nodes               %zu\n", r.node_count);
  std::printf("Gamma               %.6e\n", r.gamma_total);
  std::printf("samples             %zu over [0, %.6g]\n", r.times.size(), r.times.back());
  std::printf("markovian           %s", r.markovian ? "yes" : "no");
  if (r.trace_distance.witness_time) std::printf(" (back-flow at t = %.6g)", *r.trace_distance.witness_time);
  std::printf("\ncompletely positive %s (min Choi eigenvalue %.3e)\n",
              r.completely_positive ? "yes" : "no", r.min_choi_eigenvalue);
  std::printf("min determinant     %.6e, singular times %zu\n", r.min_determinant,
              r.divisibility.singular_times.size());
  std::printf("divisibility        %s (min rate %.6e, min pair sum %.6e, %zu samples)\n",
              collision::to_string(r.divisibility.verdict).c_str(), r.divisibility.min_rate,
              r.divisibility.min_pairwise_sum, r.divisibility.valid_samples);
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Collision-model qubit dynamics: mixtures of partial-swap maps"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run a scenario from a JSON file or a builtin name");
  std::string target;
  std::string out_dir;
  std::optional<double> t_max, eta, tau;
  std::optional<int> t_samples;
  run->add_option("target", target, "config.json or builtin scenario name")->required();
  run->add_option("--out", out_dir, "Directory for CSV and JSON output");
  run->add_option("--t-max", t_max, "Final time");
  run->add_option("--t-samples", t_samples, "Number of time samples");
  run->add_option("--eta", eta, "Partial-swap angle");
  run->add_option("--tau", tau, "Collision duration");

  auto* list = app.add_subcommand("list", "List builtin scenarios");

  auto* verify = app.add_subcommand("verify", "Run the acceptance suite");
  std::vector<int> only;
  verify->add_option("--only", only, "Run only these criterion numbers");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      auto cfg = resolve_target(target);
      if (t_max) cfg.t_max = *t_max;
      if (t_samples) cfg.t_samples = *t_samples;
      if (eta) cfg.eta = *eta;
      if (tau) cfg.tau = *tau;
      const auto result = collision::run_scenario(cfg);
      print_summary(result);
      if (!out_dir.empty()) {
        for (const auto& path : collision::emit(result, out_dir))
          std::printf("wrote %s\n", path.string().c_str());
      }
      return 0;
    }
    if (*list) {
      for (const auto& cfg : collision::list_builtin_scenarios()) {
        const auto& g = cfg.gaussian;
        std::printf("%-18s center (%g, %g, %g)  widths (%g, %g, %g)  spacing %g  state (%g, %g, %g)\n",
                    cfg.name.c_str(), g.center.x(), g.center.y(), g.center.z(), g.widths.x(),
                    g.widths.y(), g.widths.z(), g.grid_spacing, cfg.state_pair[0].x(),
                    cfg.state_pair[0].y(), cfg.state_pair[0].z());
      }
      return 0;
    }
    if (*verify) {
      const auto results = collision::acceptance::run_criteria(std::cout, only);
      return collision::acceptance::all_passed(results) ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
