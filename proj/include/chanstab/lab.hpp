#pragma once

// Experiment drivers: perturb a steady or traveling flow, integrate it, and
// report how far the vorticity strays from the flow and from its orbit under
// x1-translations. Also the multi-start energy maximization and the
// side-by-side comparison with Arnold's sufficient conditions.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "chanstab/config.hpp"
#include "chanstab/dynamics.hpp"
#include "chanstab/flows.hpp"
#include "chanstab/grid.hpp"
#include "chanstab/rearrange.hpp"

namespace chanstab {

std::string version_string();

/// {"L", "H", "n1", "n2"} with numbers or expressions.
GridSpec grid_from_json(const Json& j);

/// Flow kinds:
///   shear            a, m, alpha, b, c
///   hyperbolic-shear a, m, b, c
///   e1               a, b, c, d
///   monotone         profile = "tanh" (amplitude, width) or "linear" (slope, offset)
/// Monotone flows carry psi = G omega and no g.
SteadySpec build_flow(const Json& flow, const GridSpec& grid);

struct PerturbationConfig {
  std::string mode = "random-smooth";  // random-smooth | rearranged | e1-mode
  double amplitude = 1e-2;
  std::uint64_t seed = 1;
};

struct Perturbed {
  Field omega;
  double distance = 0.0;  // actual L^p distance to the unperturbed vorticity
};

Perturbed perturb(const Field& omega_bar, const PerturbationConfig& cfg, double p);

struct ExperimentConfig {
  std::string name = "experiment";
  std::string experiment = "stability";  // stability | monotone-shear
  GridSpec grid;
  Json flow;
  PerturbationConfig perturbation;
  double T = 50.0;
  std::optional<double> dt;
  double cfl = 0.5;
  int every = 0;  // 0 picks about 200 records per run
  double p = 2.0;
  double hyperviscosity = 0.0;
  std::vector<double> snapshot_times;
  std::filesystem::path out;

  /// Reads {grid, flow, perturbation, run, output} sections.
  static ExperimentConfig from_json(const Json& j);
};

struct StabilityReport {
  std::string name;
  std::string experiment;
  std::string classification;
  double lambda1 = 0.0;
  std::pair<double, double> gprime_range{0.0, 0.0};
  double initial_distance = 0.0;
  double sup_plain = 0.0;
  double sup_orbital = 0.0;
  double steady_residual_scale = 0.0;  // residual / ||omega_bar||_2, 0 for shear data
  double dt = 0.0;
  double hyperviscosity = 0.0;
  AdmissibilitySummary admissibility;
  std::vector<DiagnosticsRecord> records;
  bool aborted = false;
  std::string abort_reason;

  Json to_json() const;
};

StabilityReport run_stability_experiment(const ExperimentConfig& cfg);
/// Requires an x1-independent vorticity that is monotone in x2.
StabilityReport run_monotone_shear_experiment(const ExperimentConfig& cfg);
/// Dispatches on cfg.experiment and writes diagnostics.csv, snapshots and
/// report.json under cfg.out when it is set.
StabilityReport run_and_write(const ExperimentConfig& cfg, const Json& raw_config);

struct ArnoldRow {
  std::string flow;
  double gprime = 0.0;
  double lambda1 = 0.0;
  double c_ar = 0.0;             // H^2 / pi^2
  bool arnold1 = false;          // g' < 0
  bool arnold2 = false;          // 0 < g' < 1 / c_ar
  bool arnold2_as_printed = false;  // 0 < g' < c_ar
  bool theorem1 = false;
  bool theorem2 = false;
  std::string classification;

  Json to_json() const;
};

ArnoldRow arnold_row(const SteadySpec& spec, double L, double H);

struct ArnoldReport {
  ArnoldRow row;
  std::optional<StabilityReport> run;
};

/// Rejects flows whose g is not affine. Runs the stability experiment when
/// `run_experiment` is set.
ArnoldReport run_arnold_comparison(const ExperimentConfig& cfg, bool run_experiment);

struct MaximizeRun {
  int start = 0;
  MaximizeResult result;
  double final_distance = 0.0;           // ||omega - reference||_2
  double final_distance_negated = 0.0;   // ||omega + reference||_2
  std::vector<double> distance_trace;
};

struct MaximizeReport {
  double target_impulse = 0.0;
  double reference_norm = 0.0;
  std::vector<MaximizeRun> runs;
};

/// Random permutations of the reference's values as starting points.
MaximizeReport run_multistart_maximization(const PoissonSolver& solver, const Field& reference, int starts,
                                           std::uint64_t seed, const MaximizeOptions& opts,
                                           std::optional<double> target_impulse = std::nullopt);

void write_diagnostics_csv(const std::filesystem::path& path, const std::vector<DiagnosticsRecord>& records);
void write_json(const std::filesystem::path& path, const Json& j);
/// %.17g, so reruns are byte-identical.
std::string format_number(double v);

}  // namespace chanstab
