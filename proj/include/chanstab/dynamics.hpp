#pragma once

// Time integration of the vorticity equation
//   d omega/dt + (grad-perp G omega + (Q/H) e1) . grad omega = 0
// with the flux Q held fixed, plus the diagnostics that track the conserved
// quantities and the distance to a translation orbit.

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "chanstab/green.hpp"
#include "chanstab/grid.hpp"
#include "chanstab/rearrange.hpp"

namespace chanstab {

struct StepOptions {
  double cfl_limit = 0.5;
  double hyperviscosity = 0.0;  // nu in -nu Lap_h^2 omega; 0 keeps the inviscid scheme
};

/// -(u . grad omega) - nu Lap_h^2 omega. x1-derivatives are spectral with the
/// 2/3 rule applied to the nonlinear product; the uniform (Q/H) d/dx1 part is
/// linear and kept at full resolution.
Field vorticity_tendency(const PoissonSolver& solver, const FlowState& s, double hyperviscosity = 0.0);

/// dt * max(max|u1|/dx1, max|u2|/dx2).
double courant_number(const PoissonSolver& solver, const FlowState& s, double dt);

/// cfl * min(dx1/max|u1|, dx2/max|u2|); +inf for a fluid at rest.
double cfl_time_step(const PoissonSolver& solver, const FlowState& s, double cfl);

/// One classical RK4 step. Throws CflError when the Courant number of the
/// input state exceeds opts.cfl_limit.
FlowState step(const PoissonSolver& solver, const FlowState& s, double dt, const StepOptions& opts = {});

struct DiagnosticsRecord {
  double t = 0.0;
  double energy = 0.0;   // E(omega)
  double kinetic = 0.0;  // E + L Q^2 / (2H)
  double impulse = 0.0;
  double flux = 0.0;
  std::array<double, 4> moments{};  // integral omega^k, k = 1..4
  std::array<double, 9> deciles{};
  double rearrangement_drift = 0.0;  // L1 gap of sorted values against t = 0
  std::optional<double> plain_distance;    // ||omega - reference||_p
  std::optional<double> orbital_distance;  // min over x1-translates of the reference
  std::optional<double> orbital_shift;
};

struct SimulationOptions {
  StepOptions step;
  std::optional<Field> reference;  // enables plain and orbital distances
  double p = 2.0;
  /// Called after every recorded step with the current state.
  std::function<void(const DiagnosticsRecord&, const FlowState&)> on_record;
};

struct SimulationResult {
  std::vector<DiagnosticsRecord> records;
  FlowState final_state;
  int steps = 0;
  double dt = 0.0;  // step actually used (T divided evenly)
  bool aborted = false;
  std::string abort_reason;
};

DiagnosticsRecord diagnose(const PoissonSolver& solver, const FlowState& s, double t,
                           const RearrangementProfile& initial, const SimulationOptions& opts);

/// Integrates to T with ceil(T/dt) equal steps, recording at t = 0, every
/// `every` steps and at T. CFL violations and non-finite vorticity stop the
/// run; the records up to the last valid state are kept.
SimulationResult simulate(const PoissonSolver& solver, const FlowState& s0, double T, double dt, int every,
                          const SimulationOptions& opts = {});

/// Evolves (omega0, Q) and (omega0, Q + lam H) to T and returns
/// ||omega_A(T) - omega_B(T, . + lam T e1)||_2 / ||omega0||_2.
double galilean_pair_check(const PoissonSolver& solver, const FlowState& s0, double lam, double T, double dt,
                           const StepOptions& opts = {});

struct OrbitalDistance {
  double distance = 0.0;
  double shift = 0.0;  // alpha in [0, L)
};

/// min over alpha of ||omega - ref(. + alpha e1)||_p: exhaustive over grid
/// shifts, then golden-section refinement with trigonometric interpolation for p = 2.
OrbitalDistance orbital_distance(const Field& omega, const Field& ref, double p = 2.0);

/// d in [0, L) maximizing sum omega(x) ref(x - d e1), with parabolic refinement
/// around the best grid lag.
double correlation_shift(const Field& omega, const Field& ref);

/// Removes jumps of +-L between consecutive displacements.
std::vector<double> unwrap_periodic(const std::vector<double>& values, double L);

struct AdmissibilitySummary {
  double energy_drift = 0.0;    // max |E(t) - E(0)| / |E(0)|
  double kinetic_drift = 0.0;
  double impulse_drift = 0.0;   // normalized by integral |x2 omega0|
  double flux_drift = 0.0;      // absolute
  std::array<double, 4> moment_drift{};  // normalized by integral |omega0|^k
  double rearrangement_drift = 0.0;      // relative to integral |omega0|
};

/// Requires at least two records; throws PreconditionError otherwise.
/// `omega0` supplies the normalizations.
AdmissibilitySummary admissibility_report(const std::vector<DiagnosticsRecord>& records, const Field& omega0);

}  // namespace chanstab
