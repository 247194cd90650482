#pragma once

// Eigenstructure of the constant-wall-trace, mean-zero Laplace problem
//   -Lap u = Lambda u in D,  u|wall = const (same on both walls),  integral u = 0,
// whose closed-form spectrum is the union of a shear family (2k pi/H)^2 and a
// cellular family (2n pi/L)^2 + (k pi/H)^2.

#include <cstdint>
#include <string>
#include <vector>

#include "chanstab/green.hpp"
#include "chanstab/grid.hpp"

namespace chanstab {

enum class ModeFamily { Shear, Cellular };

std::string to_string(ModeFamily f);

/// One two-dimensional family member. Shear modes carry n = 0.
struct ModeComponent {
  ModeFamily family = ModeFamily::Shear;
  int n = 0;
  int k = 1;

  /// {sin, cos}(2k pi x2/H) for shear; {cos, sin}(2n pi x1/L) sin(k pi x2/H) for cellular.
  std::vector<Field> basis(const GridSpec& grid) const;
};

/// A distinct eigenvalue with every family member attaining it.
struct EigenMode {
  double eigenvalue = 0.0;
  std::vector<ModeComponent> components;

  int dimension() const { return 2 * static_cast<int>(components.size()); }
  std::vector<Field> basis(const GridSpec& grid) const;
};

double shear_eigenvalue(double H, int k);
double cellular_eigenvalue(double L, double H, int n, int k);

/// First `count` distinct eigenvalues in ascending order; coincident family
/// values (relative gap <= 1e-12) are merged into one mode.
std::vector<EigenMode> eigenvalue_table(double L, double H, int count);

/// H/L against sqrt(3)/2.
enum class AspectRegime { Tall, Flat, Critical };

std::string to_string(AspectRegime r);

/// Compares (2H)^2 with 3L^2; relative gaps within 1e-12 count as equality.
AspectRegime aspect_regime(double L, double H);

struct FirstEigen {
  double value = 0.0;
  AspectRegime regime = AspectRegime::Flat;
  EigenMode mode;

  std::vector<Field> basis(const GridSpec& grid) const { return mode.basis(grid); }
};

/// Lambda_1 and E_1 by regime: 4pi^2/H^2 with shear basis when H/L > sqrt(3)/2,
/// 4pi^2/L^2 + pi^2/H^2 with cellular basis below, both (dimension 4) at equality.
FirstEigen lambda1(double L, double H);

struct PowerIterationOptions {
  int max_iterations = 20000;
  double tolerance = 1e-12;  // relative change of the Rayleigh quotient
  std::uint64_t seed = 0x5eed;
};

struct PowerIterationResult {
  double value = 0.0;  // dominant eigenvalue of the iterated operator
  int iterations = 0;
  Field vector;
};

/// Largest eigenvalue of T on the mean-zero subspace (mean projected out every step).
PowerIterationResult dominant_t_eigenvalue(const PoissonSolver& solver,
                                           const PowerIterationOptions& opts = {});
/// Reciprocal of dominant_t_eigenvalue; approximates Lambda_1. Throws ConvergenceError.
double verify_lambda1_numeric(const PoissonSolver& solver, const PowerIterationOptions& opts = {});

/// sup of integral v G v over unit L2 vectors (no mean projection); H^2/pi^2 in the continuum.
PowerIterationResult dominant_g_eigenvalue(const PoissonSolver& solver,
                                           const PowerIterationOptions& opts = {});
double arnold_constant(const PoissonSolver& solver, const PowerIterationOptions& opts = {});

/// integral v T v / integral v^2.
double rayleigh_quotient_t(const PoissonSolver& solver, const Field& v);

struct DeflatedSpectrum {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  std::vector<Field> e1_span;  // orthonormal numerical first eigenspace
};

/// Finds the numerical E_1 (of the given dimension) by subspace iteration, then
/// power-iterates with that span projected out to obtain Lambda_2.
DeflatedSpectrum deflated_spectrum(const PoissonSolver& solver, int e1_dimension,
                                   const PowerIterationOptions& opts = {});

struct InequalityCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  bool equality = false;  // |lhs - rhs| <= 0.5% of rhs
};

struct PoincareOptions {
  double mean_tolerance = 1e-8;   // relative to max|u|
  double trace_tolerance = 1e-2;  // relative to max|u|
};

/// Wall trace of u extrapolated quadratically from the three nearest rows,
/// averaged over both walls; `variation` is the largest deviation from it.
struct WallTrace {
  double value = 0.0;
  double variation = 0.0;
};
WallTrace wall_trace(const Field& u);

/// Discrete Dirichlet energy of u with wall value c: spectral in x1,
/// ghost-reflected differences in x2 (the quadratic form of the Green solver).
double dirichlet_energy(const Field& u, double trace);

/// (integral |grad u|^2, Lambda_1 integral u^2). Requires zero mean and equal
/// constant traces on both walls; violations raise PreconditionError.
InequalityCheck check_poincare(const Field& u, const PoincareOptions& opts = {});

/// (integral v T v, integral v^2 / Lambda_1) for mean-zero v.
InequalityCheck check_energy_enstrophy(const PoissonSolver& solver, const Field& v,
                                       double mean_tolerance = 1e-8);

}  // namespace chanstab
