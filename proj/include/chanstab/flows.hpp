#pragma once

// Steady and traveling solutions -Lap psi = g(psi - lambda x2) with psi
// constant on each wall, their stability classification, the E_1 + shear
// decomposition, and the isolation cubic at the critical aspect ratio.

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "chanstab/green.hpp"
#include "chanstab/grid.hpp"

namespace chanstab {

/// A C^1 scalar function of one variable. The derivative falls back to a
/// centered finite difference when none is supplied.
struct ScalarFunction {
  std::function<double(double)> value;
  std::function<double(double)> derivative;
  // Set when the function is known to be affine: g(s) = slope * s + intercept.
  std::optional<double> slope;
  std::optional<double> intercept;

  double operator()(double s) const { return value(s); }
  double prime(double s) const;
  bool is_affine() const { return slope.has_value(); }

  static ScalarFunction affine(double slope, double intercept);
  /// Piecewise-linear interpolation through (s_k, g_k); s must be strictly increasing.
  static ScalarFunction from_samples(std::vector<double> s, std::vector<double> g);
};

struct SteadySpec {
  std::string kind;
  Field psi;        // stream function
  Field vorticity;  // -Lap psi
  ScalarFunction g;
  double lam = 0.0;  // wave speed
  double psi_bottom = 0.0;
  double psi_top = 0.0;
  std::pair<double, double> gprime_range{0.0, 0.0};

  double flux() const { return psi_top - psi_bottom; }
  /// (vorticity, flux): the flow's state for the vorticity equation.
  FlowState state() const { return {vorticity, flux()}; }
};

/// psi = a sin(m x2 + alpha) + b x2 + c; g(s) = m^2 (s - c), lambda = b.
SteadySpec shear_flow(double a, double m, double alpha, double b, double c, const GridSpec& grid);

/// psi = a sinh(m x2) + b x2 + c; g(s) = -m^2 (s - c), lambda = b.
SteadySpec hyperbolic_shear_flow(double a, double m, double b, double c, const GridSpec& grid);

/// psi = a cos(2pi x1/L) sin(pi x2/H) + b sin(2pi x1/L) sin(pi x2/H) + c x2 + d.
/// With Lc = 4pi^2/L^2 + pi^2/H^2: g(s) = Lc (s - d) and lambda = c.
SteadySpec e1_traveling_flow(double a, double b, double c, double d, const GridSpec& grid);

/// User-supplied stream function and g. The vorticity is taken as g(psi - lambda x2).
SteadySpec custom_steady(const Field& psi, double psi_bottom, double psi_top, ScalarFunction g,
                         double lam);

/// min/max of g' over the attained range of psi - lambda x2, padded by the
/// largest jump between neighbouring cells.
std::pair<double, double> gprime_range(const ScalarFunction& g, const Field& psi, double lam);

/// L2 norm over interior rows of -Lap_h psi - g(psi - lambda x2).
double residual_tvs1(const SteadySpec& spec);

enum class StabilityClass { Theorem1, Theorem2, Outside };
std::string to_string(StabilityClass c);

/// Theorem1: 0 <= min g' and max g' < Lambda_1; Theorem2: 0 <= min g' and
/// max g' <= Lambda_1; Outside otherwise. Comparisons carry a 1e-12 relative tolerance.
StabilityClass classify_conditions(const SteadySpec& spec, double L, double H);
StabilityClass classify_gprime(std::pair<double, double> range, double L, double H);

struct E1ShearDecomposition {
  Field e1;     // orthogonal projection of (omega - shear) onto E_1
  Field shear;  // x1-average of omega
  double residual = 0.0;
};

E1ShearDecomposition decompose_e1_shear(const Field& omega, double L, double H);

struct IsolationCubic {
  double p = 0.0;
  double q = 0.0;
  double r = 0.0;
  double mu = 0.0;
  // 2 x^3 + b2 x^2 + b1 x = b0
  double b2 = 0.0;
  double b1 = 0.0;
  double b0 = 0.0;
  std::vector<double> roots;                      // distinct real roots, ascending
  std::vector<std::pair<double, double>> pairs;   // admissible (x, y), y >= 0
};

/// Moment identities of a two-parameter E_1 family at H/L = sqrt(3)/2.
/// `shear_profile` holds the shear part at the n2 cell centers of (0, H).
IsolationCubic isolation_cubic(std::span<const double> shear_profile, double L, double H,
                               double alpha, double beta);

/// Distinct real roots (ascending) of c3 x^3 + c2 x^2 + c1 x + c0, c3 != 0.
std::vector<double> real_cubic_roots(double c3, double c2, double c1, double c0);

}  // namespace chanstab
