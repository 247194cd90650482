#pragma once

// Discrete rearrangement classes: on equal-area cells two fields are
// equimeasurable exactly when one is a permutation of the other. On top of
// that sit sorted-pairing projections, the impulse-constrained energy
// maximization (Burton iteration) and the convex-conjugate inequality checks.

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "chanstab/flows.hpp"
#include "chanstab/green.hpp"
#include "chanstab/grid.hpp"

namespace chanstab {

struct RearrangementProfile {
  std::vector<double> sorted_values;  // nondecreasing

  static RearrangementProfile of(const Field& w);
  /// Validates the order; throws PreconditionError on a decreasing pair.
  static RearrangementProfile from_sorted(std::vector<double> values);
  std::size_t size() const { return sorted_values.size(); }
};

/// Max elementwise gap between the sorted value lists is at most tol.
bool same_rearrangement(const Field& v, const Field& w, double tol);
bool in_class(const Field& v, const RearrangementProfile& profile, double tol);

/// L1 distance between the sorted value lists of v and the profile, times the
/// cell area. Zero exactly when v is a permutation of the profile.
double rearrangement_drift(const Field& v, const RearrangementProfile& profile);

/// Cell order by value, ties broken by cell index.
std::vector<std::size_t> stable_argsort(std::span<const double> values);

/// The k-th smallest profile value goes to the cell holding the k-th smallest
/// value of v. Optimal for the L^p distance for every p >= 1.
Field closest_rearrangement(const Field& v, const RearrangementProfile& profile, double p = 2.0);

/// The k-th smallest profile value goes to the cell with the k-th smallest xi;
/// maximizes sum xi v over the class.
Field monotone_rearrangement(const RearrangementProfile& profile, const Field& xi);

struct MultiplierOptions {
  double tolerance = 0.0;       // absolute impulse tolerance; 0 picks 1e-10 * (I_max - I_min)
  double initial_bracket = 0.0;  // 0 derives the half-width from the range of base_xi
  int max_bisections = 200;
};

struct MultiplierResult {
  double mu = 0.0;
  Field v;
  double impulse = 0.0;
  int bisections = 0;
  // False when the step structure of I(mu) leaves the target between two
  // arrangements further apart than the tolerance; v is then the closest one found.
  bool converged = true;
};

/// Finds mu with |impulse(monotone_rearrangement(profile, base_xi + mu x2)) - target| <= tol.
/// Throws PreconditionError when the target lies outside [I_min, I_max].
MultiplierResult impulse_multiplier(const PoissonSolver& solver, const RearrangementProfile& profile,
                                    const Field& base_xi, double target_impulse,
                                    const MultiplierOptions& opts = {});

/// Impulse of the extreme arrangements (largest values at the bottom / at the top).
std::pair<double, double> impulse_range(const RearrangementProfile& profile, const GridSpec& grid);

struct MaximizeOptions {
  double tolerance = 1e-10;  // stop when the relative energy gain drops below this
  int max_iterations = 500;
  MultiplierOptions multiplier;
};

struct MaximizeResult {
  Field omega;
  std::vector<double> energy_trace;
  std::vector<double> impulse_trace;
  std::vector<double> mu_trace;
  int iterations = 0;
  bool converged = false;
  bool impulse_exact = true;  // every recorded iterate met the impulse tolerance
};

/// Burton iteration omega <- monotone_rearrangement(profile, G omega + mu x2)
/// under the impulse constraint. `observer`, when set, sees every accepted iterate.
MaximizeResult maximize_energy_constrained(
    const PoissonSolver& solver, const RearrangementProfile& profile, double target_impulse,
    const Field& init, const MaximizeOptions& opts = {},
    const std::function<void(int, const Field&, double, double)>& observer = {});

/// G (antiderivative of g) with its Legendre transform Ghat(s) = sup_t (s t - G(t)).
struct ScalarConvexPair {
  std::function<double(double)> G;
  std::function<double(double)> g;
  std::function<double(double)> Ghat;
  double s_min = 0.0;  // interval on which Ghat is available
  double s_max = 0.0;

  /// G(s) = c s^2 / 2 with Ghat(s) = s^2 / (2c); c > 0.
  static ScalarConvexPair quadratic(double c);
  /// G by cumulative trapezoid quadrature of g on n samples of [tau_min, tau_max],
  /// Ghat by the discrete supremum over those samples.
  static ScalarConvexPair sampled(const ScalarFunction& g, double tau_min, double tau_max, int n,
                                  double s_min, double s_max);
};

/// g on [a, b] continued by lines of slope c0 > 0 outside: G grows quadratically
/// and its transform is finite for every s.
ScalarFunction quadratic_tail_extension(const ScalarFunction& g, double a, double b, double c0);
/// sampled() pair for quadratic_tail_extension with a tau window wide enough that
/// every supremum over [s_min, s_max] is attained inside it.
ScalarConvexPair modified_pair(const ScalarFunction& g, double a, double b, double c0, double s_min,
                               double s_max, int n = 4001);

struct LegendreReport {
  double worst_slack = 0.0;            // min of Ghat(s) + G(t) - s t over the grid
  std::vector<double> minimizing_s;    // per tau
  double max_argmin_error = 0.0;       // max |minimizing_s - g(tau)|
  double s_resolution = 0.0;           // largest gap in the s grid
};

LegendreReport legendre_check(const ScalarConvexPair& pair, const std::vector<double>& s_grid,
                              const std::vector<double>& tau_grid);

struct EnergyGap {
  double lhs_gap = 0.0;    // E(omega_bar) - E(omega_bar + rho)
  double rhs_bound = 0.0;  // 1/2 int rho T rho - Lambda_1/2 int (T rho)^2
  double scale = 0.0;      // 1/2 int rho T rho
};

/// rho must have zero integral mean (relative tolerance `mean_tolerance` against
/// max|rho|). Lambda_1 defaults to the closed form for (L, H).
EnergyGap energy_gap_check(const PoissonSolver& solver, const Field& omega_bar, const Field& rho,
                           double L, double H, std::optional<double> lambda1_value = std::nullopt,
                           double mean_tolerance = 1e-10);

}  // namespace chanstab
