#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "chanstab/error.hpp"
#include "chanstab/flows.hpp"
#include "chanstab/rearrange.hpp"
#include "chanstab/spectra.hpp"
#include "support.hpp"

using namespace chanstab;
using testing_support::pi;

namespace {

Field cells(std::vector<double> v) {
  const GridSpec g(1.0, 1.0, static_cast<int>(v.size()), 1);
  return Field(g, std::move(v));
}

// Swaps (i, j1) <-> (i, j2) and the mirrored pair in column i2. For a profile
// symmetric about H/2 the impulse changes cancel.
Field mirrored_swaps(const Field& w, int i, int i2, int j1, int j2) {
  Field v = w;
  const int n2 = w.grid().n2;
  std::swap(v(i, j1), v(i, j2));
  std::swap(v(i2, n2 - 1 - j1), v(i2, n2 - 1 - j2));
  return v;
}

// Largest impulse change from exchanging two adjacent profile values.
double single_swap_step(const RearrangementProfile& prof, const GridSpec& g) {
  double gap = 0.0;
  for (std::size_t k = 1; k < prof.size(); ++k) gap = std::max(gap, prof.sorted_values[k] - prof.sorted_values[k - 1]);
  return gap * g.H * g.cell_area();
}

}  // namespace

TEST_SUITE("rearrange") {

TEST_CASE("same rearrangement") {
  const GridSpec g(2 * pi, pi, 16, 32);
  const Field v = testing_support::random_field(g, 1);
  CHECK(same_rearrangement(v, shift_cells(v, 3), 0.0));
  const Field c = Field::from_function(g, [&](double, double y) { return std::cos(2 * pi * y / g.H); });
  CHECK(same_rearrangement(c, -c, 1e-12));
  Field w = v;
  for (double& x : w.values()) x += 1e-3;
  CHECK_FALSE(same_rearrangement(v, w, 1e-6));
  CHECK(rearrangement_drift(w, RearrangementProfile::of(v)) == doctest::Approx(1e-3 * g.L * g.H));
  CHECK_THROWS_AS(RearrangementProfile::from_sorted({1, 0}), PreconditionError);
}

TEST_CASE("closest rearrangement examples") {
  const Field v = cells({3, 1, 2});
  const auto prof = RearrangementProfile::from_sorted({10, 20, 30});
  const Field out = closest_rearrangement(v, prof);
  CHECK(out[0] == 30);
  CHECK(out[1] == 10);
  CHECK(out[2] == 20);
  const Field same = closest_rearrangement(v, RearrangementProfile::of(v));
  CHECK((same - v).max_abs() == 0.0);
  const Field flat = closest_rearrangement(cells({5, 5, 5}), prof);
  CHECK(flat[0] == 10);
  CHECK(flat[1] == 20);
  CHECK(flat[2] == 30);
}

TEST_CASE("monotone rearrangement examples") {
  const auto prof = RearrangementProfile::from_sorted({1, 2, 3});
  const Field out = monotone_rearrangement(prof, cells({0.1, 0.5, 0.3}));
  CHECK(out[0] == 1);
  CHECK(out[1] == 3);
  CHECK(out[2] == 2);
  const Field w = cells({2, 3, 1});
  CHECK((monotone_rearrangement(RearrangementProfile::of(w), w) - w).max_abs() == 0.0);
  const Field flat = monotone_rearrangement(prof, cells({0, 0, 0}));
  CHECK(flat[0] == 1);
  CHECK(flat[2] == 3);
}

TEST_CASE("sorted pairing beats every permutation") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + trial % 5;
    std::vector<double> vv(n), pv(n), xv(n);
    for (int k = 0; k < n; ++k) {
      vv[k] = u(rng);
      pv[k] = u(rng);
      xv[k] = u(rng);
    }
    std::sort(pv.begin(), pv.end());
    const auto prof = RearrangementProfile::from_sorted(pv);
    const Field v = cells(vv);
    const Field xi = cells(xv);
    for (double p : {1.5, 2.0, 3.0}) {
      const double got = lp_distance(closest_rearrangement(v, prof, p), v, p);
      std::vector<double> perm = pv;
      do {
        CHECK(got <= lp_distance(cells(perm), v, p) + 1e-12);
      } while (std::next_permutation(perm.begin(), perm.end()));
    }
    const double best = inner(monotone_rearrangement(prof, xi), xi);
    std::vector<double> perm = pv;
    do {
      CHECK(best >= inner(cells(perm), xi) - 1e-12);
    } while (std::next_permutation(perm.begin(), perm.end()));
  }
}

TEST_CASE("monotone rearrangement is an increasing function of xi") {
  const GridSpec g(1, 1, 12, 10);
  const Field xi = testing_support::random_field(g, 3);
  const Field w = testing_support::random_field(g, 4);
  const Field out = monotone_rearrangement(RearrangementProfile::of(w), xi);
  const auto order = stable_argsort(xi.values());
  for (std::size_t k = 1; k < order.size(); ++k) CHECK(out[order[k]] >= out[order[k - 1]]);
  CHECK(same_rearrangement(out, w, 0.0));
}

TEST_CASE("impulse multiplier") {
  const GridSpec g(1.0, 1.0, 4, 4);
  const PoissonSolver solver(g);
  std::vector<double> two(16, 0.0);
  std::fill(two.begin() + 8, two.end(), 1.0);
  const auto prof = RearrangementProfile::from_sorted(two);
  const auto [lo, hi] = impulse_range(prof, g);
  CHECK(lo < hi);
  const Field zero(g);

  const MultiplierResult top = impulse_multiplier(solver, prof, zero, hi);
  CHECK(top.impulse == doctest::Approx(hi));
  const MultiplierResult bottom = impulse_multiplier(solver, prof, zero, lo);
  CHECK(bottom.impulse == doctest::Approx(lo));
  CHECK(bottom.mu < 0.0);

  const double mid = 0.5 * (lo + hi);
  const MultiplierResult m = impulse_multiplier(solver, prof, zero, mid);
  CHECK(m.bisections <= 60);
  CHECK(same_rearrangement(m.v, Field(g, two), 0.0));
  // One swap moves at most the full height times a cell area.
  CHECK(std::abs(m.impulse - mid) <= g.H * g.cell_area());

  const Field xi = testing_support::random_field(g, 5);
  const double at0 = impulse(monotone_rearrangement(prof, xi));
  const MultiplierResult same = impulse_multiplier(solver, prof, xi, at0);
  CHECK(same.mu == 0.0);
  CHECK(same.bisections == 0);

  CHECK_THROWS_AS(impulse_multiplier(solver, prof, zero, hi + 1.0), PreconditionError);
}

TEST_CASE("impulse multiplier on a continuous profile") {
  const GridSpec g(2 * pi, pi, 16, 16);
  const PoissonSolver solver(g);
  const Field w = testing_support::random_field(g, 9);
  const auto prof = RearrangementProfile::of(w);
  const auto [lo, hi] = impulse_range(prof, g);
  MultiplierOptions opts;
  opts.tolerance = 1e-6 * (hi - lo);
  const double step = single_swap_step(prof, g);
  int converged = 0;
  for (double t : {0.1, 0.37, 0.5, 0.8}) {
    const double target = lo + t * (hi - lo);
    const MultiplierResult m = impulse_multiplier(solver, prof, solver.green_apply(w), target, opts);
    CHECK(same_rearrangement(m.v, w, 0.0));
    if (m.converged) {
      ++converged;
      CHECK(std::abs(m.impulse - target) <= opts.tolerance);
    } else {
      CHECK(std::abs(m.impulse - target) <= step);
    }
  }
  // The smooth part of I(mu) is hit for loose tolerances.
  opts.tolerance = step;
  for (double t : {0.1, 0.37, 0.5, 0.8}) {
    const MultiplierResult m = impulse_multiplier(solver, prof, solver.green_apply(w), lo + t * (hi - lo), opts);
    CHECK(m.converged);
  }
}

TEST_CASE("constrained maximization") {
  const GridSpec g(2 * pi, pi, 16, 16);
  const PoissonSolver solver(g);
  const Field bar = Field::from_function(g, [](double, double y) { return std::sin(y); });
  const auto prof = RearrangementProfile::of(bar);
  const double target = impulse(bar);
  std::vector<double> vals(bar.values().begin(), bar.values().end());
  std::mt19937_64 rng(11);
  std::shuffle(vals.begin(), vals.end(), rng);
  std::vector<Field> iterates;
  const MaximizeResult r = maximize_energy_constrained(
      solver, prof, target, Field(g, vals), {},
      [&](int, const Field& v, double, double) { iterates.push_back(v); });
  CHECK(r.converged);
  // The first projection of a random start can stall between two arrangements
  // one swap apart; later iterates meet the default tolerance.
  REQUIRE(r.impulse_trace.size() >= 2);
  CHECK(std::abs(r.impulse_trace[0] - target) <= single_swap_step(prof, g));
  const auto [ilo, ihi] = impulse_range(prof, g);
  for (std::size_t k = 1; k < r.impulse_trace.size(); ++k) {
    CHECK(std::abs(r.impulse_trace[k] - target) <= 1e-10 * (ihi - ilo));
  }
  for (std::size_t k = 1; k < r.energy_trace.size(); ++k) {
    CHECK(r.energy_trace[k] >= r.energy_trace[k - 1] - 1e-13 * std::abs(r.energy_trace[k]));
  }
  for (const Field& v : iterates) CHECK(same_rearrangement(v, bar, 0.0));
  CHECK(l2_norm(r.omega - bar) <= 5e-3 * l2_norm(bar));
}

TEST_CASE("constant profile is a singleton class") {
  const GridSpec g(1.0, 1.0, 6, 6);
  const PoissonSolver solver(g);
  const Field c(g, 2.5);
  const MaximizeResult r = maximize_energy_constrained(solver, RearrangementProfile::of(c), impulse(c), c);
  CHECK(r.converged);
  CHECK(r.iterations == 1);
  CHECK((r.omega - c).max_abs() == 0.0);
}

TEST_CASE("Legendre transform") {
  std::vector<double> s, tau;
  for (int k = 0; k <= 400; ++k) s.push_back(-4.0 + 0.02 * k);
  for (int k = 0; k <= 40; ++k) tau.push_back(-2.0 + 0.1 * k);
  const LegendreReport q = legendre_check(ScalarConvexPair::quadratic(1.0), s, tau);
  CHECK(q.worst_slack >= -1e-10);
  CHECK(q.max_argmin_error <= q.s_resolution);

  const double lam = 2.0;
  const auto pair = ScalarConvexPair::quadratic(lam);
  CHECK(pair.Ghat(1.0) == doctest::Approx(1.0 / (2 * lam)));
  const LegendreReport l = legendre_check(pair, s, tau);
  CHECK(l.worst_slack >= -1e-10);
  CHECK(l.max_argmin_error <= l.s_resolution);

  ScalarFunction cubicish;
  cubicish.value = [](double t) { return t + 0.1 * t * t * t; };
  const auto mod = modified_pair(cubicish, -1.0, 1.0, 0.5, -4.0, 4.0);
  for (double x : s) CHECK(std::isfinite(mod.Ghat(x)));
  const LegendreReport m = legendre_check(mod, s, tau);
  CHECK(m.worst_slack >= -1e-6);

  const auto ext = quadratic_tail_extension(cubicish, -1.0, 1.0, 0.5);
  CHECK(ext(3.0) == doctest::Approx(1.1 + 0.5 * 2.0));
  CHECK(ext.prime(-3.0) == doctest::Approx(0.5));
}

TEST_CASE("energy gap") {
  const GridSpec g(2 * pi, pi, 32, 32);
  const PoissonSolver solver(g);
  const double L = g.L;
  const double H = g.H;
  const Field bar = shear_flow(1, 1, 0, 0, 0, g).vorticity;

  const EnergyGap zero = energy_gap_check(solver, bar, Field(g), L, H);
  CHECK(zero.lhs_gap == 0.0);
  CHECK(zero.rhs_bound == 0.0);

  const Field e1 = Field::from_function(g, [](double x, double y) { return std::cos(x) * std::sin(y); });
  const EnergyGap eq = energy_gap_check(solver, bar, e1, L, H);
  CHECK(std::abs(eq.rhs_bound) <= 5e-3 * eq.scale);

  // Second eigenvalue 4 with cos(2 x2): rhs = (1 - 2/4) * scale.
  const Field second = Field::from_function(g, [](double, double y) { return std::cos(2 * y); });
  const EnergyGap sec = energy_gap_check(solver, bar, second, L, H);
  CHECK(sec.rhs_bound == doctest::Approx(0.5 * sec.scale).epsilon(5e-3));
  CHECK(sec.rhs_bound > 0.0);

  for (int t = 0; t < 20; ++t) {
    const int j1 = t % 7;
    const int j2 = 9 + (3 * t) % 13;
    const Field v = mirrored_swaps(bar, t % 32, (5 * t + 3) % 32, j1, j2);
    const Field rho = v - bar;
    REQUIRE(std::abs(impulse(v) - impulse(bar)) < 1e-13);
    const EnergyGap gap = energy_gap_check(solver, bar, rho, L, H);
    CHECK(gap.lhs_gap >= gap.rhs_bound - 1e-8);
  }

  const SteadySpec e = e1_traveling_flow(1, 0.5, 0, 0, g);
  for (int k = 1; k < 6; ++k) {
    const Field rho = shift_cells(e.vorticity, 3 * k) - e.vorticity;
    const EnergyGap gap = energy_gap_check(solver, e.vorticity, rho, L, H);
    CHECK(gap.lhs_gap >= gap.rhs_bound - 1e-8);
  }

  Field off(g, 1.0);
  CHECK_THROWS_AS(energy_gap_check(solver, bar, off, L, H), PreconditionError);
}

}
