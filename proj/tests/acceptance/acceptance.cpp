// Acceptance suite: one PASS/FAIL line per criterion. Pass criterion numbers
// as arguments to run a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "chanstab/dynamics.hpp"
#include "chanstab/flows.hpp"
#include "chanstab/green.hpp"
#include "chanstab/lab.hpp"
#include "chanstab/rearrange.hpp"
#include "chanstab/spectra.hpp"

using namespace chanstab;

namespace {

constexpr double pi = std::numbers::pi;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Field random_field(const GridSpec& g, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Field f(g);
  for (double& v : f.values()) v = n(rng);
  return f;
}

Field random_smooth(const GridSpec& g, std::mt19937_64& rng, int modes) {
  std::normal_distribution<double> n(0.0, 1.0);
  Field f(g);
  for (int m = 0; m <= modes; ++m) {
    for (int k = 0; k <= modes; ++k) {
      const double a = n(rng) / (1 + m * m + k * k);
      const double b = n(rng) / (1 + m * m + k * k);
      for (int j = 0; j < g.n2; ++j) {
        const double y = std::cos(k * pi * g.x2(j) / g.H);
        for (int i = 0; i < g.n1; ++i) {
          const double x = 2 * pi * m * g.x1(i) / g.L;
          f(i, j) += (a * std::cos(x) + b * std::sin(x)) * y;
        }
      }
    }
  }
  return f;
}

Field remove_mean(Field f) {
  const double m = integral_mean(f);
  for (double& v : f.values()) v -= m;
  return f;
}

double rel_l2(const Field& a, const Field& b) { return l2_norm(a - b) / l2_norm(b); }

bool close_rel(double a, double b, double tol) { return std::abs(a - b) <= tol * std::abs(b); }

// ---------------------------------------------------------------------------

Outcome eigen_tables() {
  struct Case {
    double L, H, expect;
    int dim;
  };
  const Case cases[] = {{2 * pi, 2 * pi, 1.0, 2}, {2 * pi, pi, 2.0, 2}, {2.0, std::sqrt(3.0), 4 * pi * pi / 3, 4}};
  bool ok = true;
  std::string d;
  for (const auto& c : cases) {
    const FirstEigen e = lambda1(c.L, c.H);
    const PoissonSolver solver(GridSpec(c.L, c.H, 128, 128));
    const double num = verify_lambda1_numeric(solver);
    const bool good = close_rel(e.value, c.expect, 1e-12) && e.mode.dimension() == c.dim &&
                      close_rel(num, c.expect, 5e-3);
    ok = ok && good;
    d += fmt("[L=%.4g H=%.4g: closed %.6g dim %d numeric %.6g] ", c.L, c.H, e.value, e.mode.dimension(), num);
  }
  return {ok, d};
}

Outcome arnold_constants() {
  bool ok = true;
  std::string d;
  for (auto [L, H] : {std::pair{2 * pi, pi}, std::pair{2.0, std::sqrt(3.0)}}) {
    const PoissonSolver solver(GridSpec(L, H, 128, 128));
    const double c = arnold_constant(solver);
    const double expect = H * H / (pi * pi);
    ok = ok && close_rel(c, expect, 5e-3);
    d += fmt("[H=%.4g: %.6g vs %.6g] ", H, c, expect);
  }
  return {ok, d};
}

Outcome green_goldens() {
  auto error = [](int n2, int which) {
    const GridSpec g(2 * pi, pi, 32, n2);
    const PoissonSolver solver(g);
    const double L = g.L;
    const double H = g.H;
    Field w, exact;
    if (which == 0) {
      w = Field::from_function(g, [&](double, double y) { return std::sin(pi * y / H); });
      exact = w * (H * H / (pi * pi));
    } else if (which == 1) {
      w = Field(g, 1.0);
      exact = Field::from_function(g, [&](double, double y) { return y * (H - y) / 2; });
    } else {
      w = Field::from_function(g, [&](double x, double y) { return std::cos(2 * pi * x / L) * std::sin(pi * y / H); });
      exact = w * (1.0 / (4 * pi * pi / (L * L) + pi * pi / (H * H)));
    }
    return rel_l2(solver.green_apply(w), exact);
  };
  bool ok = true;
  std::string d;
  for (int which = 0; which < 3; ++which) {
    const double e64 = error(64, which);
    const double e128 = error(128, which);
    const double order = std::log2(e64 / e128);
    ok = ok && e64 <= 4.0 / (64.0 * 64.0) && e128 <= 4.0 / (128.0 * 128.0) && order >= 1.9;
    d += fmt("[case %d: %.2e %.2e order %.3f] ", which, e64, e128, order);
  }
  return {ok, d};
}

Outcome conservation() {
  const GridSpec g(2 * pi, pi, 256, 128);
  const PoissonSolver solver(g);
  const SteadySpec e = e1_traveling_flow(1, 0.5, 0, 0, g);
  const FlowState s = e.state();
  const double dt = cfl_time_step(solver, s, 0.5);
  const SimulationResult r = simulate(solver, s, 20.0, dt, 50);
  if (r.aborted) return {false, "run aborted: " + r.abort_reason};
  const AdmissibilitySummary a = admissibility_report(r.records, s.vorticity);
  bool ok = a.energy_drift <= 1e-4 && a.impulse_drift <= 1e-6 && a.flux_drift == 0.0;
  for (double m : a.moment_drift) ok = ok && m <= 1e-3;
  std::string d = fmt("steps %d; E %.2e K %.2e I %.2e Q %.1e m1..m4 %.2e %.2e %.2e %.2e", r.steps, a.energy_drift,
                      a.kinetic_drift, a.impulse_drift, a.flux_drift, a.moment_drift[0], a.moment_drift[1],
                      a.moment_drift[2], a.moment_drift[3]);

  // Not gated: the same run from data perturbed by 1e-2, where the Jacobian no
  // longer vanishes on the grid.
  std::mt19937_64 rng(4);
  Field rho = random_smooth(g, rng, 3);
  Field w = s.vorticity;
  w.axpy(1e-2 / l2_norm(rho), rho);
  const FlowState sp{w, s.flux};
  const SimulationResult rp = simulate(solver, sp, 20.0, 0.9 * cfl_time_step(solver, sp, 0.5), 50);
  if (!rp.aborted) {
    const AdmissibilitySummary b = admissibility_report(rp.records, w);
    d += fmt(" | perturbed (info): E %.2e I %.2e m1..m4 %.2e %.2e %.2e %.2e", b.energy_drift, b.impulse_drift,
             b.moment_drift[0], b.moment_drift[1], b.moment_drift[2], b.moment_drift[3]);
  }
  return {ok, d};
}

Outcome transport() {
  const GridSpec g(2 * pi, pi, 256, 128);
  const PoissonSolver solver(g);
  const double c = 0.3;
  const SteadySpec e = e1_traveling_flow(1, 0, c, 0, g);
  const FlowState s = e.state();
  const double dt = 0.9 * cfl_time_step(solver, s, 0.5);
  std::vector<double> times, shifts;
  SimulationOptions opts;
  opts.on_record = [&](const DiagnosticsRecord& rec, const FlowState& st) {
    times.push_back(rec.t);
    shifts.push_back(correlation_shift(st.vorticity, e.vorticity));
  };
  const SimulationResult r = simulate(solver, s, 10.0, dt, 20, opts);
  if (r.aborted) return {false, "run aborted: " + r.abort_reason};
  const std::vector<double> un = unwrap_periodic(shifts, g.L);
  double worst = 0.0;
  for (std::size_t k = 0; k < un.size(); ++k) worst = std::max(worst, std::abs(un[k] - c * times[k]));
  return {worst <= g.dx1(), fmt("%zu records; max |shift - c t| = %.3e, cell width %.3e", un.size(), worst, g.dx1())};
}

Outcome galilean() {
  const GridSpec g(2 * pi, pi, 256, 128);
  const PoissonSolver solver(g);
  const SteadySpec e = e1_traveling_flow(1, 0.5, 0, 0, g);
  const double scale = residual_tvs1(e) / l2_norm(e.vorticity);
  const double T = 2.0;
  const double lam = 16 * g.dx1() / T;
  std::mt19937_64 rng(2024);
  bool ok = true;
  std::string d = fmt("residual scale %.3e; ", scale);
  for (double amp : {0.0, 1e-2}) {
    Field w = e.vorticity;
    if (amp > 0.0) {
      Field rho = random_smooth(g, rng, 3);
      w.axpy(amp / l2_norm(rho), rho);
    }
    const FlowState s{w, 0.0};
    StepOptions so;
    const double dt = 0.9 * std::min(cfl_time_step(solver, s, 0.5),
                                     cfl_time_step(solver, FlowState{w, lam * g.H}, 0.5));
    const double gap = galilean_pair_check(solver, s, lam, T, dt, so);
    ok = ok && gap <= 2.0 * scale;
    d += fmt("[perturbation %.0e: %.3e] ", amp, gap);
  }
  return {ok, d};
}

Outcome rearrangement_oracles() {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<int> size(2, 7);
  int closest_fail = 0, monotone_fail = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = size(rng);
    const GridSpec g(1.0, 1.0, n, 1);
    std::vector<double> vv(n), pv(n), xv(n);
    for (int k = 0; k < n; ++k) {
      // Occasional repeated values exercise the tie-break.
      vv[k] = trial % 5 == 0 ? std::round(3 * u(rng)) : u(rng);
      pv[k] = trial % 7 == 0 ? std::round(3 * u(rng)) : u(rng);
      xv[k] = u(rng);
    }
    std::sort(pv.begin(), pv.end());
    const auto prof = RearrangementProfile::from_sorted(pv);
    const Field v(g, vv);
    const Field xi(g, xv);
    const double p = std::array{1.5, 2.0, 3.0}[trial % 3];
    const double got = lp_distance(closest_rearrangement(v, prof, p), v, p);
    const double got_lin = inner(monotone_rearrangement(prof, xi), xi);
    double best = 1e300;
    double best_lin = -1e300;
    std::vector<double> perm = pv;
    do {
      best = std::min(best, lp_distance(Field(g, perm), v, p));
      best_lin = std::max(best_lin, inner(Field(g, perm), xi));
    } while (std::next_permutation(perm.begin(), perm.end()));
    // Equal objective values can differ in the last bits through summation order.
    if (got > best * (1 + 1e-14) + 1e-300) ++closest_fail;
    if (got_lin < best_lin - 1e-14 * std::abs(best_lin)) ++monotone_fail;
  }
  return {closest_fail == 0 && monotone_fail == 0,
          fmt("1000 trials each; closest beaten %d times, monotone beaten %d times", closest_fail, monotone_fail)};
}

Outcome maximizer_unique() {
  const GridSpec g(2 * pi, pi, 128, 128);
  const PoissonSolver solver(g);
  const Field bar = Field::from_function(g, [](double, double y) { return std::sin(y); });
  const MaximizeReport rep = run_multistart_maximization(solver, bar, 20, 11, {});
  bool ok = true;
  double worst = 0.0;
  int nondecreasing = 0;
  for (const auto& run : rep.runs) {
    const auto& e = run.result.energy_trace;
    bool mono = true;
    for (std::size_t k = 1; k < e.size(); ++k) mono = mono && e[k] >= e[k - 1] - 1e-13 * std::abs(e[k]);
    nondecreasing += mono;
    worst = std::max(worst, run.final_distance / rep.reference_norm);
    ok = ok && mono && run.result.converged && run.final_distance <= 5e-3 * rep.reference_norm;
  }
  return {ok, fmt("20 starts; worst relative distance %.3e; %d/20 traces nondecreasing", worst, nondecreasing)};
}

Outcome maximizer_pair() {
  const GridSpec g(2.0, std::sqrt(3.0), 128, 128);
  const PoissonSolver solver(g);
  const Field bar = Field::from_function(g, [&](double, double y) { return std::cos(2 * pi * y / g.H); });
  const double ebar = solver.energy(bar);
  const MaximizeReport rep = run_multistart_maximization(solver, bar, 40, 19, {});
  int plus = 0, minus = 0, near = 0, elsewhere = 0;
  double worst = 0.0;
  double top_other = -1e300;
  for (const auto& run : rep.runs) {
    const double dp = run.final_distance / rep.reference_norm;
    const double dm = run.final_distance_negated / rep.reference_norm;
    const double d = std::min(dp, dm);
    worst = std::max(worst, d);
    if (d <= 5e-3) {
      (dp <= dm ? plus : minus)++;
    } else {
      top_other = std::max(top_other, run.result.energy_trace.back());
      (d <= 0.1 ? near : elsewhere)++;
    }
  }
  const bool ok = plus + minus == 40 && plus > 0 && minus > 0;
  return {ok, fmt("40 starts; within 5e-3 of +bar %d, of -bar %d; within 0.1 but not 5e-3 %d; elsewhere %d; "
                  "worst distance %.3e; best energy off the pair %.8g vs E(bar) %.8g",
                  plus, minus, near, elsewhere, worst, top_other, ebar)};
}

Outcome cubic_example() {
  const std::vector<double> zero(128, 0.0);
  const IsolationCubic c = isolation_cubic(zero, 2.0, std::sqrt(3.0), 3.0, 1.0);
  const double x2 = (1 - std::sqrt(3.0)) / 2;
  const double y2 = std::sqrt(3 - 2 * x2 * x2);
  bool ok = c.pairs.size() == 2;
  if (ok) {
    ok = std::abs(c.pairs[0].first + 1) <= 1e-9 && std::abs(c.pairs[0].second - 1) <= 1e-9 &&
         std::abs(c.pairs[1].first - x2) <= 1e-9 && std::abs(c.pairs[1].second - y2) <= 1e-9 &&
         std::abs(c.pairs[0].first - c.pairs[1].first) > 1e-9;
  }
  std::string d = fmt("%zu pairs:", c.pairs.size());
  for (const auto& [x, y] : c.pairs) d += fmt(" (%.12f, %.12f)", x, y);
  return {ok, d};
}

// Swaps (i, j1) <-> (i, j2) and their mirror images about H/2. For vorticity
// symmetric under x2 -> H - x2 the impulse is unchanged.
Field mirrored_swaps(Field w, std::mt19937_64& rng, int count) {
  const GridSpec& g = w.grid();
  std::uniform_int_distribution<int> col(0, g.n1 - 1);
  std::uniform_int_distribution<int> row(0, g.n2 / 2 - 1);
  for (int c = 0; c < count; ++c) {
    const int i = col(rng);
    const int j1 = row(rng);
    const int j2 = row(rng);
    std::swap(w(i, j1), w(i, j2));
    std::swap(w(i, g.n2 - 1 - j1), w(i, g.n2 - 1 - j2));
  }
  return w;
}

// Rotates randomly chosen rows by random cell counts; row sums, hence the
// impulse, are unchanged.
Field row_rotations(const Field& w, std::mt19937_64& rng) {
  const GridSpec& g = w.grid();
  std::uniform_int_distribution<int> shift(0, g.n1 - 1);
  std::bernoulli_distribution pick(0.3);
  Field out = w;
  for (int j = 0; j < g.n2; ++j) {
    if (!pick(rng)) continue;
    const int k = shift(rng);
    for (int i = 0; i < g.n1; ++i) out(i, j) = w((i + k) % g.n1, j);
  }
  return out;
}

Outcome inequality_suite() {
  std::mt19937_64 rng(99);
  const GridSpec g(2 * pi, pi, 64, 64);
  const PoissonSolver solver(g);
  std::vector<Field> modes;
  for (const auto& m : eigenvalue_table(g.L, g.H, 8)) {
    for (auto& b : m.basis(g)) modes.push_back(std::move(b));
  }
  std::normal_distribution<double> normal(0.0, 1.0);
  double worst_p = 1e300, worst_e = 1e300;
  for (int k = 0; k < 500; ++k) {
    // Admissible: zero mean and one constant trace on both walls. T of smooth
    // data and finite sums of eigenmodes both qualify.
    Field u(g);
    if (k % 2 == 0) {
      u = solver.t_apply(remove_mean(random_smooth(g, rng, 6)));
    } else {
      for (const auto& m : modes) u.axpy(normal(rng), m);
    }
    const InequalityCheck p = check_poincare(u);
    worst_p = std::min(worst_p, p.lhs - p.rhs);
    const Field v = remove_mean(k % 2 ? random_field(g, rng) : random_smooth(g, rng, 6));
    const InequalityCheck e = check_energy_enstrophy(solver, v);
    worst_e = std::min(worst_e, e.rhs - e.lhs);
  }
  bool eq = true;
  for (const auto& b : lambda1(g.L, g.H).basis(g)) {
    eq = eq && check_poincare(b).equality && check_energy_enstrophy(solver, b).equality;
  }

  struct Bar {
    const char* name;
    Field omega;
    bool symmetric;
  };
  const std::vector<Bar> bars = {
      {"shear m=1", shear_flow(1, 1, 0, 0, 0, g).vorticity, true},
      {"e1", e1_traveling_flow(1, 0, 0, 0, g).vorticity, true},
      {"e1 mixed", e1_traveling_flow(0.6, 0.8, 0.2, 0, g).vorticity, true},
  };
  double worst_gap = 1e300;
  double worst_rhs = 1e300;
  int pairs = 0;
  for (int k = 0; k < 200; ++k) {
    const Bar& b = bars[k % bars.size()];
    Field v = b.omega;
    if (k % 2 == 0 || b.name[0] == 's') {
      v = mirrored_swaps(v, rng, 1 + k % 40);
    } else {
      v = row_rotations(v, rng);
    }
    const Field rho = v - b.omega;
    const EnergyGap gap = energy_gap_check(solver, b.omega, rho, g.L, g.H);
    worst_gap = std::min(worst_gap, gap.lhs_gap - gap.rhs_bound);
    worst_rhs = std::min(worst_rhs, gap.rhs_bound / std::max(gap.scale, 1e-300));
    ++pairs;
  }

  std::vector<double> s, tau;
  for (int k = 0; k <= 800; ++k) s.push_back(-4.0 + 0.01 * k);
  for (int k = 0; k <= 60; ++k) tau.push_back(-3.0 + 0.1 * k);
  const LegendreReport leg = legendre_check(ScalarConvexPair::quadratic(1.0), s, tau);

  const bool ok = worst_p >= -1e-8 && worst_e >= -1e-8 && eq && worst_gap >= -1e-8 && leg.worst_slack >= -1e-10;
  return {ok, fmt("Poincare min slack %.3e; energy-enstrophy min slack %.3e; E1 equality %s; "
                  "energy gap %d pairs min lhs-rhs %.3e (min rhs/scale %.3e); Legendre min slack %.3e",
                  worst_p, worst_e, eq ? "yes" : "no", pairs, worst_gap, worst_rhs, leg.worst_slack)};
}

Outcome stability_experiments() {
  struct Scenario {
    const char* name;
    const char* flow;
    const char* experiment;
    bool orbital;
  };
  const Scenario scenarios[] = {
      {"shear", R"({"kind": "shear", "m": 1})", "stability", false},
      {"monotone", R"({"kind": "monotone", "profile": "tanh", "amplitude": 1, "width": 0.3})", "monotone-shear", false},
      {"e1", R"({"kind": "e1", "a": 1, "b": 0.5})", "stability", true},
  };
  bool ok = true;
  std::string d;
  for (const auto& sc : scenarios) {
    for (double delta : {1e-2, 1e-3}) {
      Json j;
      j["name"] = sc.name;
      j["experiment"] = sc.experiment;
      j["grid"] = {{"L", "2*pi"}, {"H", "pi"}, {"n1", 256}, {"n2", 128}};
      j["flow"] = Json::parse(sc.flow);
      j["perturbation"] = {{"mode", "random-smooth"}, {"amplitude", delta}, {"seed", 5}};
      j["run"] = {{"T", 50.0}, {"cfl", 0.5}};
      const auto t0 = std::chrono::steady_clock::now();
      const StabilityReport r = run_and_write(ExperimentConfig::from_json(j), j);
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      const double metric = sc.orbital ? r.sup_orbital : r.sup_plain;
      const bool good = !r.aborted && metric <= 5 * delta;
      ok = ok && good;
      // Enstrophy drift on the scale of the perturbation's own enstrophy.
      double z_drift = 0.0;
      for (const auto& rec : r.records) {
        z_drift = std::max(z_drift, std::abs(rec.moments[1] - r.records.front().moments[1]));
      }
      d += fmt("[%s d=%.0e: sup %s %.3e (plain %.3e), E drift %.1e, m2 drift/d^2 %.2f, %.0fs] ", sc.name, delta,
               sc.orbital ? "orbital" : "plain", metric, r.sup_plain, r.admissibility.energy_drift,
               z_drift / (delta * delta), secs);
    }
  }
  return {ok, d};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"eigen tables", eigen_tables},
      {"Arnold constant", arnold_constants},
      {"Green operator goldens", green_goldens},
      {"conservation", conservation},
      {"traveling transport", transport},
      {"Galilean pair", galilean},
      {"rearrangement oracles", rearrangement_oracles},
      {"maximizer uniqueness", maximizer_unique},
      {"two-point maximizer set", maximizer_pair},
      {"isolation cubic", cubic_example},
      {"inequality suite", inequality_suite},
      {"stability experiments", stability_experiments},
  };
  std::set<int> only;
  for (int a = 1; a < argc; ++a) only.insert(std::atoi(argv[a]));
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const int id = static_cast<int>(k) + 1;
    if (!only.empty() && !only.count(id)) continue;
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s %2d %s: %s\n", o.pass ? "PASS" : "FAIL", id, criteria[k].first, o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
