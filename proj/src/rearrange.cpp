#include "chanstab/rearrange.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <numeric>
#include <string>

#include "chanstab/error.hpp"
#include "chanstab/spectra.hpp"

namespace chanstab {

namespace {

void require_profile(const RearrangementProfile& profile, const GridSpec& grid) {
  if (profile.size() != grid.size()) {
    throw PreconditionError("rearrangement profile length does not match the grid");
  }
}

Field arrange(const RearrangementProfile& profile, const GridSpec& grid,
              std::span<const double> key) {
  const auto order = stable_argsort(key);
  Field out(grid);
  for (std::size_t k = 0; k < order.size(); ++k) out[order[k]] = profile.sorted_values[k];
  return out;
}

Field keyed(const Field& base, double mu) {
  Field key = base;
  const auto& g = base.grid();
  for (int j = 0; j < g.n2; ++j) {
    const double shift = mu * g.x2(j);
    for (int i = 0; i < g.n1; ++i) key(i, j) += shift;
  }
  return key;
}

double value_range(const Field& f) {
  const auto [lo, hi] = std::minmax_element(f.values().begin(), f.values().end());
  return *hi - *lo;
}

double default_impulse_tolerance(double i_min, double i_max) {
  const double span = i_max - i_min;
  return 1e-10 * std::max(span, 1e-2 * std::max(std::abs(i_max), std::abs(i_min))) + 1e-300;
}

// Walks from `from` to `to` (both permutations of the same values) by swaps
// that each settle one cell, and returns the intermediate whose impulse is
// closest to the target.
Field swap_path_closest(const Field& from, const Field& to, double target) {
  const auto& g = from.grid();
  const double area = g.cell_area();
  std::vector<std::size_t> diff;
  for (std::size_t c = 0; c < from.size(); ++c) {
    if (from[c] != to[c]) diff.push_back(c);
  }
  // Pending cells grouped by the value they currently hold.
  std::map<double, std::vector<std::size_t>> holders;
  for (auto it = diff.rbegin(); it != diff.rend(); ++it) holders[from[*it]].push_back(*it);

  auto y_of = [&](std::size_t c) { return g.x2(static_cast<int>(c / static_cast<std::size_t>(g.n1))); };

  Field w = from;
  double current = impulse(w);
  double best_gap = std::abs(current - target);
  std::size_t best_count = 0;
  std::vector<std::pair<std::size_t, std::size_t>> swaps;
  std::vector<char> settled(from.size(), 0);
  for (std::size_t c : diff) {
    const double want = to[c];
    const double have = w[c];
    settled[c] = 1;
    if (have == want) continue;
    auto& pool = holders[want];
    std::size_t d = c;
    while (!pool.empty()) {
      const std::size_t cand = pool.back();
      pool.pop_back();
      if (!settled[cand] && w[cand] == want) {
        d = cand;
        break;
      }
    }
    if (d == c) break;
    holders[have].push_back(d);
    current += area * (want - have) * (y_of(c) - y_of(d));
    std::swap(w[c], w[d]);
    swaps.emplace_back(c, d);
    const double gap = std::abs(current - target);
    if (gap < best_gap) {
      best_gap = gap;
      best_count = swaps.size();
    }
  }
  Field out = from;
  for (std::size_t k = 0; k < best_count; ++k) std::swap(out[swaps[k].first], out[swaps[k].second]);
  return out;
}

}  // namespace

RearrangementProfile RearrangementProfile::of(const Field& w) {
  RearrangementProfile p;
  p.sorted_values.assign(w.values().begin(), w.values().end());
  std::sort(p.sorted_values.begin(), p.sorted_values.end());
  return p;
}

RearrangementProfile RearrangementProfile::from_sorted(std::vector<double> values) {
  for (std::size_t k = 1; k < values.size(); ++k) {
    if (values[k] < values[k - 1]) throw PreconditionError("profile values are not nondecreasing");
  }
  RearrangementProfile p;
  p.sorted_values = std::move(values);
  return p;
}

std::vector<std::size_t> stable_argsort(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  return order;
}

bool same_rearrangement(const Field& v, const Field& w, double tol) {
  require_same_grid(v, w);
  return in_class(v, RearrangementProfile::of(w), tol);
}

bool in_class(const Field& v, const RearrangementProfile& profile, double tol) {
  require_profile(profile, v.grid());
  std::vector<double> a(v.values().begin(), v.values().end());
  std::sort(a.begin(), a.end());
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (!(std::abs(a[k] - profile.sorted_values[k]) <= tol)) return false;
  }
  return true;
}

double rearrangement_drift(const Field& v, const RearrangementProfile& profile) {
  require_profile(profile, v.grid());
  std::vector<double> a(v.values().begin(), v.values().end());
  std::sort(a.begin(), a.end());
  double sum = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) sum += std::abs(a[k] - profile.sorted_values[k]);
  return sum * v.grid().cell_area();
}

Field closest_rearrangement(const Field& v, const RearrangementProfile& profile, double p) {
  if (!(p >= 1.0) || !std::isfinite(p)) {
    throw PreconditionError("closest_rearrangement: p must be finite and >= 1");
  }
  require_profile(profile, v.grid());
  return arrange(profile, v.grid(), v.values());
}

Field monotone_rearrangement(const RearrangementProfile& profile, const Field& xi) {
  require_profile(profile, xi.grid());
  return arrange(profile, xi.grid(), xi.values());
}

std::pair<double, double> impulse_range(const RearrangementProfile& profile, const GridSpec& grid) {
  require_profile(profile, grid);
  const Field y = Field::x2_coordinate(grid);
  return {impulse(monotone_rearrangement(profile, -y)), impulse(monotone_rearrangement(profile, y))};
}

MultiplierResult impulse_multiplier(const PoissonSolver& solver, const RearrangementProfile& profile,
                                    const Field& base_xi, double target, const MultiplierOptions& opts) {
  const GridSpec& grid = solver.grid();
  if (!(base_xi.grid() == grid)) throw PreconditionError("impulse_multiplier: grid mismatch");
  require_profile(profile, grid);
  const auto [i_min, i_max] = impulse_range(profile, grid);
  const double tol = opts.tolerance > 0.0 ? opts.tolerance : default_impulse_tolerance(i_min, i_max);
  if (target > i_max + tol || target < i_min - tol) {
    throw PreconditionError("impulse_multiplier: target impulse outside the attainable range [" +
                            std::to_string(i_min) + ", " + std::to_string(i_max) + "]");
  }

  auto evaluate = [&](double mu) {
    MultiplierResult r;
    r.mu = mu;
    r.v = monotone_rearrangement(profile, keyed(base_xi, mu));
    r.impulse = impulse(r.v);
    return r;
  };

  MultiplierResult at0 = evaluate(0.0);
  if (std::abs(at0.impulse - target) <= tol) return at0;

  // Beyond |mu| = natural the x2 term separates rows and I reaches its extreme.
  const double natural = 2.0 * (value_range(base_xi) + 1.0) / grid.dx2();
  double half = opts.initial_bracket > 0.0 ? std::min(opts.initial_bracket, natural) : natural;
  const bool go_up = at0.impulse < target;
  MultiplierResult lo = go_up ? at0 : evaluate(-half);
  MultiplierResult hi = go_up ? evaluate(half) : at0;
  int bisections = 0;
  for (int grow = 0; grow < 64; ++grow) {
    MultiplierResult& far = go_up ? hi : lo;
    if (go_up ? far.impulse >= target - tol : far.impulse <= target + tol) break;
    half = 2.0 * half;
    far = evaluate(go_up ? half : -half);
    ++bisections;
  }
  if (std::abs(lo.impulse - target) <= tol) {
    lo.bisections = bisections;
    return lo;
  }
  if (std::abs(hi.impulse - target) <= tol) {
    hi.bisections = bisections;
    return hi;
  }

  const double stall = 1e-13 * std::max(half, natural);
  while (bisections < opts.max_bisections && hi.mu - lo.mu > stall) {
    MultiplierResult mid = evaluate(0.5 * (lo.mu + hi.mu));
    ++bisections;
    if (std::abs(mid.impulse - target) <= tol) {
      mid.bisections = bisections;
      return mid;
    }
    (mid.impulse < target ? lo : hi) = std::move(mid);
  }

  // I(mu) jumps across the target: settle the tied cells one swap at a time.
  MultiplierResult out;
  out.mu = 0.5 * (lo.mu + hi.mu);
  out.v = swap_path_closest(lo.v, hi.v, target);
  out.impulse = impulse(out.v);
  out.bisections = bisections;
  out.converged = std::abs(out.impulse - target) <= tol;
  return out;
}

MaximizeResult maximize_energy_constrained(
    const PoissonSolver& solver, const RearrangementProfile& profile, double target_impulse,
    const Field& init, const MaximizeOptions& opts,
    const std::function<void(int, const Field&, double, double)>& observer) {
  const GridSpec& grid = solver.grid();
  if (!(init.grid() == grid)) throw PreconditionError("maximize_energy_constrained: grid mismatch");
  require_profile(profile, grid);

  MaximizeResult res;
  Field omega = in_class(init, profile, 0.0) ? init : closest_rearrangement(init, profile);
  MultiplierOptions mopts = opts.multiplier;
  const auto [i_min, i_max] = impulse_range(profile, grid);
  const double tol_i = mopts.tolerance > 0.0 ? mopts.tolerance : default_impulse_tolerance(i_min, i_max);
  bool have_feasible = false;
  double energy_prev = 0.0;
  double impulse_prev = 0.0;

  auto accept = [&](const Field& v, double e, double imp, double mu) {
    omega = v;
    energy_prev = e;
    impulse_prev = imp;
    res.energy_trace.push_back(e);
    res.impulse_trace.push_back(imp);
    res.mu_trace.push_back(mu);
    if (std::abs(imp - target_impulse) > tol_i) res.impulse_exact = false;
    if (observer) observer(static_cast<int>(res.energy_trace.size()) - 1, v, e, imp);
  };

  if (const double imp = impulse(omega); std::abs(imp - target_impulse) <= tol_i) {
    accept(omega, solver.energy(omega), imp, 0.0);
    have_feasible = true;
  }

  double mu_prev = 0.0;
  for (int it = 0; it < opts.max_iterations; ++it) {
    res.iterations = it + 1;
    const Field psi = solver.green_apply(omega);
    if (mu_prev != 0.0) mopts.initial_bracket = 4.0 * std::abs(mu_prev);
    MultiplierResult m = impulse_multiplier(solver, profile, psi, target_impulse, mopts);
    mu_prev = m.mu;
    const double e = solver.energy(m.v);
    if (!have_feasible) {
      accept(m.v, e, m.impulse, m.mu);
      have_feasible = true;
      continue;
    }
    const double gain = e - energy_prev;
    const double slack =
        std::abs(m.mu) * std::abs(m.impulse - impulse_prev) + 1e-13 * std::abs(energy_prev);
    if (gain < -slack) {
      throw ConvergenceError("maximize_energy_constrained: energy decreased by " + std::to_string(-gain));
    }
    if (gain <= opts.tolerance * std::abs(energy_prev)) {
      if (gain > 0.0) accept(m.v, e, m.impulse, m.mu);
      res.converged = true;
      break;
    }
    accept(m.v, e, m.impulse, m.mu);
  }
  res.omega = omega;
  return res;
}

ScalarConvexPair ScalarConvexPair::quadratic(double c) {
  if (!(c > 0.0)) throw PreconditionError("ScalarConvexPair::quadratic: c must be positive");
  ScalarConvexPair p;
  p.G = [c](double s) { return 0.5 * c * s * s; };
  p.g = [c](double s) { return c * s; };
  p.Ghat = [c](double s) { return 0.5 * s * s / c; };
  p.s_min = -std::numeric_limits<double>::infinity();
  p.s_max = std::numeric_limits<double>::infinity();
  return p;
}

ScalarConvexPair ScalarConvexPair::sampled(const ScalarFunction& g, double tau_min, double tau_max,
                                           int n, double s_min, double s_max) {
  if (n < 2 || !(tau_max > tau_min) || !(s_max >= s_min)) {
    throw PreconditionError("ScalarConvexPair::sampled: bad sampling window");
  }
  auto tau = std::make_shared<std::vector<double>>(n);
  auto G = std::make_shared<std::vector<double>>(n);
  const double h = (tau_max - tau_min) / (n - 1);
  for (int k = 0; k < n; ++k) (*tau)[k] = tau_min + k * h;
  std::vector<double> gv(n);
  for (int k = 0; k < n; ++k) gv[k] = g((*tau)[k]);
  for (int k = 1; k < n; ++k) (*G)[k] = (*G)[k - 1] + 0.5 * h * (gv[k] + gv[k - 1]);
  // Normalize G to vanish at the sample nearest 0.
  const int k0 = std::clamp(static_cast<int>(std::lround(-tau_min / h)), 0, n - 1);
  const double offset = (*G)[k0];
  for (double& v : *G) v -= offset;

  ScalarConvexPair p;
  p.s_min = s_min;
  p.s_max = s_max;
  p.g = g.value;
  p.G = [G, h, tau_min, n](double t) {
    const double x = (t - tau_min) / h;
    const int k = std::clamp(static_cast<int>(std::floor(x)), 0, n - 2);
    const double w = x - k;
    return (1.0 - w) * (*G)[k] + w * (*G)[k + 1];
  };
  p.Ghat = [tau, G, s_min, s_max](double s) {
    if (s < s_min - 1e-12 * std::max(1.0, std::abs(s_min)) ||
        s > s_max + 1e-12 * std::max(1.0, std::abs(s_max))) {
      throw PreconditionError("Ghat evaluated outside its sampled interval");
    }
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < tau->size(); ++k) best = std::max(best, s * (*tau)[k] - (*G)[k]);
    return best;
  };
  return p;
}

ScalarFunction quadratic_tail_extension(const ScalarFunction& g, double a, double b, double c0) {
  if (!(b >= a) || !(c0 > 0.0)) throw PreconditionError("quadratic_tail_extension: need a <= b, c0 > 0");
  const double ga = g(a);
  const double gb = g(b);
  ScalarFunction out;
  out.value = [g, a, b, c0, ga, gb](double s) {
    if (s < a) return ga + c0 * (s - a);
    if (s > b) return gb + c0 * (s - b);
    return g(s);
  };
  out.derivative = [g, a, b, c0](double s) { return (s < a || s > b) ? c0 : g.prime(s); };
  return out;
}

ScalarConvexPair modified_pair(const ScalarFunction& g, double a, double b, double c0, double s_min,
                               double s_max, int n) {
  const ScalarFunction ext = quadratic_tail_extension(g, a, b, c0);
  // The supremum of s t - G(t) sits where g(t) = s; on the tails that is
  // t = a + (s - g(a)) / c0 or t = b + (s - g(b)) / c0.
  const double t_lo = std::min(a, a + (s_min - g(a)) / c0);
  const double t_hi = std::max(b, b + (s_max - g(b)) / c0);
  const double pad = 0.1 * (t_hi - t_lo) + 1.0;
  return ScalarConvexPair::sampled(ext, t_lo - pad, t_hi + pad, n, s_min, s_max);
}

LegendreReport legendre_check(const ScalarConvexPair& pair, const std::vector<double>& s_grid,
                              const std::vector<double>& tau_grid) {
  if (s_grid.empty() || tau_grid.empty()) throw PreconditionError("legendre_check: empty grid");
  LegendreReport rep;
  rep.worst_slack = std::numeric_limits<double>::infinity();
  std::vector<double> ghat(s_grid.size());
  for (std::size_t a = 0; a < s_grid.size(); ++a) {
    ghat[a] = pair.Ghat(s_grid[a]);
    if (!std::isfinite(ghat[a])) throw Error("legendre_check: Ghat is not finite on the s grid");
    if (a > 0) rep.s_resolution = std::max(rep.s_resolution, std::abs(s_grid[a] - s_grid[a - 1]));
  }
  for (double t : tau_grid) {
    const double Gt = pair.G(t);
    double best = std::numeric_limits<double>::infinity();
    double arg = s_grid.front();
    for (std::size_t a = 0; a < s_grid.size(); ++a) {
      const double slack = ghat[a] + Gt - s_grid[a] * t;
      if (slack < best) {
        best = slack;
        arg = s_grid[a];
      }
    }
    rep.worst_slack = std::min(rep.worst_slack, best);
    rep.minimizing_s.push_back(arg);
    rep.max_argmin_error = std::max(rep.max_argmin_error, std::abs(arg - pair.g(t)));
  }
  return rep;
}

EnergyGap energy_gap_check(const PoissonSolver& solver, const Field& omega_bar, const Field& rho,
                           double L, double H, std::optional<double> lambda1_value,
                           double mean_tolerance) {
  require_same_grid(omega_bar, rho);
  if (!(rho.grid() == solver.grid())) throw PreconditionError("energy_gap_check: grid mismatch");
  if (std::abs(integral_mean(rho)) > mean_tolerance * std::max(rho.max_abs(), 1e-300)) {
    throw PreconditionError("energy_gap_check: rho must have zero mean");
  }
  const double lam1 = lambda1_value ? *lambda1_value : lambda1(L, H).value;
  const Field psi_bar = solver.green_apply(omega_bar);
  const Field t_rho = solver.t_apply(rho);
  const double rtr = inner(rho, t_rho);
  EnergyGap gap;
  // E(w + r) - E(w) expanded exactly; avoids cancelling two large energies.
  gap.lhs_gap = -inner(psi_bar, rho) - 0.5 * inner(rho, solver.green_apply(rho));
  gap.scale = 0.5 * rtr;
  gap.rhs_bound = 0.5 * rtr - 0.5 * lam1 * inner(t_rho, t_rho);
  return gap;
}

}  // namespace chanstab
