#include "chanstab/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <numbers>

#include "chanstab/error.hpp"

namespace chanstab {

namespace {

constexpr double kPi = std::numbers::pi;

// Row-wise x2-derivative of a row spectrum, same stencil as d_dx2.
RowSpectrum ddx2_spectral(const RowSpectrum& s, double h) {
  RowSpectrum out = s;
  const int n2 = s.n2;
  const double inv2h = 1.0 / (2.0 * h);
  for (int m = 0; m < s.modes(); ++m) {
    out.at(m, 0) = (-3.0 * s.at(m, 0) + 4.0 * s.at(m, 1) - s.at(m, 2)) * inv2h;
    out.at(m, n2 - 1) = (3.0 * s.at(m, n2 - 1) - 4.0 * s.at(m, n2 - 2) + s.at(m, n2 - 3)) * inv2h;
    for (int j = 1; j < n2 - 1; ++j) out.at(m, j) = (s.at(m, j + 1) - s.at(m, j - 1)) * inv2h;
  }
  return out;
}

RowSpectrum ddx1_spectral(const RowSpectrum& s, double L) {
  RowSpectrum out = s;
  for (int m = 0; m < s.modes(); ++m) {
    const Complex f = is_nyquist(m, s.n1) ? Complex(0.0, 0.0) : Complex(0.0, 2.0 * kPi * m / L);
    for (int j = 0; j < s.n2; ++j) out.at(m, j) *= f;
  }
  return out;
}

// Lap_h with zero-flux ghosts (ghost = edge value) along x2.
RowSpectrum laplacian_neumann(const RowSpectrum& s, double L, double h) {
  RowSpectrum out = s;
  const int n2 = s.n2;
  const double inv_h2 = 1.0 / (h * h);
  for (int m = 0; m < s.modes(); ++m) {
    const double k = 2.0 * kPi * m / L;
    for (int j = 0; j < n2; ++j) {
      const Complex c = s.at(m, j);
      const Complex below = j > 0 ? s.at(m, j - 1) : c;
      const Complex above = j < n2 - 1 ? s.at(m, j + 1) : c;
      out.at(m, j) = (above - 2.0 * c + below) * inv_h2 - k * k * c;
    }
  }
  return out;
}

struct Tendency {
  Field value;
  double umax1 = 0.0;
  double umax2 = 0.0;
};

Tendency tendency(const PoissonSolver& solver, const FlowState& s, double nu) {
  const GridSpec& g = solver.grid();
  if (!(s.vorticity.grid() == g)) throw PreconditionError("vorticity is on another grid");
  if (g.n2 < 3) throw PreconditionError("time stepping needs at least three rows");
  const RowFFT& fft = solver.fft();
  const double drift = s.flux / g.H;

  const RowSpectrum w_hat = fft.forward(s.vorticity.values());
  RowSpectrum psi_hat = w_hat;
  solver.solve_spectral(psi_hat);

  const std::vector<double> u1 = fft.inverse(ddx2_spectral(psi_hat, g.dx2()));
  std::vector<double> u2 = fft.inverse(ddx1_spectral(psi_hat, g.L));
  const RowSpectrum dw1_hat = ddx1_spectral(w_hat, g.L);
  const std::vector<double> dw1 = fft.inverse(dw1_hat);
  const Field dw2 = d_dx2(s.vorticity);

  Tendency out;
  std::vector<double> prod(g.size());
  for (std::size_t c = 0; c < prod.size(); ++c) {
    u2[c] = -u2[c];
    prod[c] = u1[c] * dw1[c] + u2[c] * dw2[c];
    out.umax1 = std::max(out.umax1, std::abs(u1[c] + drift));
    out.umax2 = std::max(out.umax2, std::abs(u2[c]));
  }

  RowSpectrum n_hat = fft.forward(prod);
  const int keep = g.n1 / 3;
  for (int m = 0; m < n_hat.modes(); ++m) {
    const bool drop = m > keep;
    for (int j = 0; j < g.n2; ++j) {
      Complex& v = n_hat.at(m, j);
      v = drop ? Complex(0.0, 0.0) : v;
      v += drift * dw1_hat.at(m, j);
    }
  }
  if (nu != 0.0) {
    const RowSpectrum bi = laplacian_neumann(laplacian_neumann(w_hat, g.L, g.dx2()), g.L, g.dx2());
    for (std::size_t c = 0; c < n_hat.coeffs.size(); ++c) n_hat.coeffs[c] += nu * bi.coeffs[c];
  }
  out.value = Field(g, fft.inverse(n_hat));
  out.value *= -1.0;
  return out;
}

double courant_of(const GridSpec& g, double umax1, double umax2, double dt) {
  return dt * std::max(umax1 / g.dx1(), umax2 / g.dx2());
}

std::array<double, 9> deciles_of(std::span<const double> values) {
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  std::array<double, 9> out{};
  const double last = static_cast<double>(v.size() - 1);
  for (int q = 1; q <= 9; ++q) {
    const double pos = last * q / 10.0;
    const auto k = static_cast<std::size_t>(std::floor(pos));
    const double w = pos - static_cast<double>(k);
    out[q - 1] = k + 1 < v.size() ? (1.0 - w) * v[k] + w * v[k + 1] : v[k];
  }
  return out;
}

double relative(double drift, double scale) { return scale > 0.0 ? drift / scale : drift; }

}  // namespace

Field vorticity_tendency(const PoissonSolver& solver, const FlowState& s, double hyperviscosity) {
  return tendency(solver, s, hyperviscosity).value;
}

double courant_number(const PoissonSolver& solver, const FlowState& s, double dt) {
  const auto [u1, u2] = solver.velocity(s);
  return courant_of(solver.grid(), u1.max_abs(), u2.max_abs(), dt);
}

double cfl_time_step(const PoissonSolver& solver, const FlowState& s, double cfl) {
  const double c = courant_number(solver, s, 1.0);
  return c > 0.0 ? cfl / c : std::numeric_limits<double>::infinity();
}

FlowState step(const PoissonSolver& solver, const FlowState& s, double dt, const StepOptions& opts) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw PreconditionError("step: dt must be positive and finite");
  const double nu = opts.hyperviscosity;
  Tendency k1 = tendency(solver, s, nu);
  const double courant = courant_of(solver.grid(), k1.umax1, k1.umax2, dt);
  // Round-off slack so that dt = cfl_time_step(..., cfl_limit) is accepted.
  if (courant > opts.cfl_limit * (1.0 + 1e-9)) {
    throw CflError("step: Courant number " + std::to_string(courant) + " exceeds " +
                       std::to_string(opts.cfl_limit),
                   courant);
  }
  auto stage = [&](const Field& k, double a) {
    FlowState t{s.vorticity, s.flux};
    t.vorticity.axpy(a, k);
    return t;
  };
  const Field k2 = tendency(solver, stage(k1.value, 0.5 * dt), nu).value;
  const Field k3 = tendency(solver, stage(k2, 0.5 * dt), nu).value;
  const Field k4 = tendency(solver, stage(k3, dt), nu).value;
  FlowState out{s.vorticity, s.flux};
  out.vorticity.axpy(dt / 6.0, k1.value);
  out.vorticity.axpy(dt / 3.0, k2);
  out.vorticity.axpy(dt / 3.0, k3);
  out.vorticity.axpy(dt / 6.0, k4);
  return out;
}

DiagnosticsRecord diagnose(const PoissonSolver& solver, const FlowState& s, double t,
                           const RearrangementProfile& initial, const SimulationOptions& opts) {
  const Field& w = s.vorticity;
  DiagnosticsRecord r;
  r.t = t;
  r.energy = solver.energy(w);
  r.kinetic = r.energy + solver.grid().L * s.flux * s.flux / (2.0 * solver.grid().H);
  r.impulse = impulse(w);
  r.flux = s.flux;
  std::array<double, 4> m{};
  for (double v : w.values()) {
    const double v2 = v * v;
    m[0] += v;
    m[1] += v2;
    m[2] += v2 * v;
    m[3] += v2 * v2;
  }
  for (int k = 0; k < 4; ++k) r.moments[k] = m[k] * w.grid().cell_area();
  r.deciles = deciles_of(w.values());
  r.rearrangement_drift = rearrangement_drift(w, initial);
  if (opts.reference) {
    r.plain_distance = lp_distance(w, *opts.reference, opts.p);
    const OrbitalDistance od = orbital_distance(w, *opts.reference, opts.p);
    r.orbital_distance = od.distance;
    r.orbital_shift = od.shift;
  }
  return r;
}

SimulationResult simulate(const PoissonSolver& solver, const FlowState& s0, double T, double dt, int every,
                          const SimulationOptions& opts) {
  if (!(T >= 0.0) || !(dt > 0.0) || every < 1) {
    throw PreconditionError("simulate: need T >= 0, dt > 0 and every >= 1");
  }
  if (!s0.vorticity.all_finite()) throw PreconditionError("simulate: initial vorticity is not finite");
  const int n = T > 0.0 ? std::max(1, static_cast<int>(std::ceil(T / dt - 1e-9))) : 0;
  SimulationResult res;
  res.dt = n > 0 ? T / n : dt;
  const RearrangementProfile initial = RearrangementProfile::of(s0.vorticity);

  auto record = [&](const FlowState& s, double t) {
    res.records.push_back(diagnose(solver, s, t, initial, opts));
    if (opts.on_record) opts.on_record(res.records.back(), s);
  };

  FlowState s = s0;
  record(s, 0.0);
  for (int k = 1; k <= n; ++k) {
    FlowState next;
    try {
      next = step(solver, s, res.dt, opts.step);
    } catch (const CflError& e) {
      res.aborted = true;
      res.abort_reason = e.what();
      break;
    }
    if (!next.vorticity.all_finite()) {
      res.aborted = true;
      res.abort_reason = "non-finite vorticity at step " + std::to_string(k);
      break;
    }
    s = std::move(next);
    res.steps = k;
    if (k % every == 0 || k == n) record(s, k == n ? T : k * res.dt);
  }
  if (res.aborted && res.steps > 0 && res.records.back().t < res.steps * res.dt * (1.0 - 1e-12)) {
    record(s, res.steps * res.dt);
  }
  res.final_state = std::move(s);
  return res;
}

double galilean_pair_check(const PoissonSolver& solver, const FlowState& s0, double lam, double T, double dt,
                           const StepOptions& opts) {
  if (!(T >= 0.0) || !(dt > 0.0)) throw PreconditionError("galilean_pair_check: need T >= 0, dt > 0");
  const int n = T > 0.0 ? std::max(1, static_cast<int>(std::ceil(T / dt - 1e-9))) : 0;
  const double h = n > 0 ? T / n : dt;
  auto run = [&](FlowState s) {
    for (int k = 0; k < n; ++k) {
      s = step(solver, s, h, opts);
      if (!s.vorticity.all_finite()) throw Error("galilean_pair_check: non-finite vorticity");
    }
    return s;
  };
  auto b_future = std::async(std::launch::async, run, FlowState{s0.vorticity, s0.flux + lam * solver.grid().H});
  const FlowState a = run(s0);
  const FlowState b = b_future.get();
  const Field diff = a.vorticity - shift_x1(b.vorticity, lam * T);
  const double norm0 = l2_norm(s0.vorticity);
  return norm0 > 0.0 ? l2_norm(diff) / norm0 : l2_norm(diff);
}

OrbitalDistance orbital_distance(const Field& omega, const Field& ref, double p) {
  require_same_grid(omega, ref);
  if (!(p >= 1.0) || !std::isfinite(p)) throw PreconditionError("orbital_distance: p must be finite and >= 1");
  const GridSpec& g = omega.grid();
  const bool squared = p == 2.0;
  auto sum_power = [&](int k) {
    double sum = 0.0;
    for (int j = 0; j < g.n2; ++j) {
      for (int i = 0; i < g.n1; ++i) {
        const int ii = (i + k) % g.n1;
        const double d = std::abs(omega(i, j) - ref(ii, j));
        sum += squared ? d * d : std::pow(d, p);
      }
    }
    return sum;
  };
  int best_k = 0;
  double best = sum_power(0);
  for (int k = 1; k < g.n1; ++k) {
    const double v = sum_power(k);
    if (v < best) {
      best = v;
      best_k = k;
    }
  }
  OrbitalDistance out;
  out.distance = std::pow(best * g.cell_area(), 1.0 / p);
  out.shift = best_k * g.dx1();
  if (squared && best > 0.0) {
    auto f = [&](double a) { return l2_norm(omega - shift_x1(ref, a)); };
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = out.shift - g.dx1();
    double b = out.shift + g.dx1();
    double c = b - phi * (b - a);
    double d = a + phi * (b - a);
    double fc = f(c);
    double fd = f(d);
    for (int it = 0; it < 60 && b - a > 1e-12 * g.L; ++it) {
      if (fc < fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - phi * (b - a);
        fc = f(c);
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + phi * (b - a);
        fd = f(d);
      }
    }
    const double alpha = fc < fd ? c : d;
    const double value = std::min(fc, fd);
    if (value < out.distance * (1.0 - 1e-14)) {
      out.distance = value;
      out.shift = alpha;
    }
  }
  out.shift = std::fmod(out.shift, g.L);
  if (out.shift < 0.0) out.shift += g.L;
  return out;
}

double correlation_shift(const Field& omega, const Field& ref) {
  require_same_grid(omega, ref);
  const GridSpec& g = omega.grid();
  auto fft = RowFFT::get(g.n1, g.n2);
  const RowSpectrum a = fft->forward(omega.values());
  const RowSpectrum b = fft->forward(ref.values());
  RowSpectrum c{g.n1, 1, std::vector<Complex>(static_cast<std::size_t>(g.n1 / 2 + 1))};
  for (int m = 0; m < c.modes(); ++m) {
    Complex sum = 0.0;
    for (int j = 0; j < g.n2; ++j) sum += a.at(m, j) * std::conj(b.at(m, j));
    c.at(m, 0) = sum;
  }
  const std::vector<double> corr = RowFFT::get(g.n1, 1)->inverse(c);
  const int k = static_cast<int>(std::max_element(corr.begin(), corr.end()) - corr.begin());
  const double ym = corr[(k + g.n1 - 1) % g.n1];
  const double y0 = corr[k];
  const double yp = corr[(k + 1) % g.n1];
  const double denom = ym - 2.0 * y0 + yp;
  const double delta = denom < 0.0 ? 0.5 * (ym - yp) / denom : 0.0;
  double d = (k + delta) * g.dx1();
  d = std::fmod(d, g.L);
  if (d < 0.0) d += g.L;
  return d;
}

std::vector<double> unwrap_periodic(const std::vector<double>& values, double L) {
  std::vector<double> out = values;
  for (std::size_t k = 1; k < out.size(); ++k) {
    double d = values[k] - values[k - 1];
    d -= L * std::round(d / L);
    out[k] = out[k - 1] + d;
  }
  return out;
}

AdmissibilitySummary admissibility_report(const std::vector<DiagnosticsRecord>& records, const Field& omega0) {
  if (records.size() < 2) throw PreconditionError("admissibility_report: needs at least two records");
  const GridSpec& g = omega0.grid();
  std::array<double, 4> abs_moment{};
  double abs_impulse = 0.0;
  for (int j = 0; j < g.n2; ++j) {
    for (int i = 0; i < g.n1; ++i) {
      const double v = std::abs(omega0(i, j));
      abs_impulse += g.x2(j) * v;
      double pw = 1.0;
      for (int k = 0; k < 4; ++k) {
        pw *= v;
        abs_moment[k] += pw;
      }
    }
  }
  const double area = g.cell_area();
  abs_impulse *= area;
  for (double& m : abs_moment) m *= area;

  const DiagnosticsRecord& r0 = records.front();
  AdmissibilitySummary s;
  for (const auto& r : records) {
    s.energy_drift = std::max(s.energy_drift, relative(std::abs(r.energy - r0.energy), std::abs(r0.energy)));
    s.kinetic_drift = std::max(s.kinetic_drift, relative(std::abs(r.kinetic - r0.kinetic), std::abs(r0.kinetic)));
    s.impulse_drift = std::max(s.impulse_drift, relative(std::abs(r.impulse - r0.impulse), abs_impulse));
    s.flux_drift = std::max(s.flux_drift, std::abs(r.flux - r0.flux));
    for (int k = 0; k < 4; ++k) {
      s.moment_drift[k] =
          std::max(s.moment_drift[k], relative(std::abs(r.moments[k] - r0.moments[k]), abs_moment[k]));
    }
    s.rearrangement_drift = std::max(s.rearrangement_drift, relative(r.rearrangement_drift, abs_moment[0]));
  }
  return s;
}

}  // namespace chanstab
