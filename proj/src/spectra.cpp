#include "chanstab/spectra.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "chanstab/error.hpp"

namespace chanstab {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kMergeTol = 1e-12;

bool same_value(double a, double b) { return std::abs(a - b) <= kMergeTol * std::max(a, b); }

Field random_field(const GridSpec& grid, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Field f(grid);
  for (double& v : f.values()) v = normal(rng);
  return f;
}

void remove_mean(Field& f) {
  const double mean = integral_mean(f);
  for (double& v : f.values()) v -= mean;
}

void normalize(Field& f) {
  const double n = l2_norm(f);
  if (n == 0.0) throw ConvergenceError("power iteration collapsed to the zero vector");
  f *= 1.0 / n;
}

// Modified Gram-Schmidt in the quadrature inner product; drops nothing.
void orthonormalize(std::vector<Field>& vs) {
  for (std::size_t a = 0; a < vs.size(); ++a) {
    for (std::size_t b = 0; b < a; ++b) vs[a].axpy(-inner(vs[a], vs[b]), vs[b]);
    normalize(vs[a]);
  }
}

// Block power iteration with Rayleigh-Ritz on a few vectors, so that a
// degenerate or nearly split leading eigenvalue converges at the rate of the
// gap past the block rather than stalling.
template <class Op>
PowerIterationResult power_iterate(const GridSpec& grid, Op&& apply, bool project_mean,
                                   const PowerIterationOptions& opts, const char* what) {
  constexpr int block = 6;
  std::mt19937_64 rng(opts.seed);
  std::vector<Field> V;
  for (int b = 0; b < block; ++b) {
    V.push_back(random_field(grid, rng));
    if (project_mean) remove_mean(V.back());
  }
  orthonormalize(V);
  double previous = 0.0;
  for (int it = 1; it <= opts.max_iterations; ++it) {
    std::vector<Field> W;
    for (const auto& v : V) {
      W.push_back(apply(v));
      if (project_mean) remove_mean(W.back());
    }
    Eigen::MatrixXd Hm(block, block);
    for (int a = 0; a < block; ++a) {
      for (int b = a; b < block; ++b) Hm(a, b) = Hm(b, a) = 0.5 * (inner(V[a], W[b]) + inner(V[b], W[a]));
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Hm);
    const double top = es.eigenvalues()(block - 1);
    std::vector<Field> rotated;
    for (int c = block - 1; c >= 0; --c) {
      Field r(grid);
      for (int a = 0; a < block; ++a) r.axpy(es.eigenvectors()(a, c), W[a]);
      rotated.push_back(std::move(r));
    }
    orthonormalize(rotated);
    V = std::move(rotated);
    if (it > 1 && std::abs(top - previous) <= opts.tolerance * std::abs(top)) {
      return {top, it, std::move(V.front())};
    }
    previous = top;
  }
  std::ostringstream msg;
  msg << what << ": no convergence after " << opts.max_iterations << " iterations";
  throw ConvergenceError(msg.str());
}

}  // namespace

std::string to_string(ModeFamily f) { return f == ModeFamily::Shear ? "shear" : "cellular"; }

std::string to_string(AspectRegime r) {
  switch (r) {
    case AspectRegime::Tall: return "tall";
    case AspectRegime::Flat: return "flat";
    case AspectRegime::Critical: return "critical";
  }
  return "?";
}

std::vector<Field> ModeComponent::basis(const GridSpec& grid) const {
  const double L = grid.L;
  const double H = grid.H;
  if (family == ModeFamily::Shear) {
    const double w = 2.0 * k * kPi / H;
    return {Field::from_function(grid, [w](double, double y) { return std::sin(w * y); }),
            Field::from_function(grid, [w](double, double y) { return std::cos(w * y); })};
  }
  const double wx = 2.0 * n * kPi / L;
  const double wy = k * kPi / H;
  return {Field::from_function(grid,
                               [=](double x, double y) { return std::cos(wx * x) * std::sin(wy * y); }),
          Field::from_function(grid,
                               [=](double x, double y) { return std::sin(wx * x) * std::sin(wy * y); })};
}

std::vector<Field> EigenMode::basis(const GridSpec& grid) const {
  std::vector<Field> out;
  for (const auto& c : components) {
    for (auto& f : c.basis(grid)) out.push_back(std::move(f));
  }
  return out;
}

double shear_eigenvalue(double H, int k) {
  const double w = 2.0 * k * kPi / H;
  return w * w;
}

double cellular_eigenvalue(double L, double H, int n, int k) {
  const double a = 2.0 * n * kPi / L;
  const double b = k * kPi / H;
  return a * a + b * b;
}

std::vector<EigenMode> eigenvalue_table(double L, double H, int count) {
  if (count < 1) throw PreconditionError("eigenvalue_table: count must be >= 1");
  if (!(L > 0.0) || !(H > 0.0)) throw PreconditionError("eigenvalue_table: L, H must be positive");
  double bound = std::min(shear_eigenvalue(H, 1), cellular_eigenvalue(L, H, 1, 1));
  for (;;) {
    struct Candidate {
      double value;
      ModeComponent comp;
    };
    std::vector<Candidate> cands;
    const double root = std::sqrt(bound) * (1.0 + 1e-9);
    const int kmax_shear = static_cast<int>(root * H / (2.0 * kPi)) + 1;
    for (int k = 1; k <= kmax_shear; ++k) {
      const double v = shear_eigenvalue(H, k);
      if (v <= bound * (1.0 + kMergeTol)) cands.push_back({v, {ModeFamily::Shear, 0, k}});
    }
    const int nmax = static_cast<int>(root * L / (2.0 * kPi)) + 1;
    const int kmax = static_cast<int>(root * H / kPi) + 1;
    for (int n = 1; n <= nmax; ++n) {
      for (int k = 1; k <= kmax; ++k) {
        const double v = cellular_eigenvalue(L, H, n, k);
        if (v <= bound * (1.0 + kMergeTol)) cands.push_back({v, {ModeFamily::Cellular, n, k}});
      }
    }
    std::stable_sort(cands.begin(), cands.end(),
                     [](const Candidate& a, const Candidate& b) { return a.value < b.value; });
    std::vector<EigenMode> modes;
    for (const auto& c : cands) {
      if (!modes.empty() && same_value(modes.back().eigenvalue, c.value)) {
        modes.back().components.push_back(c.comp);
      } else {
        modes.push_back({c.value, {c.comp}});
      }
    }
    // The last merged group may still gain members just above the bound.
    if (static_cast<int>(modes.size()) > count) {
      modes.resize(count);
      for (auto& m : modes) {
        std::stable_sort(m.components.begin(), m.components.end(),
                         [](const ModeComponent& a, const ModeComponent& b) {
                           if (a.family != b.family) return a.family == ModeFamily::Shear;
                           return std::pair(a.n, a.k) < std::pair(b.n, b.k);
                         });
      }
      return modes;
    }
    bound *= 2.0;
  }
}

AspectRegime aspect_regime(double L, double H) {
  const double lhs = 4.0 * H * H;
  const double rhs = 3.0 * L * L;
  if (std::abs(lhs - rhs) <= kMergeTol * rhs) return AspectRegime::Critical;
  return lhs > rhs ? AspectRegime::Tall : AspectRegime::Flat;
}

FirstEigen lambda1(double L, double H) {
  const AspectRegime regime = aspect_regime(L, H);
  const ModeComponent shear{ModeFamily::Shear, 0, 1};
  const ModeComponent cell{ModeFamily::Cellular, 1, 1};
  switch (regime) {
    case AspectRegime::Tall:
      return {shear_eigenvalue(H, 1), regime, {shear_eigenvalue(H, 1), {shear}}};
    case AspectRegime::Flat:
      return {cellular_eigenvalue(L, H, 1, 1), regime, {cellular_eigenvalue(L, H, 1, 1), {cell}}};
    case AspectRegime::Critical:
      break;
  }
  return {shear_eigenvalue(H, 1), regime, {shear_eigenvalue(H, 1), {shear, cell}}};
}

PowerIterationResult dominant_t_eigenvalue(const PoissonSolver& solver,
                                           const PowerIterationOptions& opts) {
  return power_iterate(
      solver.grid(), [&](const Field& v) { return solver.t_apply(v); }, true, opts,
      "verify_lambda1_numeric");
}

double verify_lambda1_numeric(const PoissonSolver& solver, const PowerIterationOptions& opts) {
  return 1.0 / dominant_t_eigenvalue(solver, opts).value;
}

PowerIterationResult dominant_g_eigenvalue(const PoissonSolver& solver,
                                           const PowerIterationOptions& opts) {
  return power_iterate(
      solver.grid(), [&](const Field& v) { return solver.green_apply(v); }, false, opts,
      "arnold_constant");
}

double arnold_constant(const PoissonSolver& solver, const PowerIterationOptions& opts) {
  return dominant_g_eigenvalue(solver, opts).value;
}

double rayleigh_quotient_t(const PoissonSolver& solver, const Field& v) {
  return inner(v, solver.t_apply(v)) / inner(v, v);
}

DeflatedSpectrum deflated_spectrum(const PoissonSolver& solver, int e1_dimension,
                                   const PowerIterationOptions& opts) {
  if (e1_dimension < 1) throw PreconditionError("deflated_spectrum: dimension must be >= 1");
  const GridSpec& grid = solver.grid();
  const int block = e1_dimension + 2;
  std::mt19937_64 rng(opts.seed);
  std::vector<Field> V;
  for (int b = 0; b < block; ++b) {
    V.push_back(random_field(grid, rng));
    remove_mean(V.back());
  }
  orthonormalize(V);

  auto apply_t = [&](const Field& v) {
    Field w = solver.t_apply(v);
    remove_mean(w);
    return w;
  };

  Eigen::VectorXd ritz_prev = Eigen::VectorXd::Zero(block);
  bool converged = false;
  for (int it = 1; it <= opts.max_iterations && !converged; ++it) {
    std::vector<Field> W;
    for (const auto& v : V) W.push_back(apply_t(v));
    Eigen::MatrixXd Hm(block, block);
    for (int a = 0; a < block; ++a) {
      for (int b = a; b < block; ++b) Hm(a, b) = Hm(b, a) = inner(V[a], W[b]);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Hm);
    // Rotate to Ritz vectors, largest first.
    std::vector<Field> rotated;
    for (int c = block - 1; c >= 0; --c) {
      Field r(grid);
      for (int a = 0; a < block; ++a) r.axpy(es.eigenvectors()(a, c), W[a]);
      rotated.push_back(std::move(r));
    }
    Eigen::VectorXd ritz = es.eigenvalues().reverse();
    orthonormalize(rotated);
    V = std::move(rotated);
    double change = 0.0;
    for (int a = 0; a < e1_dimension; ++a) {
      change = std::max(change, std::abs(ritz(a) - ritz_prev(a)) / std::abs(ritz(a)));
    }
    converged = it > 1 && change <= opts.tolerance;
    ritz_prev = ritz;
  }
  if (!converged) throw ConvergenceError("deflated_spectrum: subspace iteration did not converge");

  std::vector<Field> span(V.begin(), V.begin() + e1_dimension);
  auto deflate = [&](Field& w) {
    remove_mean(w);
    for (const auto& s : span) w.axpy(-inner(w, s), s);
  };
  Field v = random_field(grid, rng);
  deflate(v);
  normalize(v);
  double previous = 0.0;
  double mu2 = 0.0;
  bool done = false;
  for (int it = 1; it <= opts.max_iterations; ++it) {
    Field w = solver.t_apply(v);
    deflate(w);
    mu2 = inner(v, w);
    normalize(w);
    v = std::move(w);
    if (it > 1 && std::abs(mu2 - previous) <= opts.tolerance * std::abs(mu2)) {
      done = true;
      break;
    }
    previous = mu2;
  }
  if (!done) throw ConvergenceError("deflated_spectrum: deflated power iteration did not converge");
  return {1.0 / ritz_prev(0), 1.0 / mu2, std::move(span)};
}

WallTrace wall_trace(const Field& u) {
  const auto& g = u.grid();
  if (g.n2 < 3) throw PreconditionError("wall_trace: needs at least three rows");
  const int n2 = g.n2;
  std::vector<double> traces;
  traces.reserve(2 * g.n1);
  for (int i = 0; i < g.n1; ++i) {
    traces.push_back((15.0 * u(i, 0) - 10.0 * u(i, 1) + 3.0 * u(i, 2)) / 8.0);
    traces.push_back((15.0 * u(i, n2 - 1) - 10.0 * u(i, n2 - 2) + 3.0 * u(i, n2 - 3)) / 8.0);
  }
  double mean = 0.0;
  for (double t : traces) mean += t;
  mean /= static_cast<double>(traces.size());
  double var = 0.0;
  for (double t : traces) var = std::max(var, std::abs(t - mean));
  return {mean, var};
}

double dirichlet_energy(const Field& u, double trace) {
  const auto& g = u.grid();
  auto fft = RowFFT::get(g.n1, g.n2);
  const RowSpectrum spec = fft->forward(u.values());
  // Parseval along each row: sum_i |d1 u|^2 dx1 = (L / n1^2) sum_m k_m^2 |u_m|^2
  // over the full spectrum; half-spectrum slots other than 0 and Nyquist count twice.
  double x1_part = 0.0;
  for (int m = 1; m < spec.modes(); ++m) {
    const double k = 2.0 * kPi * m / g.L;
    const double weight = is_nyquist(m, g.n1) ? 1.0 : 2.0;
    for (int j = 0; j < g.n2; ++j) x1_part += weight * k * k * std::norm(spec.at(m, j));
  }
  x1_part *= g.L / (static_cast<double>(g.n1) * g.n1) * g.dx2();

  const double h = g.dx2();
  double x2_part = 0.0;
  for (int i = 0; i < g.n1; ++i) {
    for (int j = 0; j + 1 < g.n2; ++j) {
      const double d = u(i, j + 1) - u(i, j);
      x2_part += d * d;
    }
    const double b = u(i, 0) - trace;
    const double t = u(i, g.n2 - 1) - trace;
    x2_part += 2.0 * (b * b + t * t);
  }
  x2_part *= g.dx1() / h;
  return x1_part + x2_part;
}

InequalityCheck check_poincare(const Field& u, const PoincareOptions& opts) {
  const auto& g = u.grid();
  const double scale = std::max(u.max_abs(), 1e-300);
  const double mean = integral_mean(u);
  if (std::abs(mean) > opts.mean_tolerance * scale) {
    std::ostringstream msg;
    msg << "check_poincare: integral mean " << mean << " is not zero";
    throw PreconditionError(msg.str());
  }
  const WallTrace trace = wall_trace(u);
  if (trace.variation > opts.trace_tolerance * scale) {
    std::ostringstream msg;
    msg << "check_poincare: wall traces vary by " << trace.variation << " around " << trace.value;
    throw PreconditionError(msg.str());
  }
  const double lam = lambda1(g.L, g.H).value;
  InequalityCheck out;
  out.lhs = dirichlet_energy(u, trace.value);
  out.rhs = lam * inner(u, u);
  out.equality = std::abs(out.lhs - out.rhs) <= 5e-3 * out.rhs;
  return out;
}

InequalityCheck check_energy_enstrophy(const PoissonSolver& solver, const Field& v,
                                       double mean_tolerance) {
  const auto& g = v.grid();
  const double scale = std::max(v.max_abs(), 1e-300);
  const double mean = integral_mean(v);
  if (std::abs(mean) > mean_tolerance * scale) {
    std::ostringstream msg;
    msg << "check_energy_enstrophy: integral mean " << mean << " is not zero";
    throw PreconditionError(msg.str());
  }
  const double lam = lambda1(g.L, g.H).value;
  InequalityCheck out;
  out.lhs = inner(v, solver.t_apply(v));
  out.rhs = inner(v, v) / lam;
  out.equality = std::abs(out.lhs - out.rhs) <= 5e-3 * out.rhs;
  return out;
}

}  // namespace chanstab
