#include "chanstab/flows.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "chanstab/error.hpp"
#include "chanstab/spectra.hpp"

namespace chanstab {

namespace {

constexpr double kPi = std::numbers::pi;

Field x2_minus(const Field& psi, double lam) {
  Field out = psi;
  const auto& g = psi.grid();
  for (int j = 0; j < g.n2; ++j) {
    for (int i = 0; i < g.n1; ++i) out(i, j) -= lam * g.x2(j);
  }
  return out;
}

}  // namespace

double ScalarFunction::prime(double s) const {
  if (derivative) return derivative(s);
  const double h = 1e-6 * std::max(1.0, std::abs(s));
  return (value(s + h) - value(s - h)) / (2.0 * h);
}

ScalarFunction ScalarFunction::affine(double slope, double intercept) {
  ScalarFunction f;
  f.value = [=](double s) { return slope * s + intercept; };
  f.derivative = [=](double) { return slope; };
  f.slope = slope;
  f.intercept = intercept;
  return f;
}

ScalarFunction ScalarFunction::from_samples(std::vector<double> s, std::vector<double> g) {
  if (s.size() != g.size() || s.size() < 2) {
    throw PreconditionError("ScalarFunction::from_samples: need >= 2 matching samples");
  }
  for (std::size_t k = 1; k < s.size(); ++k) {
    if (!(s[k] > s[k - 1])) throw PreconditionError("ScalarFunction::from_samples: s not increasing");
  }
  auto locate = [s](double x) {
    auto it = std::upper_bound(s.begin(), s.end(), x);
    std::size_t k = it == s.begin() ? 0 : static_cast<std::size_t>(it - s.begin()) - 1;
    return std::min(k, s.size() - 2);
  };
  ScalarFunction f;
  f.value = [s, g, locate](double x) {
    const auto k = locate(x);
    const double t = (x - s[k]) / (s[k + 1] - s[k]);
    return g[k] + t * (g[k + 1] - g[k]);
  };
  f.derivative = [s, g, locate](double x) {
    const auto k = locate(x);
    return (g[k + 1] - g[k]) / (s[k + 1] - s[k]);
  };
  return f;
}

std::pair<double, double> gprime_range(const ScalarFunction& g, const Field& psi, double lam) {
  const Field arg = x2_minus(psi, lam);
  const auto& grid = psi.grid();
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  double pad = 0.0;
  for (int j = 0; j < grid.n2; ++j) {
    for (int i = 0; i < grid.n1; ++i) {
      const double v = arg(i, j);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
      if (i + 1 < grid.n1) pad = std::max(pad, std::abs(arg(i + 1, j) - v));
      if (j + 1 < grid.n2) pad = std::max(pad, std::abs(arg(i, j + 1) - v));
    }
  }
  if (g.is_affine()) return {*g.slope, *g.slope};
  lo -= pad;
  hi += pad;
  double gmin = std::numeric_limits<double>::infinity();
  double gmax = -gmin;
  auto visit = [&](double s) {
    const double d = g.prime(s);
    gmin = std::min(gmin, d);
    gmax = std::max(gmax, d);
  };
  for (double v : arg.values()) visit(v);
  constexpr int samples = 512;
  for (int k = 0; k <= samples; ++k) visit(lo + (hi - lo) * k / samples);
  return {gmin, gmax};
}

SteadySpec shear_flow(double a, double m, double alpha, double b, double c, const GridSpec& grid) {
  SteadySpec s;
  s.kind = "shear";
  s.psi = Field::from_function(grid, [=](double, double y) { return a * std::sin(m * y + alpha) + b * y + c; });
  s.vorticity = Field::from_function(grid, [=](double, double y) { return a * m * m * std::sin(m * y + alpha); });
  s.g = ScalarFunction::affine(m * m, -m * m * c);
  s.lam = b;
  s.psi_bottom = a * std::sin(alpha) + c;
  s.psi_top = a * std::sin(m * grid.H + alpha) + b * grid.H + c;
  s.gprime_range = {m * m, m * m};
  return s;
}

SteadySpec hyperbolic_shear_flow(double a, double m, double b, double c, const GridSpec& grid) {
  SteadySpec s;
  s.kind = "hyperbolic-shear";
  s.psi = Field::from_function(grid, [=](double, double y) { return a * std::sinh(m * y) + b * y + c; });
  s.vorticity = Field::from_function(grid, [=](double, double y) { return -a * m * m * std::sinh(m * y); });
  s.g = ScalarFunction::affine(-m * m, m * m * c);
  s.lam = b;
  s.psi_bottom = c;
  s.psi_top = a * std::sinh(m * grid.H) + b * grid.H + c;
  s.gprime_range = {-m * m, -m * m};
  return s;
}

SteadySpec e1_traveling_flow(double a, double b, double c, double d, const GridSpec& grid) {
  const double L = grid.L;
  const double H = grid.H;
  const double lc = cellular_eigenvalue(L, H, 1, 1);
  auto cell = [=](double x, double y) {
    return (a * std::cos(2.0 * kPi * x / L) + b * std::sin(2.0 * kPi * x / L)) * std::sin(kPi * y / H);
  };
  SteadySpec s;
  s.kind = "e1";
  s.psi = Field::from_function(grid, [=](double x, double y) { return cell(x, y) + c * y + d; });
  s.vorticity = Field::from_function(grid, [=](double x, double y) { return lc * cell(x, y); });
  s.g = ScalarFunction::affine(lc, -lc * d);
  // Substituting psi into -Lap psi = g(psi - lambda x2) forces lambda = c.
  s.lam = c;
  s.psi_bottom = d;
  s.psi_top = c * H + d;
  s.gprime_range = {lc, lc};
  return s;
}

SteadySpec custom_steady(const Field& psi, double psi_bottom, double psi_top, ScalarFunction g,
                         double lam) {
  SteadySpec s;
  s.kind = "custom";
  s.psi = psi;
  const Field arg = x2_minus(psi, lam);
  s.vorticity = Field(psi.grid());
  for (std::size_t k = 0; k < arg.size(); ++k) s.vorticity[k] = g(arg[k]);
  s.gprime_range = gprime_range(g, psi, lam);
  s.g = std::move(g);
  s.lam = lam;
  s.psi_bottom = psi_bottom;
  s.psi_top = psi_top;
  return s;
}

double residual_tvs1(const SteadySpec& spec) {
  if (!spec.g.value) throw PreconditionError("residual_tvs1: the flow carries no g");
  const auto& grid = spec.psi.grid();
  const Field lap = discrete_negative_laplacian(spec.psi, spec.psi_bottom, spec.psi_top);
  double sum = 0.0;
  for (int j = 1; j + 1 < grid.n2; ++j) {
    for (int i = 0; i < grid.n1; ++i) {
      const double r = lap(i, j) - spec.g(spec.psi(i, j) - spec.lam * grid.x2(j));
      sum += r * r;
    }
  }
  return std::sqrt(sum * grid.cell_area());
}

std::string to_string(StabilityClass c) {
  switch (c) {
    case StabilityClass::Theorem1: return "Theorem1";
    case StabilityClass::Theorem2: return "Theorem2";
    case StabilityClass::Outside: return "outside";
  }
  return "?";
}

StabilityClass classify_gprime(std::pair<double, double> range, double L, double H) {
  constexpr double tol = 1e-12;
  const double lam1 = lambda1(L, H).value;
  const auto [lo, hi] = range;
  if (lo < -tol * lam1) return StabilityClass::Outside;
  if (hi < lam1 * (1.0 - tol)) return StabilityClass::Theorem1;
  if (hi <= lam1 * (1.0 + tol)) return StabilityClass::Theorem2;
  return StabilityClass::Outside;
}

StabilityClass classify_conditions(const SteadySpec& spec, double L, double H) {
  return classify_gprime(spec.gprime_range, L, H);
}

E1ShearDecomposition decompose_e1_shear(const Field& omega, double L, double H) {
  const auto& grid = omega.grid();
  if (std::abs(grid.L - L) > 1e-12 * L || std::abs(grid.H - H) > 1e-12 * H) {
    throw PreconditionError("decompose_e1_shear: L, H disagree with the field's grid");
  }
  E1ShearDecomposition out;
  out.shear = row_average(omega);
  const Field rest = omega - out.shear;
  std::vector<Field> basis = lambda1(L, H).basis(grid);
  for (std::size_t a = 0; a < basis.size(); ++a) {
    for (std::size_t b = 0; b < a; ++b) basis[a].axpy(-inner(basis[a], basis[b]), basis[b]);
    basis[a] *= 1.0 / l2_norm(basis[a]);
  }
  out.e1 = Field(grid);
  for (const auto& e : basis) out.e1.axpy(inner(rest, e), e);
  out.residual = l2_norm(omega - out.e1 - out.shear);
  return out;
}

std::vector<double> real_cubic_roots(double c3, double c2, double c1, double c0) {
  if (c3 == 0.0) throw PreconditionError("real_cubic_roots: leading coefficient is zero");
  const double a = c2 / c3;
  const double b = c1 / c3;
  const double c = c0 / c3;
  const double p = b - a * a / 3.0;
  const double q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
  const double disc = q * q / 4.0 + p * p * p / 27.0;
  const double scale = std::max({1.0, std::abs(a), std::abs(b), std::abs(c)});
  std::vector<double> t;
  if (std::abs(p) <= 1e-15 * scale && std::abs(q) <= 1e-15 * scale) {
    t = {0.0};
  } else if (disc > 1e-14 * scale * scale * scale) {
    const double sq = std::sqrt(disc);
    t = {std::cbrt(-q / 2.0 + sq) + std::cbrt(-q / 2.0 - sq)};
  } else {
    const double r = 2.0 * std::sqrt(std::max(-p / 3.0, 0.0));
    double arg = r == 0.0 ? 0.0 : (3.0 * q / (p * r));
    arg = std::clamp(arg, -1.0, 1.0);
    const double phi = std::acos(arg) / 3.0;
    for (int k = 0; k < 3; ++k) t.push_back(r * std::cos(phi - 2.0 * kPi * k / 3.0));
  }
  std::vector<double> roots;
  for (double tk : t) {
    double x = tk - a / 3.0;
    for (int it = 0; it < 4; ++it) {
      const double f = ((x + a) * x + b) * x + c;
      const double df = (3.0 * x + 2.0 * a) * x + b;
      if (df == 0.0) break;
      const double step = f / df;
      if (!std::isfinite(step)) break;
      x -= step;
    }
    roots.push_back(x);
  }
  std::sort(roots.begin(), roots.end());
  std::vector<double> distinct;
  for (double x : roots) {
    if (!distinct.empty() && std::abs(x - distinct.back()) <= 1e-9 * std::max(1.0, std::abs(x))) continue;
    distinct.push_back(x);
  }
  return distinct;
}

IsolationCubic isolation_cubic(std::span<const double> shear_profile, double L, double H,
                               double alpha, double beta) {
  if (shear_profile.empty()) throw PreconditionError("isolation_cubic: empty profile");
  const int n2 = static_cast<int>(shear_profile.size());
  const double h = H / n2;
  // Integrals over D of f(x2) * (x1-factor) reduce to L * (x1-average) * integral over (0, H);
  // the x1-average of cos^2(2 pi x1/L) is 1/2.
  double ip = 0.0;
  double iq = 0.0;
  double ir = 0.0;
  double imu = 0.0;
  for (int j = 0; j < n2; ++j) {
    const double y = (j + 0.5) * h;
    const double w = shear_profile[j];
    const double c2 = std::cos(2.0 * kPi * y / H);
    const double s1 = std::sin(kPi * y / H);
    ip += w * c2;
    iq += w * c2 * c2;
    ir += 0.5 * w * s1 * s1;
    imu += w * w * c2;
  }
  const double factor = 8.0 / (L * H) * L * h;
  IsolationCubic out;
  out.p = factor * ip;
  out.q = factor * iq;
  out.r = factor * ir;
  out.mu = factor * imu;
  out.b2 = out.p + out.q - 2.0 * out.r;
  out.b1 = out.mu - out.r * out.p - alpha;
  out.b0 = beta - out.r * alpha;
  for (double v : {out.p, out.q, out.r, out.mu, out.b2, out.b1, out.b0}) {
    if (!std::isfinite(v)) throw Error("isolation_cubic: non-finite coefficient");
  }
  out.roots = real_cubic_roots(2.0, out.b2, out.b1, -out.b0);
  const double scale = std::max({1.0, std::abs(alpha)});
  for (double x : out.roots) {
    const double y2 = alpha - 2.0 * x * x - out.p * x;
    if (y2 < -1e-12 * scale) continue;
    out.pairs.emplace_back(x, std::sqrt(std::max(0.0, y2)));
  }
  return out;
}

}  // namespace chanstab
