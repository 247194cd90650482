#include "chanstab/green.hpp"

#include <cmath>
#include <numbers>

#include "chanstab/error.hpp"

namespace chanstab {

PoissonSolver::PoissonSolver(const GridSpec& grid)
    : grid_(grid), fft_(RowFFT::get(grid.n1, grid.n2)) {
  const int n2 = grid.n2;
  const double h2 = grid.dx2() * grid.dx2();
  const double off = -1.0 / h2;
  const int modes = grid.n1 / 2 + 1;
  upper_.resize(modes);
  inv_pivot_.resize(modes);
  for (int m = 0; m < modes; ++m) {
    const double k = wavenumber(m);
    auto diag = [&](int j) {
      double edges = 0.0;
      if (j == 0) edges += 1.0;
      if (j == n2 - 1) edges += 1.0;
      return (2.0 + edges) / h2 + k * k;
    };
    auto& up = upper_[m];
    auto& piv = inv_pivot_[m];
    up.assign(n2, 0.0);
    piv.assign(n2, 0.0);
    double pivot = diag(0);
    piv[0] = 1.0 / pivot;
    up[0] = off / pivot;
    for (int j = 1; j < n2; ++j) {
      pivot = diag(j) - off * up[j - 1];
      piv[j] = 1.0 / pivot;
      up[j] = off / pivot;
    }
  }
}

double PoissonSolver::wavenumber(int m) const { return 2.0 * std::numbers::pi * m / grid_.L; }

void PoissonSolver::solve_spectral(RowSpectrum& spec) const {
  const int n2 = grid_.n2;
  const double off = -1.0 / (grid_.dx2() * grid_.dx2());
  for (int m = 0; m < spec.modes(); ++m) {
    const auto& up = upper_[m];
    const auto& piv = inv_pivot_[m];
    spec.at(m, 0) *= piv[0];
    for (int j = 1; j < n2; ++j) spec.at(m, j) = (spec.at(m, j) - off * spec.at(m, j - 1)) * piv[j];
    for (int j = n2 - 2; j >= 0; --j) spec.at(m, j) -= up[j] * spec.at(m, j + 1);
  }
}

Field PoissonSolver::green_apply(const Field& omega) const {
  if (!(omega.grid() == grid_)) throw PreconditionError("green_apply: field is on another grid");
  RowSpectrum spec = fft_->forward(omega.values());
  solve_spectral(spec);
  return Field(grid_, fft_->inverse(spec));
}

Field PoissonSolver::t_apply(const Field& v) const {
  Field psi = green_apply(v);
  const double mean = integral_mean(psi);
  for (double& x : psi.values()) x -= mean;
  return psi;
}

Field PoissonSolver::stream_function(const FlowState& s) const {
  Field psi = green_apply(s.vorticity);
  const double slope = s.flux / grid_.H;
  for (int j = 0; j < grid_.n2; ++j) {
    const double add = slope * grid_.x2(j);
    for (int i = 0; i < grid_.n1; ++i) psi(i, j) += add;
  }
  return psi;
}

std::pair<Field, Field> PoissonSolver::velocity(const FlowState& s) const {
  const Field psi = stream_function(s);
  Field u1 = d_dx2(psi);
  Field u2 = d_dx1(psi);
  u2 *= -1.0;
  return {std::move(u1), std::move(u2)};
}

double PoissonSolver::energy(const Field& omega) const {
  return 0.5 * inner(omega, green_apply(omega));
}

double PoissonSolver::kinetic_energy(const FlowState& s) const {
  return energy(s.vorticity) + grid_.L * s.flux * s.flux / (2.0 * grid_.H);
}

Field PoissonSolver::negative_laplacian(const Field& psi, double bottom, double top) const {
  if (!(psi.grid() == grid_)) throw PreconditionError("negative_laplacian: field is on another grid");
  return discrete_negative_laplacian(psi, bottom, top);
}

Field discrete_negative_laplacian(const Field& psi, double bottom, double top) {
  const GridSpec& grid = psi.grid();
  auto fft = RowFFT::get(grid.n1, grid.n2);
  RowSpectrum spec = fft->forward(psi.values());
  for (int m = 0; m < spec.modes(); ++m) {
    const double k = 2.0 * std::numbers::pi * m / grid.L;
    const double k2 = k * k;
    for (int j = 0; j < grid.n2; ++j) spec.at(m, j) *= k2;
  }
  Field out(grid, fft->inverse(spec));
  const int n2 = grid.n2;
  const double inv_h2 = 1.0 / (grid.dx2() * grid.dx2());
  for (int j = 0; j < n2; ++j) {
    for (int i = 0; i < grid.n1; ++i) {
      const double c = psi(i, j);
      const double below = j > 0 ? psi(i, j - 1) : 2.0 * bottom - c;
      const double above = j < n2 - 1 ? psi(i, j + 1) : 2.0 * top - c;
      out(i, j) += (2.0 * c - below - above) * inv_h2;
    }
  }
  return out;
}

Field d_dx1(const Field& f) {
  const auto& g = f.grid();
  auto fft = RowFFT::get(g.n1, g.n2);
  RowSpectrum spec = fft->forward(f.values());
  for (int m = 0; m < spec.modes(); ++m) {
    const Complex factor =
        is_nyquist(m, g.n1) ? Complex(0.0, 0.0) : Complex(0.0, 2.0 * std::numbers::pi * m / g.L);
    for (int j = 0; j < g.n2; ++j) spec.at(m, j) *= factor;
  }
  return Field(g, fft->inverse(spec));
}

Field d_dx2(const Field& f) {
  const auto& g = f.grid();
  if (g.n2 < 3) throw PreconditionError("d_dx2: needs at least three rows");
  const int n2 = g.n2;
  const double inv2h = 1.0 / (2.0 * g.dx2());
  Field out(g);
  for (int i = 0; i < g.n1; ++i) {
    out(i, 0) = (-3.0 * f(i, 0) + 4.0 * f(i, 1) - f(i, 2)) * inv2h;
    out(i, n2 - 1) = (3.0 * f(i, n2 - 1) - 4.0 * f(i, n2 - 2) + f(i, n2 - 3)) * inv2h;
  }
  for (int j = 1; j < n2 - 1; ++j) {
    for (int i = 0; i < g.n1; ++i) out(i, j) = (f(i, j + 1) - f(i, j - 1)) * inv2h;
  }
  return out;
}

}  // namespace chanstab
