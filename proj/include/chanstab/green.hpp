#pragma once

// Inverse Laplacian on the periodic channel with zero Dirichlet walls.
//
// Fourier transform along x1, second-order finite differences along x2. Wall
// values enter through ghost cells reflected about x2 = 0 and x2 = H
// (psi_ghost = 2 psi_wall - psi_edge), so every cell keeps the same stencil
// and the grid never carries a wall node.

#include <memory>
#include <utility>
#include <vector>

#include "chanstab/fourier.hpp"
#include "chanstab/grid.hpp"

namespace chanstab {

class PoissonSolver {
 public:
  explicit PoissonSolver(const GridSpec& grid);

  const GridSpec& grid() const { return grid_; }
  const RowFFT& fft() const { return *fft_; }
  /// 2 pi m / L for half-spectrum slot m.
  double wavenumber(int m) const;

  /// psi = G omega: -Lap psi = omega, periodic in x1, psi = 0 on both walls.
  Field green_apply(const Field& omega) const;
  /// Same solve performed in place on a row spectrum.
  void solve_spectral(RowSpectrum& spec) const;

  /// T v = G v minus its integral mean.
  Field t_apply(const Field& v) const;

  /// psi = G omega + (Q/H) x2; zero on the bottom wall, Q on the top wall.
  Field stream_function(const FlowState& s) const;

  /// (u1, u2) = (d psi/dx2, -d psi/dx1).
  std::pair<Field, Field> velocity(const FlowState& s) const;

  /// E(omega) = 1/2 integral omega G omega.
  double energy(const Field& omega) const;
  /// E(omega) + L Q^2 / (2H).
  double kinetic_energy(const FlowState& s) const;

  /// Discrete -Lap psi with the given constant wall values (spectral in x1,
  /// ghost-reflected second differences in x2). Inverse of green_apply when
  /// both wall values are zero.
  Field negative_laplacian(const Field& psi, double bottom = 0.0, double top = 0.0) const;

 private:
  GridSpec grid_;
  std::shared_ptr<const RowFFT> fft_;
  // Thomas factorization per x1 wavenumber: modified upper diagonal and
  // reciprocal pivots, n2 entries each.
  std::vector<std::vector<double>> upper_;
  std::vector<std::vector<double>> inv_pivot_;
};

/// Discrete -Lap psi with constant wall values; see PoissonSolver::negative_laplacian.
Field discrete_negative_laplacian(const Field& psi, double bottom = 0.0, double top = 0.0);

/// Spectral x1-derivative. The Nyquist mode of an even grid is dropped.
Field d_dx1(const Field& f);
/// Centered second-order x2-derivative; rows 0 and n2-1 use the one-sided
/// three-point stencil. Needs n2 >= 3.
Field d_dx2(const Field& f);

}  // namespace chanstab
