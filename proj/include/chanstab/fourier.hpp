#pragma once

// Batched real FFTs along x1 for every row of a Field.

#include <complex>
#include <memory>
#include <span>
#include <vector>

#include "chanstab/grid.hpp"

namespace chanstab {

using Complex = std::complex<double>;

/// Half-spectrum of every row: n2 rows of (n1/2 + 1) coefficients, row-major.
struct RowSpectrum {
  int n1 = 0;
  int n2 = 0;
  std::vector<Complex> coeffs;

  int modes() const { return n1 / 2 + 1; }
  Complex& at(int m, int j) { return coeffs[static_cast<std::size_t>(j) * modes() + m]; }
  Complex at(int m, int j) const { return coeffs[static_cast<std::size_t>(j) * modes() + m]; }
};

/// FFTW plans for one (n1, n2) shape. Execution is thread-safe: plans are
/// created unaligned and every call works on its own buffers.
class RowFFT {
 public:
  RowFFT(int n1, int n2);
  ~RowFFT();
  RowFFT(const RowFFT&) = delete;
  RowFFT& operator=(const RowFFT&) = delete;

  int n1() const { return n1_; }
  int n2() const { return n2_; }

  RowSpectrum forward(std::span<const double> values) const;
  /// Inverse transform including the 1/n1 normalization.
  std::vector<double> inverse(const RowSpectrum& spec) const;

  /// Cached instance for a shape; plans are shared across callers.
  static std::shared_ptr<const RowFFT> get(int n1, int n2);

 private:
  int n1_;
  int n2_;
  void* forward_plan_ = nullptr;
  void* inverse_plan_ = nullptr;
};

/// Signed integer wavenumber index of half-spectrum slot m (always m here, but
/// the Nyquist slot of an even n1 needs special handling by callers).
inline bool is_nyquist(int m, int n1) { return n1 % 2 == 0 && m == n1 / 2; }

}  // namespace chanstab
