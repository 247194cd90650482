#include "chanstab/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "chanstab/error.hpp"
#include "chanstab/fourier.hpp"

namespace chanstab {

GridSpec::GridSpec(double L_, double H_, int n1_, int n2_) : L(L_), H(H_), n1(n1_), n2(n2_) {
  if (!(L > 0.0) || !(H > 0.0) || !std::isfinite(L) || !std::isfinite(H)) {
    throw PreconditionError("GridSpec: L and H must be positive and finite");
  }
  if (n1 < 1 || n2 < 1) throw PreconditionError("GridSpec: N1 and N2 must be positive");
}

Field::Field(const GridSpec& grid, double fill) : grid_(grid), values_(grid.size(), fill) {}

Field::Field(const GridSpec& grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size()) {
    throw PreconditionError("Field: expected " + std::to_string(grid_.size()) + " values, got " +
                            std::to_string(values_.size()));
  }
}

Field Field::x2_coordinate(const GridSpec& grid) {
  return from_function(grid, [](double, double x2) { return x2; });
}

bool Field::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

double Field::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

Field& Field::operator+=(const Field& other) { return axpy(1.0, other); }
Field& Field::operator-=(const Field& other) { return axpy(-1.0, other); }

Field& Field::operator*=(double s) {
  for (double& v : values_) v *= s;
  return *this;
}

Field& Field::axpy(double s, const Field& other) {
  require_same_grid(*this, other);
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += s * other.values_[k];
  return *this;
}

void require_same_grid(const Field& a, const Field& b) {
  if (!(a.grid() == b.grid())) throw PreconditionError("fields live on different grids");
}

double integrate(const Field& f) {
  double sum = 0.0;
  for (double v : f.values()) sum += v;
  return sum * f.grid().cell_area();
}

double inner(const Field& f, const Field& g) {
  require_same_grid(f, g);
  double sum = 0.0;
  auto a = f.values();
  auto b = g.values();
  for (std::size_t k = 0; k < a.size(); ++k) sum += a[k] * b[k];
  return sum * f.grid().cell_area();
}

double impulse(const Field& f) {
  const auto& g = f.grid();
  double sum = 0.0;
  for (int j = 0; j < g.n2; ++j) {
    double row = 0.0;
    for (int i = 0; i < g.n1; ++i) row += f(i, j);
    sum += g.x2(j) * row;
  }
  return sum * g.cell_area();
}

double integral_mean(const Field& f) { return integrate(f) / (f.grid().L * f.grid().H); }

double l2_norm(const Field& f) { return std::sqrt(inner(f, f)); }

double lp_distance(const Field& f, const Field& g, double p) {
  if (!(p > 1.0) || !std::isfinite(p)) {
    throw PreconditionError("lp_distance: p must lie in (1, inf)");
  }
  require_same_grid(f, g);
  auto a = f.values();
  auto b = g.values();
  double sum = 0.0;
  if (p == 2.0) {
    for (std::size_t k = 0; k < a.size(); ++k) sum += (a[k] - b[k]) * (a[k] - b[k]);
    return std::sqrt(sum * f.grid().cell_area());
  }
  for (std::size_t k = 0; k < a.size(); ++k) sum += std::pow(std::abs(a[k] - b[k]), p);
  return std::pow(sum * f.grid().cell_area(), 1.0 / p);
}

double lp_norm(const Field& f, double p) {
  if (!(p >= 1.0) || !std::isfinite(p)) throw PreconditionError("lp_norm: p must lie in [1, inf)");
  double sum = 0.0;
  for (double v : f.values()) sum += std::pow(std::abs(v), p);
  return std::pow(sum * f.grid().cell_area(), 1.0 / p);
}

Field shift_cells(const Field& f, int k) {
  const auto& g = f.grid();
  const int n1 = g.n1;
  const int s = ((k % n1) + n1) % n1;
  Field out(g);
  for (int j = 0; j < g.n2; ++j) {
    for (int i = 0; i < n1; ++i) {
      int src = i + s;
      if (src >= n1) src -= n1;
      out(i, j) = f(src, j);
    }
  }
  return out;
}

Field shift_x1(const Field& f, double alpha) {
  const auto& g = f.grid();
  double a = std::fmod(alpha, g.L);
  if (a < 0.0) a += g.L;
  const double cells = a / g.dx1();
  const double nearest = std::round(cells);
  if (std::abs(cells - nearest) <= 1e-12 * std::max(1.0, std::abs(cells))) {
    return shift_cells(f, static_cast<int>(nearest));
  }
  auto fft = RowFFT::get(g.n1, g.n2);
  RowSpectrum spec = fft->forward(f.values());
  const double two_pi = 2.0 * std::numbers::pi;
  for (int m = 0; m < spec.modes(); ++m) {
    const double phase = two_pi * m * a / g.L;
    Complex factor = std::polar(1.0, phase);
    // The Nyquist mode of an even grid has no imaginary partner; interpolate with cos.
    if (is_nyquist(m, g.n1)) factor = Complex(std::cos(phase), 0.0);
    for (int j = 0; j < g.n2; ++j) spec.at(m, j) *= factor;
  }
  return Field(g, fft->inverse(spec));
}

Field row_average(const Field& f) {
  const auto& g = f.grid();
  Field out(g);
  for (int j = 0; j < g.n2; ++j) {
    double s = 0.0;
    for (int i = 0; i < g.n1; ++i) s += f(i, j);
    s /= g.n1;
    for (int i = 0; i < g.n1; ++i) out(i, j) = s;
  }
  return out;
}

}  // namespace chanstab
