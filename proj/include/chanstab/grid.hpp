#pragma once

// Periodic channel T_L x (0,H) discretized by N1 x N2 equal-area cells.
// Cell centers sit at x1 = (i+1/2) L/N1, x2 = (j+1/2) H/N2; no node lies on a wall.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace chanstab {

struct GridSpec {
  double L = 0.0;  // period along x1
  double H = 0.0;  // channel height
  int n1 = 0;      // cells along x1
  int n2 = 0;      // cells along x2

  GridSpec() = default;
  GridSpec(double L_, double H_, int n1_, int n2_);

  double dx1() const { return L / n1; }
  double dx2() const { return H / n2; }
  double cell_area() const { return dx1() * dx2(); }
  double x1(int i) const { return (i + 0.5) * dx1(); }
  double x2(int j) const { return (j + 0.5) * dx2(); }
  std::size_t size() const { return static_cast<std::size_t>(n1) * static_cast<std::size_t>(n2); }
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(j) * static_cast<std::size_t>(n1) + static_cast<std::size_t>(i);
  }

  bool operator==(const GridSpec&) const = default;
};

/// One real value per cell, stored row-major with i (x1) fastest.
class Field {
 public:
  Field() = default;
  explicit Field(const GridSpec& grid, double fill = 0.0);
  Field(const GridSpec& grid, std::vector<double> values);

  template <class F>
  static Field from_function(const GridSpec& grid, F&& f) {
    Field out(grid);
    for (int j = 0; j < grid.n2; ++j) {
      for (int i = 0; i < grid.n1; ++i) out(i, j) = f(grid.x1(i), grid.x2(j));
    }
    return out;
  }

  /// f(x1, x2) = x2 at the cell centers.
  static Field x2_coordinate(const GridSpec& grid);

  const GridSpec& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }

  double operator()(int i, int j) const { return values_[grid_.index(i, j)]; }
  double& operator()(int i, int j) { return values_[grid_.index(i, j)]; }
  double operator[](std::size_t k) const { return values_[k]; }
  double& operator[](std::size_t k) { return values_[k]; }

  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  bool all_finite() const;
  double max_abs() const;

  Field& operator+=(const Field& other);
  Field& operator-=(const Field& other);
  Field& operator*=(double s);
  /// this += s * other
  Field& axpy(double s, const Field& other);

  friend Field operator+(Field a, const Field& b) { return a += b; }
  friend Field operator-(Field a, const Field& b) { return a -= b; }
  friend Field operator*(Field a, double s) { return a *= s; }
  friend Field operator*(double s, Field a) { return a *= s; }
  friend Field operator-(Field a) { return a *= -1.0; }

 private:
  GridSpec grid_;
  std::vector<double> values_;
};

/// Vorticity plus the x1 flux Q (constant in time).
struct FlowState {
  Field vorticity;
  double flux = 0.0;
};

void require_same_grid(const Field& a, const Field& b);

/// Midpoint rule: cell area times the sum of values.
double integrate(const Field& f);
/// Integral of f * g.
double inner(const Field& f, const Field& g);
/// Integral of x2 f (linear momentum along the channel).
double impulse(const Field& f);
/// Integral divided by L H.
double integral_mean(const Field& f);
double l2_norm(const Field& f);
/// (integral |f - g|^p)^(1/p); p must be finite and > 1.
double lp_distance(const Field& f, const Field& g, double p);
/// (integral |f|^p)^(1/p) for p >= 1.
double lp_norm(const Field& f, double p);

/// f(. + alpha e1) with periodic wraparound. Grid-multiple shifts rotate columns
/// exactly; other shifts use trigonometric interpolation along x1.
Field shift_x1(const Field& f, double alpha);
/// Exact rotation by an integer number of cells: out(i,j) = f(i+k, j).
Field shift_cells(const Field& f, int k);

/// x1-average of each row, broadcast back to a Field depending on x2 only.
Field row_average(const Field& f);

}  // namespace chanstab
