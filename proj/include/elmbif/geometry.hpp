#pragma once

#include <array>
#include <vector>

namespace elmbif {

/// A point in one or two dimensions. One-dimensional problems leave the
/// second coordinate at zero.
using Point = std::array<double, 2>;

/// Axis-aligned interval or rectangle.
struct Domain {
  int dim = 1;
  Point lower{0.0, 0.0};
  Point upper{1.0, 0.0};

  static Domain interval(double a, double b);
  static Domain rectangle(double x0, double x1, double y0, double y1);
  static Domain unit(int dim);

  double length(int axis) const { return upper[axis] - lower[axis]; }
  bool contains(const Point& p, double tol = 1e-12) const;

  /// Throws std::invalid_argument when dim is not 1 or 2 or an axis is empty.
  void validate() const;
};

/// n equispaced values from a to b inclusive (n == 1 gives the midpoint).
std::vector<double> linspace(double a, double b, int n);

/// Uniform evaluation grid used for measures and error norms: n points per
/// axis over the closed domain, row-major with x varying fastest.
std::vector<Point> uniform_grid(const Domain& domain, int n_per_axis);

}  // namespace elmbif
