#include "elmbif/geometry.hpp"

#include <stdexcept>
#include <string>

namespace elmbif {

Domain Domain::interval(double a, double b) {
  Domain d;
  d.dim = 1;
  d.lower = {a, 0.0};
  d.upper = {b, 0.0};
  d.validate();
  return d;
}

Domain Domain::rectangle(double x0, double x1, double y0, double y1) {
  Domain d;
  d.dim = 2;
  d.lower = {x0, y0};
  d.upper = {x1, y1};
  d.validate();
  return d;
}

Domain Domain::unit(int dim) {
  if (dim == 1) return interval(0.0, 1.0);
  if (dim == 2) return rectangle(0.0, 1.0, 0.0, 1.0);
  throw std::invalid_argument("Domain::unit: dim must be 1 or 2, got " + std::to_string(dim));
}

bool Domain::contains(const Point& p, double tol) const {
  for (int k = 0; k < dim; ++k) {
    if (p[k] < lower[k] - tol || p[k] > upper[k] + tol) return false;
  }
  return true;
}

void Domain::validate() const {
  if (dim != 1 && dim != 2) {
    throw std::invalid_argument("Domain: dim must be 1 or 2, got " + std::to_string(dim));
  }
  for (int k = 0; k < dim; ++k) {
    if (!(lower[k] < upper[k])) {
      throw std::invalid_argument("Domain: lower bound must be below upper bound on every axis");
    }
  }
}

std::vector<double> linspace(double a, double b, int n) {
  if (n < 1) throw std::invalid_argument("linspace: n must be positive");
  std::vector<double> out(static_cast<std::size_t>(n));
  if (n == 1) {
    out[0] = 0.5 * (a + b);
    return out;
  }
  const double step = (b - a) / (n - 1);
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = a + step * i;
  out.back() = b;
  return out;
}

std::vector<Point> uniform_grid(const Domain& domain, int n_per_axis) {
  std::vector<Point> pts;
  const auto xs = linspace(domain.lower[0], domain.upper[0], n_per_axis);
  if (domain.dim == 1) {
    pts.reserve(xs.size());
    for (double x : xs) pts.push_back({x, 0.0});
    return pts;
  }
  const auto ys = linspace(domain.lower[1], domain.upper[1], n_per_axis);
  pts.reserve(xs.size() * ys.size());
  for (double y : ys) {
    for (double x : xs) pts.push_back({x, y});
  }
  return pts;
}

}  // namespace elmbif
