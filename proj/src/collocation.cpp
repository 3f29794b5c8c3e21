#include "elmbif/collocation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace elmbif {

std::size_t CollocationGrid::boundary_size() const {
  std::size_t n = 0;
  for (const auto& piece : boundary) n += piece.size();
  return n;
}

std::size_t CollocationGrid::size() const { return interior.size() + boundary_size(); }

std::vector<Point> CollocationGrid::points() const {
  std::vector<Point> pts(interior);
  for (const auto& piece : boundary) pts.insert(pts.end(), piece.begin(), piece.end());
  return pts;
}

namespace {

CollocationGrid make_grid_1d(const Domain& d, int m) {
  if (m < 3) throw std::invalid_argument("1D collocation needs at least 3 points");
  const auto xs = linspace(d.lower[0], d.upper[0], m);
  CollocationGrid g;
  for (int i = 1; i + 1 < m; ++i) g.interior.push_back({xs[i], 0.0});
  g.boundary.push_back({{xs.front(), 0.0}});
  g.boundary.push_back({{xs.back(), 0.0}});
  return g;
}

CollocationGrid make_grid_2d(const Domain& d, int m) {
  int ni = static_cast<int>(std::floor(std::sqrt(static_cast<double>(m)))) - 2;
  while (ni >= 1 && m - ni * ni < 4) --ni;
  if (ni < 1) throw std::invalid_argument("2D collocation needs at least 5 points");
  const int mb = m - ni * ni;
  CollocationGrid g;
  const double lx = d.length(0);
  const double ly = d.length(1);
  for (int j = 0; j < ni; ++j) {
    for (int i = 0; i < ni; ++i) {
      g.interior.push_back({d.lower[0] + lx * (i + 1) / (ni + 1),
                            d.lower[1] + ly * (j + 1) / (ni + 1)});
    }
  }
  // Walk the perimeter counterclockwise from the lower-left corner.
  const double perimeter = 2.0 * (lx + ly);
  const double edges[4] = {lx, lx + ly, 2.0 * lx + ly, perimeter};
  g.boundary.assign(4, {});
  for (int k = 0; k < mb; ++k) {
    const double s = perimeter * k / mb;
    if (s < edges[0]) {
      g.boundary[0].push_back({d.lower[0] + s, d.lower[1]});
    } else if (s < edges[1]) {
      g.boundary[1].push_back({d.upper[0], d.lower[1] + (s - edges[0])});
    } else if (s < edges[2]) {
      g.boundary[2].push_back({d.upper[0] - (s - edges[1]), d.upper[1]});
    } else {
      g.boundary[3].push_back({d.lower[0], d.upper[1] - (s - edges[2])});
    }
  }
  std::erase_if(g.boundary, [](const auto& piece) { return piece.empty(); });
  return g;
}

}  // namespace

CollocationGrid make_grid(const PdeProblem& problem, int basis_size, double ratio) {
  problem.validate();
  if (basis_size < 1) throw std::invalid_argument("basis size must be positive");
  if (!(ratio > 0.0 && ratio <= 1.0))
    throw std::invalid_argument("collocation ratio must lie in (0, 1]");
  const int m = static_cast<int>(std::lround(ratio * basis_size));
  CollocationGrid g = problem.dim() == 1 ? make_grid_1d(problem.domain, m)
                                         : make_grid_2d(problem.domain, m);
  g.ratio = ratio;
  g.requires_pinv = ratio >= 1.0;
  return g;
}

std::vector<Point> measure_grid(const Domain& domain) {
  return uniform_grid(domain, domain.dim == 1 ? 101 : 41);
}

ElmSystem::ElmSystem(PdeProblem problem, ElmBasis basis, CollocationGrid grid,
                     LinearSolveConfig lin)
    : problem_(std::move(problem)),
      basis_(std::move(basis)),
      grid_(std::move(grid)),
      lin_(lin) {
  problem_.validate();
  if (basis_.dim() != problem_.dim())
    throw std::invalid_argument("basis and problem dimensions differ");
  if (grid_.requires_pinv && lin_.method != LinearMethod::SvdPinv)
    throw std::invalid_argument("square collocation systems require the SVD pseudoinverse");
  points_ = grid_.points();
  if (points_.empty()) throw std::invalid_argument("empty collocation grid");
  interior_count_ = static_cast<Eigen::Index>(grid_.interior.size());
  value_ = collocation_matrix(basis_, points_);
  dx_ = derivative_matrix(basis_, points_, 0, 1);
  dxx_ = derivative_matrix(basis_, points_, 0, 2);
  if (problem_.dim() == 2) dyy_ = derivative_matrix(basis_, points_, 1, 2);
  const auto eval_pts = measure_grid(problem_.domain);
  measure_values_ = collocation_matrix(basis_, eval_pts);
}

void ElmSystem::check_weights(const Eigen::VectorXd& w) const {
  if (w.size() != basis_.size())
    throw std::invalid_argument("weight vector has " + std::to_string(w.size()) +
                                " entries, expected " + std::to_string(basis_.size()));
}

Eigen::VectorXd ElmSystem::residual(const Eigen::VectorXd& w, double param) const {
  check_weights(w);
  const Eigen::VectorXd u = value_ * w;
  const Eigen::VectorXd ux = dx_ * w;
  const Eigen::VectorXd uxx = dxx_ * w;
  Eigen::VectorXd uyy;
  if (problem_.dim() == 2) uyy = dyy_ * w;
  const Eigen::Index m = equations();
  Eigen::VectorXd f(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const LocalJet jet{u[i], ux[i], uxx[i], problem_.dim() == 2 ? uyy[i] : 0.0};
    const Point& x = points_[static_cast<std::size_t>(i)];
    f[i] = i < interior_count_
               ? residual_operator(problem_, x, jet, param)
               : boundary_residual(boundary_condition(problem_, x, param), jet);
  }
  return f;
}

Eigen::MatrixXd ElmSystem::jacobian(const Eigen::VectorXd& w, double param) const {
  check_weights(w);
  const Eigen::VectorXd u = value_ * w;
  const Eigen::VectorXd ux = dx_ * w;
  const Eigen::VectorXd uxx = dxx_ * w;
  Eigen::VectorXd uyy;
  if (problem_.dim() == 2) uyy = dyy_ * w;
  const Eigen::Index m = equations();
  Eigen::VectorXd a(m), b(m), c(m), e(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const Point& x = points_[static_cast<std::size_t>(i)];
    if (i < interior_count_) {
      const LocalJet jet{u[i], ux[i], uxx[i], problem_.dim() == 2 ? uyy[i] : 0.0};
      const auto s = residual_linearization(problem_, x, jet, param);
      a[i] = s.du;
      b[i] = s.dux;
      c[i] = s.duxx;
      e[i] = s.duyy;
    } else {
      const bool neumann = boundary_condition(problem_, x, param).type == BoundaryType::Neumann;
      a[i] = neumann ? 0.0 : 1.0;
      b[i] = neumann ? 1.0 : 0.0;
      c[i] = 0.0;
      e[i] = 0.0;
    }
  }
  Eigen::MatrixXd j = a.asDiagonal() * value_;
  j.noalias() += b.asDiagonal() * dx_;
  j.noalias() += c.asDiagonal() * dxx_;
  if (problem_.dim() == 2) j.noalias() += e.asDiagonal() * dyy_;
  return j;
}

Eigen::VectorXd ElmSystem::param_derivative(const Eigen::VectorXd& w, double param) const {
  if (!problem_.has_parameter())
    throw std::invalid_argument(to_string(problem_.kind) + " has no continuation parameter");
  check_weights(w);
  const Eigen::VectorXd u = value_ * w;
  const Eigen::VectorXd ux = dx_ * w;
  const Eigen::VectorXd uxx = dxx_ * w;
  Eigen::VectorXd uyy;
  if (problem_.dim() == 2) uyy = dyy_ * w;
  const Eigen::Index m = equations();
  Eigen::VectorXd fp(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const Point& x = points_[static_cast<std::size_t>(i)];
    if (i < interior_count_) {
      const LocalJet jet{u[i], ux[i], uxx[i], problem_.dim() == 2 ? uyy[i] : 0.0};
      fp[i] = residual_param_partial(problem_, x, jet, param);
    } else {
      // B u - g(p): the row derivative is -dg/dp.
      fp[i] = -boundary_condition(problem_, x, param).dvalue_dparam;
    }
  }
  return fp;
}

Eigen::VectorXd ElmSystem::solve_linearized(const Eigen::VectorXd& w, double param,
                                            const Eigen::VectorXd& rhs) const {
  return lsq_solve(jacobian(w, param), rhs, lin_);
}

std::pair<Eigen::VectorXd, double> ElmSystem::solve_bordered(const Eigen::VectorXd& w,
                                                             double param,
                                                             const Eigen::VectorXd& row_x,
                                                             double row_p,
                                                             const Eigen::VectorXd& rhs_f,
                                                             double rhs_n) const {
  const Eigen::Index m = equations();
  const Eigen::Index n = unknowns();
  Eigen::MatrixXd a(m, n + 1);
  a.leftCols(n) = jacobian(w, param);
  a.col(n) = param_derivative(w, param);
  // Least squares for the PDE rows restricted to the hyperplane of the
  // arclength row, so the constraint holds exactly even when the collocation
  // rows are inconsistent: z = z0 + P y with P the projector onto c-perp.
  Eigen::VectorXd c(n + 1);
  c << row_x, row_p;
  const double cc = c.squaredNorm();
  if (!(cc > 0.0)) throw std::invalid_argument("zero bordering row");
  const Eigen::VectorXd z0 = c * (rhs_n / cc);
  const Eigen::VectorXd pde_c = a * c;
  const Eigen::MatrixXd projected = a - pde_c * (c.transpose() / cc);
  Eigen::VectorXd y = lsq_solve(projected, rhs_f - a * z0, lin_);
  y -= c * (c.dot(y) / cc);
  const Eigen::VectorXd sol = z0 + y;
  return {sol.head(n), sol[n]};
}

double ElmSystem::measure(const Eigen::VectorXd& w) const {
  check_weights(w);
  return (measure_values_ * w).cwiseAbs().maxCoeff();
}

Eigen::VectorXd assemble_residual(const PdeProblem& problem, const ElmBasis& basis,
                                  const CollocationGrid& grid, const Eigen::VectorXd& w,
                                  double param) {
  return ElmSystem(problem, basis, grid).residual(w, param);
}

Eigen::MatrixXd assemble_jacobian(const PdeProblem& problem, const ElmBasis& basis,
                                  const CollocationGrid& grid, const Eigen::VectorXd& w,
                                  double param) {
  return ElmSystem(problem, basis, grid).jacobian(w, param);
}

Eigen::VectorXd residual_param_derivative(const PdeProblem& problem, const ElmBasis& basis,
                                          const CollocationGrid& grid, const Eigen::VectorXd& w,
                                          double param) {
  return ElmSystem(problem, basis, grid).param_derivative(w, param);
}

NewtonReport elm_newton_solve(const PdeProblem& problem, const ElmBasis& basis,
                              const CollocationGrid& grid, const Eigen::VectorXd& w0, double param,
                              const NewtonOptions& options, const LinearSolveConfig& lin) {
  const ElmSystem system(problem, basis, grid, lin);
  return newton_solve(system, w0, param, options);
}

Eigen::VectorXd fit_initial_weights(const ElmBasis& basis, std::span<const Point> points,
                                    const ScalarField& target, const LinearSolveConfig& lin) {
  if (points.empty()) throw std::invalid_argument("no fitting points");
  Eigen::VectorXd y(static_cast<Eigen::Index>(points.size()));
  for (std::size_t i = 0; i < points.size(); ++i) y[static_cast<Eigen::Index>(i)] = target(points[i]);
  return lsq_solve(collocation_matrix(basis, points), y, lin);
}

Eigen::VectorXd reconstruct(const ElmBasis& basis, const Eigen::VectorXd& w,
                            std::span<const Point> points) {
  if (w.size() != basis.size()) throw std::invalid_argument("weight vector size mismatch");
  return collocation_matrix(basis, points) * w;
}

nlohmann::json solve_result_to_json(const ElmSystem& system, const NewtonReport& report,
                                    int resolution) {
  nlohmann::json doc;
  doc["problem"] = to_json(system.problem());
  doc["basis"] = to_json(system.basis());
  doc["collocation_points"] = system.equations();
  doc["linear_solver"] = to_string(system.linear_solver().method);
  doc["newton"] = to_json(report, false);
  doc["weights"] = std::vector<double>(report.solution.data(),
                                       report.solution.data() + report.solution.size());
  const auto pts = uniform_grid(system.problem().domain, resolution);
  const Eigen::VectorXd u = reconstruct(system.basis(), report.solution, pts);
  nlohmann::json samples = nlohmann::json::array();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (system.problem().dim() == 1)
      samples.push_back({pts[i][0], u[static_cast<Eigen::Index>(i)]});
    else
      samples.push_back({pts[i][0], pts[i][1], u[static_cast<Eigen::Index>(i)]});
  }
  doc["samples"] = std::move(samples);
  return doc;
}

}  // namespace elmbif
