#include "elmbif/fd_solver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/SparseLU>

#include "elmbif/collocation.hpp"

namespace elmbif {

using Triplets = std::vector<Eigen::Triplet<double>>;

Eigen::Index FdGrid::nodes() const {
  return dim() == 1 ? n : static_cast<Eigen::Index>(n) * n;
}

Point FdGrid::node(Eigen::Index k) const {
  if (dim() == 1) return {xs[static_cast<std::size_t>(k)], 0.0};
  return {xs[static_cast<std::size_t>(k % n)], ys[static_cast<std::size_t>(k / n)]};
}

bool FdGrid::on_boundary(Eigen::Index k) const {
  const Eigen::Index i = k % n;
  if (dim() == 1) return i == 0 || i == n - 1;
  const Eigen::Index j = k / n;
  return i == 0 || i == n - 1 || j == 0 || j == n - 1;
}

FdGrid make_fd_grid(const PdeProblem& problem, int n_per_axis) {
  problem.validate();
  if (n_per_axis < 4) throw std::invalid_argument("finite differences need at least 4 nodes per axis");
  FdGrid g;
  g.domain = problem.domain;
  g.n = n_per_axis;
  g.h = problem.domain.length(0) / (n_per_axis - 1);
  g.xs = linspace(problem.domain.lower[0], problem.domain.upper[0], n_per_axis);
  if (g.dim() == 2) {
    if (std::abs(problem.domain.length(1) - problem.domain.length(0)) > 1e-12)
      throw std::invalid_argument("2D finite differences need a square domain");
    g.ys = linspace(problem.domain.lower[1], problem.domain.upper[1], n_per_axis);
  }
  return g;
}

namespace {

void check_size(const FdGrid& grid, const Eigen::VectorXd& u) {
  if (u.size() != grid.nodes())
    throw std::invalid_argument("nodal vector has " + std::to_string(u.size()) +
                                " entries, expected " + std::to_string(grid.nodes()));
}

// Residual and, when `trip` is non-null, Jacobian entries of one discrete
// equation set. Both share the stencil bookkeeping.
Eigen::VectorXd evaluate(const PdeProblem& p, const FdGrid& g, const Eigen::VectorXd& u,
                         double param, Triplets* trip) {
  check_size(g, u);
  const double h = g.h;
  const double h2 = h * h;
  const Eigen::Index nn = g.nodes();
  Eigen::VectorXd f(nn);
  auto add = [&](Eigen::Index r, Eigen::Index c, double v) {
    if (trip) trip->emplace_back(static_cast<int>(r), static_cast<int>(c), v);
  };

  if (p.dim() == 2) {
    const int n = g.n;
    for (Eigen::Index k = 0; k < nn; ++k) {
      if (g.on_boundary(k)) {
        f[k] = u[k];
        add(k, k, 1.0);
        continue;
      }
      const double lap = (u[k - 1] + u[k + 1] + u[k - n] + u[k + n] - 4.0 * u[k]) / h2;
      const double e = param * std::exp(u[k]);
      f[k] = lap + e;
      add(k, k, -4.0 / h2 + e);
      for (Eigen::Index nb : {k - 1, k + 1, k - n, k + n}) add(k, nb, 1.0 / h2);
    }
    return f;
  }

  const Eigen::Index last = nn - 1;
  for (Eigen::Index j = 1; j < last; ++j) {
    const double d2 = (u[j + 1] - 2.0 * u[j] + u[j - 1]) / h2;
    const double d1 = (u[j + 1] - u[j - 1]) / (2.0 * h);
    switch (p.kind) {
      case ProblemKind::BurgersDirichlet:
      case ProblemKind::BurgersMixed:
        f[j] = p.nu * d2 - u[j] * d1;
        add(j, j - 1, p.nu / h2 + u[j] / (2.0 * h));
        add(j, j, -2.0 * p.nu / h2 - d1);
        add(j, j + 1, p.nu / h2 - u[j] / (2.0 * h));
        break;
      case ProblemKind::Bratu1D: {
        const double e = param * std::exp(u[j]);
        f[j] = d2 + e;
        add(j, j - 1, 1.0 / h2);
        add(j, j, -2.0 / h2 + e);
        add(j, j + 1, 1.0 / h2);
        break;
      }
      case ProblemKind::BratuRadial: {
        const double r = g.xs[static_cast<std::size_t>(j)];
        const double e = param * std::exp(u[j]);
        f[j] = d2 + d1 / r + e;
        add(j, j - 1, 1.0 / h2 - 1.0 / (2.0 * h * r));
        add(j, j, -2.0 / h2 + e);
        add(j, j + 1, 1.0 / h2 + 1.0 / (2.0 * h * r));
        break;
      }
      default:
        throw std::logic_error("unexpected problem kind");
    }
  }

  // Right end: homogeneous Dirichlet for every 1D problem.
  f[last] = u[last];
  add(last, last, 1.0);

  const BoundaryCondition left = boundary_condition(p, g.node(0), param);
  if (left.type == BoundaryType::Dirichlet) {
    f[0] = u[0] - left.value;
    add(0, 0, 1.0);
  } else {
    f[0] = (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * h) - left.value;
    add(0, 0, -3.0 / (2.0 * h));
    add(0, 1, 4.0 / (2.0 * h));
    add(0, 2, -1.0 / (2.0 * h));
  }
  return f;
}

Eigen::SparseMatrix<double> from_triplets(Eigen::Index rows, Eigen::Index cols,
                                          const Triplets& t) {
  Eigen::SparseMatrix<double> a(rows, cols);
  a.setFromTriplets(t.begin(), t.end());
  a.makeCompressed();
  return a;
}

Eigen::VectorXd sparse_solve(const Eigen::SparseMatrix<double>& a, const Eigen::VectorXd& rhs) {
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(a);
  if (lu.info() != Eigen::Success) throw RankError("sparse LU factorization failed: singular matrix");
  Eigen::VectorXd x = lu.solve(rhs);
  if (lu.info() != Eigen::Success || !x.allFinite()) throw RankError("sparse LU solve failed");
  return x;
}

}  // namespace

Eigen::VectorXd fd_residual(const PdeProblem& problem, const FdGrid& grid,
                            const Eigen::VectorXd& u, double param) {
  return evaluate(problem, grid, u, param, nullptr);
}

Eigen::SparseMatrix<double> fd_jacobian(const PdeProblem& problem, const FdGrid& grid,
                                        const Eigen::VectorXd& u, double param) {
  Triplets t;
  t.reserve(static_cast<std::size_t>(grid.nodes()) * (grid.dim() == 1 ? 3 : 5));
  evaluate(problem, grid, u, param, &t);
  return from_triplets(grid.nodes(), grid.nodes(), t);
}

Eigen::VectorXd fd_param_derivative(const PdeProblem& problem, const FdGrid& grid,
                                    const Eigen::VectorXd& u, double param) {
  if (!problem.has_parameter())
    throw std::invalid_argument(to_string(problem.kind) + " has no continuation parameter");
  check_size(grid, u);
  Eigen::VectorXd fp = Eigen::VectorXd::Zero(grid.nodes());
  if (problem.kind == ProblemKind::BurgersMixed) {
    fp[0] = -boundary_condition(problem, grid.node(0), param).dvalue_dparam;
    return fp;
  }
  for (Eigen::Index k = 0; k < grid.nodes(); ++k) {
    if (!grid.on_boundary(k)) fp[k] = std::exp(u[k]);
  }
  return fp;
}

Eigen::VectorXd sample_nodes(const FdGrid& grid, const std::function<double(const Point&)>& f) {
  Eigen::VectorXd v(grid.nodes());
  for (Eigen::Index k = 0; k < grid.nodes(); ++k) v[k] = f(grid.node(k));
  return v;
}

Eigen::SparseMatrix<double> interpolation_matrix(const FdGrid& grid,
                                                 const std::vector<Point>& points) {
  Triplets t;
  auto locate = [&](double x, double lo) {
    const double s = (x - lo) / grid.h;
    int i = std::clamp(static_cast<int>(std::floor(s)), 0, grid.n - 2);
    return std::pair{i, std::clamp(s - i, 0.0, 1.0)};
  };
  for (std::size_t r = 0; r < points.size(); ++r) {
    const int row = static_cast<int>(r);
    const auto [i, tx] = locate(points[r][0], grid.domain.lower[0]);
    if (grid.dim() == 1) {
      t.emplace_back(row, i, 1.0 - tx);
      t.emplace_back(row, i + 1, tx);
      continue;
    }
    const auto [j, ty] = locate(points[r][1], grid.domain.lower[1]);
    const int k = j * grid.n + i;
    t.emplace_back(row, k, (1.0 - tx) * (1.0 - ty));
    t.emplace_back(row, k + 1, tx * (1.0 - ty));
    t.emplace_back(row, k + grid.n, (1.0 - tx) * ty);
    t.emplace_back(row, k + grid.n + 1, tx * ty);
  }
  return from_triplets(static_cast<Eigen::Index>(points.size()), grid.nodes(), t);
}

FdSystem::FdSystem(PdeProblem problem, FdGrid grid)
    : problem_(std::move(problem)), grid_(std::move(grid)) {
  problem_.validate();
  if (grid_.dim() != problem_.dim()) throw std::invalid_argument("grid and problem dimensions differ");
  measure_interp_ = interpolation_matrix(grid_, measure_grid(problem_.domain));
}

Eigen::VectorXd FdSystem::residual(const Eigen::VectorXd& u, double param) const {
  return fd_residual(problem_, grid_, u, param);
}

Eigen::SparseMatrix<double> FdSystem::jacobian(const Eigen::VectorXd& u, double param) const {
  return fd_jacobian(problem_, grid_, u, param);
}

Eigen::VectorXd FdSystem::param_derivative(const Eigen::VectorXd& u, double param) const {
  return fd_param_derivative(problem_, grid_, u, param);
}

Eigen::VectorXd FdSystem::solve_linearized(const Eigen::VectorXd& u, double param,
                                           const Eigen::VectorXd& rhs) const {
  return sparse_solve(jacobian(u, param), rhs);
}

std::pair<Eigen::VectorXd, double> FdSystem::solve_bordered(const Eigen::VectorXd& u,
                                                            double param,
                                                            const Eigen::VectorXd& row_x,
                                                            double row_p,
                                                            const Eigen::VectorXd& rhs_f,
                                                            double rhs_n) const {
  const Eigen::Index n = grid_.nodes();
  Triplets t;
  evaluate(problem_, grid_, u, param, &t);
  const Eigen::VectorXd fp = param_derivative(u, param);
  for (Eigen::Index k = 0; k < n; ++k) {
    if (fp[k] != 0.0) t.emplace_back(static_cast<int>(k), static_cast<int>(n), fp[k]);
    if (row_x[k] != 0.0) t.emplace_back(static_cast<int>(n), static_cast<int>(k), row_x[k]);
  }
  t.emplace_back(static_cast<int>(n), static_cast<int>(n), row_p);
  Eigen::VectorXd rhs(n + 1);
  rhs << rhs_f, rhs_n;
  const Eigen::VectorXd sol = sparse_solve(from_triplets(n + 1, n + 1, t), rhs);
  return {sol.head(n), sol[n]};
}

double FdSystem::measure(const Eigen::VectorXd& u) const {
  check_size(grid_, u);
  return (measure_interp_ * u).cwiseAbs().maxCoeff();
}

NewtonReport fd_newton_solve(const PdeProblem& problem, const FdGrid& grid,
                             const Eigen::VectorXd& u0, double param,
                             const NewtonOptions& options) {
  return newton_solve(FdSystem(problem, grid), u0, param, options);
}

namespace {

template <class Assemble>
FixedPointReport fixed_point(const FdGrid& grid, const Eigen::VectorXd& u0, double tol,
                             int max_iter, Assemble assemble) {
  check_size(grid, u0);
  if (max_iter < 1) throw std::invalid_argument("max_iter must be positive");
  FixedPointReport rep;
  Eigen::VectorXd u = u0;
  for (int it = 0; it < max_iter; ++it) {
    Triplets t;
    Eigen::VectorXd b = Eigen::VectorXd::Zero(grid.nodes());
    assemble(u, t, b);
    Eigen::VectorXd next;
    try {
      next = sparse_solve(from_triplets(grid.nodes(), grid.nodes(), t), b);
    } catch (const RankError&) {
      break;
    }
    const double change = (next - u).norm() / std::max(1.0, next.norm());
    u = std::move(next);
    rep.iterations = it + 1;
    rep.change_norms.push_back(change);
    if (!std::isfinite(change)) break;
    if (change < tol) {
      rep.converged = true;
      break;
    }
  }
  rep.solution = std::move(u);
  return rep;
}

}  // namespace

FixedPointReport fixed_point_burgers(const PdeProblem& problem, const FdGrid& grid,
                                     const Eigen::VectorXd& u0, double tol, int max_iter) {
  if (problem.kind != ProblemKind::BurgersDirichlet)
    throw std::invalid_argument("fixed-point Burgers sweep needs the Dirichlet problem");
  const double h = grid.h;
  const double nu = problem.nu;
  const double gamma = problem.gamma();
  return fixed_point(grid, u0, tol, max_iter, [&](const Eigen::VectorXd& up, Triplets& t,
                                                  Eigen::VectorXd& b) {
    const int last = grid.n - 1;
    t.emplace_back(0, 0, 1.0);
    b[0] = gamma;
    t.emplace_back(last, last, 1.0);
    for (int j = 1; j < last; ++j) {
      t.emplace_back(j, j - 1, nu / (h * h) + up[j] / (2.0 * h));
      t.emplace_back(j, j, -2.0 * nu / (h * h));
      t.emplace_back(j, j + 1, nu / (h * h) - up[j] / (2.0 * h));
    }
  });
}

FixedPointReport fixed_point_bratu(const PdeProblem& problem, const FdGrid& grid,
                                   const Eigen::VectorXd& u0, double tol, int max_iter) {
  if (problem.kind != ProblemKind::Bratu1D && problem.kind != ProblemKind::Bratu2D)
    throw std::invalid_argument("fixed-point Bratu sweep needs a Dirichlet Bratu problem");
  const double h2 = grid.h * grid.h;
  const double lambda = problem.param;
  const int n = grid.n;
  return fixed_point(grid, u0, tol, max_iter, [&](const Eigen::VectorXd& up, Triplets& t,
                                                  Eigen::VectorXd& b) {
    for (Eigen::Index k = 0; k < grid.nodes(); ++k) {
      const int r = static_cast<int>(k);
      if (grid.on_boundary(k)) {
        t.emplace_back(r, r, 1.0);
        continue;
      }
      const double e = lambda * std::exp(up[k]);
      b[k] = (up[k] - 1.0) * e;
      const double center = grid.dim() == 1 ? -2.0 / h2 : -4.0 / h2;
      t.emplace_back(r, r, center + e);
      t.emplace_back(r, r - 1, 1.0 / h2);
      t.emplace_back(r, r + 1, 1.0 / h2);
      if (grid.dim() == 2) {
        t.emplace_back(r, r - n, 1.0 / h2);
        t.emplace_back(r, r + n, 1.0 / h2);
      }
    }
  });
}

}  // namespace elmbif
