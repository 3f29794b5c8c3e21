#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "elmbif/nonlinear_system.hpp"
#include "elmbif/problems.hpp"

namespace elmbif {

/// Uniform grid with n nodes per axis, boundary nodes included.
/// Node (i, j) has index j * n + i.
struct FdGrid {
  Domain domain;
  int n = 0;
  double h = 0.0;
  std::vector<double> xs;
  std::vector<double> ys;

  int dim() const { return domain.dim; }
  Eigen::Index nodes() const;
  Point node(Eigen::Index k) const;
  bool on_boundary(Eigen::Index k) const;
};

/// Requires n >= 4 and a square cell in 2D.
FdGrid make_fd_grid(const PdeProblem& problem, int n_per_axis);

/// Nodal residual: second-order central differences inside, one row per
/// boundary node (u - g for Dirichlet, one-sided second-order derivative
/// for Neumann).
Eigen::VectorXd fd_residual(const PdeProblem& problem, const FdGrid& grid,
                            const Eigen::VectorXd& u, double param);
Eigen::SparseMatrix<double> fd_jacobian(const PdeProblem& problem, const FdGrid& grid,
                                        const Eigen::VectorXd& u, double param);
Eigen::VectorXd fd_param_derivative(const PdeProblem& problem, const FdGrid& grid,
                                    const Eigen::VectorXd& u, double param);

/// Values of f at the grid nodes.
Eigen::VectorXd sample_nodes(const FdGrid& grid, const std::function<double(const Point&)>& f);

/// Piecewise (bi)linear interpolation of nodal values at arbitrary points.
Eigen::SparseMatrix<double> interpolation_matrix(const FdGrid& grid,
                                                 const std::vector<Point>& points);

class FdSystem final : public DiscreteSystem {
 public:
  FdSystem(PdeProblem problem, FdGrid grid);

  const PdeProblem& problem() const { return problem_; }
  const FdGrid& grid() const { return grid_; }

  Eigen::Index unknowns() const override { return grid_.nodes(); }
  Eigen::Index equations() const override { return grid_.nodes(); }
  bool has_parameter() const override { return problem_.has_parameter(); }

  Eigen::VectorXd residual(const Eigen::VectorXd& u, double param) const override;
  Eigen::SparseMatrix<double> jacobian(const Eigen::VectorXd& u, double param) const;
  Eigen::VectorXd param_derivative(const Eigen::VectorXd& u, double param) const override;
  Eigen::VectorXd solve_linearized(const Eigen::VectorXd& u, double param,
                                   const Eigen::VectorXd& rhs) const override;
  std::pair<Eigen::VectorXd, double> solve_bordered(const Eigen::VectorXd& u, double param,
                                                    const Eigen::VectorXd& row_x, double row_p,
                                                    const Eigen::VectorXd& rhs_f,
                                                    double rhs_n) const override;
  Eigen::VectorXd observe(const Eigen::VectorXd& u) const override { return u; }
  Eigen::VectorXd observe_adjoint(const Eigen::VectorXd& v) const override { return v; }
  double measure(const Eigen::VectorXd& u) const override;

 private:
  PdeProblem problem_;
  FdGrid grid_;
  Eigen::SparseMatrix<double> measure_interp_;
};

NewtonReport fd_newton_solve(const PdeProblem& problem, const FdGrid& grid,
                             const Eigen::VectorXd& u0, double param,
                             const NewtonOptions& options = {});

struct FixedPointReport {
  bool converged = false;
  int iterations = 0;
  /// ||u_k - u_{k-1}|| / max(1, ||u_k||) per sweep.
  std::vector<double> change_norms;
  Eigen::VectorXd solution;
};

/// Picard iteration for the Dirichlet Burgers problem: the convective
/// velocity is frozen at the previous iterate, giving one linear solve per sweep.
FixedPointReport fixed_point_burgers(const PdeProblem& problem, const FdGrid& grid,
                                     const Eigen::VectorXd& u0, double tol = 1e-6,
                                     int max_iter = 200);

/// Bratu sweep Laplace(u) + lambda e^{u_p} u = lambda (u_p - 1) e^{u_p}.
FixedPointReport fixed_point_bratu(const PdeProblem& problem, const FdGrid& grid,
                                   const Eigen::VectorXd& u0, double tol = 1e-6,
                                   int max_iter = 200);

}  // namespace elmbif
