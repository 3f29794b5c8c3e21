#pragma once

#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "elmbif/basis.hpp"
#include "elmbif/lsq.hpp"
#include "elmbif/nonlinear_system.hpp"
#include "elmbif/problems.hpp"

namespace elmbif {

/// Interior and boundary collocation points. Rows of every assembled system
/// follow points(): interior first, then each boundary piece in order.
struct CollocationGrid {
  std::vector<Point> interior;
  std::vector<std::vector<Point>> boundary;
  double ratio = 0.5;
  /// Square systems (ratio == 1) are only safe with the SVD pseudoinverse.
  bool requires_pinv = false;

  std::size_t size() const;
  std::size_t boundary_size() const;
  std::vector<Point> points() const;
};

/// round(ratio * N) points. 1D: equispaced over the closed interval, the two
/// end points being the boundary pieces. 2D: an interior lattice of
/// (floor(sqrt M) - 2)^2 points and the rest equispaced along the perimeter,
/// split into bottom/right/top/left pieces.
CollocationGrid make_grid(const PdeProblem& problem, int basis_size, double ratio = 0.5);

/// ELM collocation of a benchmark problem. Basis values and derivatives at
/// the collocation points are tabulated once; residuals and Jacobians are
/// then cheap matrix-vector expressions in the weights.
class ElmSystem final : public DiscreteSystem {
 public:
  ElmSystem(PdeProblem problem, ElmBasis basis, CollocationGrid grid, LinearSolveConfig lin = {});

  const PdeProblem& problem() const { return problem_; }
  const ElmBasis& basis() const { return basis_; }
  const CollocationGrid& grid() const { return grid_; }
  const LinearSolveConfig& linear_solver() const { return lin_; }
  const std::vector<Point>& points() const { return points_; }
  /// Collocation matrix S.
  const Eigen::MatrixXd& collocation() const { return value_; }

  Eigen::Index unknowns() const override { return basis_.size(); }
  Eigen::Index equations() const override { return static_cast<Eigen::Index>(points_.size()); }
  bool has_parameter() const override { return problem_.has_parameter(); }

  Eigen::VectorXd residual(const Eigen::VectorXd& w, double param) const override;
  Eigen::MatrixXd jacobian(const Eigen::VectorXd& w, double param) const;
  Eigen::VectorXd param_derivative(const Eigen::VectorXd& w, double param) const override;

  Eigen::VectorXd solve_linearized(const Eigen::VectorXd& w, double param,
                                   const Eigen::VectorXd& rhs) const override;
  std::pair<Eigen::VectorXd, double> solve_bordered(const Eigen::VectorXd& w, double param,
                                                    const Eigen::VectorXd& row_x, double row_p,
                                                    const Eigen::VectorXd& rhs_f,
                                                    double rhs_n) const override;

  Eigen::VectorXd observe(const Eigen::VectorXd& w) const override { return value_ * w; }
  Eigen::VectorXd observe_adjoint(const Eigen::VectorXd& v) const override {
    return value_.transpose() * v;
  }
  double measure(const Eigen::VectorXd& w) const override;

 private:
  void check_weights(const Eigen::VectorXd& w) const;

  PdeProblem problem_;
  ElmBasis basis_;
  CollocationGrid grid_;
  LinearSolveConfig lin_;
  std::vector<Point> points_;
  Eigen::Index interior_count_ = 0;
  Eigen::MatrixXd value_;
  Eigen::MatrixXd dx_;
  Eigen::MatrixXd dxx_;
  Eigen::MatrixXd dyy_;
  Eigen::MatrixXd measure_values_;
};

/// Points of the fixed evaluation grid behind every branch measure:
/// 101 points in 1D, 41 x 41 in 2D.
std::vector<Point> measure_grid(const Domain& domain);

Eigen::VectorXd assemble_residual(const PdeProblem& problem, const ElmBasis& basis,
                                  const CollocationGrid& grid, const Eigen::VectorXd& w,
                                  double param);
Eigen::MatrixXd assemble_jacobian(const PdeProblem& problem, const ElmBasis& basis,
                                  const CollocationGrid& grid, const Eigen::VectorXd& w,
                                  double param);
/// dF/dparam; throws std::invalid_argument for problems without a parameter.
Eigen::VectorXd residual_param_derivative(const PdeProblem& problem, const ElmBasis& basis,
                                          const CollocationGrid& grid, const Eigen::VectorXd& w,
                                          double param);

NewtonReport elm_newton_solve(const PdeProblem& problem, const ElmBasis& basis,
                              const CollocationGrid& grid, const Eigen::VectorXd& w0, double param,
                              const NewtonOptions& options = {}, const LinearSolveConfig& lin = {});

using ScalarField = std::function<double(const Point&)>;

/// Least-squares (minimum-norm) weights reproducing `target` at `points`.
Eigen::VectorXd fit_initial_weights(const ElmBasis& basis, std::span<const Point> points,
                                    const ScalarField& target, const LinearSolveConfig& lin = {});

/// sum_j w_j psi_j at every point.
Eigen::VectorXd reconstruct(const ElmBasis& basis, const Eigen::VectorXd& w,
                            std::span<const Point> points);

/// Weights, report and reconstructed values on a uniform grid of `resolution` points per axis.
nlohmann::json solve_result_to_json(const ElmSystem& system, const NewtonReport& report,
                                    int resolution);

}  // namespace elmbif
