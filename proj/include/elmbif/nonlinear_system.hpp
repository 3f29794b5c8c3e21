#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace elmbif {

/// A parametrized discrete residual F(x, p) = 0 together with the linear
/// algebra needed by Newton and pseudo-arclength correctors.
///
/// `observe` maps unknowns to solution values at the collocation points or
/// grid nodes (S x for ELM, identity for finite differences); it is the only
/// place the two discretizations differ from the continuation driver's view.
class DiscreteSystem {
 public:
  virtual ~DiscreteSystem() = default;

  virtual Eigen::Index unknowns() const = 0;
  virtual Eigen::Index equations() const = 0;
  virtual bool has_parameter() const = 0;

  virtual Eigen::VectorXd residual(const Eigen::VectorXd& x, double param) const = 0;
  virtual Eigen::VectorXd param_derivative(const Eigen::VectorXd& x, double param) const = 0;

  /// Least-squares / minimum-norm solution of J(x, p) dx = rhs.
  virtual Eigen::VectorXd solve_linearized(const Eigen::VectorXd& x, double param,
                                           const Eigen::VectorXd& rhs) const = 0;

  /// Solves [J, F_p; row_x^T, row_p] [dx; dp] = [rhs_f; rhs_n].
  virtual std::pair<Eigen::VectorXd, double> solve_bordered(const Eigen::VectorXd& x, double param,
                                                            const Eigen::VectorXd& row_x,
                                                            double row_p,
                                                            const Eigen::VectorXd& rhs_f,
                                                            double rhs_n) const = 0;

  virtual Eigen::VectorXd observe(const Eigen::VectorXd& x) const = 0;
  virtual Eigen::VectorXd observe_adjoint(const Eigen::VectorXd& v) const = 0;

  /// Scalar branch measure: max |u| on a fixed evaluation grid.
  virtual double measure(const Eigen::VectorXd& x) const = 0;
};

enum class NewtonStatus { Converged, MaxIterations, Diverged };

std::string to_string(NewtonStatus status);

struct NewtonOptions {
  double tol = 1e-6;
  int max_iter = 50;
  /// Optional cap on the RMS of observe(dx); larger steps are scaled back onto it.
  /// Measured on sampled values so the cap does not depend on the coefficient scale.
  std::optional<double> max_step_norm;
};

struct NewtonReport {
  bool converged = false;
  NewtonStatus status = NewtonStatus::MaxIterations;
  int iterations = 0;
  /// ||F|| at the iterate entering each iteration.
  std::vector<double> residual_norms;
  /// ||observe(dx)|| / max(1, ||observe(x_new)||) per iteration.
  std::vector<double> step_norms;
  /// ||F|| at the returned iterate.
  double final_residual = 0.0;
  Eigen::VectorXd solution;
};

nlohmann::json to_json(const NewtonReport& report, bool include_solution = true);

/// Plain Newton iteration x <- x - J^+ F at fixed parameter. Failures are
/// reported through the status, never thrown.
NewtonReport newton_solve(const DiscreteSystem& system, const Eigen::VectorXd& x0, double param,
                          const NewtonOptions& options = {});

}  // namespace elmbif
