#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "elmbif/geometry.hpp"

namespace elmbif {

enum class ProblemKind { BurgersDirichlet, BurgersMixed, Bratu1D, Bratu2D, BratuRadial };

std::string to_string(ProblemKind kind);
ProblemKind problem_kind_from_string(const std::string& name);

/// Reference turning points used as guard rails and error baselines.
inline constexpr double kBratu1DCriticalLambda = 3.513830719125162;
inline constexpr double kBratu2DCriticalLambda = 6.808124;

/// One benchmark instance.
///
///   BurgersDirichlet  nu u'' - u u' = 0,  u(0) = gamma(nu), u(1) = 0
///   BurgersMixed      nu u'' - u u' = 0,  u'(0) = -theta,   u(1) = 0
///   Bratu1D/2D        Laplace(u) + lambda e^u = 0, u = 0 on the boundary
///   BratuRadial       u'' + u'/r + lambda e^u = 0, u'(0) = 0, u(1) = 0
///
/// `param` holds theta or lambda; it is the slot continuation varies.
struct PdeProblem {
  ProblemKind kind = ProblemKind::Bratu1D;
  double nu = 0.1;
  double param = 0.0;
  Domain domain = Domain::unit(1);

  static PdeProblem burgers_dirichlet(double nu);
  static PdeProblem burgers_mixed(double nu, double theta);
  static PdeProblem bratu1d(double lambda);
  static PdeProblem bratu2d(double lambda);
  static PdeProblem bratu_radial(double lambda);

  int dim() const { return domain.dim; }
  /// Left Dirichlet value of the Dirichlet Burgers problem, 2/(1+exp(-1/nu)) - 1.
  double gamma() const;
  bool has_parameter() const { return kind != ProblemKind::BurgersDirichlet; }
  std::string parameter_name() const;

  void validate() const;
};

nlohmann::json to_json(const PdeProblem& problem);
/// Accepts {"kind": ..., "nu": ..., "theta"|"lambda": ..., "domain": {"lower": [...], "upper": [...]}}.
PdeProblem problem_from_json(const nlohmann::json& doc);

/// Values of u and its derivatives at one point.
struct LocalJet {
  double u = 0.0;
  double ux = 0.0;
  double uxx = 0.0;
  double uyy = 0.0;
};

/// Partial derivatives of a pointwise residual with respect to the jet entries.
struct JetSensitivity {
  double du = 0.0;
  double dux = 0.0;
  double duxx = 0.0;
  double duyy = 0.0;
};

/// Strong-form interior residual at x. The radial problem at r = 0 uses the
/// regularized limit 2u'' + lambda e^u.
double residual_operator(const PdeProblem& problem, const Point& x, const LocalJet& jet,
                         double param);
JetSensitivity residual_linearization(const PdeProblem& problem, const Point& x,
                                      const LocalJet& jet, double param);
double residual_param_partial(const PdeProblem& problem, const Point& x, const LocalJet& jet,
                              double param);

enum class BoundaryType { Dirichlet, Neumann };

/// Boundary row B u - g at a boundary point; Neumann rows use u_x.
struct BoundaryCondition {
  BoundaryType type = BoundaryType::Dirichlet;
  double value = 0.0;
  double dvalue_dparam = 0.0;
};

BoundaryCondition boundary_condition(const PdeProblem& problem, const Point& x, double param);
double boundary_residual(const BoundaryCondition& bc, const LocalJet& jet);

enum class BranchSide { Lower, Upper };

std::string to_string(BranchSide side);
BranchSide branch_side_from_string(const std::string& name);

/// Closed-form solution of a 1D (or radial) problem with first and second derivatives.
struct ExactSolution {
  std::function<double(double)> value;
  std::function<double(double)> d1;
  std::function<double(double)> d2;
  std::optional<BranchSide> branch;
  /// theta of the Bratu formula, c of the mixed Burgers formula; 0 when unused.
  double constant = 0.0;

  double operator()(double x) const { return value(x); }
};

/// No solution exists on the requested branch (parameter past the fold).
class NoSolutionError : public std::domain_error {
 public:
  NoSolutionError(const std::string& what, double fold) : std::domain_error(what), fold_(fold) {}
  double fold() const { return fold_; }

 private:
  double fold_;
};

/// Root of t tanh t = 1; the fold of t^2 sech^2 t shared by both families.
double sech2_fold_argument();

ExactSolution burgers_dirichlet_exact(double nu);

/// Fold value of the Neumann datum, theta* = 2 nu t*^2 sech^2 t*.
double burgers_mixed_fold(double nu);
/// c with (c/nu) sech^2(sqrt(2c)/(2nu)) = theta on the requested branch.
double burgers_mixed_solve_c(double theta, double nu, BranchSide side);
ExactSolution burgers_mixed_exact(double nu, double theta, BranchSide side);

/// Small-theta estimate c = nu^2 ln^2(nu/eps)/2 and the matching u(0).
/// It does not agree with the exact root; kept for comparison only.
struct AsymptoticEstimate {
  double c = 0.0;
  double u0 = 0.0;
};
AsymptoticEstimate burgers_asymptotic_c(double eps, double nu);

/// Critical lambda of the 1D Bratu problem computed from the closed form.
double bratu1d_critical_lambda();
/// theta with cosh(theta) = 4 theta / sqrt(2 lambda) on the requested branch.
double bratu1d_theta(double lambda, BranchSide side);
ExactSolution bratu1d_exact(double lambda, BranchSide side);

/// Radial Gelfand-Bratu closed forms, available for lambda = 1/2 and 1.
ExactSolution bratu_radial_exact(double lambda);

/// Exact solution for a problem when one is known (Bratu2D has none).
std::optional<ExactSolution> exact_solution_for(const PdeProblem& problem, BranchSide side);

/// Reference turning point for the problem's continuation parameter, if known.
std::optional<double> reference_fold(const PdeProblem& problem);

}  // namespace elmbif
