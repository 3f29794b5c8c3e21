#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "elmbif/continuation.hpp"
#include "elmbif/lsq.hpp"
#include "elmbif/nonlinear_system.hpp"
#include "elmbif/problems.hpp"

namespace elmbif {

enum class SolverKind { Fd, ElmSigmoid, ElmRbf };
std::string to_string(SolverKind kind);
SolverKind solver_from_string(const std::string& name);
bool is_elm(SolverKind kind);

/// Everything an experiment needs. Problem size N means basis size for ELM
/// and the number of grid intervals (per axis: sqrt(N) in 2D) for finite
/// differences. FD runs ignore seeds.
struct ExperimentConfig {
  PdeProblem problem = PdeProblem::bratu1d(1.0);
  std::vector<SolverKind> solvers{SolverKind::ElmSigmoid};
  std::vector<int> sizes{40};
  std::vector<std::uint64_t> seeds{1};
  double tol = 1e-6;
  int max_iter = 50;
  double ratio = 0.5;
  LinearMethod linear_method = LinearMethod::SvdPinv;
  /// Which exact branch a single solve or error sweep targets.
  BranchSide branch = BranchSide::Lower;
  /// L-infinity norm of the parabola initial guess; empty picks the exact
  /// branch value when one is known.
  std::optional<double> l0;

  // Continuation controls; empty values fall back to per-problem defaults.
  std::optional<double> ds0;
  std::optional<double> param_min;
  std::optional<double> param_max;
  std::optional<double> measure_max;
  std::optional<int> points_after_fold;
  int max_points = 300;
  int fold_refinements = 3;
  /// RMS residual accepted on branch points; empty means 10 * tol for 1D and
  /// a looser floor for 2D ELM least-squares solutions.
  std::optional<double> residual_tol;

  // Basin grid.
  int basin_l0_points = 40;
  int basin_lambda_points = 40;
  double basin_l0_min = 0.0;
  double basin_l0_max = 8.0;
  double basin_lambda_min = 0.05;
  double basin_lambda_max = 4.0;

  double u0_theta = 1e-6;
  int output_resolution = 101;
  std::filesystem::path out_dir = ".";
  bool gnuplot = false;

  void validate() const;
};

/// Reads a JSON document; keys mirror the command-line flags
/// (problem, solver, nu, lambda, theta, sizes, seeds, tol, ds0, ratio, out, gnuplot, ...).
ExperimentConfig config_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const ExperimentConfig& cfg);

/// ELM or FD discretization of `problem` at size N.
std::unique_ptr<DiscreteSystem> make_system(const PdeProblem& problem, SolverKind solver, int size,
                                            std::uint64_t seed, double ratio = 0.5,
                                            const LinearSolveConfig& lin = {});

/// Coefficients (ELM weights or FD node values) approximating f.
Eigen::VectorXd project_guess(const DiscreteSystem& system, const std::function<double(const Point&)>& f);

/// Solution values of a discrete system at arbitrary points.
Eigen::VectorXd evaluate_solution(const DiscreteSystem& system, const Eigen::VectorXd& coeffs,
                                  const std::vector<Point>& points);

/// Parabola 4 l0 (x - x^2) in 1D, 16 l0 x(1-x) y(1-y) in 2D (unit domains).
std::function<double(const Point&)> parabola_guess(const PdeProblem& problem, double l0);

struct ErrorNorms {
  double l2 = 0.0;
  double linf = 0.0;
};

/// RMS and max errors against an exact solution: over the FD nodes for FD,
/// over 1001 uniform points for ELM.
ErrorNorms solution_error(const DiscreteSystem& system, const Eigen::VectorXd& coeffs,
                          const ExactSolution& exact);

struct SolveOutcome {
  SolverKind solver = SolverKind::Fd;
  int size = 0;
  std::optional<std::uint64_t> seed;
  NewtonReport report;
  std::optional<ErrorNorms> error;
  std::string failure;
  bool ok() const { return failure.empty(); }
};

/// One Newton solve from the default initial guess of the problem.
SolveOutcome solve_case(const ExperimentConfig& cfg, SolverKind solver, int size,
                        std::uint64_t seed);

struct FoldOutcome {
  SolverKind solver = SolverKind::Fd;
  int size = 0;
  std::optional<std::uint64_t> seed;
  Branch branch;
  std::optional<double> estimate;
  std::optional<double> reference;
  std::string failure;
  bool ok() const { return failure.empty(); }
};

TraceOptions trace_options(const ExperimentConfig& cfg, SolverKind solver);
FoldOutcome trace_fold(const ExperimentConfig& cfg, SolverKind solver, int size,
                       std::uint64_t seed);

enum class BasinClass { Lower, Upper, Diverged };
std::string to_string(BasinClass cls);

/// Newton on 1D Bratu from the parabola guess of height l0, classified by
/// the nearest exact-branch measure (within 10%).
BasinClass classify_basin(const ExperimentConfig& cfg, SolverKind solver, int size,
                          std::uint64_t seed, double lambda, double l0);

struct U0Outcome {
  SolverKind solver = SolverKind::Fd;
  int size = 0;
  std::optional<std::uint64_t> seed;
  double u0 = 0.0;
  double error = 0.0;
  std::string failure;
  bool ok() const { return failure.empty(); }
};

/// Upper-branch u(0) of mixed Burgers at cfg.u0_theta, reached by
/// continuation from a small theta on the lower branch through the fold.
U0Outcome upper_branch_u0(const ExperimentConfig& cfg, SolverKind solver, int size,
                          std::uint64_t seed);

/// Command drivers. Each writes its files under cfg.out_dir and returns the
/// number of recorded failures.
int run_solve(const ExperimentConfig& cfg);
int run_error_sweep(const ExperimentConfig& cfg);
int run_bifurcation(const ExperimentConfig& cfg);
int run_basin(const ExperimentConfig& cfg);
int run_u0_table(const ExperimentConfig& cfg);

}  // namespace elmbif
