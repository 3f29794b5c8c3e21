#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "elmbif/nonlinear_system.hpp"

namespace elmbif {

struct BranchPoint {
  double param = 0.0;
  Eigen::VectorXd coeffs;
  double measure = 0.0;
  double arclength = 0.0;
  double residual_norm = 0.0;
  int newton_iterations = 0;
};

struct Branch {
  std::vector<BranchPoint> points;
  /// "fd", "elm-sf" or "elm-rbf".
  std::string solver;
  nlohmann::json problem;
  std::optional<std::uint64_t> seed;

  std::size_t size() const { return points.size(); }
  std::vector<double> params() const;
  std::vector<double> measures() const;
};

class ContinuationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ContinuationOptions {
  NewtonOptions newton{1e-6, 25, std::nullopt};
  /// Accepted points must have an RMS residual ||F|| / sqrt(#equations)
  /// below this; empty means 10 * newton.tol.
  std::optional<double> residual_tol;
  int max_halvings = 10;

  double accept_residual() const { return residual_tol.value_or(10.0 * newton.tol); }
};

/// Converges a point at fixed parameter from x0; nullopt if Newton fails.
std::optional<BranchPoint> solve_point(const DiscreteSystem& system, const Eigen::VectorXd& x0,
                                       double param, const ContinuationOptions& options = {});

/// Warm-started Newton at new_param. On failure the increment is halved and
/// the shorter step retried, then the remainder is attempted from there; the
/// step is rejected (nullopt) after max_halvings consecutive failures.
std::optional<BranchPoint> natural_step(const DiscreteSystem& system, const BranchPoint& prev,
                                        double new_param, const ContinuationOptions& options = {});

struct ArclengthResult {
  BranchPoint point;
  double ds_used = 0.0;
  int halvings = 0;
};

/// One pseudo-arclength predictor-corrector step along the secant
/// prev2 -> prev1. Newton failures halve ds; nullopt after max_halvings.
std::optional<ArclengthResult> arclength_step(const DiscreteSystem& system,
                                              const BranchPoint& prev2, const BranchPoint& prev1,
                                              double ds, const ContinuationOptions& options = {});

struct StopRules {
  double param_min = -std::numeric_limits<double>::infinity();
  double param_max = std::numeric_limits<double>::infinity();
  double measure_max = std::numeric_limits<double>::infinity();
  int max_points = 200;
  /// Stop once this many points have been added past the detected fold.
  std::optional<int> points_after_fold;
};

struct TraceOptions {
  double ds0 = 0.05;
  /// Parameter increment of the natural step producing the second seed;
  /// empty means ds0.
  std::optional<double> seed_step;
  /// Number of times the fold neighbourhood is re-traced with a finer step.
  int fold_refinements = 1;
  /// The re-traced stretch is covered with this many steps.
  int refine_divisions = 8;
  StopRules stop;
  ContinuationOptions continuation;
};

/// Solves at start_param from x0, seeds a second point with a natural step in
/// `direction` (+1 or -1), then follows the branch by pseudo-arclength.
/// Throws ContinuationError("branch seeding failed") with fewer than 3 points.
Branch trace_branch(const DiscreteSystem& system, const Eigen::VectorXd& x0, double start_param,
                    int direction, const TraceOptions& options = {});

/// Index of the first point whose parameter falls back after its running
/// maximum (in the traversal direction), if any.
std::optional<std::size_t> detect_fold(const Branch& branch);

struct TurningPointFit {
  double param = 0.0;
  double measure = 0.0;
  /// First of the four consecutive points used.
  std::size_t first = 0;
};

/// Fits param as a quadratic in the measure through the four points with the
/// largest parameter that straddle the fold and returns the vertex.
/// Throws ContinuationError when the branch has no interior extremum.
TurningPointFit fit_turning_point(const Branch& branch);
double estimate_turning_point(const Branch& branch);

/// Columns: index, arclength, param, measure, residual_norm.
void write_branch_csv(const Branch& branch, const std::filesystem::path& path,
                      const std::string& header_comment = {});
nlohmann::json branch_metadata(const Branch& branch);

}  // namespace elmbif
