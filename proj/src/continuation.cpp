#include "elmbif/continuation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>

#include "elmbif/lsq.hpp"

namespace elmbif {

std::vector<double> Branch::params() const {
  std::vector<double> v;
  v.reserve(points.size());
  for (const auto& p : points) v.push_back(p.param);
  return v;
}

std::vector<double> Branch::measures() const {
  std::vector<double> v;
  v.reserve(points.size());
  for (const auto& p : points) v.push_back(p.measure);
  return v;
}

namespace {

// Distance in the weighted (observed solution, parameter) metric.
double secant_distance(const DiscreteSystem& system, const BranchPoint& a, const BranchPoint& b) {
  const Eigen::VectorXd du = system.observe(a.coeffs - b.coeffs);
  const double n_obs = static_cast<double>(du.size());
  const double dp = a.param - b.param;
  return std::sqrt(du.squaredNorm() / n_obs + dp * dp);
}

BranchPoint make_point(const DiscreteSystem& system, Eigen::VectorXd x, double param,
                       double residual_norm, int iterations) {
  BranchPoint pt;
  pt.param = param;
  pt.measure = system.measure(x);
  pt.coeffs = std::move(x);
  pt.residual_norm = residual_norm;
  pt.newton_iterations = iterations;
  return pt;
}

bool acceptable(double residual_norm, const DiscreteSystem& system,
                const ContinuationOptions& options) {
  const double rms = residual_norm / std::sqrt(static_cast<double>(system.equations()));
  return rms < options.accept_residual();
}

}  // namespace

std::optional<BranchPoint> solve_point(const DiscreteSystem& system, const Eigen::VectorXd& x0,
                                       double param, const ContinuationOptions& options) {
  const NewtonReport rep = newton_solve(system, x0, param, options.newton);
  if (!rep.converged || !acceptable(rep.final_residual, system, options)) return std::nullopt;
  return make_point(system, rep.solution, param, rep.final_residual, rep.iterations);
}

std::optional<BranchPoint> natural_step(const DiscreteSystem& system, const BranchPoint& prev,
                                        double new_param, const ContinuationOptions& options) {
  if (new_param == prev.param) return prev;
  BranchPoint current = prev;
  double inc = new_param - prev.param;
  int halvings = 0;
  while (true) {
    const double remaining = new_param - current.param;
    const double trial = std::abs(inc) >= std::abs(remaining) ? new_param : current.param + inc;
    auto next = solve_point(system, current.coeffs, trial, options);
    if (next) {
      next->arclength = current.arclength + secant_distance(system, *next, current);
      current = std::move(*next);
      if (trial == new_param) return current;
      continue;
    }
    if (++halvings > options.max_halvings) return std::nullopt;
    inc *= 0.5;
  }
}

std::optional<ArclengthResult> arclength_step(const DiscreteSystem& system,
                                              const BranchPoint& prev2, const BranchPoint& prev1,
                                              double ds, const ContinuationOptions& options) {
  if (!(ds > 0.0)) throw std::invalid_argument("arclength step must be positive");
  const Eigen::VectorXd u1 = system.observe(prev1.coeffs);
  const Eigen::VectorXd u2 = system.observe(prev2.coeffs);
  const double n_obs = static_cast<double>(u1.size());
  const double norm =
      std::sqrt((u1 - u2).squaredNorm() / n_obs + std::pow(prev1.param - prev2.param, 2));
  if (!(norm > 0.0)) throw std::invalid_argument("secant points coincide");
  const Eigen::VectorXd tu = (u1 - u2) / norm;
  const double tp = (prev1.param - prev2.param) / norm;
  const Eigen::VectorXd tx = (prev1.coeffs - prev2.coeffs) / norm;
  const Eigen::VectorXd row_x = system.observe_adjoint(tu) / n_obs;
  const auto& nopt = options.newton;

  for (int halvings = 0; halvings <= options.max_halvings; ++halvings, ds *= 0.5) {
    Eigen::VectorXd x = prev1.coeffs + ds * tx;
    double p = prev1.param + ds * tp;
    bool ok = false;
    int it = 0;
    try {
      for (; it < nopt.max_iter; ++it) {
        const Eigen::VectorXd f = system.residual(x, p);
        const double nval = (system.observe(x) - u1).dot(tu) / n_obs + (p - prev1.param) * tp - ds;
        if (!f.allFinite() || !std::isfinite(nval)) break;
        auto [dx, dp] = system.solve_bordered(x, p, row_x, tp, -f, -nval);
        const double du = std::sqrt(system.observe(dx).squaredNorm() / n_obs);
        if (nopt.max_step_norm && du > *nopt.max_step_norm) {
          const double s = *nopt.max_step_norm / du;
          dx *= s;
          dp *= s;
        }
        x += dx;
        p += dp;
        const Eigen::VectorXd ox = system.observe(x);
        const double step = std::sqrt(system.observe(dx).squaredNorm() / n_obs + dp * dp) /
                            std::max(1.0, std::sqrt(ox.squaredNorm() / n_obs + p * p));
        if (!std::isfinite(step)) break;
        if (step < nopt.tol) {
          ok = true;
          ++it;
          break;
        }
      }
    } catch (const RankError&) {
      ok = false;
    }
    if (!ok) continue;
    const double res = system.residual(x, p).norm();
    if (!acceptable(res, system, options)) continue;
    ArclengthResult out;
    out.point = make_point(system, std::move(x), p, res, it);
    out.point.arclength = prev1.arclength + secant_distance(system, out.point, prev1);
    out.ds_used = ds;
    out.halvings = halvings;
    return out;
  }
  return std::nullopt;
}

namespace {

int traversal_sign(const std::vector<BranchPoint>& pts) {
  return pts.size() >= 2 && pts[1].param < pts[0].param ? -1 : 1;
}

std::optional<std::size_t> first_decrease(const std::vector<BranchPoint>& pts) {
  const int dir = traversal_sign(pts);
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (dir * pts[i].param < dir * pts[i - 1].param) return i;
  }
  return std::nullopt;
}

// Re-traces the neighbourhood of the parameter maximum pts[k] with a step of
// (s[k+1] - s[k-1]) / refine_divisions, restarting from pts[k-2], pts[k-1] and
// stopping three points past the new maximum. Returns false (leaving pts
// untouched) when a fine step fails.
bool refine_fold(const DiscreteSystem& system, std::vector<BranchPoint>& pts, std::size_t k,
                 const TraceOptions& options) {
  if (k < 2 || k + 1 >= pts.size()) return false;
  const double ds = (pts[k + 1].arclength - pts[k - 1].arclength) / options.refine_divisions;
  if (!(ds > 0.0)) return false;
  std::vector<BranchPoint> fine(pts.begin(), pts.begin() + static_cast<std::ptrdiff_t>(k));
  const int dir = traversal_sign(pts);
  const int max_steps = 4 * options.refine_divisions;
  int past_fold = 0;
  for (int step = 0; step < max_steps && past_fold < 3; ++step) {
    auto r = arclength_step(system, fine[fine.size() - 2], fine.back(), ds, options.continuation);
    if (!r) return false;
    if (past_fold > 0 || dir * r->point.param < dir * fine.back().param) ++past_fold;
    fine.push_back(std::move(r->point));
  }
  if (past_fold < 3) return false;
  pts = std::move(fine);
  return true;
}

bool outside_stop_rules(const BranchPoint& pt, const StopRules& stop) {
  return pt.param < stop.param_min || pt.param > stop.param_max || pt.measure > stop.measure_max;
}

}  // namespace

Branch trace_branch(const DiscreteSystem& system, const Eigen::VectorXd& x0, double start_param,
                    int direction, const TraceOptions& options) {
  if (direction != 1 && direction != -1) throw std::invalid_argument("direction must be +1 or -1");
  if (!(options.ds0 > 0.0)) throw std::invalid_argument("ds0 must be positive");
  if (options.refine_divisions < 2) throw std::invalid_argument("refine_divisions must be >= 2");
  const auto& copt = options.continuation;
  Branch branch;
  auto& pts = branch.points;

  auto first = solve_point(system, x0, start_param, copt);
  if (!first) throw ContinuationError("branch seeding failed: no convergence at the start parameter");
  pts.push_back(std::move(*first));
  const double seed_step = options.seed_step.value_or(options.ds0);
  auto second = natural_step(system, pts.front(), start_param + direction * seed_step, copt);
  if (!second) throw ContinuationError("branch seeding failed: natural step rejected");
  pts.push_back(std::move(*second));

  const auto& stop = options.stop;
  const double ds_min = options.ds0 / 100.0;
  const double ds_max = options.ds0 * 10.0;
  double ds = options.ds0;
  int easy = 0;
  int refinements_left = options.fold_refinements;
  std::optional<std::size_t> fold;
  bool stopped = outside_stop_rules(pts.back(), stop);

  while (!stopped && static_cast<int>(pts.size()) < stop.max_points) {
    auto r = arclength_step(system, pts[pts.size() - 2], pts.back(), ds, copt);
    if (!r) break;
    pts.push_back(std::move(r->point));
    if (r->halvings == 0) {
      ++easy;
    } else {
      easy = 0;
    }
    ds = r->ds_used;
    if (easy >= 3) {
      ds *= 1.5;
      easy = 0;
    }
    ds = std::clamp(ds, ds_min, ds_max);

    if (!fold) {
      fold = first_decrease(pts);
      while (fold && refinements_left > 0) {
        --refinements_left;
        if (!refine_fold(system, pts, *fold - 1, options)) break;
        fold = first_decrease(pts);
      }
      if (fold) refinements_left = 0;
    }
    if (static_cast<int>(pts.size()) > stop.max_points) pts.resize(static_cast<std::size_t>(stop.max_points));
    stopped = outside_stop_rules(pts.back(), stop);
    if (fold && stop.points_after_fold &&
        static_cast<int>(pts.size() - *fold) >= *stop.points_after_fold)
      stopped = true;
  }
  if (pts.size() < 3) throw ContinuationError("branch seeding failed: fewer than 3 points");
  return branch;
}

std::optional<std::size_t> detect_fold(const Branch& branch) {
  return first_decrease(branch.points);
}

TurningPointFit fit_turning_point(const Branch& branch) {
  const auto& pts = branch.points;
  if (pts.size() < 4) throw ContinuationError("no fold detected: fewer than 4 points");
  const int dir = traversal_sign(pts);
  std::size_t k = 0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (dir * pts[i].param > dir * pts[k].param) k = i;
  }
  const std::size_t last = pts.size() - 1;
  if (k == 0 || k == last) throw ContinuationError("no fold detected: parameter is monotone");
  const bool left_ok = k >= 2;
  const bool right_ok = k + 2 <= last;
  bool use_left = dir * pts[k - 1].param > dir * pts[k + 1].param;
  if (use_left && !left_ok) use_left = false;
  if (!use_left && !right_ok) use_left = true;
  if (use_left && !left_ok) throw ContinuationError("no fold detected: too few points around the extremum");
  const std::size_t first = use_left ? k - 2 : k - 1;

  double mean = 0.0;
  for (std::size_t i = 0; i < 4; ++i) mean += pts[first + i].measure;
  mean /= 4.0;
  double scale = 0.0;
  for (std::size_t i = 0; i < 4; ++i) scale = std::max(scale, std::abs(pts[first + i].measure - mean));
  if (!(scale > 0.0)) throw ContinuationError("degenerate turning-point window");
  Eigen::Matrix<double, 4, 3> a;
  Eigen::Vector4d y;
  for (std::size_t i = 0; i < 4; ++i) {
    const double z = (pts[first + i].measure - mean) / scale;
    a.row(static_cast<Eigen::Index>(i)) << z * z, z, 1.0;
    y[static_cast<Eigen::Index>(i)] = pts[first + i].param;
  }
  const Eigen::Vector3d c = a.colPivHouseholderQr().solve(y);
  if (!(dir * c[0] < 0.0)) throw ContinuationError("fitted parabola has no maximum");
  const double z = -c[1] / (2.0 * c[0]);
  TurningPointFit fit;
  fit.param = c[2] + c[1] * z + c[0] * z * z;
  fit.measure = mean + scale * z;
  fit.first = first;
  return fit;
}

double estimate_turning_point(const Branch& branch) { return fit_turning_point(branch).param; }

void write_branch_csv(const Branch& branch, const std::filesystem::path& path,
                      const std::string& header_comment) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  if (!header_comment.empty()) out << "# " << header_comment << '\n';
  out << "index,arclength,param,measure,residual_norm\n" << std::setprecision(17);
  for (std::size_t i = 0; i < branch.points.size(); ++i) {
    const auto& p = branch.points[i];
    out << i << ',' << p.arclength << ',' << p.param << ',' << p.measure << ',' << p.residual_norm
        << '\n';
  }
}

nlohmann::json branch_metadata(const Branch& branch) {
  nlohmann::json doc;
  doc["solver"] = branch.solver;
  doc["problem"] = branch.problem;
  doc["seed"] = branch.seed ? nlohmann::json(*branch.seed) : nlohmann::json(nullptr);
  doc["points"] = branch.points.size();
  if (auto k = detect_fold(branch)) doc["fold_index"] = *k;
  return doc;
}

}  // namespace elmbif
