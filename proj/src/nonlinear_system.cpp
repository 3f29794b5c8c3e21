#include "elmbif/nonlinear_system.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "elmbif/lsq.hpp"

namespace elmbif {

std::string to_string(NewtonStatus status) {
  switch (status) {
    case NewtonStatus::Converged: return "converged";
    case NewtonStatus::MaxIterations: return "max-iterations";
    case NewtonStatus::Diverged: return "diverged";
  }
  return "unknown";
}

nlohmann::json to_json(const NewtonReport& r, bool include_solution) {
  nlohmann::json doc;
  doc["converged"] = r.converged;
  doc["status"] = to_string(r.status);
  doc["iterations"] = r.iterations;
  doc["residual_norms"] = r.residual_norms;
  doc["step_norms"] = r.step_norms;
  doc["final_residual"] = r.final_residual;
  if (include_solution) {
    doc["solution"] = std::vector<double>(r.solution.data(), r.solution.data() + r.solution.size());
  }
  return doc;
}

NewtonReport newton_solve(const DiscreteSystem& system, const Eigen::VectorXd& x0, double param,
                          const NewtonOptions& options) {
  NewtonReport report;
  report.solution = x0;
  Eigen::VectorXd& x = report.solution;
  if (!x0.allFinite()) {
    report.status = NewtonStatus::Diverged;
    report.final_residual = std::numeric_limits<double>::infinity();
    return report;
  }
  Eigen::VectorXd f = system.residual(x, param);
  for (int it = 0; it < options.max_iter; ++it) {
    const double fnorm = f.norm();
    report.residual_norms.push_back(fnorm);
    if (!std::isfinite(fnorm)) {
      report.status = NewtonStatus::Diverged;
      report.final_residual = fnorm;
      return report;
    }
    Eigen::VectorXd dx;
    try {
      dx = system.solve_linearized(x, param, -f);
    } catch (const RankError&) {
      report.status = NewtonStatus::Diverged;
      report.final_residual = fnorm;
      return report;
    }
    if (options.max_step_norm) {
      const Eigen::VectorXd du = system.observe(dx);
      const double n = du.norm() / std::sqrt(static_cast<double>(du.size()));
      if (n > *options.max_step_norm) dx *= *options.max_step_norm / n;
    }
    x += dx;
    report.iterations = it + 1;
    const double step = system.observe(dx).norm() / std::max(1.0, system.observe(x).norm());
    report.step_norms.push_back(step);
    f = system.residual(x, param);
    if (!std::isfinite(step) || !f.allFinite()) {
      report.status = NewtonStatus::Diverged;
      report.final_residual = std::numeric_limits<double>::infinity();
      return report;
    }
    if (step < options.tol) {
      report.converged = true;
      report.status = NewtonStatus::Converged;
      report.final_residual = f.norm();
      return report;
    }
  }
  report.status = NewtonStatus::MaxIterations;
  report.final_residual = f.norm();
  return report;
}

}  // namespace elmbif
