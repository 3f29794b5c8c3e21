// Acceptance checks for the solvers, continuation and experiment drivers.
//
// Prints one PASS/FAIL line per criterion followed by the measured numbers.
// The exit status is 0 once every check has run, so a failing criterion is
// reported rather than hidden behind a crashed test; pass --strict to turn
// any FAIL into a non-zero exit. Numeric arguments select criteria by number.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <exception>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "elmbif/basis.hpp"
#include "elmbif/collocation.hpp"
#include "elmbif/experiments.hpp"
#include "elmbif/fd_solver.hpp"
#include "elmbif/problems.hpp"

using namespace elmbif;

namespace {

constexpr double kThetaStar = 0.087845767978;
constexpr double kLambda2D = 6.808124;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

bool within_factor2(double value, double printed) {
  return value * printed > 0.0 && std::abs(value) <= 2.0 * std::abs(printed) &&
         std::abs(value) >= 0.5 * std::abs(printed);
}

// Exact solutions must satisfy the strong form at random interior points
// and their boundary conditions.
Outcome exact_fidelity() {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  struct Case {
    PdeProblem problem;
    ExactSolution exact;
  };
  std::vector<Case> cases;
  for (double nu : {0.1, 0.05, 0.02}) cases.push_back({PdeProblem::burgers_dirichlet(nu), burgers_dirichlet_exact(nu)});
  for (double theta : {1e-6, 0.01, 0.05, 0.085}) {
    for (BranchSide side : {BranchSide::Lower, BranchSide::Upper}) {
      cases.push_back({PdeProblem::burgers_mixed(0.1, theta), burgers_mixed_exact(0.1, theta, side)});
    }
  }
  for (double lambda : {0.2, 1.0, 3.0, 3.5}) {
    for (BranchSide side : {BranchSide::Lower, BranchSide::Upper}) {
      cases.push_back({PdeProblem::bratu1d(lambda), bratu1d_exact(lambda, side)});
    }
  }
  for (double lambda : {0.5, 1.0}) cases.push_back({PdeProblem::bratu_radial(lambda), bratu_radial_exact(lambda)});

  double worst = 0.0;
  for (const auto& c : cases) {
    for (int i = 0; i < 50; ++i) {
      const double x = 1e-3 + (1.0 - 2e-3) * unit(rng);
      const LocalJet jet{c.exact.value(x), c.exact.d1(x), c.exact.d2(x), 0.0};
      const double r = residual_operator(c.problem, {x, 0.0}, jet, c.problem.param);
      const double scale = std::max({1.0, std::abs(jet.uxx), std::abs(jet.u * jet.ux)});
      worst = std::max(worst, std::abs(r) / scale);
    }
    for (double x : {0.0, 1.0}) {
      const LocalJet jet{c.exact.value(x), c.exact.d1(x), c.exact.d2(x), 0.0};
      const auto bc = boundary_condition(c.problem, {x, 0.0}, c.problem.param);
      worst = std::max(worst, std::abs(boundary_residual(bc, jet)));
    }
  }
  return {worst < 1e-8, std::to_string(cases.size()) + " solutions x 50 points, max scaled residual " +
                            fmt("%.2e", worst)};
}

double rel_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).cwiseAbs().maxCoeff() / std::max(b.cwiseAbs().maxCoeff(), 1e-300);
}

// Central differences of a vector function in each coordinate of x.
Eigen::MatrixXd numeric_jacobian(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f,
                                 const Eigen::VectorXd& x, double h) {
  const Eigen::VectorXd f0 = f(x);
  Eigen::MatrixXd j(f0.size(), x.size());
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    Eigen::VectorXd xp = x;
    Eigen::VectorXd xm = x;
    xp(k) += h;
    xm(k) -= h;
    j.col(k) = (f(xp) - f(xm)) / (2.0 * h);
  }
  return j;
}

PdeProblem random_problem(ProblemKind kind, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  switch (kind) {
    case ProblemKind::BurgersDirichlet:
      return PdeProblem::burgers_dirichlet(0.05 + 0.45 * u(rng));
    case ProblemKind::BurgersMixed:
      return PdeProblem::burgers_mixed(0.05 + 0.45 * u(rng), 0.01 + 0.07 * u(rng));
    case ProblemKind::Bratu1D:
      return PdeProblem::bratu1d(0.5 + 3.0 * u(rng));
    case ProblemKind::Bratu2D:
      return PdeProblem::bratu2d(1.0 + 5.0 * u(rng));
    case ProblemKind::BratuRadial:
      return PdeProblem::bratu_radial(0.5 + 1.0 * u(rng));
  }
  return PdeProblem::bratu1d(1.0);
}

// 100 random small instances spread over basis derivatives, ELM Jacobians
// and FD Jacobians (plus parameter derivatives).
Outcome derivative_oracles() {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::vector<ProblemKind> kinds{ProblemKind::BurgersDirichlet, ProblemKind::BurgersMixed,
                                       ProblemKind::Bratu1D, ProblemKind::Bratu2D,
                                       ProblemKind::BratuRadial};
  double worst_basis = 0.0;
  double worst_elm = 0.0;
  double worst_fd = 0.0;
  for (int inst = 0; inst < 100; ++inst) {
    const int slot = inst % 19;
    if (slot < 4) {
      const Activation act = slot % 2 == 0 ? Activation::Sigmoid : Activation::GaussianRbf;
      const int dim = slot < 2 ? 1 : 2;
      const int n = dim == 1 ? 12 + static_cast<int>(20 * u(rng)) : 16 + static_cast<int>(40 * u(rng));
      const Domain dom = Domain::unit(dim);
      const ElmBasis basis = sample_basis(act, n, dom, 100 + inst);
      const double h = 1e-5;
      for (int k = 0; k < 5; ++k) {
        const Point x{u(rng), dim == 2 ? u(rng) : 0.0};
        for (int axis = 0; axis < dim; ++axis) {
          Point xp = x;
          Point xm = x;
          xp[axis] += h;
          xm[axis] -= h;
          const Eigen::VectorXd d1 = (basis.eval(xp) - basis.eval(xm)) / (2.0 * h);
          const Eigen::VectorXd d2 = (basis.eval_d1(xp, axis) - basis.eval_d1(xm, axis)) / (2.0 * h);
          worst_basis = std::max(worst_basis, rel_diff(d1, basis.eval_d1(x, axis)));
          worst_basis = std::max(worst_basis, rel_diff(d2, basis.eval_d2(x, axis)));
        }
      }
    } else if (slot < 14) {
      const ProblemKind kind = kinds[(slot - 4) / 2];
      const Activation act = slot % 2 == 0 ? Activation::Sigmoid : Activation::GaussianRbf;
      const PdeProblem problem = random_problem(kind, rng);
      const int n = problem.dim() == 1 ? 16 + static_cast<int>(24 * u(rng))
                                       : 36 + static_cast<int>(40 * u(rng));
      const ElmBasis basis = sample_basis(act, n, problem.domain, 200 + inst);
      const CollocationGrid grid = make_grid(problem, n, 0.5);
      // Random weights of size 1/sqrt(N) keep the field O(1) without the
      // cancellation of least-squares fits, so a plain difference step works.
      std::normal_distribution<double> gauss(0.0, 1.0 / std::sqrt(static_cast<double>(n)));
      Eigen::VectorXd w(n);
      for (int k = 0; k < n; ++k) w(k) = gauss(rng);
      const double param = problem.param;
      const double h = 1e-6;
      const Eigen::MatrixXd jn = numeric_jacobian(
          [&](const Eigen::VectorXd& x) { return assemble_residual(problem, basis, grid, x, param); }, w, h);
      worst_elm = std::max(worst_elm, rel_diff(assemble_jacobian(problem, basis, grid, w, param), jn));
      if (problem.has_parameter()) {
        const double hp = 1e-6 * std::max(1.0, std::abs(param));
        const Eigen::VectorXd fp = (assemble_residual(problem, basis, grid, w, param + hp) -
                                    assemble_residual(problem, basis, grid, w, param - hp)) /
                                   (2.0 * hp);
        worst_elm = std::max(worst_elm, rel_diff(fp, residual_param_derivative(problem, basis, grid, w, param)));
      }
    } else {
      const PdeProblem problem = random_problem(kinds[slot - 14], rng);
      const FdGrid grid = make_fd_grid(problem, problem.dim() == 1 ? 8 + static_cast<int>(20 * u(rng))
                                                                   : 5 + static_cast<int>(4 * u(rng)));
      const Eigen::VectorXd x = sample_nodes(grid, [&](const Point& p) {
        return 0.5 * std::sin(2.0 * p[0] + 0.3) * (1.0 + p[1]) + 0.1 * u(rng);
      });
      const double param = problem.param;
      const Eigen::MatrixXd jn = numeric_jacobian(
          [&](const Eigen::VectorXd& v) { return fd_residual(problem, grid, v, param); }, x, 1e-6);
      worst_fd = std::max(worst_fd, rel_diff(Eigen::MatrixXd(fd_jacobian(problem, grid, x, param)), jn));
      if (problem.has_parameter()) {
        const double hp = 1e-6 * std::max(1.0, std::abs(param));
        const Eigen::VectorXd fp =
            (fd_residual(problem, grid, x, param + hp) - fd_residual(problem, grid, x, param - hp)) / (2.0 * hp);
        worst_fd = std::max(worst_fd, rel_diff(fp, fd_param_derivative(problem, grid, x, param)));
      }
    }
  }
  const double worst = std::max({worst_basis, worst_elm, worst_fd});
  return {worst < 1e-5, "max relative error: basis " + fmt("%.2e", worst_basis) + ", ELM " +
                            fmt("%.2e", worst_elm) + ", FD " + fmt("%.2e", worst_fd)};
}

ExperimentConfig config_for(const PdeProblem& problem) {
  ExperimentConfig cfg;
  cfg.problem = problem;
  return cfg;
}

// Fold error of one traced branch; infinity on failure.
double fold_error(const ExperimentConfig& cfg, SolverKind solver, int n, std::uint64_t seed,
                  double reference) {
  const FoldOutcome res = trace_fold(cfg, solver, n, seed);
  if (!res.ok() || !res.estimate) return std::numeric_limits<double>::infinity();
  return *res.estimate - reference;
}

Outcome elm_fold_seeds(const ExperimentConfig& cfg, SolverKind solver, double reference,
                       double bound, std::string& detail) {
  int good = 0;
  detail += ", " + to_string(solver) + " N=400:";
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const double e = fold_error(cfg, solver, 400, seed, reference);
    detail += " " + fmt("%.2e", e);
    if (std::abs(e) < bound) ++good;
  }
  return {good >= 3, ""};
}

Outcome burgers_mixed_fold() {
  const ExperimentConfig cfg = config_for(PdeProblem::burgers_mixed(0.1, 0.005));
  const std::vector<std::pair<int, double>> printed{
      {20, -3.3230e-04}, {50, -5.3487e-05}, {100, -1.3370e-05}, {200, -3.3420e-06}, {400, -8.3473e-07}};
  bool ok = true;
  std::string detail = "fd";
  for (const auto& [n, ref] : printed) {
    const double e = fold_error(cfg, SolverKind::Fd, n, 1, kThetaStar);
    detail += " N=" + std::to_string(n) + ":" + fmt("%.4e", e);
    ok = ok && within_factor2(e, ref);
  }
  ok = elm_fold_seeds(cfg, SolverKind::ElmSigmoid, kThetaStar, 1e-7, detail).pass && ok;
  ok = elm_fold_seeds(cfg, SolverKind::ElmRbf, kThetaStar, 1e-7, detail).pass && ok;
  return {ok, detail};
}

Outcome bratu1d_fold() {
  const ExperimentConfig cfg = config_for(PdeProblem::bratu1d(0.05));
  const double e = fold_error(cfg, SolverKind::Fd, 400, 1, kBratu1DCriticalLambda);
  std::string detail = "fd N=400: " + fmt("%.4e", e);
  const bool fd_ok = within_factor2(e, -1.1412e-05);
  const bool elm_ok = elm_fold_seeds(cfg, SolverKind::ElmSigmoid, kBratu1DCriticalLambda, 1e-7, detail).pass;
  return {fd_ok && elm_ok, detail};
}

Outcome bratu2d_fold() {
  ExperimentConfig cfg = config_for(PdeProblem::bratu2d(0.05));
  // The fit only needs the fold neighbourhood; stopping shortly after it keeps
  // the 40x40 ELM trace inside the time budget.
  cfg.points_after_fold = 4;
  const double fd = fold_error(cfg, SolverKind::Fd, 1600, 1, 0.0);
  const bool fd_ok = fd >= 6.806 && fd <= 6.809;
  std::string detail = "fd 40x40: " + fmt("%.6f", fd) + ", elm-sf N=1600:";
  bool elm_ok = false;
  const auto t0 = std::chrono::steady_clock::now();
  for (std::uint64_t seed = 1; seed <= 3 && !elm_ok; ++seed) {
    const double used = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (used > 300.0) {
      detail += " (5 min budget spent before seed " + std::to_string(seed) + ")";
      break;
    }
    const FoldOutcome res = trace_fold(cfg, SolverKind::ElmSigmoid, 1600, seed);
    detail += " seed " + std::to_string(seed) + " ";
    if (res.ok() && res.estimate) {
      detail += fmt("%.6f", *res.estimate);
      elm_ok = std::abs(*res.estimate - kLambda2D) < 5e-3;
    } else {
      detail += "[" + res.failure + "]";
    }
  }
  return {fd_ok && elm_ok, detail};
}

Outcome u0_table() {
  const ExperimentConfig cfg = config_for(PdeProblem::burgers_mixed(0.1, 1e-6));
  bool ok = true;
  std::string detail = "fd";
  for (const auto& [n, ref] : std::vector<std::pair<int, double>>{{20, -1.8099e-01}, {400, -3.9992e-04}}) {
    const U0Outcome r = upper_branch_u0(cfg, SolverKind::Fd, n, 1);
    detail += " N=" + std::to_string(n) + ":" + (r.ok() ? fmt("%.4e", r.error) : r.failure);
    ok = ok && r.ok() && within_factor2(r.error, ref);
  }
  detail += ", elm-sf N=400:";
  int good = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const U0Outcome r = upper_branch_u0(cfg, SolverKind::ElmSigmoid, 400, seed);
    detail += " " + (r.ok() ? fmt("%.2e", r.error) : std::string("failed"));
    if (r.ok() && std::abs(r.error) < 5e-5) ++good;
  }
  return {ok && good >= 3, detail};
}

double l2_error(const ExperimentConfig& cfg, SolverKind solver, int n, std::uint64_t seed) {
  const SolveOutcome r = solve_case(cfg, solver, n, seed);
  if (!r.ok() || !r.error) return std::numeric_limits<double>::infinity();
  return r.error->l2;
}

Outcome fd_order() {
  const std::vector<int> sizes{50, 100, 200, 400};
  bool ok = true;
  std::ostringstream detail;
  for (const PdeProblem& problem : {PdeProblem::burgers_dirichlet(0.1), PdeProblem::bratu1d(1.0)}) {
    const ExperimentConfig cfg = config_for(problem);
    std::vector<double> lx;
    std::vector<double> ly;
    for (int n : sizes) {
      lx.push_back(std::log(static_cast<double>(n)));
      ly.push_back(std::log(l2_error(cfg, SolverKind::Fd, n, 1)));
    }
    detail << to_string(problem.kind) << " orders:";
    for (std::size_t i = 1; i < sizes.size(); ++i) {
      const double p = -(ly[i] - ly[i - 1]) / (lx[i] - lx[i - 1]);
      detail << ' ' << fmt("%.3f", p);
      ok = ok && p >= 1.7 && p <= 2.3;
    }
    detail << "; ";
  }
  return {ok, detail.str()};
}

Outcome elm_beats_fd() {
  ExperimentConfig burgers = config_for(PdeProblem::burgers_dirichlet(0.1));
  ExperimentConfig bratu = config_for(PdeProblem::bratu1d(3.0));
  bratu.branch = BranchSide::Upper;
  const double fd_b = l2_error(burgers, SolverKind::Fd, 400, 1);
  const double fd_r = l2_error(bratu, SolverKind::Fd, 400, 1);
  std::string detail = "fd L2 burgers " + fmt("%.2e", fd_b) + ", bratu " + fmt("%.2e", fd_r) + "; elm-sf:";
  int good = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const double eb = l2_error(burgers, SolverKind::ElmSigmoid, 400, seed);
    const double er = l2_error(bratu, SolverKind::ElmSigmoid, 400, seed);
    detail += " (" + fmt("%.1e", eb) + ", " + fmt("%.1e", er) + ")";
    if (eb < fd_b && er < fd_r) ++good;
  }
  return {good >= 4, detail};
}

Outcome steep_gradient() {
  const ExperimentConfig cfg = config_for(PdeProblem::burgers_dirichlet(0.007));
  const SolveOutcome fd = solve_case(cfg, SolverKind::Fd, 40, 1);
  const double fd_inf = fd.ok() && fd.error ? fd.error->linf : std::numeric_limits<double>::quiet_NaN();
  std::string detail = "fd Linf " + fmt("%.3e", fd_inf) + ", elm-sf Linf:";
  int good = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const SolveOutcome r = solve_case(cfg, SolverKind::ElmSigmoid, 40, seed);
    const double e = r.ok() && r.error ? r.error->linf : std::numeric_limits<double>::infinity();
    detail += " " + fmt("%.3e", e);
    if (fd_inf >= 10.0 * e) ++good;
  }
  return {good >= 3, detail + " (need 10x on 3 of 5)"};
}

Outcome basin_study() {
  ExperimentConfig cfg = config_for(PdeProblem::bratu1d(1.0));
  bool ok = true;
  std::string detail;
  for (SolverKind solver : {SolverKind::Fd, SolverKind::ElmSigmoid}) {
    const std::string a = to_string(classify_basin(cfg, solver, 40, 1, 3.0, 2.2));
    const std::string b = to_string(classify_basin(cfg, solver, 40, 1, 0.2, 6.4));
    int above = 0;
    int above_diverged = 0;
    for (int i = 0; i < 20; ++i) {
      for (int j = 0; j < 20; ++j) {
        const double l0 = cfg.basin_l0_min + (cfg.basin_l0_max - cfg.basin_l0_min) * i / 19.0;
        const double lambda = cfg.basin_lambda_min + (cfg.basin_lambda_max - cfg.basin_lambda_min) * j / 19.0;
        const BasinClass c = classify_basin(cfg, solver, 40, 1, lambda, l0);
        if (lambda > kBratu1DCriticalLambda) {
          ++above;
          if (c == BasinClass::Diverged) ++above_diverged;
        }
      }
    }
    ok = ok && a == "upper" && b == "upper" && above == above_diverged && above > 0;
    detail += to_string(solver) + ": (3,2.2)=" + a + " (0.2,6.4)=" + b + " diverged above fold " +
              std::to_string(above_diverged) + "/" + std::to_string(above) + "; ";
  }
  return {ok, detail};
}

double rms(const Eigen::VectorXd& v) { return v.norm() / std::sqrt(static_cast<double>(v.size())); }

Outcome fixed_point() {
  const double pi = std::acos(-1.0);
  bool ok = true;
  std::string detail;
  {
    const PdeProblem p = PdeProblem::burgers_dirichlet(0.1);
    const FdGrid grid = make_fd_grid(p, 101);
    const ExactSolution ex = burgers_dirichlet_exact(0.1);
    const Eigen::VectorXd u0 =
        sample_nodes(grid, [&](const Point& x) { return ex(x[0]) + 1e-2 * std::sin(pi * x[0]); });
    const NewtonReport nw = fd_newton_solve(p, grid, u0, p.param, {1e-12, 50, std::nullopt});
    const FixedPointReport fp = fixed_point_burgers(p, grid, u0, 1e-11, 500);
    const double d = rms(fp.solution - nw.solution);
    ok = ok && nw.converged && fp.converged && d < 1e-5;
    detail += "burgers: " + std::to_string(fp.iterations) + " sweeps, L2 gap " + fmt("%.2e", d) + "; ";
  }
  {
    const PdeProblem p = PdeProblem::bratu1d(2.0);
    const FdGrid grid = make_fd_grid(p, 101);
    const ExactSolution ex = bratu1d_exact(2.0, BranchSide::Lower);
    const Eigen::VectorXd u0 =
        sample_nodes(grid, [&](const Point& x) { return ex(x[0]) + 1e-2 * std::sin(pi * x[0]); });
    const NewtonReport nw = fd_newton_solve(p, grid, u0, p.param, {1e-12, 50, std::nullopt});
    const FixedPointReport fp = fixed_point_bratu(p, grid, u0, 1e-11, 500);
    const double d = rms(fp.solution - nw.solution);
    ok = ok && nw.converged && fp.converged && d < 1e-5;
    detail += "bratu: " + std::to_string(fp.iterations) + " sweeps, L2 gap " + fmt("%.2e", d);
  }
  return {ok, detail};
}

}  // namespace

int main(int argc, char** argv) {
  bool strict = false;
  std::vector<std::size_t> selected;
  for (int a = 1; a < argc; ++a) {
    if (std::strcmp(argv[a], "--strict") == 0) {
      strict = true;
    } else {
      selected.push_back(static_cast<std::size_t>(std::stoul(argv[a])));
    }
  }
  struct Criterion {
    const char* name;
    Outcome (*run)();
  };
  const std::vector<Criterion> criteria{
      {"exact-solution fidelity", exact_fidelity},
      {"derivative oracles", derivative_oracles},
      {"burgers mixed fold", burgers_mixed_fold},
      {"bratu 1d fold", bratu1d_fold},
      {"bratu 2d fold", bratu2d_fold},
      {"upper-branch u(0) at theta=1e-6", u0_table},
      {"fd convergence order", fd_order},
      {"elm beats fd at N=400", elm_beats_fd},
      {"steep-gradient failure mode", steep_gradient},
      {"basin study", basin_study},
      {"fixed-point linearizations", fixed_point},
  };
  int failed = 0;
  int ran = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (!selected.empty() && std::find(selected.begin(), selected.end(), i + 1) == selected.end()) continue;
    ++ran;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = criteria[i].run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!out.pass) ++failed;
    std::printf("%s %2zu %s (%.1f s): %s\n", out.pass ? "PASS" : "FAIL", i + 1, criteria[i].name, secs,
                out.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %d criteria passed\n", ran - failed, ran);
  return strict && failed > 0 ? 1 : 0;
}
