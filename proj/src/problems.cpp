#include "elmbif/problems.hpp"

#include <cmath>
#include <limits>

namespace elmbif {

std::string to_string(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::BurgersDirichlet: return "burgers-dirichlet";
    case ProblemKind::BurgersMixed: return "burgers-mixed";
    case ProblemKind::Bratu1D: return "bratu1d";
    case ProblemKind::Bratu2D: return "bratu2d";
    case ProblemKind::BratuRadial: return "bratu-radial";
  }
  return "unknown";
}

ProblemKind problem_kind_from_string(const std::string& name) {
  for (auto k : {ProblemKind::BurgersDirichlet, ProblemKind::BurgersMixed, ProblemKind::Bratu1D,
                 ProblemKind::Bratu2D, ProblemKind::BratuRadial}) {
    if (to_string(k) == name) return k;
  }
  throw std::invalid_argument("unknown problem '" + name + "'");
}

std::string to_string(BranchSide side) { return side == BranchSide::Lower ? "lower" : "upper"; }

BranchSide branch_side_from_string(const std::string& name) {
  if (name == "lower") return BranchSide::Lower;
  if (name == "upper") return BranchSide::Upper;
  throw std::invalid_argument("branch must be 'lower' or 'upper', got '" + name + "'");
}

PdeProblem PdeProblem::burgers_dirichlet(double nu) {
  PdeProblem p{ProblemKind::BurgersDirichlet, nu, 0.0, Domain::unit(1)};
  p.validate();
  return p;
}

PdeProblem PdeProblem::burgers_mixed(double nu, double theta) {
  PdeProblem p{ProblemKind::BurgersMixed, nu, theta, Domain::unit(1)};
  p.validate();
  return p;
}

PdeProblem PdeProblem::bratu1d(double lambda) {
  PdeProblem p{ProblemKind::Bratu1D, 0.0, lambda, Domain::unit(1)};
  p.validate();
  return p;
}

PdeProblem PdeProblem::bratu2d(double lambda) {
  PdeProblem p{ProblemKind::Bratu2D, 0.0, lambda, Domain::unit(2)};
  p.validate();
  return p;
}

PdeProblem PdeProblem::bratu_radial(double lambda) {
  PdeProblem p{ProblemKind::BratuRadial, 0.0, lambda, Domain::unit(1)};
  p.validate();
  return p;
}

double PdeProblem::gamma() const { return 2.0 / (1.0 + std::exp(-1.0 / nu)) - 1.0; }

std::string PdeProblem::parameter_name() const {
  switch (kind) {
    case ProblemKind::BurgersDirichlet: return "";
    case ProblemKind::BurgersMixed: return "theta";
    default: return "lambda";
  }
}

void PdeProblem::validate() const {
  domain.validate();
  const bool burgers = kind == ProblemKind::BurgersDirichlet || kind == ProblemKind::BurgersMixed;
  if (burgers && !(nu > 0.0)) throw std::invalid_argument("Burgers viscosity must be positive");
  if (!(param >= 0.0)) throw std::invalid_argument(parameter_name() + " must be non-negative");
  const int want_dim = kind == ProblemKind::Bratu2D ? 2 : 1;
  if (domain.dim != want_dim) throw std::invalid_argument(to_string(kind) + ": wrong domain dimension");
}

nlohmann::json to_json(const PdeProblem& p) {
  nlohmann::json doc;
  doc["kind"] = to_string(p.kind);
  if (p.kind == ProblemKind::BurgersDirichlet || p.kind == ProblemKind::BurgersMixed) doc["nu"] = p.nu;
  if (p.has_parameter()) doc[p.parameter_name()] = p.param;
  doc["domain"] = {
      {"lower", std::vector<double>(p.domain.lower.begin(), p.domain.lower.begin() + p.domain.dim)},
      {"upper", std::vector<double>(p.domain.upper.begin(), p.domain.upper.begin() + p.domain.dim)}};
  return doc;
}

PdeProblem problem_from_json(const nlohmann::json& doc) {
  PdeProblem p;
  p.kind = problem_kind_from_string(doc.at("kind").get<std::string>());
  p.nu = doc.value("nu", 0.1);
  if (p.kind == ProblemKind::BurgersMixed) p.param = doc.value("theta", 0.0);
  if (p.kind != ProblemKind::BurgersDirichlet && p.kind != ProblemKind::BurgersMixed) {
    p.param = doc.value("lambda", 0.0);
  }
  p.domain = Domain::unit(p.kind == ProblemKind::Bratu2D ? 2 : 1);
  if (doc.contains("domain")) {
    const auto lo = doc["domain"].at("lower").get<std::vector<double>>();
    const auto hi = doc["domain"].at("upper").get<std::vector<double>>();
    if (lo.size() != hi.size() || lo.empty() || lo.size() > 2) {
      throw std::invalid_argument("problem domain bounds must have 1 or 2 matching entries");
    }
    p.domain = lo.size() == 1 ? Domain::interval(lo[0], hi[0])
                              : Domain::rectangle(lo[0], hi[0], lo[1], hi[1]);
  }
  p.validate();
  return p;
}

// ---------------------------------------------------------------------------
// Pointwise operators

namespace {

bool at_origin(const Point& x) { return std::abs(x[0]) < 1e-300; }

}  // namespace

double residual_operator(const PdeProblem& p, const Point& x, const LocalJet& j, double param) {
  switch (p.kind) {
    case ProblemKind::BurgersDirichlet:
    case ProblemKind::BurgersMixed:
      return p.nu * j.uxx - j.u * j.ux;
    case ProblemKind::Bratu1D:
      return j.uxx + param * std::exp(j.u);
    case ProblemKind::Bratu2D:
      return j.uxx + j.uyy + param * std::exp(j.u);
    case ProblemKind::BratuRadial:
      if (at_origin(x)) return 2.0 * j.uxx + param * std::exp(j.u);
      return j.uxx + j.ux / x[0] + param * std::exp(j.u);
  }
  return 0.0;
}

JetSensitivity residual_linearization(const PdeProblem& p, const Point& x, const LocalJet& j,
                                      double param) {
  JetSensitivity s;
  switch (p.kind) {
    case ProblemKind::BurgersDirichlet:
    case ProblemKind::BurgersMixed:
      s.du = -j.ux;
      s.dux = -j.u;
      s.duxx = p.nu;
      break;
    case ProblemKind::Bratu1D:
      s.du = param * std::exp(j.u);
      s.duxx = 1.0;
      break;
    case ProblemKind::Bratu2D:
      s.du = param * std::exp(j.u);
      s.duxx = 1.0;
      s.duyy = 1.0;
      break;
    case ProblemKind::BratuRadial:
      s.du = param * std::exp(j.u);
      if (at_origin(x)) {
        s.duxx = 2.0;
      } else {
        s.duxx = 1.0;
        s.dux = 1.0 / x[0];
      }
      break;
  }
  return s;
}

double residual_param_partial(const PdeProblem& p, const Point&, const LocalJet& j, double) {
  switch (p.kind) {
    case ProblemKind::Bratu1D:
    case ProblemKind::Bratu2D:
    case ProblemKind::BratuRadial:
      return std::exp(j.u);
    default:
      return 0.0;
  }
}

BoundaryCondition boundary_condition(const PdeProblem& p, const Point& x, double param) {
  const bool left = p.domain.dim == 1 && std::abs(x[0] - p.domain.lower[0]) < 1e-12;
  switch (p.kind) {
    case ProblemKind::BurgersDirichlet:
      return {BoundaryType::Dirichlet, left ? p.gamma() : 0.0, 0.0};
    case ProblemKind::BurgersMixed:
      if (left) return {BoundaryType::Neumann, -param, -1.0};
      return {BoundaryType::Dirichlet, 0.0, 0.0};
    case ProblemKind::BratuRadial:
      if (left) return {BoundaryType::Neumann, 0.0, 0.0};
      return {BoundaryType::Dirichlet, 0.0, 0.0};
    default:
      return {BoundaryType::Dirichlet, 0.0, 0.0};
  }
}

double boundary_residual(const BoundaryCondition& bc, const LocalJet& jet) {
  return (bc.type == BoundaryType::Dirichlet ? jet.u : jet.ux) - bc.value;
}

// ---------------------------------------------------------------------------
// Root finding for the implicit constants

namespace {

/// Bisection down to a 1e-14 bracket followed by a guarded Newton polish.
double bracketed_root(const std::function<double(double)>& f, const std::function<double(double)>& df,
                      double a, double b) {
  double fa = f(a);
  double fb = f(b);
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if ((fa > 0.0) == (fb > 0.0)) throw std::logic_error("bracketed_root: no sign change");
  for (int it = 0; it < 400 && (b - a) > 1e-14; ++it) {
    const double m = 0.5 * (a + b);
    const double fm = f(m);
    if (fm == 0.0) return m;
    if ((fm > 0.0) == (fa > 0.0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  double x = 0.5 * (a + b);
  for (int it = 0; it < 3; ++it) {
    const double d = df(x);
    if (d == 0.0) break;
    const double next = x - f(x) / d;
    if (!(next >= a - 1e-14 && next <= b + 1e-14)) break;
    if (std::abs(f(next)) >= std::abs(f(x))) break;
    x = next;
  }
  return x;
}

double sech2(double t) {
  const double c = std::cosh(t);
  return 1.0 / (c * c);
}

/// q(t) = t^2 sech^2 t, increasing on (0, t*) and decreasing after.
double q_of(double t) { return t * t * sech2(t); }
double dq_of(double t) { return 2.0 * t * sech2(t) * (1.0 - t * std::tanh(t)); }

/// Solves q(t) = target on one side of the fold. Throws NoSolutionError past the fold.
double solve_q(double target, BranchSide side, double fold_scale, const char* what) {
  const double ts = sech2_fold_argument();
  const double qs = q_of(ts);
  if (target > qs * (1.0 + 1e-13)) {
    throw NoSolutionError(std::string(what) + ": parameter beyond the fold, no solution on branch",
                          qs * fold_scale);
  }
  if (target >= qs) return ts;
  auto f = [target](double t) { return q_of(t) - target; };
  if (side == BranchSide::Lower) {
    if (target == 0.0) return 0.0;
    return bracketed_root(f, dq_of, 0.0, ts);
  }
  if (target <= 0.0) {
    throw NoSolutionError(std::string(what) + ": upper branch is unbounded at zero parameter",
                          qs * fold_scale);
  }
  double hi = 2.0 * ts;
  while (f(hi) > 0.0) hi *= 2.0;
  return bracketed_root(f, dq_of, ts, hi);
}

}  // namespace

double sech2_fold_argument() {
  static const double t = [] {
    auto f = [](double x) { return x * std::tanh(x) - 1.0; };
    auto df = [](double x) { return std::tanh(x) + x * sech2(x); };
    return bracketed_root(f, df, 1.0, 1.5);
  }();
  return t;
}

ExactSolution burgers_dirichlet_exact(double nu) {
  if (!(nu > 0.0)) throw std::invalid_argument("burgers_dirichlet_exact: nu must be positive");
  ExactSolution s;
  s.value = [nu](double x) { return 2.0 / (1.0 + std::exp((x - 1.0) / nu)) - 1.0; };
  s.d1 = [nu](double x) { return -sech2((1.0 - x) / (2.0 * nu)) / (2.0 * nu); };
  s.d2 = [nu](double x) {
    const double a = (1.0 - x) / (2.0 * nu);
    return -sech2(a) * std::tanh(a) / (2.0 * nu * nu);
  };
  return s;
}

double burgers_mixed_fold(double nu) {
  const double t = sech2_fold_argument();
  return 2.0 * nu * q_of(t);
}

namespace {

/// theta = 2 nu t^2 sech^2 t with t = sqrt(2c)/(2nu).
double burgers_mixed_t(double theta, double nu, BranchSide side) {
  if (!(nu > 0.0)) throw std::invalid_argument("burgers_mixed: nu must be positive");
  if (!(theta >= 0.0)) throw std::invalid_argument("burgers_mixed: theta must be non-negative");
  return solve_q(theta / (2.0 * nu), side, 2.0 * nu, "burgers_mixed_solve_c");
}

}  // namespace

double burgers_mixed_solve_c(double theta, double nu, BranchSide side) {
  const double t = burgers_mixed_t(theta, nu, side);
  return 2.0 * nu * nu * t * t;
}

ExactSolution burgers_mixed_exact(double nu, double theta, BranchSide side) {
  const double t = burgers_mixed_t(theta, nu, side);
  const double amp = 2.0 * nu * t;  // sqrt(2c)
  ExactSolution s;
  s.branch = side;
  s.constant = 2.0 * nu * nu * t * t;
  s.value = [amp, t](double x) { return amp * std::tanh(t * (1.0 - x)); };
  s.d1 = [amp, t](double x) { return -amp * t * sech2(t * (1.0 - x)); };
  s.d2 = [amp, t](double x) {
    const double a = t * (1.0 - x);
    return -2.0 * amp * t * t * sech2(a) * std::tanh(a);
  };
  return s;
}

AsymptoticEstimate burgers_asymptotic_c(double eps, double nu) {
  if (!(eps > 0.0) || !(nu > 0.0)) throw std::invalid_argument("burgers_asymptotic_c: eps, nu > 0");
  const double l = std::log(nu / eps);
  return {0.5 * nu * nu * l * l, nu * l * std::tanh(0.5 * l)};
}

double bratu1d_critical_lambda() {
  const double t = sech2_fold_argument();
  return 8.0 * q_of(t);
}

double bratu1d_theta(double lambda, BranchSide side) {
  if (!(lambda > 0.0)) throw std::invalid_argument("bratu1d_exact: lambda must be positive");
  return solve_q(lambda / 8.0, side, 8.0, "bratu1d_exact");
}

ExactSolution bratu1d_exact(double lambda, BranchSide side) {
  const double th = bratu1d_theta(lambda, side);
  const double log_cosh = std::log(std::cosh(th));
  ExactSolution s;
  s.branch = side;
  s.constant = th;
  s.value = [th, log_cosh](double x) { return 2.0 * (log_cosh - std::log(std::cosh(th * (1.0 - 2.0 * x)))); };
  s.d1 = [th](double x) { return 4.0 * th * std::tanh(th * (1.0 - 2.0 * x)); };
  s.d2 = [th](double x) { return -8.0 * th * th * sech2(th * (1.0 - 2.0 * x)); };
  return s;
}

ExactSolution bratu_radial_exact(double lambda) {
  double a = 0.0;
  double k = 0.0;
  if (lambda == 0.5) {
    a = 7.0 + 4.0 * std::sqrt(3.0);
    k = 16.0 * a;
  } else if (lambda == 1.0) {
    a = 3.0 + 2.0 * std::sqrt(2.0);
    k = 8.0 * a;
  } else {
    throw std::invalid_argument("bratu_radial_exact: closed form only available for lambda = 1/2 or 1");
  }
  ExactSolution s;
  s.branch = BranchSide::Lower;
  s.value = [a, k](double r) {
    const double d = a + r * r;
    return std::log(k / (d * d));
  };
  s.d1 = [a](double r) { return -4.0 * r / (a + r * r); };
  s.d2 = [a](double r) {
    const double d = a + r * r;
    return -4.0 / d + 8.0 * r * r / (d * d);
  };
  return s;
}

std::optional<ExactSolution> exact_solution_for(const PdeProblem& p, BranchSide side) {
  switch (p.kind) {
    case ProblemKind::BurgersDirichlet: return burgers_dirichlet_exact(p.nu);
    case ProblemKind::BurgersMixed: return burgers_mixed_exact(p.nu, p.param, side);
    case ProblemKind::Bratu1D: return bratu1d_exact(p.param, side);
    case ProblemKind::BratuRadial: return bratu_radial_exact(p.param);
    case ProblemKind::Bratu2D: return std::nullopt;
  }
  return std::nullopt;
}

std::optional<double> reference_fold(const PdeProblem& p) {
  switch (p.kind) {
    case ProblemKind::BurgersMixed: return burgers_mixed_fold(p.nu);
    case ProblemKind::Bratu1D: return kBratu1DCriticalLambda;
    case ProblemKind::Bratu2D: return kBratu2DCriticalLambda;
    case ProblemKind::BratuRadial: return 2.0;
    default: return std::nullopt;
  }
}

}  // namespace elmbif
