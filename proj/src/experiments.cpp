#include "elmbif/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "elmbif/basis.hpp"
#include "elmbif/collocation.hpp"
#include "elmbif/fd_solver.hpp"

namespace elmbif {

std::string to_string(SolverKind kind) {
  switch (kind) {
    case SolverKind::Fd: return "fd";
    case SolverKind::ElmSigmoid: return "elm-sf";
    case SolverKind::ElmRbf: return "elm-rbf";
  }
  return "?";
}

SolverKind solver_from_string(const std::string& name) {
  if (name == "fd") return SolverKind::Fd;
  if (name == "elm-sf") return SolverKind::ElmSigmoid;
  if (name == "elm-rbf") return SolverKind::ElmRbf;
  throw std::invalid_argument("unknown solver '" + name + "' (expected fd, elm-sf or elm-rbf)");
}

bool is_elm(SolverKind kind) { return kind != SolverKind::Fd; }

std::string to_string(BasinClass cls) {
  switch (cls) {
    case BasinClass::Lower: return "lower";
    case BasinClass::Upper: return "upper";
    case BasinClass::Diverged: return "diverged";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Configuration

void ExperimentConfig::validate() const {
  problem.validate();
  if (solvers.empty()) throw std::invalid_argument("at least one solver is required");
  if (sizes.empty()) throw std::invalid_argument("at least one size is required");
  if (seeds.empty()) throw std::invalid_argument("at least one seed is required");
  for (int n : sizes) {
    if (n < 4) throw std::invalid_argument("sizes must be at least 4");
    if (problem.dim() == 2) {
      const int s = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n))));
      if (s * s != n && std::find(solvers.begin(), solvers.end(), SolverKind::Fd) != solvers.end())
        throw std::invalid_argument("2D finite differences need square sizes (N = n x n)");
    }
  }
  if (!(tol > 0.0)) throw std::invalid_argument("tol must be positive");
  if (max_iter < 1) throw std::invalid_argument("max_iter must be positive");
  if (!(ratio > 0.0 && ratio <= 1.0)) throw std::invalid_argument("ratio must lie in (0, 1]");
  if (ratio >= 1.0 && linear_method != LinearMethod::SvdPinv)
    throw std::invalid_argument("ratio 1 requires the SVD pseudoinverse");
  if (ds0 && !(*ds0 > 0.0)) throw std::invalid_argument("ds0 must be positive");
  if (max_points < 3) throw std::invalid_argument("max_points must be at least 3");
  if (fold_refinements < 0) throw std::invalid_argument("fold_refinements must be >= 0");
  if (basin_l0_points < 1 || basin_lambda_points < 1)
    throw std::invalid_argument("basin grid needs at least one point per axis");
  if (!(u0_theta > 0.0)) throw std::invalid_argument("u0 theta must be positive");
  if (output_resolution < 2) throw std::invalid_argument("resolution must be at least 2");
}

namespace {

template <class T>
std::vector<T> list_value(const nlohmann::json& v) {
  if (v.is_array()) return v.get<std::vector<T>>();
  return {v.get<T>()};
}

template <class T>
void read_optional(const nlohmann::json& doc, const char* key, std::optional<T>& slot) {
  if (doc.contains(key) && !doc.at(key).is_null()) slot = doc.at(key).get<T>();
}

template <class T>
void read(const nlohmann::json& doc, const char* key, T& slot) {
  if (doc.contains(key) && !doc.at(key).is_null()) slot = doc.at(key).get<T>();
}

}  // namespace

ExperimentConfig config_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw std::invalid_argument("configuration must be a JSON object");
  static const std::vector<std::string> known = {
      "problem", "solver", "solvers", "nu", "lambda", "theta", "sizes", "seeds", "tol",
      "max_iter", "ratio", "linear_method", "branch", "l0", "ds0", "param_min", "param_max",
      "measure_max", "points_after_fold", "max_points", "fold_refinements", "residual_tol",
      "basin_l0_points", "basin_lambda_points", "basin_l0_min", "basin_l0_max",
      "basin_lambda_min", "basin_lambda_max", "u0_theta", "resolution", "out", "gnuplot"};
  for (const auto& item : doc.items()) {
    if (std::find(known.begin(), known.end(), item.key()) == known.end())
      throw std::invalid_argument("unknown configuration key '" + item.key() + "'");
  }
  ExperimentConfig cfg;
  try {
    if (doc.contains("problem") && doc.at("problem").is_object()) {
      // Full descriptor, as written by to_json.
      cfg.problem = problem_from_json(doc.at("problem"));
    } else {
      const std::string name = doc.value("problem", std::string("bratu1d"));
      const double nu = doc.value("nu", 0.1);
      const double lambda = doc.value("lambda", 1.0);
      const double theta = doc.value("theta", 0.05);
      switch (problem_kind_from_string(name)) {
        case ProblemKind::BurgersDirichlet: cfg.problem = PdeProblem::burgers_dirichlet(nu); break;
        case ProblemKind::BurgersMixed: cfg.problem = PdeProblem::burgers_mixed(nu, theta); break;
        case ProblemKind::Bratu1D: cfg.problem = PdeProblem::bratu1d(lambda); break;
        case ProblemKind::Bratu2D: cfg.problem = PdeProblem::bratu2d(lambda); break;
        case ProblemKind::BratuRadial: cfg.problem = PdeProblem::bratu_radial(lambda); break;
      }
    }
    const char* solver_key = doc.contains("solvers") ? "solvers" : "solver";
    if (doc.contains(solver_key)) {
      cfg.solvers.clear();
      for (const auto& s : list_value<std::string>(doc.at(solver_key)))
        cfg.solvers.push_back(solver_from_string(s));
    }
    if (doc.contains("sizes")) cfg.sizes = list_value<int>(doc.at("sizes"));
    if (doc.contains("seeds")) cfg.seeds = list_value<std::uint64_t>(doc.at("seeds"));
    read(doc, "tol", cfg.tol);
    read(doc, "max_iter", cfg.max_iter);
    read(doc, "ratio", cfg.ratio);
    if (doc.contains("linear_method")) {
      const auto m = doc.at("linear_method").get<std::string>();
      if (m == "svd" || m == "svd-pinv") {
        cfg.linear_method = LinearMethod::SvdPinv;
      } else if (m == "qr" || m == "qr-lsq") {
        cfg.linear_method = LinearMethod::QrLsq;
      } else {
        throw std::invalid_argument("linear_method must be svd or qr");
      }
    }
    if (doc.contains("branch")) cfg.branch = branch_side_from_string(doc.at("branch").get<std::string>());
    read_optional(doc, "l0", cfg.l0);
    read_optional(doc, "ds0", cfg.ds0);
    read_optional(doc, "param_min", cfg.param_min);
    read_optional(doc, "param_max", cfg.param_max);
    read_optional(doc, "measure_max", cfg.measure_max);
    read_optional(doc, "points_after_fold", cfg.points_after_fold);
    read(doc, "max_points", cfg.max_points);
    read(doc, "fold_refinements", cfg.fold_refinements);
    read_optional(doc, "residual_tol", cfg.residual_tol);
    read(doc, "basin_l0_points", cfg.basin_l0_points);
    read(doc, "basin_lambda_points", cfg.basin_lambda_points);
    read(doc, "basin_l0_min", cfg.basin_l0_min);
    read(doc, "basin_l0_max", cfg.basin_l0_max);
    read(doc, "basin_lambda_min", cfg.basin_lambda_min);
    read(doc, "basin_lambda_max", cfg.basin_lambda_max);
    read(doc, "u0_theta", cfg.u0_theta);
    read(doc, "resolution", cfg.output_resolution);
    if (doc.contains("out")) cfg.out_dir = doc.at("out").get<std::string>();
    read(doc, "gnuplot", cfg.gnuplot);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("bad configuration value: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

nlohmann::json to_json(const ExperimentConfig& cfg) {
  nlohmann::json doc;
  doc["problem"] = to_json(cfg.problem);
  std::vector<std::string> solvers;
  for (auto s : cfg.solvers) solvers.push_back(to_string(s));
  doc["solvers"] = solvers;
  doc["sizes"] = cfg.sizes;
  doc["seeds"] = cfg.seeds;
  doc["tol"] = cfg.tol;
  doc["max_iter"] = cfg.max_iter;
  doc["ratio"] = cfg.ratio;
  doc["linear_method"] = to_string(cfg.linear_method);
  doc["branch"] = to_string(cfg.branch);
  auto opt = [](const auto& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
  doc["l0"] = opt(cfg.l0);
  doc["ds0"] = opt(cfg.ds0);
  doc["param_min"] = opt(cfg.param_min);
  doc["param_max"] = opt(cfg.param_max);
  doc["measure_max"] = opt(cfg.measure_max);
  doc["points_after_fold"] = opt(cfg.points_after_fold);
  doc["max_points"] = cfg.max_points;
  doc["fold_refinements"] = cfg.fold_refinements;
  doc["residual_tol"] = opt(cfg.residual_tol);
  doc["basin_l0_points"] = cfg.basin_l0_points;
  doc["basin_lambda_points"] = cfg.basin_lambda_points;
  doc["basin_l0_min"] = cfg.basin_l0_min;
  doc["basin_l0_max"] = cfg.basin_l0_max;
  doc["basin_lambda_min"] = cfg.basin_lambda_min;
  doc["basin_lambda_max"] = cfg.basin_lambda_max;
  doc["u0_theta"] = cfg.u0_theta;
  doc["resolution"] = cfg.output_resolution;
  doc["out"] = cfg.out_dir.string();
  doc["gnuplot"] = cfg.gnuplot;
  return doc;
}

// ---------------------------------------------------------------------------
// Building blocks

namespace {

int fd_nodes_per_axis(const PdeProblem& problem, int size) {
  if (problem.dim() == 1) return size + 1;
  const int s = static_cast<int>(std::lround(std::sqrt(static_cast<double>(size))));
  if (s * s != size) throw std::invalid_argument("2D finite differences need N = n x n");
  return s + 1;
}

}  // namespace

std::unique_ptr<DiscreteSystem> make_system(const PdeProblem& problem, SolverKind solver, int size,
                                            std::uint64_t seed, double ratio,
                                            const LinearSolveConfig& lin) {
  if (solver == SolverKind::Fd)
    return std::make_unique<FdSystem>(problem, make_fd_grid(problem, fd_nodes_per_axis(problem, size)));
  const Activation act = solver == SolverKind::ElmSigmoid ? Activation::Sigmoid : Activation::GaussianRbf;
  return std::make_unique<ElmSystem>(problem, sample_basis(act, size, problem.domain, seed),
                                     make_grid(problem, size, ratio), lin);
}

Eigen::VectorXd project_guess(const DiscreteSystem& system,
                              const std::function<double(const Point&)>& f) {
  if (const auto* elm = dynamic_cast<const ElmSystem*>(&system))
    return fit_initial_weights(elm->basis(), elm->points(), f, elm->linear_solver());
  if (const auto* fd = dynamic_cast<const FdSystem*>(&system)) return sample_nodes(fd->grid(), f);
  throw std::invalid_argument("unsupported discrete system");
}

Eigen::VectorXd evaluate_solution(const DiscreteSystem& system, const Eigen::VectorXd& coeffs,
                                  const std::vector<Point>& points) {
  if (const auto* elm = dynamic_cast<const ElmSystem*>(&system))
    return reconstruct(elm->basis(), coeffs, points);
  if (const auto* fd = dynamic_cast<const FdSystem*>(&system))
    return interpolation_matrix(fd->grid(), points) * coeffs;
  throw std::invalid_argument("unsupported discrete system");
}

std::function<double(const Point&)> parabola_guess(const PdeProblem& problem, double l0) {
  const Domain d = problem.domain;
  if (problem.kind == ProblemKind::BratuRadial)
    return [l0, d](const Point& x) {
      const double r = (x[0] - d.lower[0]) / d.length(0);
      return l0 * (1.0 - r * r);
    };
  if (problem.dim() == 1)
    return [l0, d](const Point& x) {
      const double s = (x[0] - d.lower[0]) / d.length(0);
      return 4.0 * l0 * s * (1.0 - s);
    };
  return [l0, d](const Point& x) {
    const double s = (x[0] - d.lower[0]) / d.length(0);
    const double t = (x[1] - d.lower[1]) / d.length(1);
    return 16.0 * l0 * s * (1.0 - s) * t * (1.0 - t);
  };
}

ErrorNorms solution_error(const DiscreteSystem& system, const Eigen::VectorXd& coeffs,
                          const ExactSolution& exact) {
  std::vector<Point> pts;
  Eigen::VectorXd u;
  if (const auto* fd = dynamic_cast<const FdSystem*>(&system)) {
    for (Eigen::Index k = 0; k < fd->grid().nodes(); ++k) pts.push_back(fd->grid().node(k));
    u = coeffs;
  } else {
    const auto* elm = dynamic_cast<const ElmSystem*>(&system);
    if (!elm) throw std::invalid_argument("unsupported discrete system");
    pts = uniform_grid(elm->problem().domain, 1001);
    u = reconstruct(elm->basis(), coeffs, pts);
  }
  ErrorNorms e;
  double sum = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double d = u[static_cast<Eigen::Index>(i)] - exact(pts[i][0]);
    sum += d * d;
    e.linf = std::max(e.linf, std::abs(d));
  }
  e.l2 = std::sqrt(sum / static_cast<double>(pts.size()));
  return e;
}

namespace {

LinearSolveConfig linear_config(const ExperimentConfig& cfg) {
  LinearSolveConfig lin;
  lin.method = cfg.linear_method;
  return lin;
}

std::optional<ExactSolution> try_exact(const PdeProblem& problem, BranchSide side) {
  try {
    return exact_solution_for(problem, side);
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

// Default starting profile for a fixed-parameter solve.
std::function<double(const Point&)> default_guess(const ExperimentConfig& cfg) {
  const PdeProblem& p = cfg.problem;
  switch (p.kind) {
    case ProblemKind::BurgersDirichlet: {
      const double g = p.gamma();
      return [g](const Point& x) { return g * (1.0 - x[0]); };
    }
    case ProblemKind::BurgersMixed: {
      if (cfg.branch == BranchSide::Upper) {
        const auto exact = burgers_mixed_exact(p.nu, p.param, BranchSide::Upper);
        return [exact](const Point& x) { return exact(x[0]); };
      }
      const double theta = p.param;
      return [theta](const Point& x) { return theta * (1.0 - x[0]); };
    }
    case ProblemKind::Bratu1D: {
      double l0 = cfg.l0.value_or(0.0);
      if (!cfg.l0 && p.param > 0.0) {
        if (auto exact = try_exact(p, cfg.branch)) l0 = (*exact)(0.5);
      }
      return parabola_guess(p, l0);
    }
    default:
      return parabola_guess(p, cfg.l0.value_or(0.0));
  }
}

std::string status_text(const NewtonReport& rep) {
  return "newton " + to_string(rep.status) + " after " + std::to_string(rep.iterations) +
         " iterations";
}

}  // namespace

SolveOutcome solve_case(const ExperimentConfig& cfg, SolverKind solver, int size,
                        std::uint64_t seed) {
  SolveOutcome out;
  out.solver = solver;
  out.size = size;
  if (is_elm(solver)) out.seed = seed;
  const auto system = make_system(cfg.problem, solver, size, seed, cfg.ratio, linear_config(cfg));
  const Eigen::VectorXd x0 = project_guess(*system, default_guess(cfg));
  NewtonOptions opt;
  opt.tol = cfg.tol;
  opt.max_iter = cfg.max_iter;
  out.report = newton_solve(*system, x0, cfg.problem.param, opt);
  if (!out.report.converged) out.failure = status_text(out.report);
  if (auto exact = try_exact(cfg.problem, cfg.branch))
    out.error = solution_error(*system, out.report.solution, *exact);
  return out;
}

namespace {

struct TraceStart {
  double param;
  std::function<double(const Point&)> guess;
  double ds0;
  std::optional<double> seed_step;
};

TraceStart trace_start(const PdeProblem& p) {
  if (p.kind == ProblemKind::BurgersMixed) {
    const double theta = 0.005;
    return {theta, [theta](const Point& x) { return theta * (1.0 - x[0]); }, 0.02, 0.002};
  }
  if (p.kind == ProblemKind::BurgersDirichlet)
    throw std::invalid_argument("burgers-dirichlet has no continuation parameter");
  const double ds0 = p.kind == ProblemKind::Bratu2D ? 0.3 : 0.05;
  return {0.05, [](const Point&) { return 0.0; }, ds0, std::nullopt};
}

}  // namespace

TraceOptions trace_options(const ExperimentConfig& cfg, SolverKind solver) {
  const TraceStart start = trace_start(cfg.problem);
  TraceOptions opt;
  opt.ds0 = cfg.ds0.value_or(start.ds0);
  opt.seed_step = start.seed_step;
  opt.fold_refinements = cfg.fold_refinements;
  opt.continuation.newton.tol = cfg.tol;
  opt.continuation.newton.max_iter = std::min(cfg.max_iter, 25);
  opt.continuation.residual_tol = cfg.residual_tol;
  if (!cfg.residual_tol && is_elm(solver) && cfg.problem.dim() == 2)
    opt.continuation.residual_tol = 1e-1;
  opt.stop.max_points = cfg.max_points;
  opt.stop.param_min = cfg.param_min.value_or(cfg.problem.kind == ProblemKind::BurgersMixed ? 1e-6 : 0.0);
  if (cfg.param_max) opt.stop.param_max = *cfg.param_max;
  opt.stop.measure_max = cfg.measure_max.value_or(
      cfg.problem.kind == ProblemKind::BurgersMixed ? 5.0 : 10.0);
  opt.stop.points_after_fold = cfg.points_after_fold;
  return opt;
}

FoldOutcome trace_fold(const ExperimentConfig& cfg, SolverKind solver, int size,
                       std::uint64_t seed) {
  FoldOutcome out;
  out.solver = solver;
  out.size = size;
  if (is_elm(solver)) out.seed = seed;
  out.reference = reference_fold(cfg.problem);
  const auto system = make_system(cfg.problem, solver, size, seed, cfg.ratio, linear_config(cfg));
  const TraceStart start = trace_start(cfg.problem);
  try {
    out.branch = trace_branch(*system, project_guess(*system, start.guess), start.param, 1,
                              trace_options(cfg, solver));
  } catch (const ContinuationError& e) {
    out.failure = e.what();
    return out;
  }
  out.branch.solver = to_string(solver);
  out.branch.problem = to_json(cfg.problem);
  out.branch.seed = out.seed;
  try {
    out.estimate = estimate_turning_point(out.branch);
  } catch (const ContinuationError& e) {
    out.failure = e.what();
  }
  return out;
}

BasinClass classify_basin(const ExperimentConfig& cfg, SolverKind solver, int size,
                          std::uint64_t seed, double lambda, double l0) {
  if (cfg.problem.kind != ProblemKind::Bratu1D)
    throw std::invalid_argument("the basin study is defined for bratu1d");
  if (lambda > kBratu1DCriticalLambda) return BasinClass::Diverged;
  const PdeProblem problem = PdeProblem::bratu1d(lambda);
  const auto system = make_system(problem, solver, size, seed, cfg.ratio, linear_config(cfg));
  NewtonOptions opt;
  opt.tol = cfg.tol;
  opt.max_iter = cfg.max_iter;
  opt.max_step_norm = 1e3;
  const auto rep = newton_solve(*system, project_guess(*system, parabola_guess(problem, l0)),
                                lambda, opt);
  if (!rep.converged) return BasinClass::Diverged;
  const double rms = rep.final_residual / std::sqrt(static_cast<double>(system->equations()));
  if (!(rms < cfg.residual_tol.value_or(10.0 * cfg.tol))) return BasinClass::Diverged;
  const double m = system->measure(rep.solution);
  double best = std::numeric_limits<double>::infinity();
  BasinClass cls = BasinClass::Diverged;
  for (BranchSide side : {BranchSide::Lower, BranchSide::Upper}) {
    const double target = bratu1d_exact(lambda, side)(0.5);
    const double rel = std::abs(m - target) / std::max(target, 1e-12);
    if (rel <= 0.1 && rel < best) {
      best = rel;
      cls = side == BranchSide::Lower ? BasinClass::Lower : BasinClass::Upper;
    }
  }
  return cls;
}

U0Outcome upper_branch_u0(const ExperimentConfig& cfg, SolverKind solver, int size,
                          std::uint64_t seed) {
  if (cfg.problem.kind != ProblemKind::BurgersMixed)
    throw std::invalid_argument("the u(0) table is defined for burgers-mixed");
  U0Outcome out;
  out.solver = solver;
  out.size = size;
  if (is_elm(solver)) out.seed = seed;
  const double target = cfg.u0_theta;
  const double exact_u0 =
      burgers_mixed_exact(cfg.problem.nu, target, BranchSide::Upper)(0.0);
  const auto system = make_system(cfg.problem, solver, size, seed, cfg.ratio, linear_config(cfg));
  const TraceStart start = trace_start(cfg.problem);
  TraceOptions opt = trace_options(cfg, solver);
  opt.fold_refinements = 0;
  opt.stop.param_min = target;
  opt.stop.points_after_fold.reset();
  opt.stop.max_points = std::max(cfg.max_points, 2000);
  Branch branch;
  try {
    branch = trace_branch(*system, project_guess(*system, start.guess), start.param, 1, opt);
  } catch (const ContinuationError& e) {
    out.failure = e.what();
    return out;
  }
  const auto& pts = branch.points;
  if (!detect_fold(branch)) {
    out.failure = "branch never turned back";
    return out;
  }
  // The arclength trace may stall just above the target; the last point is
  // then the natural-step start.
  std::size_t i = pts.size() - 1;
  while (i > 0 && pts[i].param < target) --i;
  auto final = natural_step(*system, pts[i], target, opt.continuation);
  if (!final) {
    out.failure = "natural step to the target theta failed from theta = " +
                  std::to_string(pts[i].param);
    return out;
  }
  out.u0 = evaluate_solution(*system, final->coeffs, {Point{0.0, 0.0}})[0];
  out.error = out.u0 - exact_u0;
  return out;
}

// ---------------------------------------------------------------------------
// Output

namespace {

std::string timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

class Table {
 public:
  explicit Table(std::vector<std::string> columns) : columns_(std::move(columns)) {}

  template <class... Ts>
  void add(const Ts&... cells) {
    std::vector<std::string> row;
    (row.push_back(format(cells)), ...);
    rows_.push_back(std::move(row));
  }

  void write(const std::filesystem::path& path, bool gnuplot) const {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    emit(path, ',', true);
    if (gnuplot) {
      auto dat = path;
      dat.replace_extension(".dat");
      emit(dat, ' ', false);
    }
  }

  void write_dat(const std::filesystem::path& path) const { emit(path, ' ', false); }

 private:
  static std::string format(const std::string& s) { return s; }
  static std::string format(const char* s) { return s; }
  static std::string format(int v) { return std::to_string(v); }
  static std::string format(std::size_t v) { return std::to_string(v); }
  static std::string format(double v) {
    if (std::isnan(v)) return "nan";
    std::ostringstream os;
    os << std::setprecision(12) << v;
    return os.str();
  }
  static std::string format(const std::optional<std::uint64_t>& v) {
    return v ? std::to_string(*v) : std::string{};
  }
  static std::string format(const std::optional<double>& v) {
    return v ? format(*v) : std::string("nan");
  }

  void emit(const std::filesystem::path& path, char sep, bool csv) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "# generated " << timestamp() << '\n';
    if (!csv) out << "# ";
    for (std::size_t i = 0; i < columns_.size(); ++i) out << (i ? std::string(1, sep) : "") << columns_[i];
    out << '\n';
    for (const auto& row : rows_) {
      for (std::size_t i = 0; i < row.size(); ++i) {
        const std::string cell = row[i].empty() && !csv ? "-" : row[i];
        out << (i ? std::string(1, sep) : "") << cell;
      }
      out << '\n';
    }
  }

  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

void write_json(const std::filesystem::path& path, const nlohmann::json& doc) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

std::string case_stem(const std::string& prefix, const ExperimentConfig& cfg, SolverKind solver,
                      int size, const std::optional<std::uint64_t>& seed) {
  std::string s = prefix + "_" + to_string(cfg.problem.kind) + "_" + to_string(solver) + "_N" +
                  std::to_string(size);
  if (seed) s += "_s" + std::to_string(*seed);
  return s;
}

// Seeds only matter for ELM; FD cases run once.
template <class Fn>
void for_each_case(const ExperimentConfig& cfg, Fn fn) {
  for (SolverKind solver : cfg.solvers) {
    for (int size : cfg.sizes) {
      if (!is_elm(solver)) {
        fn(solver, size, cfg.seeds.front());
        continue;
      }
      for (std::uint64_t seed : cfg.seeds) fn(solver, size, seed);
    }
  }
}

}  // namespace

int run_solve(const ExperimentConfig& cfg) {
  cfg.validate();
  int failures = 0;
  for_each_case(cfg, [&](SolverKind solver, int size, std::uint64_t seed) {
    const SolveOutcome res = solve_case(cfg, solver, size, seed);
    if (!res.ok()) ++failures;
    const auto system = make_system(cfg.problem, solver, size, seed, cfg.ratio, linear_config(cfg));
    const auto pts = uniform_grid(cfg.problem.domain, cfg.output_resolution);
    const Eigen::VectorXd u = evaluate_solution(*system, res.report.solution, pts);
    const auto exact = try_exact(cfg.problem, cfg.branch);
    const bool two_d = cfg.problem.dim() == 2;
    std::vector<std::string> cols = two_d ? std::vector<std::string>{"x", "y", "u"}
                                          : std::vector<std::string>{"x", "u"};
    if (exact) cols.push_back("exact");
    Table table(cols);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const double ui = u[static_cast<Eigen::Index>(i)];
      if (two_d) {
        table.add(pts[i][0], pts[i][1], ui);
      } else if (exact) {
        table.add(pts[i][0], ui, (*exact)(pts[i][0]));
      } else {
        table.add(pts[i][0], ui);
      }
    }
    const std::string stem = case_stem("solve", cfg, solver, size, res.seed);
    table.write(cfg.out_dir / (stem + ".csv"), cfg.gnuplot);
    nlohmann::json doc;
    doc["config"] = to_json(cfg);
    doc["solver"] = to_string(solver);
    doc["size"] = size;
    doc["seed"] = res.seed ? nlohmann::json(*res.seed) : nlohmann::json(nullptr);
    doc["newton"] = to_json(res.report, true);
    doc["failure"] = res.failure;
    if (res.error) doc["error"] = {{"l2", res.error->l2}, {"linf", res.error->linf}};
    write_json(cfg.out_dir / (stem + ".json"), doc);
  });
  return failures;
}

int run_error_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  if (!try_exact(cfg.problem, cfg.branch))
    throw std::invalid_argument("no exact solution is available for this problem and parameter");
  int failures = 0;
  Table table({"solver", "N", "seed", "l2", "linf", "converged"});
  for_each_case(cfg, [&](SolverKind solver, int size, std::uint64_t seed) {
    const SolveOutcome res = solve_case(cfg, solver, size, seed);
    if (!res.ok()) ++failures;
    table.add(to_string(solver), size, res.seed, res.error->l2, res.error->linf,
              std::string(res.report.converged ? "yes" : "no"));
  });
  table.write(cfg.out_dir / ("error_sweep_" + to_string(cfg.problem.kind) + ".csv"), cfg.gnuplot);
  return failures;
}

int run_bifurcation(const ExperimentConfig& cfg) {
  cfg.validate();
  if (!cfg.problem.has_parameter())
    throw std::invalid_argument(to_string(cfg.problem.kind) + " has no continuation parameter");
  int failures = 0;
  Table summary({"solver", "N", "seed", "estimate", "reference", "error", "points", "status"});
  for_each_case(cfg, [&](SolverKind solver, int size, std::uint64_t seed) {
    const FoldOutcome res = trace_fold(cfg, solver, size, seed);
    if (!res.ok()) ++failures;
    if (!res.branch.points.empty()) {
      const std::string stem = case_stem("branch", cfg, solver, size, res.seed);
      write_branch_csv(res.branch, cfg.out_dir / (stem + ".csv"), "generated " + timestamp());
      if (cfg.gnuplot) {
        Table dat({"arclength", "param", "measure"});
        for (const auto& p : res.branch.points) dat.add(p.arclength, p.param, p.measure);
        dat.write_dat(cfg.out_dir / (stem + ".dat"));
      }
      nlohmann::json meta = branch_metadata(res.branch);
      meta["size"] = size;
      meta["ratio"] = cfg.ratio;
      meta["failure"] = res.failure;
      write_json(cfg.out_dir / (stem + ".json"), meta);
    }
    std::optional<double> err;
    if (res.estimate && res.reference) err = *res.estimate - *res.reference;
    summary.add(to_string(solver), size, res.seed, res.estimate, res.reference, err,
                res.branch.points.size(), res.ok() ? std::string("ok") : res.failure);
  });
  summary.write(cfg.out_dir / ("turning_points_" + to_string(cfg.problem.kind) + ".csv"),
                cfg.gnuplot);
  return failures;
}

int run_basin(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.problem.kind != ProblemKind::Bratu1D)
    throw std::invalid_argument("the basin study is defined for bratu1d");
  const auto l0s = linspace(cfg.basin_l0_min, cfg.basin_l0_max, cfg.basin_l0_points);
  const auto lambdas = linspace(cfg.basin_lambda_min, cfg.basin_lambda_max, cfg.basin_lambda_points);
  for_each_case(cfg, [&](SolverKind solver, int size, std::uint64_t seed) {
    Table table({"l0", "lambda", "class"});
    for (double lambda : lambdas) {
      for (double l0 : l0s)
        table.add(l0, lambda, to_string(classify_basin(cfg, solver, size, seed, lambda, l0)));
    }
    const std::optional<std::uint64_t> s = is_elm(solver) ? std::optional(seed) : std::nullopt;
    table.write(cfg.out_dir / (case_stem("basin", cfg, solver, size, s) + ".csv"), cfg.gnuplot);
  });
  return 0;
}

int run_u0_table(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.problem.kind != ProblemKind::BurgersMixed)
    throw std::invalid_argument("the u(0) table is defined for burgers-mixed");
  int failures = 0;
  Table table({"solver", "N", "seed", "u0", "error", "status"});
  for_each_case(cfg, [&](SolverKind solver, int size, std::uint64_t seed) {
    const U0Outcome res = upper_branch_u0(cfg, solver, size, seed);
    if (!res.ok()) ++failures;
    std::optional<double> u0;
    std::optional<double> err;
    if (res.ok()) {
      u0 = res.u0;
      err = res.error;
    }
    table.add(to_string(solver), size, res.seed, u0, err, res.ok() ? std::string("ok") : res.failure);
  });
  table.write(cfg.out_dir / "u0_table.csv", cfg.gnuplot);
  return failures;
}

}  // namespace elmbif
