#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <doctest.h>
#include <json.hpp>

#include "elmbif/experiments.hpp"

using namespace elmbif;
using nlohmann::json;

namespace {

std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("elmbif_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string body_without_header(const std::filesystem::path& file) {
  std::ifstream in(file);
  std::string first;
  std::getline(in, first);
  std::stringstream rest;
  rest << in.rdbuf();
  return rest.str();
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("configuration parsing") {
  const ExperimentConfig cfg = config_from_json(json::parse(R"({
    "problem": "burgers-mixed", "nu": 0.05, "theta": 0.01, "solver": ["fd", "elm-rbf"],
    "sizes": [20, 40], "seeds": [3], "tol": 1e-8, "ds0": 0.01, "ratio": 0.75,
    "out": "results", "gnuplot": true, "linear_method": "qr"})"));
  CHECK(cfg.problem.kind == ProblemKind::BurgersMixed);
  CHECK(cfg.problem.nu == 0.05);
  CHECK(cfg.problem.param == 0.01);
  REQUIRE(cfg.solvers.size() == 2);
  CHECK(cfg.solvers[1] == SolverKind::ElmRbf);
  CHECK(cfg.sizes == std::vector<int>{20, 40});
  CHECK(cfg.seeds == std::vector<std::uint64_t>{3});
  CHECK(cfg.ds0.value() == 0.01);
  CHECK(cfg.ratio == 0.75);
  CHECK(cfg.gnuplot);
  CHECK(cfg.linear_method == LinearMethod::QrLsq);
  CHECK(cfg.out_dir == std::filesystem::path("results"));

  const ExperimentConfig round = config_from_json(to_json(cfg));
  CHECK(round.sizes == cfg.sizes);
  CHECK(round.problem.param == cfg.problem.param);
  CHECK(round.solvers == cfg.solvers);
  CHECK(round.linear_method == cfg.linear_method);
  CHECK(round.out_dir == cfg.out_dir);
  CHECK(round.gnuplot);
}

TEST_CASE("configuration errors") {
  CHECK_THROWS_AS(config_from_json(json::parse(R"({"sizse": [20]})")), std::invalid_argument);
  CHECK_THROWS_AS(config_from_json(json::parse(R"({"solver": "fem"})")), std::invalid_argument);
  CHECK_THROWS_AS(config_from_json(json::parse(R"({"ratio": 1.5})")), std::invalid_argument);
  CHECK_THROWS_AS(config_from_json(json::parse(R"({"problem": "bratu1d", "lambda": -1})")), std::invalid_argument);
  CHECK_THROWS_AS(config_from_json(json::parse("[1, 2]")), std::invalid_argument);
}

TEST_CASE("solve of the zero Bratu state") {
  ExperimentConfig cfg;
  cfg.problem = PdeProblem::bratu1d(0.0);
  cfg.l0 = 0.0;
  for (SolverKind s : {SolverKind::Fd, SolverKind::ElmSigmoid, SolverKind::ElmRbf}) {
    const SolveOutcome r = solve_case(cfg, s, 40, 1);
    REQUIRE(r.ok());
    CHECK(r.report.converged);
    CHECK(make_system(cfg.problem, s, 40, 1)->measure(r.report.solution) < 1e-12);
  }
}

TEST_CASE("ELM solve of Dirichlet Burgers is accurate at N = 400") {
  ExperimentConfig cfg;
  cfg.problem = PdeProblem::burgers_dirichlet(0.1);
  const SolveOutcome r = solve_case(cfg, SolverKind::ElmSigmoid, 400, 1);
  REQUIRE(r.ok());
  CHECK(r.error.value().l2 < 1e-6);
}

TEST_CASE("steep layer defeats coarse finite differences") {
  ExperimentConfig cfg;
  cfg.problem = PdeProblem::burgers_dirichlet(0.007);
  const SolveOutcome r = solve_case(cfg, SolverKind::Fd, 40, 1);
  REQUIRE(r.ok());
  CHECK(r.error.value().linf > 1e-2);
}

TEST_CASE("basin classes at known cells") {
  ExperimentConfig cfg;
  const double lower = bratu1d_exact(0.1, BranchSide::Lower)(0.5);
  CHECK(classify_basin(cfg, SolverKind::Fd, 40, 1, 0.1, lower) == BasinClass::Lower);
  CHECK(classify_basin(cfg, SolverKind::Fd, 40, 1, 3.0, 2.2) == BasinClass::Upper);
  for (double l0 : {0.0, 1.0, 4.0, 8.0}) {
    CHECK(classify_basin(cfg, SolverKind::ElmSigmoid, 40, 1, 3.8, l0) == BasinClass::Diverged);
  }
}

TEST_CASE("drivers write deterministic files") {
  const auto dir = scratch_dir("drivers");
  ExperimentConfig cfg;
  cfg.problem = PdeProblem::bratu1d(1.0);
  cfg.solvers = {SolverKind::Fd, SolverKind::ElmSigmoid};
  cfg.sizes = {20};
  cfg.out_dir = dir;
  cfg.gnuplot = true;
  CHECK(run_error_sweep(cfg) == 0);
  const auto sweep = dir / "error_sweep_bratu1d.csv";
  REQUIRE(std::filesystem::exists(sweep));
  const std::string first = body_without_header(sweep);
  CHECK(run_error_sweep(cfg) == 0);
  CHECK(body_without_header(sweep) == first);
  std::ifstream in(sweep);
  std::string header;
  std::getline(in, header);
  CHECK(header.rfind("# generated ", 0) == 0);

  cfg.basin_l0_points = 3;
  cfg.basin_lambda_points = 3;
  CHECK(run_basin(cfg) == 0);
  CHECK(std::filesystem::exists(dir / "basin_bratu1d_fd_N20.csv"));

  CHECK(run_solve(cfg) == 0);
  bool json_found = false;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.path().extension() == ".json" && e.path().filename().string().rfind("solve_", 0) == 0) json_found = true;
  }
  CHECK(json_found);
  std::filesystem::remove_all(dir);
}

TEST_CASE("bifurcation driver reports the fold") {
  const auto dir = scratch_dir("bif");
  ExperimentConfig cfg;
  cfg.problem = PdeProblem::burgers_mixed(0.1, 0.005);
  cfg.solvers = {SolverKind::Fd};
  cfg.sizes = {20};
  cfg.points_after_fold = 4;
  cfg.out_dir = dir;
  CHECK(run_bifurcation(cfg) == 0);
  std::ifstream in(dir / "turning_points_burgers-mixed.csv");
  std::string line, row;
  std::getline(in, line);
  std::getline(in, line);
  std::getline(in, row);
  CHECK(row.find("fd,20") == 0);
  const FoldOutcome f = trace_fold(cfg, SolverKind::Fd, 20, 1);
  REQUIRE(f.estimate.has_value());
  CHECK(*f.estimate - burgers_mixed_fold(0.1) == doctest::Approx(-3.3230e-4).epsilon(0.5));
  std::filesystem::remove_all(dir);
}

TEST_CASE("u(0) table rejects other problems") {
  ExperimentConfig cfg;
  CHECK_THROWS_AS(run_u0_table(cfg), std::invalid_argument);
}

}
