#include <cmath>
#include <random>

#include <doctest.h>

#include "elmbif/problems.hpp"

using namespace elmbif;

namespace {

double max_residual(const PdeProblem& p, const ExactSolution& ex, int samples) {
  double worst = 0.0;
  for (int i = 1; i <= samples; ++i) {
    const double x = static_cast<double>(i) / (samples + 1);
    const LocalJet jet{ex.value(x), ex.d1(x), ex.d2(x), 0.0};
    worst = std::max(worst, std::abs(residual_operator(p, {x, 0.0}, jet, p.param)));
  }
  return worst;
}

}  // namespace

TEST_SUITE("problems") {

TEST_CASE("Dirichlet Burgers closed form") {
  const ExactSolution ex = burgers_dirichlet_exact(0.1);
  CHECK(ex(0.0) == doctest::Approx(0.99990920).epsilon(1e-8));
  CHECK(ex(0.5) == doctest::Approx(0.98661430).epsilon(1e-8));
  CHECK(std::abs(ex(1.0)) < 1e-15);
  CHECK(PdeProblem::burgers_dirichlet(0.1).gamma() == doctest::Approx(ex(0.0)));
  const PdeProblem p = PdeProblem::burgers_dirichlet(0.1);
  const LocalJet jet{ex(0.3), ex.d1(0.3), ex.d2(0.3), 0.0};
  CHECK(std::abs(residual_operator(p, {0.3, 0.0}, jet, 0.0)) < 1e-9);
}

TEST_CASE("mixed Burgers branches and fold") {
  const double nu = 0.1;
  const double fold = burgers_mixed_fold(nu);
  CHECK(fold == doctest::Approx(0.087845767978).epsilon(1e-10));
  CHECK(burgers_mixed_exact(nu, 1e-6, BranchSide::Upper)(0.0) ==
        doctest::Approx(1.798516682636303).epsilon(1e-12));
  for (BranchSide side : {BranchSide::Lower, BranchSide::Upper}) {
    const ExactSolution ex = burgers_mixed_exact(nu, 0.03, side);
    CHECK(std::abs(ex(1.0)) < 1e-14);
    CHECK(ex.d1(0.0) == doctest::Approx(-0.03));
    CHECK(max_residual(PdeProblem::burgers_mixed(nu, 0.03), ex, 50) < 1e-8);
  }
  CHECK_THROWS_AS(burgers_mixed_exact(nu, fold * 1.01, BranchSide::Lower), NoSolutionError);
  // u(0) tends to 0 on the lower branch and grows on the upper branch as theta shrinks.
  double lo_prev = 1e300;
  double up_prev = 0.0;
  for (double theta : {1e-2, 1e-3, 1e-4, 1e-5, 1e-6}) {
    const double lo = burgers_mixed_exact(nu, theta, BranchSide::Lower)(0.0);
    const double up = burgers_mixed_exact(nu, theta, BranchSide::Upper)(0.0);
    CHECK(lo < lo_prev);
    CHECK(up > up_prev);
    lo_prev = lo;
    up_prev = up;
  }
  CHECK(lo_prev < 1e-4);
}

TEST_CASE("branches merge like the square root of the fold distance") {
  // Near a fold the branch gap scales as sqrt(distance): quartering the
  // distance halves the gap.
  const double nu = 0.1;
  const double ts = burgers_mixed_fold(nu);
  auto gap_b = [&](double d) {
    return burgers_mixed_solve_c(ts - d, nu, BranchSide::Upper) -
           burgers_mixed_solve_c(ts - d, nu, BranchSide::Lower);
  };
  CHECK(gap_b(1e-6) / gap_b(4e-6) == doctest::Approx(0.5).epsilon(1e-2));
  const double lc = bratu1d_critical_lambda();
  auto gap_l = [&](double d) {
    return bratu1d_theta(lc - d, BranchSide::Upper) - bratu1d_theta(lc - d, BranchSide::Lower);
  };
  CHECK(gap_l(1e-6) / gap_l(4e-6) == doctest::Approx(0.5).epsilon(1e-2));
  CHECK(gap_l(1e-8) > 0.0);
  CHECK(gap_l(1e-8) < 1e-3);
}

TEST_CASE("asymptotic estimate is exposed as printed") {
  const AsymptoticEstimate a = burgers_asymptotic_c(1e-6, 0.1);
  CHECK(a.c == doctest::Approx(0.66273).epsilon(1e-4));
  CHECK(a.u0 == doctest::Approx(1.15128).epsilon(1e-4));
}

TEST_CASE("1D Bratu closed form") {
  CHECK(bratu1d_critical_lambda() == doctest::Approx(kBratu1DCriticalLambda).epsilon(1e-12));
  const double lc = bratu1d_critical_lambda();
  CHECK(bratu1d_theta(lc, BranchSide::Lower) == doctest::Approx(bratu1d_theta(lc, BranchSide::Upper)).epsilon(1e-6));
  for (BranchSide side : {BranchSide::Lower, BranchSide::Upper}) {
    const ExactSolution ex = bratu1d_exact(1.0, side);
    CHECK(std::abs(ex(0.0)) < 1e-14);
    CHECK(std::abs(ex(1.0)) < 1e-14);
    CHECK(max_residual(PdeProblem::bratu1d(1.0), ex, 50) < 1e-9);
    const double theta = bratu1d_theta(1.0, side);
    CHECK(std::cosh(theta) == doctest::Approx(4.0 * theta / std::sqrt(2.0)));
    CHECK(ex(0.5) == doctest::Approx(2.0 * std::log(std::cosh(theta))));
  }
  CHECK(bratu1d_exact(1.0, BranchSide::Lower)(0.5) < bratu1d_exact(1.0, BranchSide::Upper)(0.5));
  CHECK_THROWS_AS(bratu1d_exact(3.6, BranchSide::Lower), NoSolutionError);
}

TEST_CASE("radial Bratu closed forms") {
  const ExactSolution one = bratu_radial_exact(1.0);
  CHECK(one(0.0) == doctest::Approx(std::log(8.0 / (3.0 + 2.0 * std::sqrt(2.0)))).epsilon(1e-12));
  CHECK(one(0.0) == doctest::Approx(0.31669).epsilon(1e-4));
  const ExactSolution half = bratu_radial_exact(0.5);
  CHECK(std::abs(half(1.0)) < 1e-12);
  CHECK(std::abs(half.d1(0.0)) < 1e-14);
  CHECK(max_residual(PdeProblem::bratu_radial(1.0), one, 50) < 1e-9);
  CHECK_THROWS(bratu_radial_exact(0.7));
  // The regularized operator at r = 0 is 2u'' + lambda e^u.
  const LocalJet jet{one(0.0), 0.0, one.d2(0.0), 0.0};
  CHECK(std::abs(residual_operator(PdeProblem::bratu_radial(1.0), {0.0, 0.0}, jet, 1.0)) < 1e-9);
}

TEST_CASE("pointwise operators") {
  CHECK(residual_operator(PdeProblem::bratu1d(0.0), {0.4, 0.0}, {}, 0.0) == 0.0);
  const PdeProblem b2 = PdeProblem::bratu2d(1.0);
  const LocalJet jet{0.2, 0.0, 0.3, -0.1};
  CHECK(residual_operator(b2, {0.5, 0.5}, jet, 1.0) == doctest::Approx(0.2 + std::exp(0.2)));
  const JetSensitivity s = residual_linearization(b2, {0.5, 0.5}, jet, 1.0);
  CHECK(s.duxx == 1.0);
  CHECK(s.duyy == 1.0);
  CHECK(s.du == doctest::Approx(std::exp(0.2)));
  CHECK(residual_param_partial(b2, {0.5, 0.5}, jet, 1.0) == doctest::Approx(std::exp(0.2)));
  const BoundaryCondition bc = boundary_condition(PdeProblem::burgers_mixed(0.1, 0.02), {0.0, 0.0}, 0.02);
  CHECK(bc.type == BoundaryType::Neumann);
  CHECK(boundary_residual(bc, {0.0, -0.02, 0.0, 0.0}) == doctest::Approx(0.0));
}

TEST_CASE("problem descriptors validate and serialize") {
  CHECK_THROWS_AS(PdeProblem::burgers_dirichlet(-1.0), std::invalid_argument);
  CHECK_THROWS_AS(PdeProblem::bratu1d(-0.5), std::invalid_argument);
  const PdeProblem p = problem_from_json(to_json(PdeProblem::burgers_mixed(0.05, 0.01)));
  CHECK(p.kind == ProblemKind::BurgersMixed);
  CHECK(p.nu == 0.05);
  CHECK(p.param == 0.01);
  CHECK(problem_kind_from_string("bratu2d") == ProblemKind::Bratu2D);
  CHECK_THROWS(problem_kind_from_string("heat"));
  CHECK(reference_fold(PdeProblem::bratu1d(1.0)).value() == kBratu1DCriticalLambda);
  CHECK_FALSE(exact_solution_for(PdeProblem::bratu2d(1.0), BranchSide::Lower).has_value());
}

}
