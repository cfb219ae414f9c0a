#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "sharpext/extension.hpp"

using namespace sharpext;

namespace {

ExtensionProblem point_problem(const Domain& d, cplx a, cplx value) {
  ExtensionProblem p(d);
  p.variety = VarietySpec::at_point(Point(a));
  p.datum = {{value}};
  return p;
}

ExtensionProblem slice_problem(const Domain& d, cplx c, std::vector<cplx> coefficients) {
  ExtensionProblem p(d);
  p.variety = VarietySpec::slice(c);
  p.datum = {std::move(coefficients)};
  p.degree = 12;
  return p;
}

ScalarField gaussian(double s) {
  return {[s](const Point& x) { return s * std::norm(x.z1); }, true};
}

}  // namespace

TEST_CASE("sigma_k is the volume of the unit ball") {
  CHECK(sigma(1) == doctest::Approx(oracle::pi));
  CHECK(sigma(2) == doctest::Approx(oracle::pi * oracle::pi / 2.0));
}

TEST_CASE("disk points: the bound with the defect is attained") {
  std::mt19937 rng(23);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  const Domain d = Domain::build(DomainSpec::disk());
  for (int i = 0; i < 5; ++i) {
    const cplx a(u(rng), u(rng));
    const cplx v(u(rng) + 1.0, u(rng));
    ExtensionProblem p = point_problem(d, a, v);
    const GreenModel g = solve_green(d, Point(a));
    p.B = defect_bound(g, d, g.variety(), 0.05).B_field;
    const ExtensionResult r = minimal_extension(p);
    CAPTURE(a);
    CHECK(r.norm2 == doctest::Approx(std::norm(v) / oracle::disk_kernel(a)).epsilon(1e-6));
    CHECK(r.ratio == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(std::abs(r(Point(a)) - v) < 1e-10);
    CHECK(r.orthogonality_residual < 1e-8);
  }
}

TEST_CASE("annulus point: strict inequality") {
  const Domain d = Domain::build(DomainSpec::annulus(0.2, 1.0));
  ExtensionProblem p = point_problem(d, 0.5, 1.0);
  const GreenModel g = solve_green(d, Point(cplx(0.5)));
  p.B = defect_bound(g, d, g.variety(), 0.05).B_field;
  const ExtensionResult r = minimal_extension(p);
  CHECK(r.norm2 == doctest::Approx(1.0 / oracle::annulus_kernel(0.2, 1.0, 0.5)).epsilon(1e-8));
  CHECK(r.ratio < 1.0);
  CHECK(r.ratio > 0.999);
}

TEST_CASE("slices of the bidisk and the ball") {
  const Domain bd = Domain::build(DomainSpec::bidisk());
  const Domain ball = Domain::build(DomainSpec::ball2());
  CHECK(minimal_extension(slice_problem(bd, 0.0, {1.0})).ratio == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(minimal_extension(slice_problem(bd, 0.0, {0.5, cplx(0.0, 1.0)})).ratio == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(minimal_extension(slice_problem(ball, 0.0, {1.0})).ratio == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(minimal_extension(slice_problem(ball, 0.0, {0.0, 1.0})).ratio == doctest::Approx(1.0 / 3.0).epsilon(1e-10));
  ExtensionProblem q = slice_problem(ball, 0.0, {1.0});
  q.analytic = false;
  CHECK(minimal_extension(q).ratio == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("the minimal extension beats the trivial one") {
  const Domain d = Domain::build(DomainSpec::disk());
  const ExtensionResult r = minimal_extension(point_problem(d, 0.4, 1.0));
  CHECK(r.norm2 <= oracle::pi);
}

TEST_CASE("infeasible data") {
  const Domain bd = Domain::build(DomainSpec::bidisk());
  std::vector<cplx> high(20, 0.0);
  high.back() = 1.0;
  CHECK_THROWS_AS(minimal_extension(slice_problem(bd, 0.0, high)), NumericalError);
}

TEST_CASE("adjoint formulation") {
  const Domain d = Domain::build(DomainSpec::disk());
  ExtensionProblem p = point_problem(d, 0.3, 1.0);
  p.adjoint = AdjointData{AdjointData::Kind::mobius, 0.3, 1};
  CHECK(adjoint_extension(p).ratio == doctest::Approx(1.0).epsilon(1e-10));

  ExtensionProblem sq = point_problem(d, 0.0, 1.0);
  sq.adjoint = AdjointData{AdjointData::Kind::power, 0.0, 2};
  CHECK_THROWS_AS(adjoint_extension(sq), HypothesisError);

  ExtensionProblem big = point_problem(d, 0.5, 1.0);
  big.adjoint = AdjointData{AdjointData::Kind::power, 0.5, 1};
  CHECK_THROWS_AS(adjoint_extension(big), HypothesisError);

  ExtensionProblem wrong = point_problem(d, 0.1, 1.0);
  wrong.adjoint = AdjointData{AdjointData::Kind::mobius, 0.3, 1};
  CHECK_THROWS_AS(adjoint_extension(wrong), SpecError);
}

TEST_CASE("Gaussian weights in the generalized form") {
  const Domain d = Domain::build(DomainSpec::disk());
  for (double delta : {1.0, 2.5}) {
    ExtensionProblem p = point_problem(d, 0.0, 1.0);
    p.green = solve_green(d, Point(cplx(0.0)));
    p.phi = gaussian(delta);
    p.generalized = GeneralizedData{gaussian(1.0), delta};
    const ExtensionResult r = generalized_bound_check(p);
    CAPTURE(delta);
    CHECK(r.norm2 == doctest::Approx(oracle::gaussian_mass(delta + 1.0)).epsilon(1e-10));
    CHECK(r.ratio <= 1.0);
  }
  ExtensionProblem weak = point_problem(d, 0.0, 1.0);
  weak.green = solve_green(d, Point(cplx(0.0)));
  weak.phi = gaussian(0.5);
  weak.generalized = GeneralizedData{gaussian(1.0), 1.0};
  CHECK_THROWS_AS(generalized_bound_check(weak), HypothesisError);

  ExtensionProblem low = point_problem(d, 0.0, 1.0);
  low.green = solve_green(d, Point(cplx(0.0)));
  low.phi = gaussian(1.0);
  low.generalized = GeneralizedData{{[](const Point& x) { return std::norm(x.z1) - 2.0; }, true}, 1.0};
  CHECK_THROWS_AS(generalized_bound_check(low), HypothesisError);
}

TEST_CASE("duality between the primal norm and functionals on V") {
  const Domain bd = Domain::build(DomainSpec::bidisk());
  const ExtensionProblem p = slice_problem(bd, 0.0, {1.0, 0.5});
  const ExtensionResult r = minimal_extension(p);
  const GramSystem sys = extension_system(p, {});
  std::vector<Functional> fs;
  std::vector<cplx> ps;
  for (int l = 0; l < 3; ++l) {
    fs.push_back(Functional::density(bd, p.variety,
                                     [l](const Point& x) {
                                       const double s = std::norm(x.z2) / 0.81;
                                       return s < 1.0 ? std::exp(-1.0 / (1.0 - s)) * std::pow(x.z2, l)
                                                      : cplx(0.0);
                                     },
                                     1));
    ps.push_back(fs.back().apply(p.datum));
  }
  CHECK(dual_extension_bound(sys, fs, ps) == doctest::Approx(std::sqrt(r.norm2)).epsilon(1e-8));
}

TEST_CASE("Levi form of |z|^2") {
  const ScalarField f{[](const Point& x) { return std::norm(x.z1) + 2.0 * std::norm(x.z2); }, false};
  const Eigen::Matrix2cd L = levi_form(f, Point(cplx(0.1), cplx(0.2)), 2);
  CHECK(std::abs(L(0, 0) - L(1, 1) / 2.0) < 1e-6);
  CHECK(std::abs(L(0, 1)) < 1e-6);
}

TEST_CASE("mode names") {
  for (ExtensionMode m : {ExtensionMode::thm31, ExtensionMode::thm36, ExtensionMode::thm37})
    CHECK(extension_mode_from_string(to_string(m)) == m);
  CHECK_THROWS_AS(extension_mode_from_string("other"), SpecError);
}
