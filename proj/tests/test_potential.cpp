#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "sharpext/potential.hpp"

using namespace sharpext;

namespace {

double square_robin() {
  // Conformal radius of [-1, 1]^2 at 0 is 8 sqrt(pi) / Gamma(1/4)^2.
  const double r = 8.0 * std::sqrt(oracle::pi) / std::pow(std::tgamma(0.25), 2);
  return 2.0 * std::log(r);
}

}  // namespace

TEST_CASE("disk Robin constant against the closed form") {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-0.6, 0.6);
  const Domain d = Domain::build(DomainSpec::disk());
  RobinOptions numeric;
  numeric.use_closed_form = false;
  for (int i = 0; i < 8; ++i) {
    const cplx a(u(rng), u(rng));
    const GreenModel g = solve_green(d, Point(a));
    CHECK(robin_constant(g).c == doctest::Approx(oracle::disk_robin(a)).epsilon(1e-12));
    CHECK(robin_constant(g, numeric).c == doctest::Approx(oracle::disk_robin(a)).epsilon(1e-9));
  }
}

TEST_CASE("annulus Robin constant against the Fourier series") {
  const Domain d = Domain::build(DomainSpec::annulus(0.2, 1.0));
  for (double a : {0.35, 0.5, 0.8}) {
    const GreenModel g = solve_green(d, Point(cplx(a)));
    CAPTURE(a);
    CHECK(robin_constant(g).c == doctest::Approx(oracle::annulus_robin(0.2, 1.0, a)).epsilon(1e-10));
    CHECK(g.accuracy() < 1e-6);
  }
  const GreenModel g = solve_green(d, Point(cplx(0.5)));
  CHECK(robin_constant(g).c == doctest::Approx(-1.385464324627).epsilon(1e-11));
}

TEST_CASE("method of fundamental solutions") {
  GreenOptions mfs;
  mfs.force_mfs = true;
  const Domain disk = Domain::build(DomainSpec::disk());
  const GreenModel gd = solve_green(disk, Point(cplx(0.3)), mfs);
  CHECK(gd.method() == GreenMethod::mfs);
  CHECK(robin_constant(gd).c == doctest::Approx(oracle::disk_robin(0.3)).epsilon(1e-8));

  const Domain sq = Domain::build(DomainSpec::polygon({{-1, -1}, {1, -1}, {1, 1}, {-1, 1}}));
  const GreenModel gs = solve_green(sq, Point(cplx(0.0)));
  CHECK(gs.accuracy() < 1e-3);
  CHECK(robin_constant(gs).c == doctest::Approx(square_robin()).epsilon(1e-6));
}

TEST_CASE("Green functions: sign, boundary values and symmetry") {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> rad(0.25, 0.95), ang(0.0, 2.0 * oracle::pi);
  const Domain d = Domain::build(DomainSpec::annulus(0.2, 1.0));
  GreenOptions fine;
  fine.series_truncation = 512;
  for (int i = 0; i < 6; ++i) {
    const cplx a = std::polar(rad(rng), ang(rng));
    const cplx b = std::polar(rad(rng), ang(rng));
    const GreenModel coarse = solve_green(d, Point(a));
    CHECK(std::abs(coarse(Point(std::polar(1.0, ang(rng))))) <= 1.5 * coarse.accuracy() + 1e-12);
    const GreenModel ga = solve_green(d, Point(a), fine);
    const GreenModel gb = solve_green(d, Point(b), fine);
    CHECK(ga(Point(b)) < 0.0);
    CHECK(ga(Point(b)) == doctest::Approx(gb(Point(a))).epsilon(1e-9));
    CHECK(std::abs(ga(Point(std::polar(1.0, ang(rng))))) < 1e-9);
    CHECK(std::abs(ga(Point(std::polar(0.2, ang(rng))))) < 1e-9);
    CHECK(laplacian_residual(ga, std::polar(0.6, ang(rng))) < 1e-4);
  }
}

TEST_CASE("serialization round trip") {
  const Domain d = Domain::build(DomainSpec::annulus(0.2, 1.0));
  const GreenModel g = solve_green(d, Point(cplx(0.5)));
  const GreenModel h = GreenModel::from_json(g.to_json());
  for (cplx z : {cplx(0.7, 0.1), cplx(-0.3, 0.4), cplx(0.1, -0.9)}) CHECK(h(Point(z)) == g(Point(z)));
  const GreenModel u = GreenModel::user_supplied({[](const Point& p) { return std::log(std::norm(p.z1)); }, true},
                                                 VarietySpec::at_point(Point(cplx(0.0))), "log|z|^2");
  CHECK_THROWS_AS(GreenModel::from_json(u.to_json()), SpecError);
}

TEST_CASE("defect bounds") {
  const Domain d = Domain::build(DomainSpec::annulus(0.2, 1.0));
  const GreenModel g = solve_green(d, Point(cplx(0.5)));
  const DefectBound db = defect_bound(g, d, g.variety(), 0.05);
  CHECK(db.B_field(Point(cplx(0.5))) == doctest::Approx(robin_constant(g).c).epsilon(1e-8));
  const Domain bd = Domain::build(DomainSpec::bidisk());
  const GreenModel s = slice_green(bd, 0.3);
  const DefectBound ds = defect_bound(s, bd, s.variety(), 0.05);
  CHECK(ds.B_field(Point(cplx(0.3), cplx(0.2))) == doctest::Approx(oracle::disk_robin(0.3)).epsilon(1e-8));
}

TEST_CASE("pluricomplex Green functions") {
  const Domain ball = Domain::build(DomainSpec::ball2());
  const GreenModel gb = solve_green(ball, Point(0.0, 0.0));
  CHECK(gb(Point(cplx(0.3), cplx(0.4))) == doctest::Approx(std::log(0.25)).epsilon(1e-14));
  const Domain bd = Domain::build(DomainSpec::bidisk());
  const GreenModel gp = solve_green(bd, Point(0.0, 0.0));
  CHECK(gp(Point(cplx(0.3), cplx(0.5))) == doctest::Approx(std::log(0.25)).epsilon(1e-14));
}

TEST_CASE("generalized Robin constant") {
  const ScalarField psi{[](const Point& p) { return std::log(std::norm(p.z1)) - 1.0; }, true};
  CHECK(generalized_robin(psi, Point(cplx(0.0))) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("weight family") {
  const Domain d = Domain::build(DomainSpec::disk());
  const GreenModel g = solve_green(d, Point(cplx(0.0)));
  CHECK_THROWS_AS(weight_family({}, g, 0.5, 8.0), SpecError);
  CHECK_THROWS_AS(weight_family({}, g, -1.0, 0.0), SpecError);
  const WeightEvaluator w = weight_family({}, g, -2.0, 8.0);
  CHECK(w(Point(cplx(0.1))) == 0.0);
  CHECK(w(Point(cplx(0.5))) == doctest::Approx(8.0 * (std::log(0.25) + 2.0)));
}
