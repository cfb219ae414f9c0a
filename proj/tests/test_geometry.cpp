#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "sharpext/geometry.hpp"

using namespace sharpext;

TEST_CASE("domain validation") {
  CHECK_THROWS_AS(Domain::build(DomainSpec::disk(0.0, -1.0)), SpecError);
  CHECK_THROWS_AS(Domain::build(DomainSpec::annulus(0.5, 0.2)), SpecError);
  CHECK_THROWS_AS(Domain::build(DomainSpec::polygon({0.0, 1.0})), SpecError);
  CHECK_THROWS_AS(Domain::build(DomainSpec::ellipse(-1.0, 1.0)), SpecError);
  CHECK_THROWS_AS(domain_kind_from_string("torus"), SpecError);
}

TEST_CASE("polygon orientation is normalized") {
  const Domain cw = Domain::build(DomainSpec::polygon({{-1, -1}, {-1, 1}, {1, 1}, {1, -1}}));
  CHECK(cw.contains(Point(cplx(0.2, 0.3))));
  CHECK_FALSE(cw.contains(Point(cplx(1.2, 0.0))));
  CHECK(quadrature(cw, 32).volume() == doctest::Approx(4.0).epsilon(1e-10));
}

TEST_CASE("quadrature volumes match closed forms") {
  struct Case {
    DomainSpec spec;
    double volume;
  };
  const Case cases[] = {
      {DomainSpec::disk(cplx(0.3, -0.2), 0.7), oracle::pi * 0.49},
      {DomainSpec::annulus(0.2, 1.0), oracle::pi * 0.96},
      {DomainSpec::ellipse(2.0, 0.5), oracle::pi},
      {DomainSpec::polygon({{0, 0}, {2, 0}, {2, 1}, {1, 2}, {0, 1}}), 3.0},
      {DomainSpec::ball2(), oracle::pi * oracle::pi / 2.0},
      {DomainSpec::bidisk(), oracle::pi * oracle::pi},
  };
  for (const Case& c : cases) {
    const Domain d = Domain::build(c.spec);
    CAPTURE(to_string(d.kind()));
    CHECK(quadrature(d, 64).volume() == doctest::Approx(c.volume).epsilon(1e-9));
  }
}

TEST_CASE("disk moments are exact") {
  const Domain d = Domain::build(DomainSpec::disk());
  const QuadratureRule r = quadrature(d, 64);
  for (int j = 0; j <= 10; ++j) {
    const double m = integrate(r, [j](const Point& p) { return std::pow(std::norm(p.z1), j); });
    CHECK(m == doctest::Approx(oracle::pi / (j + 1)).epsilon(1e-12));
  }
  const cplx off = integrate(r, [](const Point& p) { return p.z1 * p.z1 * std::conj(p.z1); });
  CHECK(std::abs(off) < 1e-14);
}

TEST_CASE("sublevel rules of log|z|^2 have volume pi e^t") {
  const Domain d = Domain::build(DomainSpec::disk());
  const ScalarField G{[](const Point& p) { return std::log(std::norm(p.z1)); }, true};
  for (double t : {-8.0, -3.0, -0.5, 0.0}) {
    SublevelOptions so;
    so.center = 0.0;
    const SublevelRule sr = sublevel_rule(d, G, t, so);
    CHECK(sr.rule.volume() == doctest::Approx(oracle::pi * std::exp(t)).epsilon(1e-10));
  }
}

TEST_CASE("split rules cover the domain") {
  const Domain d = Domain::build(DomainSpec::annulus(0.2, 1.0));
  const ScalarField G{[](const Point& p) { return std::log(std::norm(p.z1 - 0.5)); }, false};
  SublevelOptions so;
  so.center = 0.5;
  so.mode = LevelMode::split;
  so.grading_rate = 32.0;
  const SublevelRule sr = sublevel_rule(d, G, -3.0, so);
  CHECK(sr.rule.volume() == doctest::Approx(oracle::pi * 0.96).epsilon(1e-9));
}

TEST_CASE("pairwise sums are order independent of chunking") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(10007);
  for (double& x : v) x = u(rng);
  const double a = pairwise_sum(std::span<const double>(v));
  const double b = pairwise_sum(std::span<const double>(v));
  CHECK(a == b);
}

TEST_CASE("variety rules") {
  const Domain bd = Domain::build(DomainSpec::bidisk());
  const QuadratureRule r = variety_rule(bd, VarietySpec::slice(0.3), 64);
  CHECK(r.volume() == doctest::Approx(oracle::pi).epsilon(1e-12));
  const Domain ball = Domain::build(DomainSpec::ball2());
  CHECK(variety_rule(ball, VarietySpec::slice(0.6), 64).volume() == doctest::Approx(oracle::pi * 0.64).epsilon(1e-12));
  const Domain disk = Domain::build(DomainSpec::disk());
  CHECK_THROWS_AS(variety_rule(disk, VarietySpec::at_point(Point(cplx(2.0))), 16), SpecError);
  CHECK_THROWS_AS(variety_rule(disk, VarietySpec::slice(0.0), 16), SpecError);
}

TEST_CASE("random points: containment agrees with the level description") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(-1.2, 1.2);
  const Domain ann = Domain::build(DomainSpec::annulus(0.2, 1.0));
  for (int i = 0; i < 500; ++i) {
    const cplx z(u(rng), u(rng));
    const double r = std::abs(z);
    if (std::abs(r - 0.2) < 1e-9 || std::abs(r - 1.0) < 1e-9) continue;
    CHECK(ann.contains(Point(z)) == (r > 0.2 && r < 1.0));
  }
}
