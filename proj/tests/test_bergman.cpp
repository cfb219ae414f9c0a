#include <cstdlib>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "sharpext/bergman.hpp"

using namespace sharpext;

TEST_CASE("analytic and quadrature Gram matrices agree") {
  struct Case {
    DomainSpec spec;
    Basis basis;
  };
  const Case cases[] = {
      {DomainSpec::disk(), Basis::monomials(20)},
      {DomainSpec::annulus(0.2, 1.0), Basis::laurent(12, 0.2, 1.0)},
      {DomainSpec::bidisk(), Basis::total_degree(8)},
      {DomainSpec::ball2(), Basis::total_degree(8)},
  };
  for (const Case& c : cases) {
    const Domain d = Domain::build(c.spec);
    CAPTURE(to_string(d.kind()));
    const auto a = analytic_gram(d, c.basis);
    REQUIRE(a.has_value());
    const GramSystem q = d.is_fibered() ? fibered_gram(d, quadrature(d.base(), 64), c.basis)
                                        : gram(quadrature(d, 128), c.basis);
    const double err = (a->matrix() - q.matrix()).norm() / a->matrix().norm();
    CHECK(err < 1e-10);
  }
}

TEST_CASE("Gram matrices are Hermitian positive semidefinite") {
  const Domain d = Domain::build(DomainSpec::polygon({{0, 0}, {2, 0}, {2, 1}, {1, 2}, {0, 1}}));
  const Basis b = Basis::monomials(12, d.interior_point(), d.max_radius_from(d.interior_point()));
  const GramSystem g = gram(quadrature(d, 64), b);
  CHECK(g.hermitian_error() < 1e-14);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(g.matrix());
  CHECK(es.eigenvalues().minCoeff() > -1e-12 * es.eigenvalues().maxCoeff());
}

TEST_CASE("disk kernel against the closed form") {
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> u(-0.35, 0.35);
  const Domain d = Domain::build(DomainSpec::disk());
  const GramSystem g = *analytic_gram(d, Basis::monomials(40));
  for (int i = 0; i < 10; ++i) {
    const cplx a(u(rng), u(rng));
    CHECK(kernel_at(g, d, Point(a)) == doctest::Approx(oracle::disk_kernel(a)).epsilon(1e-10));
    CHECK(dual_norm(g, Functional::point_mass(Point(a))) ==
          doctest::Approx(std::sqrt(oracle::disk_kernel(a))).epsilon(1e-10));
  }
  CHECK_THROWS_AS(kernel_at(g, d, Point(cplx(1.5))), SpecError);
}

TEST_CASE("annulus kernel against the Laurent moment series") {
  const Domain d = Domain::build(DomainSpec::annulus(0.2, 1.0));
  const GramSystem a = *analytic_gram(d, Basis::laurent(50, 0.2, 1.0));
  const GramSystem q = gram(quadrature(d, 128), Basis::laurent(50, 0.2, 1.0));
  for (double r : {0.4, 0.5, 0.6}) {
    CAPTURE(r);
    const double ref = oracle::annulus_kernel(0.2, 1.0, r);
    CHECK(kernel_at(a, d, Point(cplx(r))) == doctest::Approx(ref).epsilon(1e-10));
    CHECK(kernel_at(q, d, Point(cplx(r))) == doctest::Approx(ref).epsilon(1e-8));
  }
}

TEST_CASE("kernels at the origin of the bidisk and the ball") {
  const Domain bd = Domain::build(DomainSpec::bidisk());
  const Domain ball = Domain::build(DomainSpec::ball2());
  const Basis b = Basis::total_degree(6);
  CHECK(kernel_at(*analytic_gram(bd, b), bd, Point(0.0, 0.0)) == doctest::Approx(oracle::bidisk_kernel0()));
  CHECK(kernel_at(*analytic_gram(ball, b), ball, Point(0.0, 0.0)) == doctest::Approx(oracle::ball_kernel0()));
}

TEST_CASE("scaling law and monotonicity under inclusion") {
  const Domain big = Domain::build(DomainSpec::disk());
  const Domain small = Domain::build(DomainSpec::disk(0.0, 0.5));
  const GramSystem gb = gram(quadrature(big, 64), Basis::monomials(20));
  const GramSystem gs = gram(quadrature(small, 64), Basis::monomials(20, 0.0, 0.5));
  const double Kb = kernel_at(gb, big, Point(cplx(0.2)));
  const double Ks = kernel_at(gs, small, Point(cplx(0.1)));
  CHECK(Ks == doctest::Approx(Kb / 0.25).epsilon(1e-10));
  CHECK(kernel_at(gs, small, Point(cplx(0.2))) >= Kb);
}

TEST_CASE("truncation estimate and dropped directions") {
  const Domain d = Domain::build(DomainSpec::disk());
  const GramSystem g = gram(quadrature(d, 64), Basis::monomials(40, 0.5, 0.25));
  CHECK(g.dropped() > 0);
  const KernelEstimate k = kernel_with_estimate(g, d, Point(cplx(0.5)));
  CHECK(k.value == doctest::Approx(oracle::disk_kernel(0.5)).epsilon(1e-9));
  CHECK(k.truncation < 1e-8 * k.value);
}

TEST_CASE("results do not depend on the thread count") {
  const Domain d = Domain::build(DomainSpec::annulus(0.2, 1.0));
  const QuadratureRule r = quadrature(d, 128);
  const Basis b = Basis::laurent(10, 0.2, 1.0);
  setenv("SHARPEXT_THREADS", "1", 1);
  const Eigen::MatrixXcd a = gram(r, b).matrix();
  setenv("SHARPEXT_THREADS", "3", 1);
  const Eigen::MatrixXcd c = gram(r, b).matrix();
  unsetenv("SHARPEXT_THREADS");
  CHECK((a - c).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("disk profiles against closed forms") {
  const Domain d = Domain::build(DomainSpec::disk());
  const GreenModel g = solve_green(d, Point(cplx(0.0)));
  const std::vector<double> tg = t_grid(-6.0, 0.0, 0.5);
  const Profile r = kernel_profile(d, g, Point(cplx(0.0)), tg);
  for (double k : r.shifted()) CHECK(k == doctest::Approx(-std::log(oracle::pi)).epsilon(1e-12));

  double previous = 0.0;
  for (double p : {8.0, 32.0, 128.0}) {
    ProfileOptions po;
    po.mode = ProfileMode::weighted;
    po.p = p;
    const Profile w = dual_profile(d, g, Functional::point_mass(Point(cplx(0.0))), tg, po);
    for (std::size_t i = 0; i < tg.size(); ++i)
      CHECK(w.values[i] == doctest::Approx(std::log(oracle::disk_weighted_kernel0(tg[i], p))).epsilon(1e-10));
    // larger p shrinks the weighted space toward A^2(D_t): the kernel grows
    const double v = w.values[4];
    if (p > 8.0) CHECK(v > previous);
    CHECK(v < r.values[4]);
    previous = v;
  }
}

TEST_CASE("profile exports") {
  Profile p;
  p.t = {-1.0, 0.0};
  p.values = {1.0, 0.5};
  p.quantity = "log K_t";
  const std::string csv = p.to_csv();
  CHECK(csv.rfind("# profile-csv v1\nt,value,k_value,mode,p\n", 0) == 0);
  CHECK(csv.find("-1,1,0,restricted,0") != std::string::npos);
  CHECK(p.to_json()["schema"] == "profile/1");
  CHECK_THROWS_AS(t_grid(-1.0, 1.0, 0.5), SpecError);
  CHECK_THROWS_AS(t_grid(0.0, -1.0, 0.5), SpecError);
  CHECK(t_grid(-8.0, 0.0, 0.25).size() == 33);
}

TEST_CASE("dual norm of the unit density on a bidisk slice") {
  // <xi, h> = sigma_1 * pi * h(0, 0) by the mean value property, so ||xi|| = pi^2 sqrt(K(0)) = pi.
  const Domain bd = Domain::build(DomainSpec::bidisk());
  const GramSystem g = *analytic_gram(bd, Basis::total_degree(8));
  const Functional xi = Functional::density(bd, VarietySpec::slice(0.0), [](const Point&) { return cplx(1.0); }, 1);
  CHECK(dual_norm(g, xi) == doctest::Approx(oracle::pi).epsilon(1e-10));
}
