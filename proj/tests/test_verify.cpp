#include "doctest.h"
#include "oracles.hpp"
#include "sharpext/verify.hpp"

using namespace sharpext;

namespace {

Profile synthetic(std::vector<double> values, int k = 1) {
  Profile p;
  p.values = std::move(values);
  for (std::size_t i = 0; i < p.values.size(); ++i) p.t.push_back(-static_cast<double>(p.values.size() - 1 - i));
  p.k = k;
  p.quantity = "synthetic";
  return p;
}

}  // namespace

TEST_CASE("profile checks") {
  // log K_t = -t - log pi: convex (linear) with constant shift.
  std::vector<double> v;
  for (int i = 8; i >= 0; --i) v.push_back(i - std::log(oracle::pi));
  CHECK(check_profile(synthetic(v)).passed);
  // A concave kink fails convexity.
  std::vector<double> bent = v;
  bent[4] += 0.1;
  CHECK_FALSE(check_profile(synthetic(bent)).passed);
  // A decreasing shifted profile fails monotonicity.
  std::vector<double> steep;
  for (int i = 8; i >= 0; --i) steep.push_back(1.5 * i);
  CHECK_FALSE(check_profile(synthetic(steep)).passed);
  CHECK_THROWS_AS(check_profile(synthetic({1.0, 0.0})), SpecError);
}

TEST_CASE("nu lemma against the closed form") {
  const std::vector<double> g = t_grid(-12.0, 0.0, 0.005);
  for (auto [k, p] : {std::pair{1, 3.0}, std::pair{2, 6.0}}) {
    const CheckReport r = check_nu_lemma(nu_sample([k = k](double s) { return std::exp(k * s); }, g), k, p);
    CAPTURE(k);
    CHECK(r.passed);
    const double est = r.quantities["liminf_estimate"].get<double>();
    CHECK(est == doctest::Approx(oracle::nu_closed_form(-9.0, k, p)).epsilon(1e-4));
    CHECK(std::abs(est - k / (p - k)) < 1e-3);
  }
  const CheckReport zero = check_nu_lemma(nu_sample([](double) { return 0.0; }, g), 1, 3.0);
  CHECK(zero.quantities["liminf_estimate"].get<double>() == 0.0);
  CHECK_THROWS_AS(check_nu_lemma(nu_sample([](double s) { return std::cos(3.0 * s); }, g), 1, 3.0), SpecError);
  CHECK_THROWS_AS(check_nu_lemma(nu_sample([](double s) { return std::exp(s); }, g), 1, 1.0), SpecError);
}

TEST_CASE("nu normalization") {
  const std::vector<double> g = t_grid(-8.0, 0.0, 0.01);
  const CheckReport r = check_nu_lemma(nu_sample([](double s) { return 5.0 * std::exp(s); }, g), 1, 3.0);
  CHECK(r.quantities["normalization_C"].get<double>() == doctest::Approx(5.0));
  CHECK(r.quantities["liminf_estimate"].get<double>() == doctest::Approx(0.5).epsilon(1e-3));
}

TEST_CASE("family convergence on the disk") {
  const Domain d = Domain::build(DomainSpec::disk());
  const GreenModel g = solve_green(d, Point(cplx(0.0)));
  const HoloFunction one = [](const Point&) { return cplx(1.0); };
  const CheckReport r = check_family_convergence(d, g, one, -2.0, {8.0, 32.0, 128.0});
  CHECK(r.passed);
  for (const json& row : r.convergence) {
    const double p = row["p"].get<double>();
    CHECK(row["I"].get<double>() == doctest::Approx(oracle::pi * std::exp(-2.0)).epsilon(1e-10));
    const double II = oracle::pi * std::exp(-2.0) * (1.0 - std::exp(-2.0 * (p - 1.0))) / (p - 1.0);
    CHECK(row["II"].get<double>() == doctest::Approx(II).epsilon(1e-8));
  }
  const CheckReport top = check_family_convergence(d, g, one, 0.0, {8.0, 128.0});
  for (const json& row : top.convergence) CHECK(row["norm2"].get<double>() == doctest::Approx(oracle::pi).epsilon(1e-12));
  CHECK_THROWS_AS(check_family_convergence(d, g, one, -2.0, {0.5}), SpecError);
}

TEST_CASE("tube limits") {
  const Domain d = Domain::build(DomainSpec::disk());
  const GreenModel g = solve_green(d, Point(cplx(0.0)));
  const CheckReport r = check_tube_limit(d, g, g.variety(), {}, {}, t_grid(-8.0, 0.0, 0.5), 1);
  CHECK(r.passed);
  CHECK(r.quantities["max_deviation"].get<double>() < 1e-10);
  CHECK_THROWS_AS(check_tube_limit(d, g, g.variety(), {}, {}, t_grid(-3.0, 0.0, 0.5), 1), SpecError);
  // A non-constant cutoff: chi = |z|^2 vanishes on V, the limit is 0.
  TubeOptions o;
  o.expect_equality = false;
  const ScalarField chi{[](const Point& x) { return 1.0 + std::norm(x.z1); }, true};
  CHECK(check_tube_limit(d, g, g.variety(), {}, chi, t_grid(-8.0, 0.0, 0.5), 1, o).passed);
}

TEST_CASE("domain monotonicity") {
  const Domain big = Domain::build(DomainSpec::disk());
  const Domain small = Domain::build(DomainSpec::disk(0.0, 0.5));
  const CheckReport r = check_domain_monotonicity(small, big, Point(cplx(0.0)));
  CHECK(r.passed);
  CHECK(r.quantities["K_inner"].get<double>() == doctest::Approx(1.0 / (oracle::pi * 0.25)));
  CHECK(check_domain_monotonicity(big, big, Point(cplx(0.0))).quantities["difference"].get<double>() == 0.0);
  CHECK_THROWS_AS(check_domain_monotonicity(big, small, Point(cplx(0.0))), SpecError);
}

TEST_CASE("reports are pure values") {
  const Domain d = Domain::build(DomainSpec::disk());
  const CheckReport a = check_suita(d, Point(cplx(0.3)));
  const CheckReport b = check_suita(d, Point(cplx(0.3)));
  CHECK(a.to_json().dump() == b.to_json().dump());
  CHECK(a.summary_line().rfind("PASS suita-bound", 0) == 0);
}
