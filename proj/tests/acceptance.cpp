// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "sharpext/io.hpp"
#include "sharpext/verify.hpp"

using namespace sharpext;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances.
constexpr double kAnalyticEquality = 1e-6;
constexpr double kQuadratureEquality = 1e-3;
constexpr double kMarginStability = 0.10;
constexpr double kConvexity = 1e-3;
constexpr double kMonotonicity = 1e-3;
constexpr double kProfileOracle = 1e-6;
constexpr double kAsymptoticT8 = 0.02;
constexpr double kSharpness = 1e-6;
constexpr double kBallRatio = 1e-3;
constexpr double kDuality = 1e-3;
constexpr double kTubeExact = 1e-3;
constexpr double kTubeT6 = 0.05;
constexpr double kNuClosedForm = 1e-3;
constexpr double kFamilyExcess = 0.02;
constexpr double kGaussianOracle = 1e-4;

std::string cases(const std::string& name) { return (fs::path(SHARPEXT_CASES_DIR) / name).string(); }

struct Outcome {
  bool ok = true;
  std::ostringstream detail;

  void require(bool condition, const std::string& what) {
    if (!condition) {
      ok = false;
      detail << " [failed: " << what << "]";
    }
  }
};

double q(const CheckReport& r, const char* key) { return r.quantities.at(key).get<double>(); }

struct Criterion {
  int number;
  std::string name;
  double budget_seconds;
  std::function<void(Outcome&)> run;
};

void suita_disk(Outcome& o) {
  const DomainCase dc = load_domain_case(cases("disk.json"));
  const Point a = dc.pole.value_or(Point(cplx(0.0)));
  SuitaOptions s;
  s.equality_tolerance = kAnalyticEquality;
  const CheckReport an = check_suita(dc.domain, a, s);
  s.analytic = false;
  s.resolution = 128;
  s.degree = 25;
  s.equality_tolerance = kQuadratureEquality;
  const CheckReport qu = check_suita(dc.domain, a, s);
  o.detail << "analytic ratio=" << q(an, "ratio") << " quadrature ratio=" << q(qu, "ratio");
  o.require(an.passed && std::abs(q(an, "ratio") - 1.0) <= kAnalyticEquality, "analytic equality");
  o.require(qu.passed && std::abs(q(qu, "ratio") - 1.0) <= kQuadratureEquality, "quadrature equality");
  o.require(std::abs(q(an, "K") - oracle::disk_kernel(a.z1)) <= 1e-12, "kernel oracle");
  o.require(std::abs(q(an, "robin_c") - oracle::disk_robin(a.z1)) <= 1e-12, "Robin oracle");
}

void suita_annulus(Outcome& o) {
  const DomainCase dc = load_domain_case(cases("annulus.json"));
  const Point a = dc.pole.value();
  SuitaOptions s;
  s.analytic = false;
  s.series_truncation = 64;
  s.resolution = 128;
  const CheckReport coarse = check_suita(dc.domain, a, s);
  s.series_truncation = 128;
  s.resolution = 256;
  const CheckReport fine = check_suita(dc.domain, a, s);
  s.analytic = true;
  const CheckReport an = check_suita(dc.domain, a, s);
  const double m1 = q(coarse, "margin"), m2 = q(fine, "margin"), ma = q(an, "margin");
  const double ri = dc.source.at("r_inner").get<double>(), ro = dc.source.at("r_outer").get<double>();
  const double oracle_ratio = oracle::pi * oracle::annulus_kernel(ri, ro, a.z1) *
                              std::exp(oracle::annulus_robin(ri, ro, a.z1.real()));
  o.detail << "margin=" << m1 << " doubled=" << m2 << " analytic=" << ma << " oracle=" << oracle_ratio - 1.0;
  o.require(m1 > 0.0 && m2 > 0.0 && ma > 0.0, "positive margin");
  o.require(coarse.passed && fine.passed && an.passed, "ratio >= 1");
  o.require(std::abs(m2 - m1) <= kMarginStability * m1, "stable under doubling");
  o.require(std::abs(ma - m1) <= kMarginStability * m1, "analytic path agrees");
  o.require(std::abs(oracle_ratio - 1.0 - m2) <= kMarginStability * m2, "series oracle");
}

void convexity(Outcome& o) {
  const std::vector<double> tg = t_grid(-8.0, 0.0, 0.25);
  const Tolerances tol{kConvexity, kMonotonicity};
  const DomainCase disk = load_domain_case(cases("disk.json"));
  const DomainCase ann = load_domain_case(cases("annulus.json"));
  const DomainCase bd = load_domain_case(cases("bidisk.json"));
  const Point o0 = disk.pole.value_or(Point(cplx(0.0)));
  const Point pa = ann.pole.value();
  const GreenModel gd = solve_green(disk.domain, o0);
  const GreenModel ga = solve_green(ann.domain, pa);
  const GreenModel gs = slice_green(bd.domain, 0.0);

  ProfileOptions po;
  po.p = 128.0;
  ProfileOptions pw = po;
  pw.mode = ProfileMode::weighted;
  ProfileOptions pa_r = po;
  pa_r.resolution = 128;
  ProfileOptions pa_w = pw;
  pa_w.resolution = 128;
  const Functional bump = Functional::density(
      bd.domain, gs.variety(),
      [](const Point& x) {
        const double s = std::norm(x.z2) / 0.81;
        return s < 1.0 ? cplx(std::exp(-1.0 / (1.0 - s))) : cplx(0.0);
      },
      1);

  const std::vector<std::pair<std::string, Profile>> profiles{
      {"disk K_t", kernel_profile(disk.domain, gd, o0, tg, po)},
      {"disk xi", dual_profile(disk.domain, gd, Functional::point_mass(o0), tg, pw)},
      {"annulus K_t", kernel_profile(ann.domain, ga, pa, tg, pa_r)},
      {"annulus xi", dual_profile(ann.domain, ga, Functional::point_mass(pa), tg, pa_w)},
      {"bidisk K_t", kernel_profile(bd.domain, gs, Point(0.0, 0.0), tg, po)},
      {"bidisk-slice xi", dual_profile(bd.domain, gs, bump, tg, pw)},
  };
  double worst2 = 1e300, worst1 = 1e300;
  for (const auto& [name, p] : profiles) {
    const CheckReport r = check_profile(p, tol);
    worst2 = std::min(worst2, q(r, "min_second_difference"));
    worst1 = std::min(worst1, q(r, "min_shifted_first_difference"));
    o.require(r.passed, name);
    o.require(p.truncated.empty() && p.t.size() == tg.size(), name + " covers the grid");
  }
  // Disk closed forms: K_t(0) = e^{-t}/pi and the weighted kernel at 0.
  double err = 0.0;
  for (std::size_t i = 0; i < tg.size(); ++i) {
    err = std::max(err, std::abs(profiles[0].second.values[i] + tg[i] + std::log(oracle::pi)));
    err = std::max(err, std::abs(profiles[1].second.values[i] - std::log(oracle::disk_weighted_kernel0(tg[i], 128.0))));
  }
  o.detail << "min second difference=" << worst2 << " min shifted first difference=" << worst1
           << " disk oracle error=" << err;
  o.require(err <= kProfileOracle, "disk profile oracle");
}

void asymptotics(Outcome& o) {
  const DomainCase disk = load_domain_case(cases("disk.json"));
  const DomainCase ann = load_domain_case(cases("annulus.json"));
  const Point o0 = disk.pole.value_or(Point(cplx(0.0)));
  ProfileOptions po;
  const CheckReport d = check_asymptotic(disk.domain, solve_green(disk.domain, o0), o0, -8.0, kAsymptoticT8, po);
  po.resolution = 128;
  const CheckReport a =
      check_asymptotic(ann.domain, solve_green(ann.domain, *ann.pole), *ann.pole, -8.0, kAsymptoticT8, po);
  o.detail << "disk deviation=" << q(d, "deviation") << " annulus deviation=" << q(a, "deviation");
  o.require(d.passed, "disk");
  o.require(q(d, "deviation") <= 1e-10, "disk exact");
  o.require(a.passed, "annulus");
}

void sharpness(Outcome& o) {
  const Tolerances tol;
  for (const char* name : {"disk_point.json", "bidisk_slice.json"}) {
    const ProblemCase pc = load_problem(cases(name));
    const CheckReport r = check_extension(pc.problem, 1.0, kSharpness, tol);
    o.detail << name << " ratio=" << q(r, "ratio") << " ";
    o.require(r.passed && std::abs(q(r, "ratio") - 1.0) <= kSharpness, name);
  }
  const ProblemCase ball = load_problem(cases("ball_slice.json"));
  const CheckReport r = check_extension(ball.problem, 0.5, kBallRatio, tol);
  o.detail << "ball_slice.json ratio=" << q(r, "ratio");
  o.require(r.passed && std::abs(q(r, "ratio") - 0.5) <= kBallRatio && q(r, "ratio") <= 1.0, "ball slice");
}

void duality(Outcome& o) {
  const ProblemCase disk = load_problem(cases("disk_point.json"));
  std::vector<Functional> fd{Functional::point_mass(disk.problem.variety.point)};
  const CheckReport r1 = check_duality(disk.problem, fd, kDuality);

  ProblemCase bd = load_problem(cases("bidisk_slice.json"));
  bd.problem.datum = {{1.0, 0.5, cplx(0.0, 0.25)}};
  std::vector<Functional> fs;
  for (int l = 0; l < 4; ++l)
    fs.push_back(Functional::density(bd.problem.domain, bd.problem.variety,
                                     [l](const Point& x) {
                                       const double s = std::norm(x.z2) / 0.81;
                                       return s < 1.0 ? std::exp(-1.0 / (1.0 - s)) * std::pow(x.z2, l) : cplx(0.0);
                                     },
                                     1));
  const CheckReport r2 = check_duality(bd.problem, fs, kDuality);
  // A single functional only gives a lower bound.
  const CheckReport r3 = check_duality(bd.problem, {fs[0]}, kDuality);
  o.detail << "disk gap=" << q(r1, "relative_gap") << " bidisk gap=" << q(r2, "relative_gap")
           << " single-functional dual/primal=" << q(r3, "dual") / q(r3, "primal");
  o.require(r1.passed, "disk point");
  o.require(r2.passed, "bidisk slice");
  o.require(q(r3, "dual") <= q(r3, "primal") * (1.0 + 1e-9), "weak duality");
}

void tube_limits(Outcome& o) {
  const std::vector<double> tg = t_grid(-8.0, 0.0, 0.25);
  const DomainCase disk = load_domain_case(cases("disk.json"));
  const DomainCase bd = load_domain_case(cases("bidisk.json"));
  const DomainCase ann = load_domain_case(cases("annulus.json"));
  const Point o0 = disk.pole.value_or(Point(cplx(0.0)));
  const GreenModel gd = solve_green(disk.domain, o0);
  const GreenModel gs = slice_green(bd.domain, 0.0);
  TubeOptions exact;
  exact.tolerance = kTubeExact;
  const CheckReport rd = check_tube_limit(disk.domain, gd, gd.variety(), {}, {}, tg, 1, exact);
  const CheckReport rb = check_tube_limit(bd.domain, gs, gs.variety(), {}, {}, tg, 1, exact);
  TubeOptions form = exact;
  form.form = AdjointData{AdjointData::Kind::mobius, 0.3, 1};
  const GreenModel gm = solve_green(disk.domain, Point(cplx(0.3)));
  const CheckReport rf = check_tube_limit(disk.domain, gm, gm.variety(), {}, {}, tg, 1, form);

  const GreenModel ga = solve_green(ann.domain, *ann.pole);
  const DefectBound db = defect_bound(ga, ann.domain, ga.variety(), 0.05);
  TubeOptions loose;
  loose.tolerance = kTubeT6;
  const CheckReport ra = check_tube_limit(ann.domain, ga, ga.variety(), db.B_field, {}, tg, 1, loose);
  const double dev6 = q(ra, "deviation_at_t_check"), dev6c = q(ra, "deviation_at_t_check_coarse");
  const bool deepening = ra.quantities.at("deviation_decreasing_in_depth").get<bool>();
  const std::string trend = ra.quantities.at("refinement_trend").get<std::string>();
  o.detail << "disk max dev=" << q(rd, "max_deviation") << " bidisk max dev=" << q(rb, "max_deviation")
           << " form max dev=" << q(rf, "max_deviation") << " annulus dev(t=-6)=" << dev6 << " (coarse " << dev6c
           << ", trend " << trend << ", decreasing in depth " << (deepening ? "yes" : "no") << ")";
  o.require(rd.passed && q(rd, "max_deviation") <= kTubeExact, "disk exact at every t");
  o.require(rb.passed && q(rb, "max_deviation") <= kTubeExact, "bidisk exact at every t");
  o.require(rf.passed && q(rf, "max_deviation") <= kTubeExact, "form version exact at every t");
  o.require(ra.passed && dev6 <= kTubeT6, "annulus within 5% at t=-6");
  o.require(deepening, "annulus deviation decreases toward the limit");
  o.require(trend != "increasing" && dev6 <= dev6c + 1e-4, "annulus coherent under refinement");
}

void nu_lemma(Outcome& o) {
  const json j = read_json_file(cases("nu_lemma.json"));
  const std::vector<double> g = t_grid(j.at("t_min").get<double>(), 0.0, j.at("step").get<double>());
  for (const json& s : j.at("samples")) {
    const int k = s.at("k").get<int>();
    const double p = s.at("p").get<double>();
    NuOptions no;
    no.tolerance = kNuClosedForm;
    const CheckReport r = check_nu_lemma(nu_sample([k](double x) { return std::exp(k * x); }, g), k, p, no);
    const double est = q(r, "liminf_estimate");
    const double closed = k / (p - k);
    o.detail << "(k,p)=(" << k << "," << p << ") estimate=" << est << " closed form=" << closed << " ";
    o.require(std::abs(est - closed) <= kNuClosedForm, "closed form");
    o.require(est <= (k + 1.0) / (p - k), "bound");
    o.require(std::abs(est - oracle::nu_closed_form(g.front(), k, p)) <= kNuClosedForm, "series oracle");
    o.require(r.passed, "report");
  }
}

void family(Outcome& o) {
  const json j = read_json_file(cases("family_convergence.json"));
  const DomainCase dc = load_domain_case(cases(j.at("domain").get<std::string>()));
  const Point a = dc.pole.value_or(Point(cplx(0.0)));
  const GreenModel g = solve_green(dc.domain, a);
  FamilyOptions fo;
  fo.tolerance = kFamilyExcess;
  const double t = j.at("t").get<double>();
  const CheckReport r = check_family_convergence(
      dc.domain, g, [](const Point&) { return cplx(1.0); }, t, j.at("p").get<std::vector<double>>(), fo);
  o.detail << "II/I=" << q(r, "II_over_I") << " II=" << q(r, "II") << " bound=" << q(r, "II_bound");
  o.require(q(r, "II_over_I") <= kFamilyExcess, "II <= 2% of I");
  o.require(r.quantities.at("monotone_in_p").get<bool>(), "monotone in p");
  o.require(std::abs(q(r, "I") - oracle::pi * std::exp(t)) <= 1e-10, "I oracle");
  o.require(r.passed, "report");
}

void gaussian(Outcome& o) {
  for (const char* name : {"gaussian_delta_1.json", "gaussian_delta_2.5.json"}) {
    const ProblemCase pc = load_problem(cases(name));
    const CheckReport r = check_extension(pc.problem);
    const double delta = pc.problem.generalized->delta;
    const double ref = oracle::gaussian_mass(delta + 1.0);
    const double rel = std::abs(q(r, "norm2") - ref) / ref;
    o.detail << name << " ratio=" << q(r, "ratio") << " 1/K_w(0) rel err=" << rel << " ";
    o.require(r.passed && q(r, "ratio") <= 1.0, std::string(name) + " ratio");
    o.require(rel <= kGaussianOracle, std::string(name) + " oracle");
  }
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

void determinism(Outcome& o) {
  const fs::path root = fs::temp_directory_path() / "sharpext_acceptance";
  fs::remove_all(root);
  const fs::path a = root / "a", b = root / "b";
  const SuiteResult ra = run_suite();
  write_bundle(ra, a.string());
  write_bundle(run_suite(), b.string());
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(a)) {
    ++files;
    const fs::path other = b / e.path().filename();
    o.require(fs::exists(other) && slurp(e.path()) == slurp(other), e.path().filename().string());
  }
  std::size_t files_b = std::distance(fs::directory_iterator(b), fs::directory_iterator{});
  o.require(files == files_b && files > 0, "same file set");
  o.detail << files << " files compared, suite " << (ra.passed() ? "passed" : "failed") << " ("
           << ra.reports.size() << " checks)";
  fs::remove_all(root);
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "suita-equality-disk", 5.0, suita_disk},
      {2, "suita-strict-annulus", 30.0, suita_annulus},
      {3, "profile-convexity-monotonicity", 120.0, convexity},
      {4, "sublevel-asymptotics", 60.0, asymptotics},
      {5, "extension-sharpness", 60.0, sharpness},
      {6, "extension-duality", 60.0, duality},
      {7, "tube-limits", 120.0, tube_limits},
      {8, "nu-lemma", 1.0, nu_lemma},
      {9, "family-convergence", 30.0, family},
      {10, "generalized-gaussian", 30.0, gaussian},
      {11, "suite-determinism", 0.0, determinism},
  };
  int failed = 0;
  for (const Criterion& c : criteria) {
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    try {
      c.run(o);
    } catch (const std::exception& e) {
      o.ok = false;
      o.detail << " [exception: " << e.what() << "]";
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.budget_seconds > 0.0 && secs > c.budget_seconds) {
      o.ok = false;
      o.detail << " [over runtime budget " << c.budget_seconds << " s]";
    }
    failed += o.ok ? 0 : 1;
    std::printf("%s %2d %s (%.2f s) %s\n", o.ok ? "PASS" : "FAIL", c.number, c.name.c_str(), secs,
                o.detail.str().c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
