#include "sharpext/verify.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <sstream>

#include "sharpext/io.hpp"
#include "sharpext/parallel.hpp"

namespace sharpext {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

json cjson(cplx z) { return json::array({z.real(), z.imag()}); }

json point_json(const Point& p, int dimension) {
  if (dimension == 1) return cjson(p.z1);
  return json::array({cjson(p.z1), cjson(p.z2)});
}

json domain_json(const Domain& d) {
  const DomainSpec& s = d.spec();
  json j = {{"kind", to_string(s.kind)}};
  switch (s.kind) {
    case DomainKind::disk:
      j["center"] = cjson(s.center);
      j["radius"] = s.radius;
      break;
    case DomainKind::annulus:
      j["r_inner"] = s.r_inner;
      j["r_outer"] = s.r_outer;
      break;
    case DomainKind::polygon: {
      json v = json::array();
      for (cplx z : s.vertices) v.push_back(cjson(z));
      j["vertices"] = v;
      break;
    }
    case DomainKind::implicit:
      j["shape"] = s.shape.empty() ? "user" : s.shape;
      j["params"] = s.shape_params;
      break;
    default:
      break;
  }
  return j;
}

json variety_json(const VarietySpec& v) {
  if (v.kind == VarietyKind::point) return {{"kind", "point"}, {"point", point_json(v.point, v.dimension)}};
  return {{"kind", "slice"}, {"c", cjson(v.point.z1)}};
}

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

std::string label_of(const Domain& d) {
  const DomainSpec& s = d.spec();
  switch (s.kind) {
    case DomainKind::disk:
      return "disk(" + fmt(s.center.real()) + (s.center.imag() != 0.0 ? "+" + fmt(s.center.imag()) + "i" : "") +
             "," + fmt(s.radius) + ")";
    case DomainKind::annulus:
      return "annulus(" + fmt(s.r_inner) + "," + fmt(s.r_outer) + ")";
    default:
      return to_string(s.kind);
  }
}

std::string label_of(const Point& p, int dimension) {
  auto c = [](cplx z) { return z.imag() == 0.0 ? fmt(z.real()) : fmt(z.real()) + (z.imag() < 0 ? "" : "+") + fmt(z.imag()) + "i"; };
  return dimension == 1 ? c(p.z1) : "(" + c(p.z1) + "," + c(p.z2) + ")";
}

std::string label_of(const VarietySpec& v) {
  return v.kind == VarietyKind::point ? "V={" + label_of(v.point, v.dimension) + "}"
                                      : "V={z1=" + label_of(Point(v.point.z1), 1) + "}";
}

// Least-squares fit y = alpha + beta x; returns alpha.
double affine_intercept(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  if (x.size() < 2) return y.empty() ? 0.0 : y.front();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double den = n * sxx - sx * sx;
  if (std::abs(den) < 1e-300) return sy / n;
  const double beta = (n * sxy - sx * sy) / den;
  return (sy - beta * sx) / n;
}

std::size_t window_size(std::size_t n, double fraction) {
  return std::max<std::size_t>(2, std::min(n, static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n)))));
}

Basis default_basis(const Domain& domain, int degree, int laurent_J) {
  const DomainSpec& s = domain.spec();
  switch (s.kind) {
    case DomainKind::disk:
      return Basis::monomials(degree, s.center, s.radius);
    case DomainKind::annulus:
      return Basis::laurent(laurent_J, s.r_inner, s.r_outer);
    default: {
      const cplx c = domain.interior_point();
      return Basis::monomials(degree, c, domain.max_radius_from(c));
    }
  }
}

GramSystem default_system(const Domain& domain, int degree, int laurent_J, int resolution, bool analytic,
                          bool* used_analytic) {
  const Basis basis = default_basis(domain, degree, laurent_J);
  if (analytic) {
    if (auto g = analytic_gram(domain, basis)) {
      *used_analytic = true;
      return *g;
    }
  }
  *used_analytic = false;
  return gram(quadrature(domain, resolution), basis);
}

void require_planar(const Domain& d, const char* what) {
  if (d.dimension() != 1) throw SpecError(std::string(what) + ": needs a planar domain");
}

}  // namespace

json CheckReport::to_json() const {
  return {{"id", id},         {"statement", statement},   {"instance", instance},
          {"passed", passed}, {"quantities", quantities}, {"tolerance", tolerance},
          {"convergence", convergence}, {"notes", notes}};
}

std::string CheckReport::summary_line() const {
  std::string label = instance.contains("label") ? instance["label"].get<std::string>() : instance.dump();
  return std::string(passed ? "PASS " : "FAIL ") + id + " " + label;
}

CheckReport check_suita(const Domain& domain, Point pole, const SuitaOptions& o) {
  require_planar(domain, "check_suita");
  CheckReport r;
  r.id = "suita-bound";
  r.statement = "pi K(a) exp(c) >= 1 with c the Robin constant at a";
  r.instance = {{"label", label_of(domain) + " a=" + label_of(pole, 1) + (o.analytic ? " analytic" : " quadrature")},
                {"domain", domain_json(domain)},
                {"pole", cjson(pole.z1)},
                {"analytic", o.analytic},
                {"degree", o.degree},
                {"laurent_J", o.laurent_J},
                {"resolution", o.resolution},
                {"series_truncation", o.series_truncation}};

  GreenModel model;
  RobinReport robin;
  try {
    GreenOptions go;
    go.series_truncation = o.series_truncation;
    model = solve_green(domain, pole, go);
    RobinOptions ro;
    ro.use_closed_form = o.analytic;
    robin = robin_constant(model, ro);
  } catch (const Error& e) {
    throw NumericalError(std::string("check_suita: Green/Robin stage failed: ") + e.what(), inf);
  }
  bool analytic = false;
  const GramSystem sys = default_system(domain, o.degree, o.laurent_J, o.resolution, o.analytic, &analytic);
  const KernelEstimate K = kernel_with_estimate(sys, domain, pole);
  const double ratio = pi * K.value * std::exp(robin.c);

  r.quantities = {{"K", K.value},
                  {"robin_c", robin.c},
                  {"ratio", ratio},
                  {"margin", ratio - 1.0},
                  {"kernel_truncation", K.truncation},
                  {"robin_method", robin.method},
                  {"robin_error", robin.error_estimate},
                  {"green_method", to_string(model.method())},
                  {"green_accuracy", model.accuracy()},
                  {"gram_path", analytic ? "analytic" : "quadrature"},
                  {"rank", sys.rank()},
                  {"dropped", sys.dropped()}};
  r.tolerance = {{"lower", o.tolerance}};
  r.passed = ratio >= 1.0 - o.tolerance;
  if (o.equality_tolerance) {
    r.tolerance["equality"] = *o.equality_tolerance;
    r.passed = r.passed && std::abs(ratio - 1.0) <= *o.equality_tolerance;
  }
  for (std::size_t i = 0; i < robin.radii.size(); ++i)
    r.convergence.push_back({{"circle_radius", robin.radii[i]}, {"circle_mean", robin.means[i]}});
  return r;
}

CheckReport check_profile(const Profile& profile, const Tolerances& tol) {
  if (profile.t.size() < 3) throw SpecError("check_profile: need at least 3 grid points");
  CheckReport r;
  r.id = profile.mode == ProfileMode::restricted ? "sublevel-kernel-profile" : "weighted-dual-profile";
  r.statement = "log of the squared norm is convex in t and the shifted profile value + k t is increasing";
  std::string label = profile.quantity;
  if (profile.metadata.contains("label")) label = profile.metadata["label"].get<std::string>();
  r.instance = {{"label", label}, {"quantity", profile.quantity}, {"mode", to_string(profile.mode)},
                {"p", profile.mode == ProfileMode::weighted ? profile.p : 0.0}, {"k", profile.k},
                {"t_min", profile.t.front()}, {"t_max", profile.t.back()}, {"points", profile.t.size()},
                {"metadata", profile.metadata}};

  const std::vector<double>& v = profile.values;
  const std::vector<double> s = profile.shifted();
  double d2 = inf, d1 = inf;
  for (std::size_t i = 1; i + 1 < v.size(); ++i) d2 = std::min(d2, v[i + 1] - 2.0 * v[i] + v[i - 1]);
  for (std::size_t i = 1; i < s.size(); ++i) d1 = std::min(d1, s[i] - s[i - 1]);

  // ||xi||^2_t e^{kt} = exp(shifted) stays bounded as t -> -inf.
  const std::size_t w = window_size(s.size(), 0.25);
  double env = 0.0;
  bool finite = true;
  for (std::size_t i = 0; i < s.size(); ++i) finite = finite && std::isfinite(s[i]) && std::isfinite(v[i]);
  for (std::size_t i = 0; i < w; ++i) env = std::max(env, std::exp(s[i]));
  const double env_ref = std::exp(s.back());

  r.quantities = {{"min_second_difference", d2},
                  {"min_shifted_first_difference", d1},
                  {"shifted_first", s.front()},
                  {"shifted_last", s.back()},
                  {"envelope_max_deep", env},
                  {"envelope_at_t_max", env_ref},
                  {"finite", finite},
                  {"truncated_points", profile.truncated.size()}};
  r.tolerance = {{"convex", tol.convex}, {"mono", tol.mono}};
  r.passed = finite && d2 >= -tol.convex && d1 >= -tol.mono;
  for (std::size_t i = 0; i < v.size(); ++i)
    r.convergence.push_back({{"t", profile.t[i]}, {"value", v[i]}, {"shifted", s[i]}});
  return r;
}

CheckReport check_tube_limit(const Domain& domain, const GreenModel& model, const VarietySpec& variety,
                             const ScalarField& B, const ScalarField& chi, const std::vector<double>& t, int k,
                             const TubeOptions& o) {
  if (t.empty() || t.front() > -6.0) throw SpecError("check_tube_limit: the t grid must reach t <= -6");
  if (!std::is_sorted(t.begin(), t.end())) throw SpecError("check_tube_limit: the t grid must be ascending");
  const ScalarField one{[](const Point&) { return 1.0; }, true};
  const ScalarField& X = chi ? chi : one;

  CheckReport r;
  r.id = o.form ? "tube-limit-form" : "tube-limit";
  r.statement = o.form ? "exp(-kt) times the integral of chi |g'|^2 over D_t tends to sigma_k times the integral of chi over V"
                       : "limsup of exp(-kt) times the integral of chi over D_t is at most sigma_k times the integral "
                         "of chi exp(kB) over V";
  r.instance = {{"label", label_of(domain) + " " + label_of(variety) + (o.form ? " " + o.form->describe() : "")},
                {"domain", domain_json(domain)},
                {"variety", variety_json(variety)},
                {"green", model.description()},
                {"k", k},
                {"resolution", o.resolution},
                {"t_min", t.front()},
                {"t_max", t.back()},
                {"points", t.size()}};

  // Right-hand side.
  const QuadratureRule vr = variety_rule(domain, variety, std::max(64, o.resolution));
  const double target = sigma(k) * integrate(vr, [&](const Point& x) {
    if (o.form) return X(x);
    const double b = B ? B(x) : 0.0;
    return X(x) * std::exp(k * b);
  });
  if (!(target > 0.0)) throw NumericalError("check_tube_limit: nonpositive right-hand side", target);

  auto integrand = [&](const Point& x) {
    double v = X(x);
    if (o.form) v *= std::norm(o.form->derivative(x.z1));
    return v;
  };
  // z1-only integrands over fibered domains: fibers in closed form.
  const bool fibers = domain.is_fibered() && model.z1_only() && X.z1_only;
  auto ratios_at = [&](int resolution) {
    std::vector<double> out(t.size());
    parallel_for(t.size(), [&](std::size_t i) {
      SublevelOptions so;
      so.resolution = resolution;
      so.mode = LevelMode::restrict;
      so.center = variety.point.z1;
      so.center_is_pole = true;
      so.base_only = fibers;
      const SublevelRule sr = sublevel_rule(domain, model.field(), t[i], so);
      if (sr.rule.size() < 16) {
        std::ostringstream os;
        os << "check_tube_limit: quadrature starvation at t = " << t[i] << " (" << sr.rule.size()
           << " nodes); increase the resolution";
        throw NumericalError(os.str(), static_cast<double>(sr.rule.size()));
      }
      const double I = fibers ? integrate(sr.rule,
                                          [&](const Point& x) {
                                            const double R = domain.fiber_radius(x.z1);
                                            return pi * R * R * integrand(x);
                                          })
                              : integrate(sr.rule, integrand);
      out[i] = std::exp(-k * t[i]) * I / target;
    });
    return out;
  };
  const std::vector<double> r1 = ratios_at(o.resolution);
  const std::vector<double> r2 = ratios_at(2 * o.resolution);

  // Deep window: extremum and the affine trend in e^t.
  const std::size_t w = window_size(t.size(), 0.25);
  std::vector<double> xs, ys;
  double extremum = -inf;
  for (std::size_t i = 0; i < w; ++i) {
    xs.push_back(std::exp(t[i]));
    ys.push_back(r2[i]);
    extremum = std::max(extremum, r2[i]);
  }
  const double extrapolated = affine_intercept(xs, ys);
  const double limsup = std::max(extremum, extrapolated);

  std::size_t ic = 0;
  for (std::size_t i = 0; i < t.size(); ++i)
    if (std::abs(t[i] - o.t_check) < std::abs(t[ic] - o.t_check)) ic = i;
  double max_dev = 0.0;
  for (double v : r2) max_dev = std::max(max_dev, std::abs(v - 1.0));
  const double dev1 = std::abs(r1[ic] - 1.0), dev2 = std::abs(r2[ic] - 1.0);
  // Deviation shrinking as t decreases below t_check.
  bool deepening = true;
  for (std::size_t i = 0; i < ic; ++i)
    if (std::abs(r2[i] - 1.0) > std::abs(r2[i + 1] - 1.0) + 1e-12) deepening = false;
  const double noise = 1e-4;
  const bool coherent = dev2 <= dev1 + noise;

  r.quantities = {{"target", target},
                  {"limsup_estimate", limsup},
                  {"deep_extremum", extremum},
                  {"extrapolated_limit", extrapolated},
                  {"t_check", t[ic]},
                  {"ratio_at_t_check", r2[ic]},
                  {"deviation_at_t_check", dev2},
                  {"deviation_at_t_check_coarse", dev1},
                  {"refinement_trend", dev2 < dev1 - noise ? "decreasing" : (coherent ? "flat" : "increasing")},
                  {"deviation_decreasing_in_depth", deepening},
                  {"max_deviation", max_dev},
                  {"expect_equality", o.expect_equality}};
  r.tolerance = {{"limit", o.tolerance}, {"refinement_noise", noise}};
  r.passed = limsup <= 1.0 + o.tolerance && coherent;
  if (o.expect_equality) r.passed = r.passed && dev2 <= o.tolerance && std::abs(extrapolated - 1.0) <= o.tolerance;
  for (std::size_t i = 0; i < t.size(); ++i)
    r.convergence.push_back({{"t", t[i]}, {"ratio_resolution", r1[i]}, {"ratio_double_resolution", r2[i]}});
  return r;
}

NuSample nu_sample(const std::function<double(double)>& nu, const std::vector<double>& t) {
  NuSample s;
  s.t = t;
  for (double x : t) s.nu.push_back(nu(x));
  for (std::size_t i = 1; i < s.nu.size(); ++i)
    if (s.nu[i] < s.nu[i - 1]) s.monotone = false;
  return s;
}

NuSample volume_nu_sample(const Domain& domain, const GreenModel& model, const std::vector<double>& t,
                          int resolution) {
  NuSample s;
  s.t = t;
  s.nu.assign(t.size(), 0.0);
  parallel_for(t.size(), [&](std::size_t i) {
    SublevelOptions so;
    so.resolution = resolution;
    so.center = model.pole().z1;
    s.nu[i] = sublevel_rule(domain, model.field(), t[i], so).rule.volume();
  });
  for (std::size_t i = 1; i < s.nu.size(); ++i)
    if (s.nu[i] < s.nu[i - 1] * (1.0 - 1e-12)) s.monotone = false;
  return s;
}

CheckReport check_nu_lemma(NuSample s, int k, double p, const NuOptions& o) {
  if (!(p > k)) throw SpecError("check_nu_lemma: need p > k");
  if (s.t.size() < 3 || s.t.size() != s.nu.size()) throw SpecError("check_nu_lemma: need matching t and nu samples");
  if (!std::is_sorted(s.t.begin(), s.t.end()) || std::abs(s.t.back()) > 1e-12)
    throw SpecError("check_nu_lemma: the t grid must be ascending and end at 0");
  for (std::size_t i = 1; i < s.nu.size(); ++i)
    if (s.nu[i] < s.nu[i - 1] || !s.monotone) throw SpecError("check_nu_lemma: nu is not nondecreasing");

  double C = 1.0;
  for (std::size_t i = 0; i < s.t.size(); ++i) C = std::max(C, s.nu[i] * std::exp(-k * s.t[i]));
  s.C = C;
  std::vector<double> nu = s.nu;
  for (double& v : nu) v /= C;

  // nu linear on each grid interval; the exponential is integrated exactly.
  const std::size_t n = s.t.size();
  std::vector<double> f(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t j = i; j + 1 < n; ++j) {
      const double h = s.t[j + 1] - s.t[j];
      const double dnu = nu[j + 1] - nu[j];
      if (dnu == 0.0 || h <= 0.0) continue;
      const double a = std::exp(-p * (s.t[j] - s.t[i]));
      const double b = std::exp(-p * (s.t[j + 1] - s.t[i]));
      acc += dnu / h * (a - b) / p;
    }
    f[i] = std::exp(-k * s.t[i]) * acc;
  }

  const std::size_t w = window_size(n, o.window);
  double fmin = inf;
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < w; ++i) {
    fmin = std::min(fmin, f[i]);
    xs.push_back(s.t[i]);
    ys.push_back(f[i]);
  }
  const double bound = (k + 1.0) / (p - k);

  CheckReport r;
  r.id = "nu-lemma";
  r.statement = "liminf of exp(-kt) times the integral from t to 0 of exp(-p(s-t)) dnu(s) is at most (k+1)/(p-k)";
  std::ostringstream lab;
  lab << "k=" << k << " p=" << fmt(p) << " grid=[" << fmt(s.t.front()) << ",0] n=" << n;
  r.instance = {{"label", lab.str()}, {"k", k}, {"p", p}, {"t_min", s.t.front()}, {"points", n}};
  r.quantities = {{"liminf_estimate", fmin},
                  {"window_trend_at_t_min", affine_intercept(xs, ys)},
                  {"bound", bound},
                  {"margin", bound - fmin},
                  {"normalization_C", C}};
  r.tolerance = {{"bound", o.tolerance}, {"window", o.window}};
  r.passed = fmin <= bound + o.tolerance;
  const std::size_t stride = std::max<std::size_t>(1, n / 24);
  for (std::size_t i = 0; i < n; i += stride) r.convergence.push_back({{"t", s.t[i]}, {"f", f[i]}});
  return r;
}

CheckReport check_family_convergence(const Domain& domain, const GreenModel& model, const HoloFunction& h, double t,
                                     const std::vector<double>& p_list, const FamilyOptions& o) {
  if (p_list.empty()) throw SpecError("check_family_convergence: empty p list");
  if (!(t <= 0.0)) throw SpecError("check_family_convergence: t must be <= 0");
  for (double p : p_list)
    if (!(p > o.k)) throw SpecError("check_family_convergence: every p must exceed k");
  std::vector<double> ps = p_list;
  std::sort(ps.begin(), ps.end());

  const ScalarField G = model.field();
  auto base = [&](const Point& x) { return std::norm(h(x)) * std::exp(o.phi ? -o.phi(x) : 0.0); };

  struct Row {
    double I, II, M;
  };
  std::vector<Row> rows(ps.size());
  parallel_for(ps.size(), [&](std::size_t n) {
    SublevelOptions so;
    so.resolution = o.resolution;
    so.mode = LevelMode::split;
    so.center = model.pole().z1;
    so.grading_rate = ps[n];
    const QuadratureRule rule = sublevel_rule(domain, G, t, so).rule;
    std::vector<double> a(rule.size(), 0.0), b(rule.size(), 0.0);
    double M = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i) {
      const Point& x = rule.nodes[i];
      const double g = G(x);
      const double v = base(x);
      M = std::max(M, v);
      if (g < t)
        a[i] = v * rule.weights[i];
      else
        b[i] = v * std::exp(-ps[n] * (g - t)) * rule.weights[i];
    }
    rows[n] = {pairwise_sum(std::span<const double>(a)), pairwise_sum(std::span<const double>(b)), M};
  });

  // vol(D_s) <= C e^{ks} for s <= 0.
  const NuSample vol = volume_nu_sample(domain, model, t_grid(-8.0, 0.0, 0.5), std::min(o.resolution, 64));
  double C = 0.0;
  for (std::size_t i = 0; i < vol.t.size(); ++i) C = std::max(C, vol.nu[i] * std::exp(-o.k * vol.t[i]));

  bool monotone = true;
  for (std::size_t n = 1; n < ps.size(); ++n) {
    const double prev = rows[n - 1].I + rows[n - 1].II, cur = rows[n].I + rows[n].II;
    if (cur > prev * (1.0 + 1e-12)) monotone = false;
  }
  const Row& last = rows.back();
  const double rel = last.I > 0.0 ? last.II / last.I : (last.II > 0.0 ? inf : 0.0);
  const double bound = last.M * C * (1.0 + o.k) / (ps.back() - o.k) * std::exp(o.k * t);

  CheckReport r;
  r.id = "family-convergence";
  r.statement = "the weighted norms decrease in p toward the norm over D_t, the excess II being controlled";
  r.instance = {{"label", label_of(domain) + " t=" + fmt(t) + " p_max=" + fmt(ps.back())},
                {"domain", domain_json(domain)},
                {"green", model.description()},
                {"t", t},
                {"p_list", ps},
                {"k", o.k},
                {"resolution", o.resolution}};
  r.quantities = {{"I", last.I},
                  {"II", last.II},
                  {"II_over_I", rel},
                  {"II_bound", bound},
                  {"M", last.M},
                  {"C", C},
                  {"monotone_in_p", monotone}};
  r.tolerance = {{"II_over_I", o.tolerance}};
  r.passed = monotone && rel <= o.tolerance && last.II <= bound;
  for (std::size_t n = 0; n < ps.size(); ++n)
    r.convergence.push_back({{"p", ps[n]},
                             {"norm2", rows[n].I + rows[n].II},
                             {"I", rows[n].I},
                             {"II", rows[n].II},
                             {"II_bound", rows[n].M * C * (1.0 + o.k) / (ps[n] - o.k) * std::exp(o.k * t)}});
  return r;
}

CheckReport check_domain_monotonicity(const Domain& inner, const Domain& outer, Point a,
                                      const MonotonicityOptions& o) {
  if (inner.dimension() != outer.dimension()) throw SpecError("check_domain_monotonicity: dimension mismatch");
  require_planar(inner, "check_domain_monotonicity");
  if (!inner.contains(a)) throw SpecError("check_domain_monotonicity: the point lies outside the inner domain");
  const QuadratureRule probe = quadrature(inner, 32);
  for (std::size_t i = 0; i < probe.size(); ++i)
    if (!outer.contains(probe.nodes[i])) {
      std::ostringstream os;
      os << "check_domain_monotonicity: nesting violated at " << probe.nodes[i].z1;
      throw SpecError(os.str());
    }
  bool an_in = false, an_out = false;
  const GramSystem si = default_system(inner, o.degree, 50, o.resolution, true, &an_in);
  const GramSystem so = default_system(outer, o.degree, 50, o.resolution, true, &an_out);
  const double Ki = kernel_at(si, inner, a), Ko = kernel_at(so, outer, a);

  CheckReport r;
  r.id = "domain-monotonicity";
  r.statement = "the Bergman kernel on the diagonal decreases as the domain grows";
  r.instance = {{"label", label_of(inner) + " in " + label_of(outer) + " a=" + label_of(a, 1)},
                {"inner", domain_json(inner)},
                {"outer", domain_json(outer)},
                {"point", cjson(a.z1)},
                {"degree", o.degree}};
  r.quantities = {{"K_inner", Ki}, {"K_outer", Ko}, {"difference", Ki - Ko},
                  {"inner_path", an_in ? "analytic" : "quadrature"}, {"outer_path", an_out ? "analytic" : "quadrature"}};
  r.tolerance = {{"absolute", o.tolerance}};
  r.passed = Ki >= Ko - o.tolerance;
  return r;
}

CheckReport check_sublevel_monotonicity(const Domain& domain, const GreenModel& model, Point a, double t_inner,
                                        double t_outer, const ProfileOptions& options, double tolerance) {
  if (!(t_inner <= t_outer)) throw SpecError("check_sublevel_monotonicity: need t_inner <= t_outer");
  ProfileOptions po = options;
  po.mode = ProfileMode::restricted;
  const double Ki = kernel_at(sublevel_system(domain, model, a, t_inner, po), domain, a);
  const double Ko = kernel_at(sublevel_system(domain, model, a, t_outer, po), domain, a);

  CheckReport r;
  r.id = "domain-monotonicity";
  r.statement = "the Bergman kernel on the diagonal decreases as the domain grows";
  r.instance = {{"label", label_of(domain) + " D_" + fmt(t_inner) + " in D_" + fmt(t_outer) + " a=" +
                              label_of(a, domain.dimension())},
                {"domain", domain_json(domain)},
                {"green", model.description()},
                {"point", point_json(a, domain.dimension())},
                {"t_inner", t_inner},
                {"t_outer", t_outer},
                {"resolution", po.resolution}};
  r.quantities = {{"K_inner", Ki}, {"K_outer", Ko}, {"difference", Ki - Ko}};
  r.tolerance = {{"relative", tolerance}};
  r.passed = Ki >= Ko - tolerance * std::max(1.0, Ko);
  return r;
}

CheckReport check_asymptotic(const Domain& domain, const GreenModel& model, Point a, double t, double tolerance,
                             const ProfileOptions& options) {
  require_planar(domain, "check_asymptotic");
  const RobinReport robin = robin_constant(model);
  ProfileOptions po = options;
  po.mode = ProfileMode::restricted;
  const double K = kernel_at(sublevel_system(domain, model, a, t, po), domain, a);
  const double value = pi * K * std::exp(t + robin.c);

  CheckReport r;
  r.id = "sublevel-asymptotics";
  r.statement = "pi K_t(a) exp(t + c) tends to 1 as t tends to -inf";
  r.instance = {{"label", label_of(domain) + " a=" + label_of(a, 1) + " t=" + fmt(t)},
                {"domain", domain_json(domain)},
                {"green", model.description()},
                {"pole", cjson(a.z1)},
                {"t", t},
                {"resolution", po.resolution}};
  r.quantities = {{"K_t", K}, {"robin_c", robin.c}, {"value", value}, {"deviation", std::abs(value - 1.0)}};
  r.tolerance = {{"deviation", tolerance}};
  r.passed = std::abs(value - 1.0) <= tolerance;
  return r;
}

CheckReport check_extension(const ExtensionProblem& problem, std::optional<double> expected_ratio,
                            double tol_expected, const Tolerances& tol) {
  const ExtensionResult res = solve_extension(problem);
  CheckReport r;
  switch (problem.mode) {
    case ExtensionMode::thm31:
      r.id = "extension-bound";
      r.statement = "the minimal extension has squared norm at most sigma_k times the weighted norm of the datum on V";
      break;
    case ExtensionMode::thm36:
      r.id = "adjoint-extension-bound";
      r.statement = "the minimal extension of f dg has squared norm at most sigma_k times the norm of f on V";
      break;
    case ExtensionMode::thm37:
      r.id = "generalized-extension-bound";
      r.statement = "the minimal extension in the weight phi + k psi is bounded by (k/delta + 1) times the datum norm";
      break;
  }
  json datum = json::array();
  for (cplx c : problem.datum.coefficients) datum.push_back(cjson(c));
  std::string label = label_of(problem.domain) + " " + label_of(problem.variety);
  if (problem.adjoint) label += " " + problem.adjoint->describe();
  if (problem.generalized) label += " delta=" + fmt(problem.generalized->delta);
  r.instance = {{"label", label},
                {"domain", domain_json(problem.domain)},
                {"variety", variety_json(problem.variety)},
                {"datum", datum},
                {"mode", to_string(problem.mode)},
                {"k", problem.k},
                {"degree", problem.degree},
                {"resolution", problem.resolution},
                {"analytic", problem.analytic}};
  const double tb = res.analytic_path ? tol.bound_analytic : tol.bound_quadrature;
  r.quantities = {{"norm2", res.norm2},
                  {"bound", res.bound},
                  {"ratio", res.ratio},
                  {"constraint_residual", res.constraint_residual},
                  {"orthogonality_residual", res.orthogonality_residual},
                  {"rank", res.rank},
                  {"dropped", res.dropped},
                  {"analytic_path", res.analytic_path}};
  r.tolerance = {{"bound", tb}};
  r.passed = res.ratio <= 1.0 + tb && res.constraint_residual <= 1e-6;
  if (expected_ratio) {
    r.quantities["expected_ratio"] = *expected_ratio;
    r.tolerance["expected"] = tol_expected;
    r.passed = r.passed && std::abs(res.ratio - *expected_ratio) <= tol_expected;
  }
  return r;
}

CheckReport check_duality(const ExtensionProblem& problem, const std::vector<Functional>& functionals,
                          double tolerance) {
  if (functionals.empty()) throw SpecError("check_duality: no functionals");
  ExtensionProblem pb = problem;
  pb.mode = ExtensionMode::thm31;
  const ExtensionResult res = minimal_extension(pb);
  const GramSystem sys = extension_system(pb, pb.phi);
  std::vector<cplx> pairings;
  for (const Functional& f : functionals) pairings.push_back(f.apply(pb.datum));
  const double dual = dual_extension_bound(sys, functionals, pairings);
  const double primal = std::sqrt(res.norm2);

  CheckReport r;
  r.id = "extension-duality";
  r.statement = "the minimal extension norm equals the supremum of |<xi, f>| / ||xi||* over functionals on V";
  json desc = json::array();
  for (const Functional& f : functionals) desc.push_back(f.describe());
  r.instance = {{"label", label_of(pb.domain) + " " + label_of(pb.variety) + " n_functionals=" +
                              std::to_string(functionals.size())},
                {"domain", domain_json(pb.domain)},
                {"variety", variety_json(pb.variety)},
                {"functionals", desc},
                {"degree", pb.degree}};
  r.quantities = {{"primal", primal}, {"dual", dual}, {"relative_gap", std::abs(primal - dual) / primal}};
  r.tolerance = {{"relative", tolerance}};
  r.passed = std::abs(primal - dual) <= tolerance * primal;
  return r;
}

bool SuiteResult::passed() const {
  return std::all_of(reports.begin(), reports.end(), [](const CheckReport& r) { return r.passed; });
}

json SuiteResult::bundle() const {
  json reps = json::array();
  std::size_t npass = 0;
  for (const CheckReport& r : reports) {
    reps.push_back(r.to_json());
    npass += r.passed ? 1 : 0;
  }
  json profs = json::array();
  for (const auto& [name, p] : profiles) profs.push_back(name + ".csv");
  return {{"schema", "report-bundle/1"},
          {"passed", passed()},
          {"summary", {{"checks", reports.size()}, {"passed", npass}, {"failed", reports.size() - npass}}},
          {"profiles", profs},
          {"reports", reps}};
}

namespace {

HoloFunction bump_on_slice() {
  return [](const Point& q) {
    const double s = std::norm(q.z2) / 0.81;
    return s < 1.0 ? cplx(std::exp(-1.0 / (1.0 - s))) : cplx(0.0);
  };
}

}  // namespace

SuiteResult run_suite(const SuiteOptions& so) {
  SuiteResult out;
  const Tolerances& tol = so.tol;
  const std::vector<double> tg = t_grid(so.t_min, 0.0, so.t_step);

  const Domain disk = Domain::build(DomainSpec::disk());
  const Domain half = Domain::build(DomainSpec::disk(0.0, 0.5));
  const Domain ann = Domain::build(DomainSpec::annulus(0.2, 1.0));
  const Domain bidisk = Domain::build(DomainSpec::bidisk());
  const Domain ball = Domain::build(DomainSpec::ball2());
  const Point o(cplx(0.0)), a_ann(cplx(0.5));
  const GreenModel g_disk = solve_green(disk, o);
  const GreenModel g_ann = solve_green(ann, a_ann);
  const GreenModel g_slice = slice_green(bidisk, 0.0);
  auto& R = out.reports;

  // Suita bound.
  {
    SuitaOptions s;
    s.equality_tolerance = tol.bound_analytic;
    R.push_back(check_suita(disk, o, s));
    s.analytic = false;
    s.equality_tolerance = tol.bound_quadrature;
    R.push_back(check_suita(disk, o, s));
    s.analytic = true;
    s.equality_tolerance = 1e-5;
    R.push_back(check_suita(disk, Point(cplx(0.3)), s));
    s.equality_tolerance.reset();
    R.push_back(check_suita(ann, a_ann, s));
    s.analytic = false;
    R.push_back(check_suita(ann, a_ann, s));
  }

  // Profiles.
  auto add_profile = [&](const std::string& name, Profile p) {
    p.metadata["label"] = name;
    R.push_back(check_profile(p, tol));
    out.profiles.emplace(name, std::move(p));
  };
  {
    ProfileOptions po;
    po.resolution = so.profile_resolution;
    po.p = so.p;
    add_profile("disk-kernel-restricted", kernel_profile(disk, g_disk, o, tg, po));
    ProfileOptions pw = po;
    pw.mode = ProfileMode::weighted;
    add_profile("disk-point-weighted", dual_profile(disk, g_disk, Functional::point_mass(o), tg, pw));

    ProfileOptions pa = po;
    pa.resolution = so.annulus_profile_resolution;
    add_profile("annulus-kernel-restricted", kernel_profile(ann, g_ann, a_ann, tg, pa));
    pa.mode = ProfileMode::weighted;
    add_profile("annulus-point-weighted", dual_profile(ann, g_ann, Functional::point_mass(a_ann), tg, pa));

    add_profile("bidisk-kernel-restricted", kernel_profile(bidisk, g_slice, Point(0.0, 0.0), tg, po));
    const Functional xi = Functional::density(bidisk, g_slice.variety(), bump_on_slice(), 1);
    add_profile("bidisk-slice-weighted", dual_profile(bidisk, g_slice, xi, tg, pw));
  }

  // Asymptotics of the sublevel kernel.
  {
    ProfileOptions po;
    po.resolution = so.profile_resolution;
    R.push_back(check_asymptotic(disk, g_disk, o, -8.0, tol.limit_t8, po));
    po.resolution = so.annulus_profile_resolution;
    R.push_back(check_asymptotic(ann, g_ann, a_ann, -8.0, tol.limit_t8, po));
  }

  // Extension certificates.
  {
    ExtensionProblem p(disk);
    p.variety = VarietySpec::at_point(o);
    p.datum = {{1.0}};
    R.push_back(check_extension(p, 1.0, tol.bound_analytic, tol));

    ExtensionProblem q(bidisk);
    q.variety = VarietySpec::slice(0.0);
    q.datum = {{1.0}};
    q.degree = 12;
    R.push_back(check_extension(q, 1.0, tol.bound_analytic, tol));

    ExtensionProblem b(ball);
    b.variety = VarietySpec::slice(0.0);
    b.datum = {{1.0}};
    b.degree = 12;
    R.push_back(check_extension(b, 0.5, tol.bound_quadrature, tol));

    ExtensionProblem m(disk);
    m.variety = VarietySpec::at_point(Point(cplx(0.3)));
    m.datum = {{1.0}};
    m.mode = ExtensionMode::thm36;
    m.adjoint = AdjointData{AdjointData::Kind::mobius, 0.3, 1};
    R.push_back(check_extension(m, 1.0, tol.bound_analytic, tol));

    ExtensionProblem mb(bidisk);
    mb.variety = VarietySpec::slice(0.3);
    mb.datum = {{1.0}};
    mb.degree = 12;
    mb.mode = ExtensionMode::thm36;
    mb.adjoint = AdjointData{AdjointData::Kind::mobius, 0.3, 1};
    R.push_back(check_extension(mb, 1.0, tol.bound_analytic, tol));

    for (double delta : {1.0, 2.5}) {
      ExtensionProblem g(disk);
      g.variety = VarietySpec::at_point(o);
      g.datum = {{1.0}};
      g.green = g_disk;
      g.mode = ExtensionMode::thm37;
      g.phi = ScalarField{[delta](const Point& x) { return delta * std::norm(x.z1); }, true};
      g.generalized = GeneralizedData{ScalarField{[](const Point& x) { return std::norm(x.z1); }, true}, delta};
      R.push_back(check_extension(g, std::nullopt, 0.0, tol));
    }

    R.push_back(check_duality(p, {Functional::point_mass(o)}, tol.bound_quadrature));
    std::vector<Functional> fs;
    for (int l = 0; l < 3; ++l) {
      const HoloFunction g1 = bump_on_slice();
      fs.push_back(Functional::density(bidisk, VarietySpec::slice(0.0),
                                       [g1, l](const Point& x) { return g1(x) * std::pow(x.z2, l); }, 1));
    }
    ExtensionProblem q2 = q;
    q2.datum = {{1.0, 0.5}};
    R.push_back(check_duality(q2, fs, tol.bound_quadrature));
  }

  // Tube limits.
  {
    TubeOptions to;
    to.tolerance = tol.bound_quadrature;
    R.push_back(check_tube_limit(disk, g_disk, VarietySpec::at_point(o), {}, {}, tg, 1, to));
    R.push_back(check_tube_limit(bidisk, g_slice, VarietySpec::slice(0.0), {}, {}, tg, 1, to));
    to.form = AdjointData{AdjointData::Kind::mobius, 0.3, 1};
    R.push_back(check_tube_limit(disk, solve_green(disk, Point(cplx(0.3))), VarietySpec::at_point(Point(cplx(0.3))),
                                 {}, {}, tg, 1, to));
    R.push_back(check_tube_limit(bidisk, slice_green(bidisk, 0.3), VarietySpec::slice(0.3), {}, {}, tg, 1, to));
    to.form.reset();
    to.tolerance = tol.limit_t6;
    const DefectBound db = defect_bound(g_ann, ann, g_ann.variety(), 0.05);
    R.push_back(check_tube_limit(ann, g_ann, g_ann.variety(), db.B_field, {}, tg, 1, to));
  }

  // nu lemma.
  {
    const std::vector<double> ng = t_grid(-12.0, 0.0, 0.005);
    R.push_back(check_nu_lemma(nu_sample([](double s) { return std::exp(s); }, ng), 1, 3.0));
    R.push_back(check_nu_lemma(nu_sample([](double s) { return std::exp(2.0 * s); }, ng), 2, 6.0));
    R.push_back(check_nu_lemma(nu_sample([](double) { return 0.0; }, ng), 1, 3.0));
    R.push_back(check_nu_lemma(volume_nu_sample(ann, g_ann, t_grid(-8.0, 0.0, 0.05), 64), 1, 3.0));
  }

  // Family convergence.
  {
    const HoloFunction one = [](const Point&) { return cplx(1.0); };
    R.push_back(check_family_convergence(disk, g_disk, one, -2.0, {8.0, 32.0, 128.0}));
    R.push_back(check_family_convergence(disk, g_disk, one, 0.0, {8.0, 32.0, 128.0}));
    R.push_back(check_family_convergence(ann, g_ann, one, -2.0, {8.0, 32.0, 128.0}));
  }

  // Domain monotonicity.
  {
    R.push_back(check_domain_monotonicity(half, disk, o));
    R.push_back(check_domain_monotonicity(disk, disk, o));
    ProfileOptions po;
    po.resolution = so.annulus_profile_resolution;
    R.push_back(check_sublevel_monotonicity(ann, g_ann, a_ann, -1.0, 0.0, po));
  }

  std::stable_sort(R.begin(), R.end(), [](const CheckReport& a, const CheckReport& b) { return a.id < b.id; });
  return out;
}

void write_bundle(const SuiteResult& result, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path d(dir);
  write_file_atomic((d / "bundle.json").string(), result.bundle().dump(2) + "\n");
  for (const auto& [name, p] : result.profiles) write_file_atomic((d / (name + ".csv")).string(), p.to_csv());
}

}  // namespace sharpext
