// Command-line front end: suita, profile, extend, lemmas, suite.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "sharpext/io.hpp"
#include "sharpext/verify.hpp"

using namespace sharpext;
namespace fs = std::filesystem;

namespace {

struct Common {
  std::string domain_file;
  std::string problem_file;
  std::string pole;
  std::string t_range = "-8:0:0.25";
  std::string p_list;
  int degree = 0;
  int resolution = 0;
  std::string out;
  std::string format;
};

std::vector<double> parse_t_range(const std::string& s) {
  std::vector<double> v;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, ':')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(part, &used));
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      throw SpecError("--t: cannot parse '" + s + "' (expected min:max:step)");
    }
  }
  if (v.size() != 3) throw SpecError("--t: expected min:max:step, got '" + s + "'");
  return t_grid(v[0], v[1], v[2]);
}

std::vector<double> parse_p_list(const std::string& s) {
  std::vector<double> v;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(part, &used));
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      throw SpecError("--p: cannot parse '" + s + "' (expected a comma list)");
    }
  }
  return v;
}

std::set<std::string> parse_formats(const std::string& s, const std::set<std::string>& allowed,
                                     const std::set<std::string>& fallback) {
  if (s.empty()) return fallback;
  std::set<std::string> out;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, ',')) {
    if (!allowed.count(part)) throw SpecError("--format: '" + part + "' is not available for this command");
    out.insert(part);
  }
  return out;
}

DomainCase need_domain(const Common& c) {
  if (c.domain_file.empty()) throw SpecError("--domain is required");
  return load_domain_case(c.domain_file);
}

Point pick_pole(const Common& c, const DomainCase& dc) {
  if (!c.pole.empty()) return parse_point_text(c.pole, dc.domain.dimension());
  if (dc.pole) return *dc.pole;
  return dc.domain.dimension() == 1 ? Point(dc.domain.interior_point()) : Point(0.0, 0.0);
}

GreenModel green_for(const Domain& d, const Point& pole) {
  return d.dimension() == 1 ? solve_green(d, pole) : slice_green(d, pole.z1);
}

void emit(const Common& c, const std::string& name, const std::string& text) {
  if (c.out.empty()) {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
  } else {
    write_file_atomic((fs::path(c.out) / name).string(), text);
  }
}

void print_reports(const std::vector<CheckReport>& reports) {
  for (const CheckReport& r : reports) std::cerr << r.summary_line() << '\n';
}

int cmd_suita(const Common& c) {
  const DomainCase dc = need_domain(c);
  const Point a = pick_pole(c, dc);
  const auto fmt = parse_formats(c.format, {"csv", "json"}, {"csv"});
  SuitaOptions so;
  if (c.degree > 0) so.degree = c.degree;
  if (c.resolution > 0) {
    so.resolution = c.resolution;
    so.analytic = false;
  }
  const CheckReport r = check_suita(dc.domain, a, so);
  const json& q = r.quantities;
  char row[256];
  std::snprintf(row, sizeof row, "%s,%.10g,%.10g,%.10g,%.10g,%.10g\n", r.instance["label"].get<std::string>().c_str(),
                q["K"].get<double>(), q["robin_c"].get<double>(), q["ratio"].get<double>(), q["margin"].get<double>(),
                q["kernel_truncation"].get<double>());
  if (fmt.count("csv")) emit(c, "suita.csv", std::string("instance,K,c,ratio,margin,kernel_truncation\n") + row);
  if (fmt.count("json")) emit(c, "suita.json", r.to_json().dump(2));
  print_reports({r});
  return r.passed ? 0 : 1;
}

int cmd_profile(const Common& c) {
  const DomainCase dc = need_domain(c);
  const Point a = pick_pole(c, dc);
  const auto tg = parse_t_range(c.t_range);
  const auto fmt = parse_formats(c.format, {"csv", "json", "svg"}, {"csv", "svg"});
  const GreenModel model = green_for(dc.domain, a);
  ProfileOptions po;
  if (c.degree > 0) (dc.domain.dimension() == 1 ? po.degree : po.degree2) = c.degree;
  po.resolution = c.resolution > 0 ? c.resolution : (dc.domain.kind() == DomainKind::annulus ? 128 : 64);

  std::vector<std::pair<std::string, Profile>> profiles;
  profiles.emplace_back("profile_restricted", kernel_profile(dc.domain, model, a, tg, po));
  for (double p : parse_p_list(c.p_list)) {
    ProfileOptions pw = po;
    pw.mode = ProfileMode::weighted;
    pw.p = p;
    char name[64];
    std::snprintf(name, sizeof name, "profile_weighted_p%g", p);
    profiles.emplace_back(name, dual_profile(dc.domain, model, Functional::point_mass(a), tg, pw));
  }

  std::vector<CheckReport> reports;
  std::vector<Series> series;
  json all = json::array();
  std::string csv;
  for (auto& [name, prof] : profiles) {
    prof.metadata["label"] = name;
    reports.push_back(check_profile(prof));
    series.push_back({name == "profile_restricted" ? "restricted" : "p = " + name.substr(18), prof.t, prof.shifted()});
    if (fmt.count("csv")) {
      if (c.out.empty())
        csv += prof.to_csv();
      else
        emit(c, name + ".csv", prof.to_csv());
    }
    all.push_back(prof.to_json());
  }
  if (!csv.empty()) emit(c, "", csv);
  if (fmt.count("json")) emit(c, "profile.json", all.dump(2));
  if (fmt.count("svg") && !c.out.empty()) {
    PlotOptions plot;
    plot.title = "k(t) = log K_t + k t";
    plot.y_label = "k(t)";
    emit(c, "profile.svg", svg_plot(series, plot));
  }
  print_reports(reports);
  for (const CheckReport& r : reports)
    if (!r.passed) return 1;
  return 0;
}

int cmd_extend(const Common& c) {
  if (c.problem_file.empty()) throw SpecError("--problem is required");
  ProblemCase pc = load_problem(c.problem_file);
  if (c.degree > 0) pc.problem.degree = c.degree;
  if (c.resolution > 0) pc.problem.resolution = c.resolution;
  parse_formats(c.format, {"json"}, {"json"});
  const ExtensionResult res = solve_extension(pc.problem);
  json j = res.to_json();
  emit(c, "extension.json", j.dump(2));
  const double tol = res.analytic_path ? 1e-6 : 1e-3;
  const bool ok = res.ratio <= 1.0 + tol;
  std::fprintf(stderr, "%s extension ratio %.12g (bound certificate ratio <= 1 + %g)\n", ok ? "PASS" : "FAIL", res.ratio,
               tol);
  return ok ? 0 : 1;
}

int cmd_lemmas(const Common& c) {
  const DomainCase dc = need_domain(c);
  const Point a = pick_pole(c, dc);
  const auto tg = parse_t_range(c.t_range);
  parse_formats(c.format, {"json"}, {"json"});
  const GreenModel model = green_for(dc.domain, a);
  const VarietySpec& V = model.variety();
  const int res = c.resolution > 0 ? c.resolution : 64;
  std::vector<double> ps = parse_p_list(c.p_list);
  if (ps.empty()) ps = {8.0, 32.0, 128.0};

  std::vector<CheckReport> reports;
  TubeOptions to;
  to.resolution = res;
  const DefectBound db = defect_bound(model, dc.domain, V, 0.05);
  reports.push_back(check_tube_limit(dc.domain, model, V, db.B_field, {}, tg, V.codimension(), to));
  const bool unit_disk = dc.domain.kind() == DomainKind::bidisk ||
                         (dc.domain.kind() == DomainKind::disk && dc.domain.spec().center == cplx(0.0) &&
                          dc.domain.spec().radius == 1.0);
  if (unit_disk) {
    to.form = AdjointData{AdjointData::Kind::mobius, a.z1, 1};
    reports.push_back(check_tube_limit(dc.domain, model, V, {}, {}, tg, V.codimension(), to));
  }
  if (dc.domain.dimension() == 1) {
    const std::vector<double> ng = t_grid(tg.front(), 0.0, 0.05);
    reports.push_back(check_nu_lemma(volume_nu_sample(dc.domain, model, ng, res), 1, ps.back()));
    FamilyOptions fo;
    fo.resolution = std::max(res, 128);
    reports.push_back(check_family_convergence(
        dc.domain, model, [](const Point&) { return cplx(1.0); }, -2.0, ps, fo));
  }
  json arr = json::array();
  for (const CheckReport& r : reports) arr.push_back(r.to_json());
  emit(c, "lemmas.json", arr.dump(2));
  print_reports(reports);
  for (const CheckReport& r : reports)
    if (!r.passed) return 1;
  return 0;
}

int cmd_suite(const Common& c) {
  parse_formats(c.format, {"json", "csv"}, {"json", "csv"});
  const SuiteResult result = run_suite();
  if (c.out.empty())
    std::cout << result.bundle().dump(2) << '\n';
  else
    write_bundle(result, c.out);
  print_reports(result.reports);
  std::size_t failed = 0;
  for (const CheckReport& r : result.reports) failed += r.passed ? 0 : 1;
  std::fprintf(stderr, "%zu checks, %zu failed\n", result.reports.size(), failed);
  return result.passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sharp L2 extension and Bergman kernel verification"};
  app.require_subcommand(1, 1);
  Common c;

  auto add_common = [&](CLI::App* s, bool domain, bool problem) {
    if (domain) {
      s->add_option("--domain", c.domain_file, "Domain JSON file")->check(CLI::ExistingFile);
      s->add_option("--pole", c.pole, "Pole: re[,im] (C^2: re,im;re,im)");
    }
    if (problem) s->add_option("--problem", c.problem_file, "Extension problem JSON file")->check(CLI::ExistingFile);
    s->add_option("--degree", c.degree, "Basis degree")->check(CLI::PositiveNumber);
    s->add_option("--resolution", c.resolution, "Quadrature resolution")->check(CLI::PositiveNumber);
    s->add_option("--out", c.out, "Output directory");
    s->add_option("--format", c.format, "Comma list of csv, json, svg");
  };
  auto* suita = app.add_subcommand("suita", "Robin constant, kernel and the Suita ratio");
  add_common(suita, true, false);
  auto* profile = app.add_subcommand("profile", "Sublevel kernel profiles k(t) and weighted dual profiles");
  add_common(profile, true, false);
  profile->add_option("--t", c.t_range, "t grid min:max:step");
  profile->add_option("--p", c.p_list, "Comma list of weight exponents p");
  auto* extend = app.add_subcommand("extend", "Minimal extension and its bound certificate");
  add_common(extend, false, true);
  auto* lemmas = app.add_subcommand("lemmas", "Tube limits, the nu lemma and family convergence");
  add_common(lemmas, true, false);
  lemmas->add_option("--t", c.t_range, "t grid min:max:step");
  lemmas->add_option("--p", c.p_list, "Comma list of weight exponents p");
  auto* suite = app.add_subcommand("suite", "Full regression bundle");
  add_common(suite, false, false);

  CLI11_PARSE(app, argc, argv);
  try {
    if (!c.out.empty()) fs::create_directories(c.out);
    if (suita->parsed()) return cmd_suita(c);
    if (profile->parsed()) return cmd_profile(c);
    if (extend->parsed()) return cmd_extend(c);
    if (lemmas->parsed()) return cmd_lemmas(c);
    if (suite->parsed()) return cmd_suite(c);
  } catch (const SpecError& e) {
    std::fprintf(stderr, "spec error: %s\n", e.what());
    return 2;
  } catch (const HypothesisError& e) {
    std::fprintf(stderr, "hypothesis violated: %s\n", e.what());
    return 3;
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 5;
  }
  return 0;
}
