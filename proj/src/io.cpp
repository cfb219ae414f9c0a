#include "sharpext/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace sharpext {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw SpecError("at " + (where.empty() ? std::string("/") : where) + ": " + what);
}

const json& require(const json& j, const char* key, const std::string& where) {
  if (!j.is_object()) fail(where, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) fail(where, std::string("missing field '") + key + "'");
  return *it;
}

double number(const json& j, const std::string& where) {
  if (!j.is_number()) fail(where, "expected a number");
  return j.get<double>();
}

double number_or(const json& j, const char* key, double fallback, const std::string& where) {
  auto it = j.find(key);
  return it == j.end() ? fallback : number(*it, where + "/" + key);
}

int integer_or(const json& j, const char* key, int fallback, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) return fallback;
  if (!it->is_number_integer()) fail(where + "/" + key, "expected an integer");
  return it->get<int>();
}

std::string string_or(const json& j, const char* key, const std::string& fallback, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) return fallback;
  if (!it->is_string()) fail(where + "/" + key, "expected a string");
  return it->get<std::string>();
}

void reject_unknown(const json& j, std::initializer_list<const char*> known, const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : known) ok = ok || it.key() == k;
    if (!ok) fail(where + "/" + it.key(), "unknown field");
  }
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", std::abs(v) < 1e-12 ? 0.0 : v);
  return buf;
}

}  // namespace

json read_json_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw SpecError(path + ": cannot open file");
  std::stringstream ss;
  ss << f.rdbuf();
  try {
    return json::parse(ss.str());
  } catch (const json::parse_error& e) {
    throw SpecError(path + ": " + e.what());
  }
}

cplx parse_complex(const json& j, const std::string& where) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return {j[0].get<double>(), j[1].get<double>()};
  fail(where, "expected a number or a [re, im] pair");
}

Point parse_point(const json& j, int dimension, const std::string& where) {
  if (dimension == 1) return parse_complex(j, where);
  if (j.is_array() && j.size() == 2 && !j[0].is_number())
    return {parse_complex(j[0], where + "/0"), parse_complex(j[1], where + "/1")};
  fail(where, "expected a pair of complex numbers [[re, im], [re, im]]");
}

Point parse_point_text(const std::string& text, int dimension) {
  auto one = [&](const std::string& s) {
    std::stringstream ss(s);
    double re = 0.0, im = 0.0;
    char comma = 0;
    if (!(ss >> re)) throw SpecError("--pole: cannot parse '" + text + "'");
    if (ss >> comma) {
      if (comma != ',' || !(ss >> im)) throw SpecError("--pole: cannot parse '" + text + "'");
    }
    std::string rest;
    if (ss >> rest) throw SpecError("--pole: trailing characters in '" + text + "'");
    return cplx(re, im);
  };
  const auto semi = text.find(';');
  if (semi == std::string::npos) {
    const cplx z = one(text);
    return dimension == 1 ? Point(z) : Point(z, 0.0);
  }
  if (dimension != 2) throw SpecError("--pole: two coordinates given for a planar domain");
  return {one(text.substr(0, semi)), one(text.substr(semi + 1))};
}

Domain parse_domain(const json& j, const std::string& where) {
  if (!j.is_object()) fail(where, "expected a domain object");
  const std::string kind = string_or(j, "kind", "", where);
  if (kind.empty()) fail(where, "missing field 'kind'");
  DomainSpec s;
  try {
    s.kind = domain_kind_from_string(kind);
  } catch (const SpecError& e) {
    fail(where + "/kind", e.what());
  }
  switch (s.kind) {
    case DomainKind::disk:
      reject_unknown(j, {"kind", "center", "radius", "pole"}, where);
      s = DomainSpec::disk(j.contains("center") ? parse_complex(j["center"], where + "/center") : cplx(0.0),
                           number_or(j, "radius", 1.0, where));
      break;
    case DomainKind::annulus:
      reject_unknown(j, {"kind", "r_inner", "r_outer", "pole"}, where);
      s = DomainSpec::annulus(number(require(j, "r_inner", where), where + "/r_inner"),
                              number_or(j, "r_outer", 1.0, where));
      break;
    case DomainKind::ball2:
      reject_unknown(j, {"kind", "pole"}, where);
      s = DomainSpec::ball2();
      break;
    case DomainKind::bidisk:
      reject_unknown(j, {"kind", "pole"}, where);
      s = DomainSpec::bidisk();
      break;
    case DomainKind::polygon: {
      reject_unknown(j, {"kind", "vertices", "pole"}, where);
      const json& v = require(j, "vertices", where);
      if (!v.is_array()) fail(where + "/vertices", "expected an array");
      std::vector<cplx> vs;
      for (std::size_t i = 0; i < v.size(); ++i) vs.push_back(parse_complex(v[i], where + "/vertices/" + std::to_string(i)));
      s = DomainSpec::polygon(std::move(vs));
      break;
    }
    case DomainKind::implicit: {
      reject_unknown(j, {"kind", "shape", "params", "pole"}, where);
      s.kind = DomainKind::implicit;
      s.shape = string_or(j, "shape", "", where);
      const json& p = require(j, "params", where);
      if (!p.is_array()) fail(where + "/params", "expected an array");
      for (std::size_t i = 0; i < p.size(); ++i) s.shape_params.push_back(number(p[i], where + "/params/" + std::to_string(i)));
      break;
    }
  }
  try {
    return Domain::build(s);
  } catch (const SpecError& e) {
    fail(where, e.what());
  }
}

VarietySpec parse_variety(const json& j, int dimension, const std::string& where) {
  const std::string kind = string_or(j, "kind", "point", where);
  if (kind == "point") {
    reject_unknown(j, {"kind", "point"}, where);
    return VarietySpec::at_point(parse_point(require(j, "point", where), dimension, where + "/point"), dimension);
  }
  if (kind == "slice") {
    reject_unknown(j, {"kind", "c"}, where);
    if (dimension != 2) fail(where, "slices need a domain in C^2");
    return VarietySpec::slice(j.contains("c") ? parse_complex(j["c"], where + "/c") : cplx(0.0));
  }
  fail(where + "/kind", "unknown variety kind '" + kind + "' (point, slice)");
}

ScalarField parse_weight(const json& j, int dimension, const std::string& where) {
  if (j.is_null()) return {};
  const std::string kind = string_or(j, "kind", "", where);
  reject_unknown(j, {"kind", "coefficient"}, where);
  const double c = number_or(j, "coefficient", 1.0, where);
  if (kind == "zero") return {};
  if (kind == "gaussian_z1" || (kind == "gaussian" && dimension == 1))
    return {[c](const Point& p) { return c * std::norm(p.z1); }, true};
  if (kind == "gaussian") return {[c](const Point& p) { return c * (std::norm(p.z1) + std::norm(p.z2)); }, false};
  fail(where + "/kind", "unknown weight '" + kind + "' (zero, gaussian, gaussian_z1)");
}

DomainCase load_domain_case(const std::string& path) {
  const json src = read_json_file(path);
  try {
    const bool wrapped = src.is_object() && src.contains("domain");
    const json& d = wrapped ? src["domain"] : src;
    const std::string where = wrapped ? "/domain" : "";
    DomainCase c{parse_domain(d, where), std::nullopt, src};
    const json* pole = src.contains("pole") ? &src["pole"] : (d.contains("pole") ? &d["pole"] : nullptr);
    if (pole) c.pole = parse_point(*pole, c.domain.dimension(), "/pole");
    return c;
  } catch (const SpecError& e) {
    throw SpecError(path + ": " + e.what());
  }
}

ProblemCase parse_problem(const json& j, const std::string& base_dir) {
  if (!j.is_object()) fail("", "expected a problem object");
  reject_unknown(j,
                 {"domain", "variety", "datum", "weight", "mode", "green", "B", "adjoint", "generalized",
                  "parameters", "expected", "description"},
                 "");
  const json& dj = require(j, "domain", "");
  Domain domain = dj.is_string() ? load_domain_case((fs::path(base_dir) / dj.get<std::string>()).string()).domain
                                 : parse_domain(dj, "/domain");
  const int dim = domain.dimension();
  ProblemCase pc{ExtensionProblem(domain), json::object(), j};
  ExtensionProblem& p = pc.problem;

  p.variety = parse_variety(require(j, "variety", ""), dim, "/variety");
  const json& datum = require(j, "datum", "");
  if (datum.is_number()) {
    p.datum.coefficients = {datum.get<double>()};
  } else if (datum.is_array()) {
    if (datum.size() == 2 && datum[0].is_number() && datum[1].is_number())
      fail("/datum", "ambiguous: write a complex value as [[re, im]] and real coefficients as numbers");
    for (std::size_t i = 0; i < datum.size(); ++i)
      p.datum.coefficients.push_back(parse_complex(datum[i], "/datum/" + std::to_string(i)));
  } else {
    fail("/datum", "expected a number or an array of coefficients");
  }
  if (p.datum.coefficients.empty()) fail("/datum", "empty datum");
  if (p.variety.kind == VarietyKind::point && p.datum.coefficients.size() != 1)
    fail("/datum", "a point variety takes a single value");

  if (j.contains("weight")) p.phi = parse_weight(j["weight"], dim, "/weight");
  try {
    p.mode = extension_mode_from_string(string_or(j, "mode", "thm31", ""));
  } catch (const SpecError& e) {
    fail("/mode", e.what());
  }

  if (j.contains("adjoint")) {
    const json& a = j["adjoint"];
    reject_unknown(a, {"kind", "c", "power"}, "/adjoint");
    AdjointData g;
    const std::string kind = string_or(a, "kind", "mobius", "/adjoint");
    if (kind == "mobius")
      g.kind = AdjointData::Kind::mobius;
    else if (kind == "power")
      g.kind = AdjointData::Kind::power;
    else
      fail("/adjoint/kind", "unknown map '" + kind + "' (mobius, power)");
    g.c = a.contains("c") ? parse_complex(a["c"], "/adjoint/c") : p.variety.point.z1;
    g.power = integer_or(a, "power", 1, "/adjoint");
    p.adjoint = g;
  }
  if (p.mode == ExtensionMode::thm36 && !p.adjoint) fail("/adjoint", "mode thm36 needs a defining map");

  const std::string green = string_or(j, "green", "auto", "");
  if (green == "auto" || green == "pole" || green == "slice") {
    if (p.variety.kind == VarietyKind::slice)
      p.green = slice_green(p.domain, p.variety.point.z1);
    else if (green != "slice")
      p.green = solve_green(p.domain, p.variety.point);
    else
      fail("/green", "'slice' needs a slice variety");
  } else if (green != "none") {
    fail("/green", "unknown Green model '" + green + "' (auto, pole, slice, none)");
  }

  const std::string B = string_or(j, "B", p.green ? "defect" : "zero", "");
  if (B == "defect") {
    if (!p.green) fail("/B", "the defect needs a Green model");
    p.B = defect_bound(p.green, p.domain, p.variety, 0.05).B_field;
  } else if (B != "zero") {
    fail("/B", "unknown value '" + B + "' (defect, zero)");
  }

  if (j.contains("generalized")) {
    const json& g = j["generalized"];
    reject_unknown(g, {"psi", "delta"}, "/generalized");
    GeneralizedData gd;
    gd.psi = parse_weight(require(g, "psi", "/generalized"), dim, "/generalized/psi");
    if (!gd.psi) fail("/generalized/psi", "psi must be a nonzero field");
    gd.delta = number_or(g, "delta", 1.0, "/generalized");
    p.generalized = gd;
  }
  if (p.mode == ExtensionMode::thm37 && !p.generalized) fail("/generalized", "mode thm37 needs psi and delta");

  p.k = p.variety.codimension();
  if (dim == 2) p.degree = 12;
  if (j.contains("parameters")) {
    const json& q = j["parameters"];
    reject_unknown(q, {"degree", "resolution", "analytic", "k", "threshold"}, "/parameters");
    p.degree = integer_or(q, "degree", p.degree, "/parameters");
    p.resolution = integer_or(q, "resolution", p.resolution, "/parameters");
    p.k = integer_or(q, "k", p.k, "/parameters");
    p.threshold = number_or(q, "threshold", p.threshold, "/parameters");
    if (q.contains("analytic")) {
      if (!q["analytic"].is_boolean()) fail("/parameters/analytic", "expected true or false");
      p.analytic = q["analytic"].get<bool>();
    }
  }
  if (j.contains("expected")) {
    const json& e = j["expected"];
    reject_unknown(e, {"ratio", "tolerance", "norm2"}, "/expected");
    pc.expected = e;
  }
  return pc;
}

ProblemCase load_problem(const std::string& path) {
  const json j = read_json_file(path);
  try {
    return parse_problem(j, fs::path(path).parent_path().string());
  } catch (const SpecError& e) {
    throw SpecError(path + ": " + e.what());
  }
}

void write_file_atomic(const std::string& path, const std::string& text) {
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot write " + tmp.string());
    f << text;
    f.flush();
    if (!f) throw Error("write failed: " + tmp.string());
  }
  fs::rename(tmp, target);
}

std::string svg_plot(const std::vector<Series>& series, const PlotOptions& o) {
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"};
  const double W = o.width, H = o.height;
  const double left = 70, right = 20, top = 36, bottom = 50;
  double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
  for (const Series& s : series)
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i]);
      y1 = std::max(y1, s.y[i]);
    }
  if (x0 > x1) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 - x0 < 1e-12) x0 -= 0.5, x1 += 0.5;
  if (y1 - y0 < 1e-9 * std::max(1.0, std::abs(y0))) {
    const double pad = 0.5 * std::max(1e-3, std::abs(y0) * 1e-3);
    y0 -= pad, y1 += pad;
  } else {
    const double pad = 0.05 * (y1 - y0);
    y0 -= pad, y1 += pad;
  }
  auto X = [&](double x) { return left + (x - x0) / (x1 - x0) * (W - left - right); };
  auto Y = [&](double y) { return H - bottom - (y - y0) / (y1 - y0) * (H - top - bottom); };

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << o.width << "\" height=\"" << o.height
    << "\" viewBox=\"0 0 " << o.width << ' ' << o.height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!o.title.empty())
    s << "<text x=\"" << num(W / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << escape(o.title)
      << "</text>\n";
  s << "<g stroke=\"black\" stroke-width=\"1\">\n";
  s << "<line x1=\"" << num(left) << "\" y1=\"" << num(H - bottom) << "\" x2=\"" << num(W - right) << "\" y2=\""
    << num(H - bottom) << "\"/>\n";
  s << "<line x1=\"" << num(left) << "\" y1=\"" << num(top) << "\" x2=\"" << num(left) << "\" y2=\"" << num(H - bottom)
    << "\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = x0 + (x1 - x0) * i / 4.0, yv = y0 + (y1 - y0) * i / 4.0;
    s << "<line x1=\"" << num(X(xv)) << "\" y1=\"" << num(H - bottom) << "\" x2=\"" << num(X(xv)) << "\" y2=\""
      << num(H - bottom + 5) << "\"/>\n";
    s << "<line x1=\"" << num(left - 5) << "\" y1=\"" << num(Y(yv)) << "\" x2=\"" << num(left) << "\" y2=\""
      << num(Y(yv)) << "\"/>\n";
  }
  s << "</g>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = x0 + (x1 - x0) * i / 4.0, yv = y0 + (y1 - y0) * i / 4.0;
    s << "<text x=\"" << num(X(xv)) << "\" y=\"" << num(H - bottom + 18) << "\" text-anchor=\"middle\">"
      << tick_label(xv) << "</text>\n";
    s << "<text x=\"" << num(left - 8) << "\" y=\"" << num(Y(yv) + 4) << "\" text-anchor=\"end\">" << tick_label(yv)
      << "</text>\n";
  }
  s << "<text x=\"" << num((left + W - right) / 2) << "\" y=\"" << num(H - 12) << "\" text-anchor=\"middle\">"
    << escape(o.x_label) << "</text>\n";
  s << "<text x=\"16\" y=\"" << num((top + H - bottom) / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
    << num((top + H - bottom) / 2) << ")\">" << escape(o.y_label) << "</text>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const Series& sr = series[k];
    const char* color = colors[k % 6];
    s << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    bool first = true;
    for (std::size_t i = 0; i < sr.x.size() && i < sr.y.size(); ++i) {
      if (!std::isfinite(sr.x[i]) || !std::isfinite(sr.y[i])) continue;
      s << (first ? "" : " ") << num(X(sr.x[i])) << ',' << num(Y(sr.y[i]));
      first = false;
    }
    s << "\"/>\n";
    const double ly = top + 14 + 16 * static_cast<double>(k);
    s << "<line x1=\"" << num(W - right - 150) << "\" y1=\"" << num(ly) << "\" x2=\"" << num(W - right - 130)
      << "\" y2=\"" << num(ly) << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    s << "<text x=\"" << num(W - right - 124) << "\" y=\"" << num(ly + 4) << "\">" << escape(sr.name) << "</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

}  // namespace sharpext
