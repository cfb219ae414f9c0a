#include "sharpext/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace sharpext {

std::string to_string(DomainKind kind) {
  switch (kind) {
    case DomainKind::disk: return "disk";
    case DomainKind::annulus: return "annulus";
    case DomainKind::ball2: return "ball2";
    case DomainKind::bidisk: return "bidisk";
    case DomainKind::polygon: return "polygon";
    case DomainKind::implicit: return "implicit";
  }
  return "unknown";
}

DomainKind domain_kind_from_string(const std::string& name) {
  static const std::map<std::string, DomainKind> table{
      {"disk", DomainKind::disk},       {"annulus", DomainKind::annulus},
      {"ball2", DomainKind::ball2},     {"bidisk", DomainKind::bidisk},
      {"polygon", DomainKind::polygon}, {"implicit", DomainKind::implicit}};
  auto it = table.find(name);
  if (it == table.end()) throw SpecError("unknown domain kind '" + name + "'");
  return it->second;
}

DomainSpec DomainSpec::disk(cplx center, double radius) {
  DomainSpec s;
  s.kind = DomainKind::disk;
  s.center = center;
  s.radius = radius;
  return s;
}

DomainSpec DomainSpec::annulus(double r_inner, double r_outer) {
  DomainSpec s;
  s.kind = DomainKind::annulus;
  s.r_inner = r_inner;
  s.r_outer = r_outer;
  return s;
}

DomainSpec DomainSpec::ball2() {
  DomainSpec s;
  s.kind = DomainKind::ball2;
  s.dimension = 2;
  return s;
}

DomainSpec DomainSpec::bidisk() {
  DomainSpec s;
  s.kind = DomainKind::bidisk;
  s.dimension = 2;
  return s;
}

DomainSpec DomainSpec::polygon(std::vector<cplx> vertices) {
  DomainSpec s;
  s.kind = DomainKind::polygon;
  s.vertices = std::move(vertices);
  return s;
}

DomainSpec DomainSpec::implicit(LevelFunction level, Box bbox, int dimension) {
  DomainSpec s;
  s.kind = DomainKind::implicit;
  s.dimension = dimension;
  s.level = std::move(level);
  s.bbox = bbox;
  return s;
}

DomainSpec DomainSpec::ellipse(double a, double b) {
  DomainSpec s;
  s.kind = DomainKind::implicit;
  s.shape = "ellipse";
  s.shape_params = {a, b};
  return s;
}

namespace {

double signed_area(const std::vector<cplx>& v) {
  double a = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const cplx p = v[i];
    const cplx q = v[(i + 1) % v.size()];
    a += p.real() * q.imag() - q.real() * p.imag();
  }
  return 0.5 * a;
}

bool point_in_polygon(const std::vector<cplx>& v, cplx z) {
  bool inside = false;
  for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
    const double yi = v[i].imag(), yj = v[j].imag();
    if ((yi > z.imag()) != (yj > z.imag())) {
      const double x = v[i].real() + (z.imag() - yi) * (v[j].real() - v[i].real()) / (yj - yi);
      if (z.real() < x) inside = !inside;
    }
  }
  return inside;
}

double wrap_angle(double a) {
  a = std::fmod(a, 2.0 * pi);
  if (a < 0) a += 2.0 * pi;
  return a;
}

// Parameters rho >= 0 where |center + rho e^{i theta} - c0| = R, sorted.
std::vector<double> circle_hits(cplx center, cplx dir, cplx c0, double R) {
  const cplx d = center - c0;
  const double b = (d * std::conj(dir)).real();
  const double c = std::norm(d) - R * R;
  const double disc = b * b - c;
  if (disc <= 0.0) return {};
  const double s = std::sqrt(disc);
  return {-b - s, -b + s};
}

// Intersect the ray with the open disk |z - c0| < R.
std::vector<Interval> ray_in_disk(cplx center, cplx dir, cplx c0, double R) {
  auto h = circle_hits(center, dir, c0, R);
  if (h.empty() || h[1] <= 0.0) return {};
  return {{std::max(0.0, h[0]), h[1]}};
}

}  // namespace

Domain::Domain(DomainSpec spec) : spec_(std::move(spec)) {}

Domain Domain::build(const DomainSpec& spec_in) {
  DomainSpec spec = spec_in;
  switch (spec.kind) {
    case DomainKind::disk:
      if (!(spec.radius > 0.0) || !std::isfinite(spec.radius))
        throw SpecError("disk: radius must be positive, got " + std::to_string(spec.radius));
      spec.dimension = 1;
      break;
    case DomainKind::annulus:
      if (!(spec.r_inner > 0.0) || !(spec.r_outer > spec.r_inner))
        throw SpecError("annulus: need 0 < r_inner < r_outer, got r_inner=" +
                        std::to_string(spec.r_inner) + " r_outer=" + std::to_string(spec.r_outer));
      spec.dimension = 1;
      break;
    case DomainKind::ball2:
    case DomainKind::bidisk:
      spec.dimension = 2;
      break;
    case DomainKind::polygon: {
      if (spec.vertices.size() < 3) throw SpecError("polygon: need at least 3 vertices");
      const double a = signed_area(spec.vertices);
      if (std::abs(a) < 1e-14) throw SpecError("polygon: zero area");
      if (a < 0) std::reverse(spec.vertices.begin(), spec.vertices.end());
      spec.dimension = 1;
      break;
    }
    case DomainKind::implicit:
      if (!spec.level) {
        if (spec.shape == "ellipse" || spec.shape == "superellipse") {
          const bool super = spec.shape == "superellipse";
          if (spec.shape_params.size() != (super ? 3u : 2u))
            throw SpecError(spec.shape + ": wrong number of parameters");
          const double a = spec.shape_params[0], b = spec.shape_params[1];
          const double n = super ? spec.shape_params[2] : 2.0;
          if (!(a > 0 && b > 0 && n >= 2))
            throw SpecError(spec.shape + ": parameters must be positive (exponent >= 2)");
          spec.level = [a, b, n](const Point& p) {
            return std::pow(std::abs(p.z1.real() / a), n) + std::pow(std::abs(p.z1.imag() / b), n) - 1.0;
          };
          spec.bbox = Box{{-1.05 * a, -1.05 * b, 0, 0}, {1.05 * a, 1.05 * b, 0, 0}};
          spec.dimension = 1;
        } else {
          throw SpecError("implicit: unknown shape '" + spec.shape + "' and no level function");
        }
      }
      if (!spec.bbox) throw SpecError("implicit: bounding box required");
      if (spec.dimension != 1 && spec.dimension != 2) throw SpecError("implicit: dimension must be 1 or 2");
      break;
  }

  Domain d(spec);
  Box& b = d.bbox_;
  switch (spec.kind) {
    case DomainKind::disk:
      b.lo = {spec.center.real() - spec.radius, spec.center.imag() - spec.radius, 0, 0};
      b.hi = {spec.center.real() + spec.radius, spec.center.imag() + spec.radius, 0, 0};
      break;
    case DomainKind::annulus:
      b.lo = {-spec.r_outer, -spec.r_outer, 0, 0};
      b.hi = {spec.r_outer, spec.r_outer, 0, 0};
      break;
    case DomainKind::ball2:
    case DomainKind::bidisk:
      b.lo = {-1, -1, -1, -1};
      b.hi = {1, 1, 1, 1};
      break;
    case DomainKind::polygon: {
      b.lo = {1e300, 1e300, 0, 0};
      b.hi = {-1e300, -1e300, 0, 0};
      for (cplx v : spec.vertices) {
        b.lo[0] = std::min(b.lo[0], v.real());
        b.lo[1] = std::min(b.lo[1], v.imag());
        b.hi[0] = std::max(b.hi[0], v.real());
        b.hi[1] = std::max(b.hi[1], v.imag());
      }
      break;
    }
    case DomainKind::implicit:
      b = *spec.bbox;
      break;
  }
  // Pad so the box strictly contains the closure.
  const int nd = 2 * spec.dimension;
  for (int i = 0; i < nd; ++i) {
    const double pad = 1e-9 * std::max(1.0, b.hi[i] - b.lo[i]);
    b.lo[i] -= pad;
    b.hi[i] += pad;
  }

  if (spec.kind == DomainKind::implicit) {
    // Reject empty regions: probe a coarse grid.
    bool any = false;
    const int m = spec.dimension == 1 ? 64 : 12;
    const int total = spec.dimension == 1 ? m * m : m * m * m * m;
    for (int idx = 0; idx < total && !any; ++idx) {
      std::array<double, 4> x{};
      int r = idx;
      for (int k = 0; k < nd; ++k) {
        x[k] = b.lo[k] + (b.hi[k] - b.lo[k]) * ((r % m) + 0.5) / m;
        r /= m;
      }
      any = d.contains(Point(cplx(x[0], x[1]), cplx(x[2], x[3])));
    }
    if (!any) throw SpecError("implicit: region is empty on a probe grid");
  }
  return d;
}

double Domain::level(const Point& p) const {
  switch (spec_.kind) {
    case DomainKind::disk: return std::abs(p.z1 - spec_.center) - spec_.radius;
    case DomainKind::annulus: {
      const double r = std::abs(p.z1);
      return std::max(r - spec_.r_outer, spec_.r_inner - r);
    }
    case DomainKind::ball2: return p.norm2() - 1.0;
    case DomainKind::bidisk: return std::max(std::abs(p.z1), std::abs(p.z2)) - 1.0;
    case DomainKind::polygon: return point_in_polygon(spec_.vertices, p.z1) ? -1.0 : 1.0;
    case DomainKind::implicit: return spec_.level(p);
  }
  return 1.0;
}

bool Domain::contains(const Point& p) const { return level(p) < 0.0; }

std::optional<double> Domain::exact_volume() const {
  switch (spec_.kind) {
    case DomainKind::disk: return pi * spec_.radius * spec_.radius;
    case DomainKind::annulus:
      return pi * (spec_.r_outer * spec_.r_outer - spec_.r_inner * spec_.r_inner);
    case DomainKind::ball2: return pi * pi / 2.0;
    case DomainKind::bidisk: return pi * pi;
    case DomainKind::polygon: return std::abs(signed_area(spec_.vertices));
    case DomainKind::implicit:
      if (spec_.shape == "ellipse") return pi * spec_.shape_params[0] * spec_.shape_params[1];
      return std::nullopt;
  }
  return std::nullopt;
}

bool Domain::is_analytic() const {
  return spec_.kind == DomainKind::disk || spec_.kind == DomainKind::annulus || is_fibered();
}

cplx Domain::interior_point() const {
  switch (spec_.kind) {
    case DomainKind::disk: return spec_.center;
    case DomainKind::annulus: return 0.5 * (spec_.r_inner + spec_.r_outer);
    case DomainKind::polygon: {
      // area centroid
      const auto& v = spec_.vertices;
      cplx c = 0.0;
      double a = 0.0;
      for (std::size_t i = 0; i < v.size(); ++i) {
        const cplx p = v[i], q = v[(i + 1) % v.size()];
        const double cr = p.real() * q.imag() - q.real() * p.imag();
        a += cr;
        c += (p + q) * cr;
      }
      return c / (3.0 * a);
    }
    case DomainKind::implicit:
      return cplx(0.5 * (bbox_.lo[0] + bbox_.hi[0]), 0.5 * (bbox_.lo[1] + bbox_.hi[1]));
    default: return 0.0;
  }
}

std::vector<Interval> Domain::ray_intervals(cplx center, double theta) const {
  const cplx dir = std::polar(1.0, theta);
  switch (spec_.kind) {
    case DomainKind::disk: return ray_in_disk(center, dir, spec_.center, spec_.radius);
    case DomainKind::annulus: {
      auto outer = ray_in_disk(center, dir, 0.0, spec_.r_outer);
      if (outer.empty()) return {};
      auto hole = circle_hits(center, dir, 0.0, spec_.r_inner);
      Interval o = outer.front();
      if (hole.empty() || hole[1] <= o.lo) return outer;
      std::vector<Interval> out;
      if (hole[0] > o.lo) out.push_back({o.lo, std::min(hole[0], o.hi)});
      if (hole[1] < o.hi) out.push_back({std::max(hole[1], o.lo), o.hi});
      return out;
    }
    case DomainKind::polygon: {
      const auto& v = spec_.vertices;
      std::vector<double> hits;
      for (std::size_t i = 0; i < v.size(); ++i) {
        const cplx p = v[i], q = v[(i + 1) % v.size()];
        const cplx e = q - p;
        const double den = (dir * std::conj(e)).imag();  // cross(e, dir) up to sign
        if (std::abs(den) < 1e-15) continue;
        const cplx w = p - center;
        // center + rho dir = p + s e
        const double rho = (w * std::conj(e)).imag() / den;
        const double s = (w * std::conj(dir)).imag() / den;
        if (rho > 0.0 && s >= 0.0 && s < 1.0) hits.push_back(rho);
      }
      hits.push_back(0.0);
      std::sort(hits.begin(), hits.end());
      std::vector<Interval> out;
      for (std::size_t i = 0; i + 1 < hits.size(); ++i) {
        if (hits[i + 1] - hits[i] < 1e-14) continue;
        const cplx mid = center + 0.5 * (hits[i] + hits[i + 1]) * dir;
        if (point_in_polygon(v, mid)) out.push_back({hits[i], hits[i + 1]});
      }
      return out;
    }
    case DomainKind::implicit: {
      if (spec_.dimension != 1) throw SpecError("ray_intervals: planar domains only");
      const double L = std::hypot(bbox_.hi[0] - bbox_.lo[0], bbox_.hi[1] - bbox_.lo[1]);
      const int m = 256;
      auto lv = [&](double r) { return spec_.level(Point(center + r * dir)); };
      std::vector<double> roots;
      double prev = lv(0.0);
      bool inside0 = prev < 0;
      double r0 = 0.0;
      for (int i = 1; i <= m; ++i) {
        const double r1 = L * i / m;
        const double cur = lv(r1);
        if ((prev < 0) != (cur < 0)) {
          double a = r0, b = r1;
          const bool a_in = prev < 0;
          for (int it = 0; it < 60; ++it) {
            const double c = 0.5 * (a + b);
            if ((lv(c) < 0) == a_in) a = c; else b = c;
          }
          roots.push_back(0.5 * (a + b));
        }
        prev = cur;
        r0 = r1;
      }
      std::vector<Interval> out;
      double start = inside0 ? 0.0 : -1.0;
      for (double r : roots) {
        if (start >= 0.0) {
          out.push_back({start, r});
          start = -1.0;
        } else {
          start = r;
        }
      }
      return out;
    }
    default: throw SpecError("ray_intervals: planar domains only");
  }
}

std::vector<double> Domain::event_angles(cplx center) const {
  std::vector<double> ev;
  auto tangents = [&](cplx c0, double R) {
    const cplx d = c0 - center;
    const double dist = std::abs(d);
    if (dist <= R) return;
    const double base = std::arg(d);
    const double half = std::asin(R / dist);
    ev.push_back(wrap_angle(base - half));
    ev.push_back(wrap_angle(base + half));
  };
  switch (spec_.kind) {
    case DomainKind::disk: tangents(spec_.center, spec_.radius); break;
    case DomainKind::annulus:
      tangents(0.0, spec_.r_inner);
      tangents(0.0, spec_.r_outer);
      break;
    case DomainKind::polygon:
      for (cplx v : spec_.vertices)
        if (std::abs(v - center) > 1e-14) ev.push_back(wrap_angle(std::arg(v - center)));
      break;
    default: break;
  }
  std::sort(ev.begin(), ev.end());
  return ev;
}

std::vector<cplx> Domain::boundary_points(int count) const {
  std::vector<cplx> out;
  out.reserve(count);
  switch (spec_.kind) {
    case DomainKind::disk:
      for (int i = 0; i < count; ++i)
        out.push_back(spec_.center + std::polar(spec_.radius, 2.0 * pi * i / count));
      break;
    case DomainKind::annulus: {
      const int n_out = count * 2 / 3, n_in = count - n_out;
      for (int i = 0; i < n_out; ++i) out.push_back(std::polar(spec_.r_outer, 2.0 * pi * i / n_out));
      for (int i = 0; i < n_in; ++i) out.push_back(std::polar(spec_.r_inner, 2.0 * pi * i / n_in));
      break;
    }
    case DomainKind::polygon: {
      const auto& v = spec_.vertices;
      double perim = 0.0;
      for (std::size_t i = 0; i < v.size(); ++i) perim += std::abs(v[(i + 1) % v.size()] - v[i]);
      for (std::size_t i = 0; i < v.size(); ++i) {
        const cplx p = v[i], q = v[(i + 1) % v.size()];
        const int m = std::max(2, static_cast<int>(std::lround(count * std::abs(q - p) / perim)));
        // Chebyshev-like clustering toward corners.
        for (int j = 0; j < m; ++j) {
          const double s = 0.5 * (1.0 - std::cos(pi * j / m));
          out.push_back(p + s * (q - p));
        }
      }
      break;
    }
    case DomainKind::implicit: {
      const cplx c = interior_point();
      for (int i = 0; i < count; ++i) {
        const double th = 2.0 * pi * i / count;
        auto iv = ray_intervals(c, th);
        if (iv.empty()) continue;
        out.push_back(c + iv.back().hi * std::polar(1.0, th));
      }
      break;
    }
    default: throw SpecError("boundary_points: planar domains only");
  }
  return out;
}

double Domain::max_radius_from(cplx center) const {
  switch (spec_.kind) {
    case DomainKind::disk: return std::abs(center - spec_.center) + spec_.radius;
    case DomainKind::annulus: return std::abs(center) + spec_.r_outer;
    default: {
      double m = 0.0;
      for (int i = 0; i < 4; ++i) {
        const cplx corner(i & 1 ? bbox_.hi[0] : bbox_.lo[0], i & 2 ? bbox_.hi[1] : bbox_.lo[1]);
        m = std::max(m, std::abs(corner - center));
      }
      return m;
    }
  }
}

bool Domain::is_fibered() const {
  return spec_.kind == DomainKind::ball2 || spec_.kind == DomainKind::bidisk;
}

double Domain::fiber_radius(cplx z1) const {
  if (spec_.kind == DomainKind::bidisk) return 1.0;
  if (spec_.kind == DomainKind::ball2) return std::sqrt(std::max(0.0, 1.0 - std::norm(z1)));
  throw SpecError("fiber_radius: not a fibered domain");
}

Domain Domain::base() const {
  if (!is_fibered()) throw SpecError("base: not a fibered domain");
  return Domain::build(DomainSpec::disk(0.0, 1.0));
}

double QuadratureRule::volume() const {
  return pairwise_sum(std::span<const double>(weights));
}

namespace detail {
void throw_non_finite(std::size_t index, const Point& node) {
  std::ostringstream os;
  os << "integrate: non-finite integrand at node " << index << " (z1=" << node.z1.real() << (node.z1.imag() < 0 ? "" : "+")
     << node.z1.imag() << "i, z2=" << node.z2.real() << (node.z2.imag() < 0 ? "" : "+") << node.z2.imag() << "i)";
  throw NumericalError(os.str());
}
}  // namespace detail

VarietySpec VarietySpec::at_point(Point a, int dimension) {
  VarietySpec v;
  v.kind = VarietyKind::point;
  v.point = a;
  v.dimension = dimension;
  return v;
}

VarietySpec VarietySpec::slice(cplx c) {
  VarietySpec v;
  v.kind = VarietyKind::slice;
  v.point = Point(c, 0.0);
  v.dimension = 2;
  return v;
}

double VarietySpec::distance(const Point& p) const {
  if (kind == VarietyKind::slice) return std::abs(p.z1 - point.z1);
  if (dimension == 1) return std::abs(p.z1 - point.z1);
  return std::sqrt(std::norm(p.z1 - point.z1) + std::norm(p.z2 - point.z2));
}

Point VarietySpec::project(const Point& p) const {
  if (kind == VarietyKind::slice) return Point(point.z1, p.z2);
  return point;
}

}  // namespace sharpext
