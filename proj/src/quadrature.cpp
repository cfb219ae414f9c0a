#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

#include "sharpext/geometry.hpp"

namespace sharpext {

const GaussLegendre& gauss_legendre(int order) {
  static std::mutex mu;
  static std::map<int, GaussLegendre> cache;
  if (order < 1) throw SpecError("gauss_legendre: order must be positive");
  std::lock_guard<std::mutex> lock(mu);
  if (auto it = cache.find(order); it != cache.end()) return it->second;

  const int n = order;
  GaussLegendre g;
  g.x.assign(n, 0.0);
  g.w.assign(n, 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(pi * (i + 0.75) / (n + 0.5));
    double dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      // p1 = P_n(x), p0 = P_{n-1}(x)
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    g.x[i] = -x;
    g.x[n - 1 - i] = x;
    g.w[i] = w;
    g.w[n - 1 - i] = w;
  }
  return cache.emplace(order, std::move(g)).first->second;
}

namespace {

struct Node1 {
  double x;
  double w;
};

// Gauss-Legendre on [a, b].
void append_gl(std::vector<Node1>& out, double a, double b, int order) {
  const auto& g = gauss_legendre(order);
  const double h = 0.5 * (b - a), m = 0.5 * (a + b);
  for (int i = 0; i < order; ++i) out.push_back({m + h * g.x[i], h * g.w[i]});
}

enum class Grade { none, left, right, both };

// Gauss-Legendre on [a, b] after a polynomial change of variables that
// flattens the map at graded ends (removes square-root endpoint behavior).
void append_graded(std::vector<Node1>& out, double a, double b, int order, Grade grade) {
  if (grade == Grade::none) return append_gl(out, a, b, order);
  const auto& g = gauss_legendre(order);
  const double L = b - a;
  for (int i = 0; i < order; ++i) {
    const double s = 0.5 * (g.x[i] + 1.0);
    const double ws = 0.5 * g.w[i];
    double phi, dphi;
    switch (grade) {
      case Grade::left: phi = s * s; dphi = 2 * s; break;
      case Grade::right: phi = 1 - (1 - s) * (1 - s); dphi = 2 * (1 - s); break;
      default: phi = s * s * (3 - 2 * s); dphi = 6 * s * (1 - s); break;
    }
    out.push_back({a + L * phi, L * dphi * ws});
  }
}

void append_trapezoid_circle(std::vector<Node1>& out, int n) {
  for (int j = 0; j < n; ++j) out.push_back({2.0 * pi * (j + 0.5) / n, 2.0 * pi / n});
}

struct StarParams {
  int angular_panels = 16;
  int angular_order = 16;
  int radial_order = 16;
  int graded_order = 12;
  double radial_h = 0.25;
  int scan = 256;
  double grading_rate = 0.0;
};

StarParams planar_params(const Domain& d, cplx center, int resolution) {
  StarParams p;
  p.angular_panels = std::max(4, resolution / 8);
  p.angular_order = 16;
  p.radial_order = 16;
  p.radial_h = d.max_radius_from(center) / std::max(1, resolution / 16);
  p.scan = std::max(128, 4 * resolution);
  return p;
}

struct Segment {
  double lo, hi;
  bool keep;
  bool lo_level, hi_level;  // endpoint lies on {G = t}
};

struct LevelData {
  const ScalarField* G = nullptr;
  double t = 0.0;
  LevelMode mode = LevelMode::restrict;
  bool center_is_pole = false;
};

// Segments of the ray, broken at domain boundaries and at {G = t}.
std::vector<Segment> ray_segments(const Domain& dom, cplx center, double theta, const LevelData* lvl) {
  const auto intervals = dom.ray_intervals(center, theta);
  std::vector<Segment> out;
  const cplx dir = std::polar(1.0, theta);
  for (const Interval& iv : intervals) {
    if (!lvl) {
      out.push_back({iv.lo, iv.hi, true, false, false});
      continue;
    }
    auto phi = [&](double r) {
      if (r == 0.0 && lvl->center_is_pole) return -1e300;
      return (*lvl->G)(Point(center + r * dir)) - lvl->t;
    };
    constexpr int m = 48;
    std::vector<double> cuts;
    double r_prev = iv.lo;
    double f_prev = phi(r_prev);
    for (int i = 1; i <= m; ++i) {
      const double s = static_cast<double>(i) / m;
      const double r = iv.lo + (iv.hi - iv.lo) * s * s;
      const double f = phi(r);
      if ((f_prev < 0) != (f < 0)) {
        double a = r_prev, b = r;
        const bool a_neg = f_prev < 0;
        for (int it = 0; it < 64 && b - a > 1e-15 * std::max(1.0, b); ++it) {
          const double c = 0.5 * (a + b);
          if ((phi(c) < 0) == a_neg) a = c; else b = c;
        }
        cuts.push_back(0.5 * (a + b));
      }
      r_prev = r;
      f_prev = f;
    }
    std::vector<double> pts{iv.lo};
    pts.insert(pts.end(), cuts.begin(), cuts.end());
    pts.push_back(iv.hi);
    for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
      if (pts[k + 1] <= pts[k]) continue;
      const bool below = phi(0.5 * (pts[k] + pts[k + 1])) < 0;
      const bool keep = lvl->mode == LevelMode::split || below;
      out.push_back({pts[k], pts[k + 1], keep, k > 0, k + 2 < pts.size()});
    }
  }
  return out;
}

std::vector<int> signature(const std::vector<Segment>& segs) {
  std::vector<int> s;
  s.reserve(segs.size() + 1);
  s.push_back(static_cast<int>(segs.size()));
  for (const auto& g : segs) s.push_back(g.keep ? 1 : 0);
  return s;
}

std::vector<double> find_events(const Domain& dom, cplx center, const LevelData* lvl, int scan) {
  std::vector<double> ev = dom.event_angles(center);
  if (lvl || dom.kind() == DomainKind::implicit || dom.kind() == DomainKind::annulus) {
    auto sig_at = [&](double th) { return signature(ray_segments(dom, center, th, lvl)); };
    const double step = 2.0 * pi / scan;
    std::vector<std::vector<int>> sigs(scan);
    for (int i = 0; i < scan; ++i) sigs[i] = sig_at(step * (i + 0.25));
    for (int i = 0; i < scan; ++i) {
      const int j = (i + 1) % scan;
      if (sigs[i] == sigs[j]) continue;
      double a = step * (i + 0.25), b = step * (i + 1.25);
      for (int it = 0; it < 48; ++it) {
        const double c = 0.5 * (a + b);
        if (sig_at(c) == sigs[i]) a = c; else b = c;
      }
      double e = std::fmod(0.5 * (a + b), 2.0 * pi);
      ev.push_back(e);
    }
  }
  std::sort(ev.begin(), ev.end());
  std::vector<double> uniq;
  for (double e : ev)
    if (uniq.empty() || e - uniq.back() > 1e-11) uniq.push_back(e);
  if (uniq.size() > 1 && uniq.front() + 2.0 * pi - uniq.back() < 1e-11) uniq.pop_back();
  return uniq;
}

std::vector<Node1> angular_nodes(const std::vector<double>& events, const StarParams& p) {
  std::vector<Node1> out;
  const int total = p.angular_panels * p.angular_order;
  if (events.empty()) {
    append_trapezoid_circle(out, total);
    return out;
  }
  const double target = 2.0 * pi / p.angular_panels;
  for (std::size_t k = 0; k < events.size(); ++k) {
    const double a = events[k];
    const double b = k + 1 < events.size() ? events[k + 1] : events.front() + 2.0 * pi;
    const int n = std::max(1, static_cast<int>(std::ceil((b - a) / target)));
    const double h = (b - a) / n;
    for (int j = 0; j < n; ++j) {
      Grade g = Grade::none;
      if (n == 1) g = Grade::both;
      else if (j == 0) g = Grade::left;
      else if (j == n - 1) g = Grade::right;
      append_graded(out, a + j * h, a + (j + 1) * h, p.angular_order, g);
    }
  }
  for (auto& nd : out) nd.x = std::fmod(nd.x, 2.0 * pi);
  return out;
}

// Panel breakpoints of [lo, hi], geometrically refined toward level endpoints.
std::vector<double> radial_breaks(const Segment& s, const StarParams& p) {
  const double len = s.hi - s.lo;
  const bool grade = p.grading_rate > 0.0 && (s.lo_level || s.hi_level);
  if (!grade) {
    const int n = std::max(1, static_cast<int>(std::ceil(len / p.radial_h)));
    std::vector<double> b(n + 1);
    for (int i = 0; i <= n; ++i) b[i] = s.lo + len * i / n;
    return b;
  }
  auto ladder = [&](double anchor) {
    std::vector<double> steps;
    double d = std::max(anchor, 1e-3 * p.radial_h) / p.grading_rate;
    double acc = 0.0;
    const double limit = (s.lo_level && s.hi_level) ? 0.5 * len : len;
    while (acc + d < limit) {
      acc += d;
      steps.push_back(acc);
      d = std::min(2.0 * d, p.radial_h);
    }
    return steps;
  };
  std::vector<double> b{s.lo, s.hi};
  if (s.lo_level)
    for (double x : ladder(s.lo)) b.push_back(s.lo + x);
  if (s.hi_level)
    for (double x : ladder(s.hi)) b.push_back(s.hi - x);
  if (s.lo_level && s.hi_level) b.push_back(0.5 * (s.lo + s.hi));
  std::sort(b.begin(), b.end());
  b.erase(std::unique(b.begin(), b.end(), [](double x, double y) { return y - x < 1e-15; }), b.end());
  return b;
}

void star_rule(QuadratureRule& rule, const Domain& dom, cplx center, const LevelData* lvl, const StarParams& p,
               const std::function<void(cplx, double)>& emit) {
  const auto events = find_events(dom, center, lvl, p.scan);
  const auto angles = angular_nodes(events, p);
  std::vector<Node1> radial;
  for (const Node1& th : angles) {
    const cplx dir = std::polar(1.0, th.x);
    for (const Segment& s : ray_segments(dom, center, th.x, lvl)) {
      if (!s.keep) continue;
      const auto br = radial_breaks(s, p);
      const bool graded = br.size() > 2 && p.grading_rate > 0.0 && (s.lo_level || s.hi_level);
      radial.clear();
      for (std::size_t k = 0; k + 1 < br.size(); ++k)
        append_gl(radial, br[k], br[k + 1], graded ? p.graded_order : p.radial_order);
      for (const Node1& r : radial) emit(center + r.x * dir, th.w * r.w * r.x);
    }
  }
  (void)rule;
}

void polar_product(std::vector<Point>& nodes, std::vector<double>& weights, cplx center, double r0, double r1,
                   int radial, int angular) {
  std::vector<Node1> rn, an;
  append_gl(rn, r0, r1, radial);
  append_trapezoid_circle(an, angular);
  for (const Node1& a : an)
    for (const Node1& r : rn) {
      nodes.emplace_back(center + std::polar(r.x, a.x));
      weights.push_back(a.w * r.w * r.x);
    }
}

struct FiberParams {
  int radial;
  int angular;
};

FiberParams fiber_params(int resolution) {
  return {std::max(14, resolution / 4), std::max(16, resolution / 2)};
}

StarParams base_params(int resolution) {
  StarParams p;
  const int ang = std::max(16, resolution / 2);
  p.angular_order = 16;
  p.angular_panels = std::max(1, ang / 16);
  p.radial_order = std::max(14, resolution / 4);
  p.graded_order = 10;
  p.radial_h = 1.0 / std::max(1, resolution / 32);
  p.scan = std::max(64, 2 * resolution);
  return p;
}

void add_fibers(QuadratureRule& rule, const Domain& dom, const std::vector<Point>& base_nodes,
                const std::vector<double>& base_w, int resolution) {
  const auto fp = fiber_params(resolution);
  std::vector<Node1> rn, an;
  append_trapezoid_circle(an, fp.angular);
  for (std::size_t i = 0; i < base_nodes.size(); ++i) {
    const cplx z1 = base_nodes[i].z1;
    const double R = dom.fiber_radius(z1);
    if (R <= 0.0) continue;
    rn.clear();
    append_gl(rn, 0.0, R, fp.radial);
    for (const Node1& a : an)
      for (const Node1& r : rn) {
        rule.nodes.emplace_back(z1, std::polar(r.x, a.x));
        rule.weights.push_back(base_w[i] * a.w * r.w * r.x);
      }
  }
}

// Tensor Gauss-Legendre cells on the bounding box, masked by `inside`, with
// dyadic subdivision of cells whose samples disagree.
void masked_tensor(QuadratureRule& rule, const Box& box, int dim_real, int resolution, int depth,
                   const std::function<bool(const Point&)>& inside) {
  const int q = dim_real == 2 ? 3 : 2;
  const auto& g = gauss_legendre(q);
  auto to_point = [&](const std::array<double, 4>& x) { return Point(cplx(x[0], x[1]), cplx(x[2], x[3])); };

  std::function<void(std::array<double, 4>, std::array<double, 4>, int)> cell =
      [&](std::array<double, 4> lo, std::array<double, 4> hi, int level) {
        int n_nodes = 1;
        for (int k = 0; k < dim_real; ++k) n_nodes *= q;
        std::vector<Point> pts;
        std::vector<double> ws;
        int n_in = 0;
        for (int idx = 0; idx < n_nodes; ++idx) {
          std::array<double, 4> x{};
          double w = 1.0;
          int r = idx;
          for (int k = 0; k < dim_real; ++k) {
            const int j = r % q;
            r /= q;
            const double h = 0.5 * (hi[k] - lo[k]);
            x[k] = 0.5 * (lo[k] + hi[k]) + h * g.x[j];
            w *= h * g.w[j];
          }
          const Point pnt = to_point(x);
          const bool in = inside(pnt);
          n_in += in;
          if (in) {
            pts.push_back(pnt);
            ws.push_back(w);
          }
        }
        // corners
        int c_in = 0;
        const int n_corners = 1 << dim_real;
        for (int c = 0; c < n_corners; ++c) {
          std::array<double, 4> x{};
          for (int k = 0; k < dim_real; ++k) x[k] = (c >> k) & 1 ? hi[k] : lo[k];
          c_in += inside(to_point(x));
        }
        const bool mixed = !((n_in == n_nodes && c_in == n_corners) || (n_in == 0 && c_in == 0));
        if (mixed && level < depth) {
          const int n_child = 1 << dim_real;
          for (int c = 0; c < n_child; ++c) {
            std::array<double, 4> l = lo, h = hi;
            for (int k = 0; k < dim_real; ++k) {
              const double mid = 0.5 * (lo[k] + hi[k]);
              if ((c >> k) & 1) l[k] = mid; else h[k] = mid;
            }
            cell(l, h, level + 1);
          }
          return;
        }
        rule.nodes.insert(rule.nodes.end(), pts.begin(), pts.end());
        rule.weights.insert(rule.weights.end(), ws.begin(), ws.end());
      };

  long total = 1;
  for (int k = 0; k < dim_real; ++k) total *= resolution;
  for (long idx = 0; idx < total; ++idx) {
    std::array<double, 4> lo{}, hi{};
    long r = idx;
    for (int k = 0; k < dim_real; ++k) {
      const long j = r % resolution;
      r /= resolution;
      const double h = (box.hi[k] - box.lo[k]) / resolution;
      lo[k] = box.lo[k] + j * h;
      hi[k] = lo[k] + h;
    }
    cell(lo, hi, 0);
  }
}

}  // namespace

QuadratureRule quadrature(const Domain& domain, int resolution, const QuadratureOptions& options) {
  if (resolution < 8) throw SpecError("quadrature: resolution must be >= 8, got " + std::to_string(resolution));
  QuadratureRule rule;
  rule.dimension = domain.dimension();
  rule.resolution = resolution;
  rule.refinement_depth = options.refinement_depth;
  const auto& spec = domain.spec();

  QuadratureScheme scheme = options.scheme;
  if (scheme == QuadratureScheme::automatic) {
    switch (domain.kind()) {
      case DomainKind::disk:
      case DomainKind::annulus:
      case DomainKind::ball2:
      case DomainKind::bidisk: scheme = QuadratureScheme::polar; break;
      case DomainKind::polygon: scheme = QuadratureScheme::star; break;
      case DomainKind::implicit:
        scheme = domain.dimension() == 1 ? QuadratureScheme::star : QuadratureScheme::masked_tensor;
        break;
    }
  }

  switch (scheme) {
    case QuadratureScheme::polar:
      if (domain.kind() == DomainKind::disk) {
        polar_product(rule.nodes, rule.weights, spec.center, 0.0, spec.radius, resolution, 2 * resolution);
      } else if (domain.kind() == DomainKind::annulus) {
        polar_product(rule.nodes, rule.weights, 0.0, spec.r_inner, spec.r_outer, resolution, 2 * resolution);
      } else if (domain.is_fibered()) {
        const auto fp = fiber_params(resolution);
        std::vector<Point> bn;
        std::vector<double> bw;
        polar_product(bn, bw, 0.0, 0.0, 1.0, fp.radial, fp.angular);
        add_fibers(rule, domain, bn, bw, resolution);
      } else {
        throw SpecError("quadrature: polar scheme needs a disk, annulus, ball2 or bidisk");
      }
      break;
    case QuadratureScheme::star: {
      if (domain.dimension() != 1) throw SpecError("quadrature: star scheme is planar");
      const cplx c = options.center.value_or(domain.interior_point());
      star_rule(rule, domain, c, nullptr, planar_params(domain, c, resolution),
                [&](cplx z, double w) {
                  rule.nodes.emplace_back(z);
                  rule.weights.push_back(w);
                });
      break;
    }
    case QuadratureScheme::masked_tensor: {
      const int depth = domain.dimension() == 2 ? std::min(options.refinement_depth, 2) : options.refinement_depth;
      masked_tensor(rule, domain.bounding_box(), 2 * domain.dimension(), resolution, depth,
                    [&](const Point& p) { return domain.contains(p); });
      break;
    }
    case QuadratureScheme::automatic: break;
  }
  if (rule.empty()) throw NumericalError("quadrature: resolution too low to place any node");
  return rule;
}

SublevelRule sublevel_rule(const Domain& domain, const ScalarField& G, double t, const SublevelOptions& options) {
  if (t > 0.0) throw SpecError("sublevel_rule: t must be <= 0, got " + std::to_string(t));
  if (options.resolution < 8) throw SpecError("sublevel_rule: resolution must be >= 8");
  SublevelRule out;
  out.t = t;
  QuadratureRule& rule = out.rule;
  rule.dimension = domain.dimension();
  rule.resolution = options.resolution;
  rule.refinement_depth = options.refinement_depth;

  LevelData lvl{&G, t, options.mode, options.center_is_pole};

  if (domain.dimension() == 1) {
    const cplx c = options.center.value_or(domain.interior_point());
    StarParams p = planar_params(domain, c, options.resolution);
    p.grading_rate = options.mode == LevelMode::split ? options.grading_rate : 0.0;
    star_rule(rule, domain, c, &lvl, p, [&](cplx z, double w) {
      rule.nodes.emplace_back(z);
      rule.weights.push_back(w);
    });
    return out;
  }

  if (domain.is_fibered() && G.z1_only) {
    const Domain base = domain.base();
    const cplx c = options.center.value_or(0.0);
    StarParams p = base_params(options.resolution);
    p.grading_rate = options.mode == LevelMode::split ? options.grading_rate : 0.0;
    ScalarField g1{[&G](const Point& q) { return G(Point(q.z1, 0.0)); }, true};
    LevelData lvl1{&g1, t, options.mode, options.center_is_pole};
    std::vector<Point> bn;
    std::vector<double> bw;
    star_rule(rule, base, c, &lvl1, p, [&](cplx z, double w) {
      bn.emplace_back(z);
      bw.push_back(w);
    });
    if (options.base_only) {
      rule.dimension = 1;
      rule.nodes = std::move(bn);
      rule.weights = std::move(bw);
      return out;
    }
    add_fibers(rule, domain, bn, bw, options.resolution);
    return out;
  }

  if (options.base_only) throw SpecError("sublevel_rule: base_only needs a fibered domain and a z1-only field");
  if (options.mode == LevelMode::split)
    throw SpecError("sublevel_rule: split mode in C^2 needs a fibered domain and a field depending on z1 only");
  masked_tensor(rule, domain.bounding_box(), 4, options.resolution, std::min(options.refinement_depth, 2),
                [&](const Point& q) { return domain.contains(q) && G(q) < t; });
  return out;
}

QuadratureRule variety_rule(const Domain& domain, const VarietySpec& variety, int resolution) {
  QuadratureRule rule;
  rule.dimension = domain.dimension();
  rule.resolution = resolution;
  if (variety.kind == VarietyKind::point) {
    if (!domain.contains(variety.point)) throw SpecError("variety: point lies outside the domain");
    rule.nodes.push_back(variety.point);
    rule.weights.push_back(1.0);
    return rule;
  }
  if (!domain.is_fibered()) throw SpecError("variety: slices need a ball2 or bidisk domain");
  const cplx c = variety.point.z1;
  const double R = domain.fiber_radius(c);
  if (!(std::abs(c) < 1.0) || R <= 0.0) throw SpecError("variety: slice z1 = c does not meet the domain");
  std::vector<Point> pts;
  std::vector<double> ws;
  polar_product(pts, ws, 0.0, 0.0, R, std::max(16, resolution / 2), std::max(32, resolution));
  for (std::size_t i = 0; i < pts.size(); ++i) {
    rule.nodes.emplace_back(c, pts[i].z1);
    rule.weights.push_back(ws[i]);
  }
  return rule;
}

}  // namespace sharpext
