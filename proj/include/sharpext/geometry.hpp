#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "sharpext/core.hpp"

namespace sharpext {

enum class DomainKind { disk, annulus, ball2, bidisk, polygon, implicit };

std::string to_string(DomainKind kind);
DomainKind domain_kind_from_string(const std::string& name);

/// Axis-aligned box in the real coordinates (Re z1, Im z1[, Re z2, Im z2]).
struct Box {
  std::array<double, 4> lo{};
  std::array<double, 4> hi{};
};

/// Level function of an implicit planar region: the region is {level < 0}.
using LevelFunction = std::function<double(const Point&)>;

struct DomainSpec {
  DomainKind kind = DomainKind::disk;
  int dimension = 1;

  // disk
  cplx center{0.0};
  double radius = 1.0;
  // annulus, centered at the origin
  double r_inner = 0.0;
  double r_outer = 1.0;
  // polygon, counter-clockwise
  std::vector<cplx> vertices;
  // implicit: a named shape ("ellipse", "superellipse") or a caller-supplied level
  std::string shape;
  std::vector<double> shape_params;
  LevelFunction level;
  std::optional<Box> bbox;

  static DomainSpec disk(cplx center = 0.0, double radius = 1.0);
  static DomainSpec annulus(double r_inner, double r_outer);
  static DomainSpec ball2();
  static DomainSpec bidisk();
  static DomainSpec polygon(std::vector<cplx> vertices);
  static DomainSpec implicit(LevelFunction level, Box bbox, int dimension = 1);
  static DomainSpec ellipse(double a, double b);
};

/// Closed interval [lo, hi] of ray parameters.
struct Interval {
  double lo;
  double hi;
};

/// A validated region of C^n together with the geometric queries the
/// quadrature builders need.
class Domain {
 public:
  static Domain build(const DomainSpec& spec);

  const DomainSpec& spec() const { return spec_; }
  DomainKind kind() const { return spec_.kind; }
  int dimension() const { return spec_.dimension; }
  bool contains(const Point& p) const;
  const Box& bounding_box() const { return bbox_; }
  std::optional<double> exact_volume() const;
  /// A point well inside the region (disk center, polygon centroid, ...).
  cplx interior_point() const;
  /// True when the region is a disk/ball/bidisk/annulus with closed-form moments.
  bool is_analytic() const;

  // Planar queries.
  /// Parameter intervals of {center + rho e^{i theta}, rho >= 0} lying in the region.
  std::vector<Interval> ray_intervals(cplx center, double theta) const;
  /// Directions from `center` at which the ray/boundary structure has kinks
  /// (polygon vertices, tangents to circles).
  std::vector<double> event_angles(cplx center) const;
  /// `count` points on the boundary, ordered along each boundary component.
  std::vector<cplx> boundary_points(int count) const;
  /// Largest distance from `center` to a point of the closure.
  double max_radius_from(cplx center) const;

  // Fibered C^2 queries (ball2, bidisk): region = {z1 in base disk, |z2| < fiber_radius(z1)}.
  bool is_fibered() const;
  double fiber_radius(cplx z1) const;
  /// The base planar domain of a fibered C^2 region.
  Domain base() const;

 private:
  explicit Domain(DomainSpec spec);
  double level(const Point& p) const;

  DomainSpec spec_;
  Box bbox_;
};

struct QuadratureRule {
  std::vector<Point> nodes;
  std::vector<double> weights;
  int dimension = 1;
  int resolution = 0;
  int refinement_depth = 0;

  std::size_t size() const { return nodes.size(); }
  bool empty() const { return nodes.empty(); }
  double volume() const;
};

enum class QuadratureScheme { automatic, polar, star, masked_tensor };

struct QuadratureOptions {
  QuadratureScheme scheme = QuadratureScheme::automatic;
  int refinement_depth = 4;
  /// Center of star/polar rules; defaults to Domain::interior_point().
  std::optional<cplx> center;
};

/// Quadrature over the whole domain. `resolution` is cells (or nodes) per axis.
QuadratureRule quadrature(const Domain& domain, int resolution, const QuadratureOptions& options = {});

/// How a level set {G = t} enters a rule.
enum class LevelMode {
  restrict,  ///< keep only {G < t}
  split,     ///< keep the whole domain but break panels on {G = t}
};

struct SublevelOptions {
  int resolution = 64;
  LevelMode mode = LevelMode::restrict;
  /// Star center; for point poles pass the pole. For fibered C^2 domains this
  /// is the center in the base (z1) variable.
  std::optional<cplx> center;
  /// The center is a logarithmic pole of G (G(center) = -inf).
  bool center_is_pole = true;
  int refinement_depth = 4;
  /// Split mode only: expected decay rate of the integrand across {G = t}
  /// (for weights e^{-p max(G - t, 0)} pass p). Radial panels are refined
  /// geometrically from the level set when positive.
  double grading_rate = 0.0;
  /// Fibered C^2 domains with a z1-only field: return the base (z1) rule and
  /// leave the fibers to the caller.
  bool base_only = false;
};

/// Result of a sublevel quadrature; `rule` is empty when D_t has no nodes at
/// the requested resolution.
struct SublevelRule {
  QuadratureRule rule;
  double t = 0.0;
  bool empty() const { return rule.empty(); }
};

SublevelRule sublevel_rule(const Domain& domain, const ScalarField& G, double t,
                           const SublevelOptions& options = {});

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussLegendre {
  std::vector<double> x;
  std::vector<double> w;
};
const GaussLegendre& gauss_legendre(int order);

/// Pairwise sum over a fixed binary tree; independent of any execution schedule.
template <class T>
T pairwise_sum(std::span<const T> values) {
  if (values.empty()) return T{};
  if (values.size() <= 8) {
    T s{};
    for (const T& v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

namespace detail {
[[noreturn]] void throw_non_finite(std::size_t index, const Point& node);
}

/// Integral of `f` against `rule`. `f` may return double or cplx.
template <class F>
auto integrate(const QuadratureRule& rule, F&& f) {
  using R = std::decay_t<decltype(f(std::declval<const Point&>()))>;
  std::vector<R> terms(rule.size());
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const R v = f(rule.nodes[i]);
    bool finite;
    if constexpr (std::is_same_v<R, cplx>) {
      finite = std::isfinite(v.real()) && std::isfinite(v.imag());
    } else {
      finite = std::isfinite(v);
    }
    if (!finite) detail::throw_non_finite(i, rule.nodes[i]);
    terms[i] = v * rule.weights[i];
  }
  return pairwise_sum(std::span<const R>(terms));
}

enum class VarietyKind { point, slice };

/// The submanifold V. Shipped cases: a point of C^n (codimension n) and the
/// slice {z1 = c} of a C^2 domain (codimension 1).
struct VarietySpec {
  VarietyKind kind = VarietyKind::point;
  Point point;  ///< the point, or (c, 0) for a slice
  int dimension = 1;

  static VarietySpec at_point(Point a, int dimension = 1);
  static VarietySpec slice(cplx c);

  int codimension() const { return kind == VarietyKind::point ? dimension : 1; }
  /// Euclidean distance from p to V.
  double distance(const Point& p) const;
  /// Nearest point of V.
  Point project(const Point& p) const;
};

/// Quadrature over V for the induced euclidean measure: an atom of weight 1
/// for points, a polar rule on the slice disk for slices.
QuadratureRule variety_rule(const Domain& domain, const VarietySpec& variety, int resolution);

}  // namespace sharpext
