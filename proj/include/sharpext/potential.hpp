#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "sharpext/geometry.hpp"

namespace sharpext {

using json = nlohmann::ordered_json;

enum class GreenMethod { analytic_series, mfs, user_supplied };

std::string to_string(GreenMethod m);

/// A negative plurisubharmonic function G on D with logarithmic singularity
/// along a variety V (a point pole or a slice). For planar Green's functions
/// G(z) = log|z - a|^2 - h(z) with h harmonic.
class GreenModel {
 public:
  struct Impl;

  GreenModel() = default;
  explicit GreenModel(std::shared_ptr<const Impl> impl);

  double operator()(const Point& z) const;
  ScalarField field() const;

  /// The corrector log d_V^2 - G when the model carries it in closed or
  /// series form (empty for user-supplied fields).
  std::optional<double> corrector(const Point& z) const;

  GreenMethod method() const;
  const VarietySpec& variety() const;
  Point pole() const { return variety().point; }
  /// Max |G| over boundary probe points (0 for closed forms).
  double accuracy() const;
  /// Human-readable model description.
  std::string description() const;
  /// True when G depends on z1 only.
  bool z1_only() const;

  json to_json() const;
  static GreenModel from_json(const json& j);

  /// Wraps a caller-supplied G. `corrector` may be empty.
  static GreenModel user_supplied(ScalarField G, VarietySpec variety, std::string description,
                                  std::function<double(const Point&)> corrector = {});

  explicit operator bool() const { return static_cast<bool>(impl_); }

 private:
  std::shared_ptr<const Impl> impl_;
};

struct GreenOptions {
  /// Fourier truncation |m| <= truncation for annulus series.
  int series_truncation = 64;
  /// Force the method of fundamental solutions on any planar domain.
  bool force_mfs = false;
  int mfs_charges = 96;
  /// Collocation points per charge.
  int mfs_oversampling = 2;
  double mfs_dilation = 1.5;
  /// Max boundary residual accepted from an MFS fit.
  double mfs_tolerance = 1e-3;
};

/// Green's function of a planar domain with pole `pole`; for C^2 domains the
/// closed-form pluricomplex Green function (ball at the origin, bidisk anywhere).
GreenModel solve_green(const Domain& domain, Point pole, const GreenOptions& options = {});

/// G for a slice variety {z1 = c} of a fibered C^2 domain:
/// log|(z1 - c)/(1 - conj(c) z1)|^2.
GreenModel slice_green(const Domain& domain, cplx c);

struct RobinReport {
  double c = 0.0;
  Point pole;
  std::string method;
  double error_estimate = 0.0;
  /// Circle means used by the extrapolation (empty on closed-form paths).
  std::vector<double> radii;
  std::vector<double> means;
};

struct RobinOptions {
  /// Prefer the model's corrector at the pole over extrapolation.
  bool use_closed_form = true;
  /// Base radius r0; circles use 2^{-j} r0, j = 3..7. Zero picks a default.
  double base_radius = 0.0;
  int angles = 64;
  double tolerance = 1e-6;
};

/// c = lim_{z->a} (log|z - a|^2 - G(z)), so that pi K(a) e^{c} >= 1 is Suita's bound.
RobinReport robin_constant(const GreenModel& model, const RobinOptions& options = {});

/// limsup_{z->a} (log|z - a|^2 - psi(z)) for a field with a logarithmic pole at `pole`
/// (n = dimension). Estimated by maxima over shrinking circles/spheres.
double generalized_robin(const ScalarField& psi, Point pole, int dimension = 1, double base_radius = 0.25);

struct DefectBound {
  double A_est = 0.0;
  double B_max = 0.0;
  /// log d_V^2 - G off V; on V the limit value, extrapolated from circle means.
  ScalarField B_field;
  std::vector<double> radii;
  /// sup of log d_V^2 - G per tube radius.
  std::vector<double> B_sup;
  double grid_spacing = 0.0;
};

/// Estimates the constants of G <= log d_V^2 + A and G >= log d_V^2 - B near V.
DefectBound defect_bound(const GreenModel& model, const Domain& domain, const VarietySpec& variety,
                         double tube_radius);

/// phi + p max(G - t, 0).
class WeightEvaluator {
 public:
  WeightEvaluator(ScalarField phi, ScalarField G, double t, double p);

  double operator()(const Point& z) const;
  bool in_sublevel(const Point& z) const { return G_(z) < t_; }
  ScalarField field() const;
  const ScalarField& base() const { return phi_; }
  double t() const { return t_; }
  double p() const { return p_; }

 private:
  ScalarField phi_;
  ScalarField G_;
  double t_;
  double p_;
};

WeightEvaluator weight_family(const ScalarField& phi, const GreenModel& model, double t, double p);

/// Discrete Laplacian residual of G on a probe stencil around `z` (planar).
double laplacian_residual(const GreenModel& model, cplx z, double h = 1e-3);

}  // namespace sharpext
