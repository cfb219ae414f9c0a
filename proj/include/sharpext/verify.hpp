#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sharpext/extension.hpp"

namespace sharpext {

/// Outcome of one verification check. `passed` is derived from `quantities`
/// and `tolerance` only.
struct CheckReport {
  /// Stable identifier of the verified statement, e.g. "suita-bound".
  std::string id;
  std::string statement;
  json instance = json::object();
  json quantities = json::object();
  json tolerance = json::object();
  bool passed = false;
  /// Rows of the refinement / t-grid table.
  json convergence = json::array();
  std::vector<std::string> notes;

  json to_json() const;
  std::string summary_line() const;
};

struct Tolerances {
  double convex = 1e-3;
  double mono = 1e-3;
  double bound_quadrature = 1e-3;
  double bound_analytic = 1e-6;
  double limit_t6 = 0.05;
  double limit_t8 = 0.02;
};

struct SuitaOptions {
  /// Closed-form Gram matrix and Robin constant when available.
  bool analytic = true;
  int resolution = 128;
  int degree = 25;
  int laurent_J = 50;
  int series_truncation = 64;
  double tolerance = 1e-6;
  /// When set, also require |ratio - 1| <= this value.
  std::optional<double> equality_tolerance;
};

/// pi K(a) e^{c} >= 1 - tol.
CheckReport check_suita(const Domain& domain, Point pole, const SuitaOptions& options = {});

/// Convexity of the profile values and monotonicity of values + k t.
CheckReport check_profile(const Profile& profile, const Tolerances& tol = {});

struct TubeOptions {
  int resolution = 64;
  /// Form version: multiply the integrand by |g'(z1)|^2 and drop e^{kB}.
  std::optional<AdjointData> form;
  /// The limit is an equality (B exact); also require |ratio - 1| <= tolerance.
  bool expect_equality = true;
  double tolerance = 0.05;
  /// Grid point where the equality tolerance is asserted.
  double t_check = -6.0;
};

/// e^{-kt} integral over D_t of chi against sigma_k integral over V of chi e^{kB}.
CheckReport check_tube_limit(const Domain& domain, const GreenModel& model, const VarietySpec& variety,
                             const ScalarField& B, const ScalarField& chi, const std::vector<double>& t, int k,
                             const TubeOptions& options = {});

/// Samples of an increasing function nu on an ascending grid ending at 0.
struct NuSample {
  std::vector<double> t;
  std::vector<double> nu;
  bool monotone = true;
  /// Normalization: nu / C <= e^{kt} on the grid.
  double C = 1.0;
};

NuSample nu_sample(const std::function<double(double)>& nu, const std::vector<double>& t);
/// nu(t) = volume of D_t.
NuSample volume_nu_sample(const Domain& domain, const GreenModel& model, const std::vector<double>& t,
                          int resolution = 64);

struct NuOptions {
  double tolerance = 1e-3;
  /// Fraction of the grid (deepest t) used for the liminf estimate.
  double window = 0.25;
};

/// Grid estimate of liminf e^{-kt} int_t^0 e^{-p(s-t)} dnu(s) against (k+1)/(p-k).
CheckReport check_nu_lemma(NuSample sample, int k, double p, const NuOptions& options = {});

struct FamilyOptions {
  ScalarField phi;
  int resolution = 128;
  int k = 1;
  /// Required II / I at the largest p.
  double tolerance = 0.02;
};

/// ||h||^2_{t,p} = I + II over p, with I the integral over D_t.
CheckReport check_family_convergence(const Domain& domain, const GreenModel& model, const HoloFunction& h, double t,
                                     const std::vector<double>& p_list, const FamilyOptions& options = {});

struct MonotonicityOptions {
  int degree = 25;
  int resolution = 128;
  double tolerance = 1e-6;
};

/// K_inner(a) >= K_outer(a) - tol for nested domains.
CheckReport check_domain_monotonicity(const Domain& inner, const Domain& outer, Point a,
                                      const MonotonicityOptions& options = {});
/// The same for the sublevel pair D_{t_inner} in D_{t_outer}.
CheckReport check_sublevel_monotonicity(const Domain& domain, const GreenModel& model, Point a, double t_inner,
                                        double t_outer, const ProfileOptions& options = {},
                                        double tolerance = 1e-6);

/// |pi K_t(a) e^{t + c} - 1| <= tolerance.
CheckReport check_asymptotic(const Domain& domain, const GreenModel& model, Point a, double t, double tolerance,
                             const ProfileOptions& options = {});

/// Extension certificate: ratio <= 1 + tol_bound, and |ratio - expected| <= tol_expected when given.
CheckReport check_extension(const ExtensionProblem& problem, std::optional<double> expected_ratio = std::nullopt,
                            double tol_expected = 1e-6, const Tolerances& tol = {});

/// Primal minimal norm against the dual supremum over the sampled functionals.
CheckReport check_duality(const ExtensionProblem& problem, const std::vector<Functional>& functionals,
                          double tolerance = 1e-3);

struct SuiteOptions {
  Tolerances tol;
  int profile_resolution = 64;
  int annulus_profile_resolution = 128;
  double t_min = -8.0;
  double t_step = 0.25;
  double p = 128.0;
};

struct SuiteResult {
  std::vector<CheckReport> reports;
  std::map<std::string, Profile> profiles;
  bool passed() const;
  /// The deterministic report bundle (no timings).
  json bundle() const;
};

/// Runs every shipped check. Reports are ordered by id, then by instance.
SuiteResult run_suite(const SuiteOptions& options = {});

/// Writes bundle.json and one CSV per profile into `dir` (created if needed).
void write_bundle(const SuiteResult& result, const std::string& dir);

}  // namespace sharpext
