#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sharpext/bergman.hpp"

namespace sharpext {

/// Volume of the unit ball in C^k.
double sigma(int k);

using HoloFunction = std::function<cplx(const Point&)>;

/// sigma_k times the integral over V of |f|^2 e^{-phi + k B}.
double restriction_norm(const Domain& domain, const VarietySpec& variety, const HoloFunction& f,
                        const ScalarField& phi, const ScalarField& B, int k, int resolution = 64);

/// Holomorphic datum on V: the value at a point, or the z2-Taylor coefficients
/// of f(z2) on a slice {z1 = c}.
struct Datum {
  std::vector<cplx> coefficients;
  cplx operator()(const Point& p) const;
};

/// Defining map of V for the adjoint formulation: g = (z - c)^power, or the
/// disk automorphism (z - c)/(1 - conj(c) z). In C^2 g acts on z1.
struct AdjointData {
  enum class Kind { power, mobius };
  Kind kind = Kind::power;
  cplx c{};
  int power = 1;

  cplx operator()(cplx z) const;
  cplx derivative(cplx z) const;
  std::string describe() const;
};

struct GeneralizedData {
  ScalarField psi;
  double delta = 1.0;
};

enum class ExtensionMode { thm31, thm36, thm37 };
std::string to_string(ExtensionMode m);
ExtensionMode extension_mode_from_string(const std::string& s);

struct ExtensionProblem {
  explicit ExtensionProblem(Domain d) : domain(std::move(d)) {}

  Domain domain;
  VarietySpec variety;
  Datum datum;
  ScalarField phi;
  /// G defining the sublevel structure; its defect B enters the bound.
  GreenModel green;
  /// B on V; empty means B = 0.
  ScalarField B;
  int k = 1;
  ExtensionMode mode = ExtensionMode::thm31;
  std::optional<AdjointData> adjoint;
  std::optional<GeneralizedData> generalized;
  /// Basis degree (planar monomials, or total degree in C^2).
  int degree = 25;
  int resolution = 64;
  double threshold = GramSystem::default_threshold;
  /// Use closed-form Gram matrices where the domain and basis allow it.
  bool analytic = true;
};

struct ExtensionResult {
  ExtensionMode mode = ExtensionMode::thm31;
  Basis basis;
  Eigen::VectorXcd coefficients;
  double norm2 = 0.0;
  double bound = 0.0;
  double ratio = 0.0;
  double constraint_residual = 0.0;
  double orthogonality_residual = 0.0;
  int rank = 0;
  int dropped = 0;
  bool analytic_path = false;
  json diagnostics = json::object();

  /// F evaluated at p.
  cplx operator()(const Point& p) const;
  json to_json() const;
};

/// Minimal-norm extension of the datum over the basis span, with the bound of
/// the extension theorem (sigma_k integral over V of |f|^2 e^{-phi + k B}).
ExtensionResult minimal_extension(const ExtensionProblem& problem);

/// Adjoint formulation: extension of f wedge dg with the bound
/// sigma_k integral over V of |f|^2 e^{-phi}.
ExtensionResult adjoint_extension(const ExtensionProblem& problem);

/// Extension in the weight phi + k psi against (k/delta + 1) sigma_k times the
/// restriction norm.
ExtensionResult generalized_bound_check(const ExtensionProblem& problem);

/// Dispatches on problem.mode.
ExtensionResult solve_extension(const ExtensionProblem& problem);

/// Weighted Gram system used by the extension solvers (weight phi, or phi + k psi).
GramSystem extension_system(const ExtensionProblem& problem, const ScalarField& weight, bool* analytic = nullptr);

/// Complex Hessian (Levi form) of a real field at p by central differences.
Eigen::Matrix2cd levi_form(const ScalarField& f, const Point& p, int dimension, double h = 1e-3);

/// The largest value of sup |<xi, f>| / ||xi||* over the span of the given
/// functionals, a lower bound for the minimal norm by duality.
double dual_extension_bound(const GramSystem& system, const std::vector<Functional>& functionals,
                            const std::vector<cplx>& pairings_with_datum);

}  // namespace sharpext
