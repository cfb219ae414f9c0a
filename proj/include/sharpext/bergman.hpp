#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "sharpext/geometry.hpp"
#include "sharpext/potential.hpp"

namespace sharpext {

/// Exponent pair of a basis element. Nonnegative e1 stands for
/// ((z1 - center1) / scale1)^e1; negative e1 for (pole_scale / z1)^{|e1|}.
struct BasisTerm {
  int e1 = 0;
  int e2 = 0;
  int degree() const { return (e1 < 0 ? -e1 : e1) + e2; }
};

/// A finite ordered family of holomorphic functions on C^n.
class Basis {
 public:
  /// ((z - center)/scale)^j, j = 0..degree.
  static Basis monomials(int degree, cplx center = 0.0, double scale = 1.0);
  /// Annulus Laurent family (z/r_out)^j for j = 0..J and (r_in/z)^j for j = 1..J.
  static Basis laurent(int J, double r_in, double r_out);
  /// Local monomials around `center` together with (pole_scale/z)^j, j = 1..J.
  static Basis local_laurent(int degree, cplx center, double scale, int J, double pole_scale);
  /// ((z1 - c1)/s1)^i ((z2 - c2)/s2)^j with i + j <= degree.
  static Basis total_degree(int degree, Point center = {}, double scale1 = 1.0, double scale2 = 1.0);

  int dimension() const { return dimension_; }
  std::size_t size() const { return terms_.size(); }
  const std::vector<BasisTerm>& terms() const { return terms_; }
  const BasisTerm& term(std::size_t i) const { return terms_[i]; }
  cplx center1() const { return c1_; }
  cplx center2() const { return c2_; }
  double scale1() const { return s1_; }
  double scale2() const { return s2_; }
  double pole_scale() const { return pole_scale_; }
  int max_degree() const;

  /// Values of all basis elements at p.
  Eigen::VectorXcd operator()(const Point& p) const;
  /// The same basis without the elements of maximal degree.
  Basis truncated() const;
  /// Sub-basis of the listed indices.
  Basis subset(const std::vector<std::size_t>& keep) const;
  json to_json() const;

 private:
  int dimension_ = 1;
  cplx c1_{}, c2_{};
  double s1_ = 1.0, s2_ = 1.0, pole_scale_ = 1.0;
  std::vector<BasisTerm> terms_;
};

/// Hermitian Gram matrix H_ij = <b_j, b_i> = integral of conj(b_i) b_j e^{-weight}
/// together with its stabilized pseudo-inverse. After Jacobi scaling the
/// eigenvalues below threshold * largest are dropped.
class GramSystem {
 public:
  static constexpr double default_threshold = 1e-12;

  GramSystem(Basis basis, Eigen::MatrixXcd H, std::string weight_tag, double threshold = default_threshold);

  const Basis& basis() const { return basis_; }
  const Eigen::MatrixXcd& matrix() const { return H_; }
  const std::string& weight_tag() const { return weight_tag_; }
  double threshold() const { return threshold_; }
  int rank() const { return rank_; }
  int dropped() const { return static_cast<int>(H_.rows()) - rank_; }
  /// ||H - H*|| / ||H|| before symmetrization.
  double hermitian_error() const { return hermitian_error_; }
  /// Smallest retained over largest eigenvalue of the scaled matrix.
  double retained_ratio() const { return retained_ratio_; }

  /// u* H^+ u.
  double quadratic(const Eigen::VectorXcd& u) const;
  /// H^+ u.
  Eigen::VectorXcd apply_pinv(const Eigen::VectorXcd& u) const;
  /// Fraction of the Jacobi-scaled u lying in retained directions.
  double retained_fraction(const Eigen::VectorXcd& u) const;
  /// c* H c, the squared norm of sum_i c_i b_i.
  double norm2(const Eigen::VectorXcd& c) const;
  /// The system on a sub-basis (rows and columns of `keep`).
  GramSystem subsystem(const std::vector<std::size_t>& keep) const;
  json summary() const;

 private:
  Basis basis_;
  Eigen::MatrixXcd H_;
  std::string weight_tag_;
  double threshold_;
  Eigen::VectorXd scale_;
  Eigen::MatrixXcd U_;      // retained eigenvectors of the scaled matrix
  Eigen::VectorXd lambda_;  // retained eigenvalues
  int rank_ = 0;
  double hermitian_error_ = 0.0;
  double retained_ratio_ = 0.0;
};

/// Gram matrix by quadrature. `weight` may be empty (weight 0).
GramSystem gram(const QuadratureRule& rule, const Basis& basis, const ScalarField& weight = {},
                double threshold = GramSystem::default_threshold, std::string weight_tag = "");

/// Gram matrix on a fibered C^2 domain (ball2, bidisk) from a rule over the
/// base variable z1; the integrals over the fibers |z2| < R(z1) are taken in
/// closed form. Needs a z1-only weight and a basis centered at z2 = 0.
GramSystem fibered_gram(const Domain& domain, const QuadratureRule& base_rule, const Basis& basis,
                        const ScalarField& weight = {}, double threshold = GramSystem::default_threshold,
                        std::string weight_tag = "");

/// Closed-form unweighted Gram matrix when the basis is orthogonal on the
/// domain (centered monomials on disk, ball2, bidisk; Laurent on the annulus).
std::optional<GramSystem> analytic_gram(const Domain& domain, const Basis& basis,
                                        double threshold = GramSystem::default_threshold);

/// K(a) = v* H^+ v with v the basis values at a.
double kernel_at(const GramSystem& system, const Domain& domain, const Point& a);

struct KernelEstimate {
  double value = 0.0;
  /// |K - K'| where K' uses the basis without its top-degree elements.
  double truncation = 0.0;
};
KernelEstimate kernel_with_estimate(const GramSystem& system, const Domain& domain, const Point& a);

/// A continuous linear functional on holomorphic functions: either
/// f -> f(a) or f -> sigma_k integral over V of f conj(g) e^{-phi + k B}.
class Functional {
 public:
  enum class Kind { point_mass, density };

  static Functional point_mass(Point a);
  static Functional density(const Domain& domain, const VarietySpec& variety, std::function<cplx(const Point&)> g,
                            int k, ScalarField phi = {}, ScalarField B = {}, int resolution = 64);

  Kind kind() const { return kind_; }
  const Point& point() const { return a_; }
  /// <xi, f>.
  cplx apply(const std::function<cplx(const Point&)>& f) const;
  /// w_i = <xi, b_i>.
  Eigen::VectorXcd pairing(const Basis& basis) const;
  std::string describe() const;

 private:
  Kind kind_ = Kind::point_mass;
  Point a_;
  std::vector<Point> nodes_;
  std::vector<cplx> weights_;  // sigma_k w conj(g) e^{-phi + k B}
  std::string text_;
};

/// sup over the span of |<xi, h>| / ||h||.
double dual_norm(const GramSystem& system, const Functional& xi);

enum class ProfileMode { restricted, weighted };
std::string to_string(ProfileMode m);

struct Profile {
  std::vector<double> t;
  /// log K_t(a) or log ||xi||^2_{t,p}.
  std::vector<double> values;
  ProfileMode mode = ProfileMode::restricted;
  double p = 0.0;
  /// Codimension used for the shifted profile values + k t.
  int k = 1;
  std::string quantity;
  json metadata = json::object();
  /// Grid points removed because D_t was empty or the Gram system collapsed.
  std::vector<double> truncated;

  std::vector<double> shifted() const;
  std::string to_csv() const;
  json to_json() const;
};

/// Ascending grid min, min + step, ..., max (inclusive within step/1e6).
std::vector<double> t_grid(double t_min, double t_max, double step);

struct ProfileOptions {
  ProfileMode mode = ProfileMode::restricted;
  double p = 128.0;
  int resolution = 64;
  /// Planar polynomial degree (local monomials).
  int degree = 25;
  /// Negative Laurent powers added on the annulus.
  int laurent_J = 20;
  /// Total degree in C^2.
  int degree2 = 12;
  ScalarField phi;
  double threshold = GramSystem::default_threshold;
  int k = 1;
};

/// The basis used for the weighted problem on D_t: local monomials scaled to the
/// size of D_t (plus negative Laurent powers on the annulus).
Basis profile_basis(const Domain& domain, const Point& center, double scale1, double scale2,
                    const ProfileOptions& options);

/// log K_t(a) over the grid.
Profile kernel_profile(const Domain& domain, const GreenModel& model, const Point& a, const std::vector<double>& t,
                       const ProfileOptions& options = {});

/// log ||xi||^2_{t,p} over the grid; `shifted()` gives k_xi(t).
Profile dual_profile(const Domain& domain, const GreenModel& model, const Functional& xi,
                     const std::vector<double>& t, const ProfileOptions& options = {});

/// The Gram system for D_t (restricted) or for the weight phi + p max(G - t, 0)
/// (weighted), centered at `center`.
GramSystem sublevel_system(const Domain& domain, const GreenModel& model, const Point& center, double t,
                           const ProfileOptions& options);

}  // namespace sharpext
