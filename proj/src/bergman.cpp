#include "sharpext/bergman.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "sharpext/parallel.hpp"

namespace sharpext {

// Basis

Basis Basis::monomials(int degree, cplx center, double scale) {
  if (degree < 0) throw SpecError("basis: degree must be >= 0");
  if (!(scale > 0.0)) throw SpecError("basis: scale must be positive");
  Basis b;
  b.c1_ = center;
  b.s1_ = scale;
  for (int j = 0; j <= degree; ++j) b.terms_.push_back({j, 0});
  return b;
}

Basis Basis::laurent(int J, double r_in, double r_out) {
  if (J < 0) throw SpecError("basis: J must be >= 0");
  Basis b = monomials(J, 0.0, r_out);
  b.pole_scale_ = r_in;
  for (int j = 1; j <= J; ++j) b.terms_.push_back({-j, 0});
  return b;
}

Basis Basis::local_laurent(int degree, cplx center, double scale, int J, double pole_scale) {
  Basis b = monomials(degree, center, scale);
  if (!(pole_scale > 0.0)) throw SpecError("basis: pole scale must be positive");
  b.pole_scale_ = pole_scale;
  for (int j = 1; j <= J; ++j) b.terms_.push_back({-j, 0});
  return b;
}

Basis Basis::total_degree(int degree, Point center, double scale1, double scale2) {
  if (degree < 0) throw SpecError("basis: degree must be >= 0");
  if (!(scale1 > 0.0) || !(scale2 > 0.0)) throw SpecError("basis: scales must be positive");
  Basis b;
  b.dimension_ = 2;
  b.c1_ = center.z1;
  b.c2_ = center.z2;
  b.s1_ = scale1;
  b.s2_ = scale2;
  for (int d = 0; d <= degree; ++d)
    for (int i = d; i >= 0; --i) b.terms_.push_back({i, d - i});
  return b;
}

int Basis::max_degree() const {
  int m = 0;
  for (const auto& t : terms_) m = std::max(m, t.degree());
  return m;
}

Eigen::VectorXcd Basis::operator()(const Point& p) const {
  int pmax = 0, nmax = 0, qmax = 0;
  for (const auto& t : terms_) {
    if (t.e1 >= 0) pmax = std::max(pmax, t.e1);
    else nmax = std::max(nmax, -t.e1);
    qmax = std::max(qmax, t.e2);
  }
  std::vector<cplx> up(pmax + 1), un(nmax + 1), vq(qmax + 1);
  const cplx u = (p.z1 - c1_) / s1_, w = pole_scale_ / p.z1, v = (p.z2 - c2_) / s2_;
  up[0] = un[0] = vq[0] = 1.0;
  for (int j = 1; j <= pmax; ++j) up[j] = up[j - 1] * u;
  for (int j = 1; j <= nmax; ++j) un[j] = un[j - 1] * w;
  for (int j = 1; j <= qmax; ++j) vq[j] = vq[j - 1] * v;
  Eigen::VectorXcd out(terms_.size());
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    const auto& t = terms_[i];
    out(i) = (t.e1 >= 0 ? up[t.e1] : un[-t.e1]) * vq[t.e2];
  }
  return out;
}

Basis Basis::truncated() const {
  int pmax = -1, nmax = 0;
  for (const auto& t : terms_) {
    if (t.e1 >= 0) pmax = std::max(pmax, t.e1 + t.e2);
    else nmax = std::max(nmax, -t.e1);
  }
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    const auto& t = terms_[i];
    const bool top = t.e1 >= 0 ? (t.e1 + t.e2 == pmax) : (-t.e1 == nmax);
    if (!top) keep.push_back(i);
  }
  return subset(keep);
}

Basis Basis::subset(const std::vector<std::size_t>& keep) const {
  Basis b = *this;
  b.terms_.clear();
  for (std::size_t i : keep) b.terms_.push_back(terms_.at(i));
  return b;
}

json Basis::to_json() const {
  json terms = json::array();
  for (const auto& t : terms_) terms.push_back(dimension_ == 1 ? json(t.e1) : json::array({t.e1, t.e2}));
  return {{"dimension", dimension_},
          {"center", dimension_ == 1 ? json::array({c1_.real(), c1_.imag()})
                                     : json::array({json::array({c1_.real(), c1_.imag()}),
                                                    json::array({c2_.real(), c2_.imag()})})},
          {"scale", dimension_ == 1 ? json(s1_) : json::array({s1_, s2_})},
          {"pole_scale", pole_scale_},
          {"size", terms_.size()},
          {"terms", terms}};
}

// GramSystem

GramSystem::GramSystem(Basis basis, Eigen::MatrixXcd H, std::string weight_tag, double threshold)
    : basis_(std::move(basis)), H_(std::move(H)), weight_tag_(std::move(weight_tag)), threshold_(threshold) {
  const Eigen::Index n = H_.rows();
  if (n == 0 || H_.cols() != n) throw SpecError("gram: basis must be nonempty and the matrix square");
  const double hn = H_.norm();
  hermitian_error_ = hn > 0.0 ? (H_ - H_.adjoint()).norm() / hn : 0.0;
  H_ = 0.5 * (H_ + H_.adjoint()).eval();

  scale_.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double d = H_(i, i).real();
    scale_(i) = d > 0.0 && std::isfinite(d) ? 1.0 / std::sqrt(d) : 0.0;
  }
  const Eigen::MatrixXcd S = scale_.asDiagonal() * H_ * scale_.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(S);
  if (es.info() != Eigen::Success) throw NumericalError("gram: eigen-decomposition failed");
  const Eigen::VectorXd& ev = es.eigenvalues();
  const double top = ev.size() ? ev(ev.size() - 1) : 0.0;
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    if (top > 0.0 && ev(i) >= threshold_ * top) keep.push_back(i);
  rank_ = static_cast<int>(keep.size());
  if (rank_ == 0) throw NumericalError("gram: every direction fell below the drop threshold");
  U_.resize(n, rank_);
  lambda_.resize(rank_);
  for (int j = 0; j < rank_; ++j) {
    U_.col(j) = es.eigenvectors().col(keep[j]);
    lambda_(j) = ev(keep[j]);
  }
  retained_ratio_ = lambda_(0) / top;
}

double GramSystem::quadratic(const Eigen::VectorXcd& u) const {
  const Eigen::VectorXcd y = U_.adjoint() * scale_.asDiagonal() * u;
  double s = 0.0;
  for (int j = 0; j < rank_; ++j) s += std::norm(y(j)) / lambda_(j);
  return s;
}

Eigen::VectorXcd GramSystem::apply_pinv(const Eigen::VectorXcd& u) const {
  Eigen::VectorXcd y = U_.adjoint() * scale_.asDiagonal() * u;
  for (int j = 0; j < rank_; ++j) y(j) /= lambda_(j);
  return scale_.asDiagonal() * (U_ * y);
}

double GramSystem::retained_fraction(const Eigen::VectorXcd& u) const {
  const Eigen::VectorXcd su = scale_.asDiagonal() * u;
  const double total = su.norm();
  if (total == 0.0) return 1.0;
  return (U_.adjoint() * su).norm() / total;
}

double GramSystem::norm2(const Eigen::VectorXcd& c) const { return (c.adjoint() * H_ * c)(0, 0).real(); }

GramSystem GramSystem::subsystem(const std::vector<std::size_t>& keep) const {
  const Eigen::Index m = static_cast<Eigen::Index>(keep.size());
  Eigen::MatrixXcd S(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j) S(i, j) = H_(keep[i], keep[j]);
  return GramSystem(basis_.subset(keep), std::move(S), weight_tag_, threshold_);
}

json GramSystem::summary() const {
  return {{"size", H_.rows()},
          {"rank", rank_},
          {"dropped", dropped()},
          {"threshold", threshold_},
          {"retained_ratio", retained_ratio_},
          {"hermitian_error", hermitian_error_},
          {"weight", weight_tag_}};
}

GramSystem gram(const QuadratureRule& rule, const Basis& basis, const ScalarField& weight, double threshold,
                std::string weight_tag) {
  if (basis.size() == 0) throw SpecError("gram: empty basis");
  if (rule.empty()) throw NumericalError("gram: empty quadrature rule");
  const std::size_t N = rule.size();
  const Eigen::Index m = static_cast<Eigen::Index>(basis.size());
  constexpr std::size_t chunk = 4096;
  const std::size_t nchunks = (N + chunk - 1) / chunk;
  std::vector<Eigen::MatrixXcd> parts(nchunks);
  parallel_for(nchunks, [&](std::size_t c) {
    const std::size_t lo = c * chunk, hi = std::min(N, lo + chunk);
    Eigen::MatrixXcd B(static_cast<Eigen::Index>(hi - lo), m);
    for (std::size_t n = lo; n < hi; ++n) {
      const Point& x = rule.nodes[n];
      double w = rule.weights[n];
      if (weight) {
        const double v = weight(x);
        if (std::isnan(v) || v == -INFINITY) detail::throw_non_finite(n, x);
        w *= std::exp(-v);
      }
      const Eigen::VectorXcd b = basis(x);
      for (Eigen::Index i = 0; i < m; ++i)
        if (!std::isfinite(b(i).real()) || !std::isfinite(b(i).imag())) detail::throw_non_finite(n, x);
      B.row(static_cast<Eigen::Index>(n - lo)) = std::sqrt(w) * b.transpose();
    }
    parts[c] = B.adjoint() * B;
  });
  // Fixed binary combination tree.
  for (std::size_t stride = 1; stride < nchunks; stride *= 2)
    for (std::size_t i = 0; i + stride < nchunks; i += 2 * stride) parts[i] += parts[i + stride];
  return GramSystem(basis, std::move(parts[0]), weight_tag.empty() ? (weight ? "weighted" : "unweighted") : weight_tag,
                    threshold);
}

GramSystem fibered_gram(const Domain& domain, const QuadratureRule& base_rule, const Basis& basis,
                        const ScalarField& weight, double threshold, std::string weight_tag) {
  if (!domain.is_fibered()) throw SpecError("fibered_gram: needs ball2 or bidisk");
  if (basis.dimension() != 2 || std::abs(basis.center2()) > 0.0)
    throw SpecError("fibered_gram: basis must be two-dimensional and centered at z2 = 0");
  if (weight && !weight.z1_only) throw SpecError("fibered_gram: weight must depend on z1 only");
  if (base_rule.empty()) throw NumericalError("fibered_gram: empty base rule");
  const std::size_t N = base_rule.size();
  const Eigen::Index m = static_cast<Eigen::Index>(basis.size());
  int qmax = 0, emax = 0;
  for (const auto& t : basis.terms()) {
    if (t.e1 < 0) throw SpecError("fibered_gram: negative powers are not supported");
    qmax = std::max(qmax, t.e2);
    emax = std::max(emax, t.e1);
  }
  // Per node: base weight, fiber radius, powers of u1.
  Eigen::MatrixXcd P(static_cast<Eigen::Index>(N), emax + 1);
  Eigen::VectorXd w(static_cast<Eigen::Index>(N)), R2(static_cast<Eigen::Index>(N));
  for (std::size_t n = 0; n < N; ++n) {
    const Point x(base_rule.nodes[n].z1, 0.0);
    double v = base_rule.weights[n];
    if (weight) {
      const double e = weight(x);
      if (std::isnan(e) || e == -INFINITY) detail::throw_non_finite(n, x);
      v *= std::exp(-e);
    }
    w(n) = v;
    const double R = domain.fiber_radius(x.z1);
    R2(n) = R * R;
    const cplx u = (x.z1 - basis.center1()) / basis.scale1();
    cplx pw = 1.0;
    for (int e = 0; e <= emax; ++e) {
      P(n, e) = pw;
      pw *= u;
    }
  }
  Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(m, m);
  const double s2sq = basis.scale2() * basis.scale2();
  for (int q = 0; q <= qmax; ++q) {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index i = 0; i < m; ++i)
      if (basis.term(i).e2 == q) idx.push_back(i);
    if (idx.empty()) continue;
    Eigen::MatrixXcd B(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t n = 0; n < N; ++n) {
      // integral over |z2| < R of |z2/s2|^{2q} = pi R^2 (R^2/s2^2)^q / (q + 1)
      const double f = w(n) * pi * R2(n) * std::pow(R2(n) / s2sq, q) / (q + 1.0);
      const double sf = std::sqrt(f);
      for (std::size_t j = 0; j < idx.size(); ++j) B(n, j) = sf * P(n, basis.term(idx[j]).e1);
    }
    const Eigen::MatrixXcd Hq = B.adjoint() * B;
    for (std::size_t a = 0; a < idx.size(); ++a)
      for (std::size_t b = 0; b < idx.size(); ++b) H(idx[a], idx[b]) = Hq(a, b);
  }
  return GramSystem(basis, std::move(H), weight_tag.empty() ? (weight ? "weighted" : "unweighted") : weight_tag,
                    threshold);
}

namespace {

double factorial(int n) { return std::tgamma(n + 1.0); }

}  // namespace

std::optional<GramSystem> analytic_gram(const Domain& domain, const Basis& basis, double threshold) {
  const Eigen::Index m = static_cast<Eigen::Index>(basis.size());
  Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(m, m);
  const auto& spec = domain.spec();
  const double s1 = basis.scale1(), s2 = basis.scale2();
  for (Eigen::Index i = 0; i < m; ++i) {
    const BasisTerm& t = basis.term(i);
    double v = 0.0;
    switch (domain.kind()) {
      case DomainKind::disk: {
        if (basis.dimension() != 1 || t.e1 < 0 || std::abs(basis.center1() - spec.center) > 1e-14) return std::nullopt;
        const double R = spec.radius;
        v = pi * R * R * std::pow(R / s1, 2 * t.e1) / (t.e1 + 1);
        break;
      }
      case DomainKind::annulus: {
        if (basis.dimension() != 1 || std::abs(basis.center1()) > 1e-14) return std::nullopt;
        const double ri = spec.r_inner, ro = spec.r_outer;
        if (t.e1 >= 0) {
          v = 2.0 * pi * (ro * ro * std::pow(ro / s1, 2 * t.e1) - ri * ri * std::pow(ri / s1, 2 * t.e1)) /
              (2.0 * t.e1 + 2.0);
        } else {
          const int j = -t.e1;
          const double rho = basis.pole_scale();
          if (j == 1) {
            v = 2.0 * pi * rho * rho * std::log(ro / ri);
          } else {
            v = 2.0 * pi * (ri * ri * std::pow(rho / ri, 2 * j) - ro * ro * std::pow(rho / ro, 2 * j)) /
                (2.0 * j - 2.0);
          }
        }
        break;
      }
      case DomainKind::bidisk:
      case DomainKind::ball2: {
        if (basis.dimension() != 2 || t.e1 < 0 || std::abs(basis.center1()) > 1e-14 ||
            std::abs(basis.center2()) > 1e-14)
          return std::nullopt;
        const double sc = std::pow(s1, -2.0 * t.e1) * std::pow(s2, -2.0 * t.e2);
        if (domain.kind() == DomainKind::bidisk) {
          v = pi * pi / ((t.e1 + 1.0) * (t.e2 + 1.0)) * sc;
        } else {
          v = pi * pi * factorial(t.e1) * factorial(t.e2) / factorial(t.e1 + t.e2 + 2) * sc;
        }
        break;
      }
      default: return std::nullopt;
    }
    H(i, i) = v;
  }
  // Distinct terms are orthogonal; repeated terms (allowed by subset) are not.
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < i; ++j) {
      const BasisTerm &a = basis.term(i), &b = basis.term(j);
      if (a.e1 == b.e1 && a.e2 == b.e2) H(i, j) = H(j, i) = H(i, i);
    }
  return GramSystem(basis, std::move(H), "unweighted (closed form)", threshold);
}

double kernel_at(const GramSystem& system, const Domain& domain, const Point& a) {
  if (!domain.contains(a)) throw SpecError("kernel_at: point lies outside the domain");
  const Eigen::VectorXcd u = system.basis()(a).conjugate();
  return system.quadratic(u);
}

KernelEstimate kernel_with_estimate(const GramSystem& system, const Domain& domain, const Point& a) {
  KernelEstimate e;
  e.value = kernel_at(system, domain, a);
  const Basis& b = system.basis();
  const Basis tb = b.truncated();
  if (tb.size() == 0) return e;
  std::vector<std::size_t> keep;
  for (std::size_t i = 0, j = 0; i < b.size() && j < tb.size(); ++i)
    if (b.term(i).e1 == tb.term(j).e1 && b.term(i).e2 == tb.term(j).e2) {
      keep.push_back(i);
      ++j;
    }
  const GramSystem sub = system.subsystem(keep);
  e.truncation = std::abs(e.value - sub.quadratic(sub.basis()(a).conjugate()));
  return e;
}

// Functional

Functional Functional::point_mass(Point a) {
  Functional f;
  f.kind_ = Kind::point_mass;
  f.a_ = a;
  std::ostringstream os;
  os << "point mass at (" << a.z1.real() << ", " << a.z1.imag() << ")";
  f.text_ = os.str();
  return f;
}

Functional Functional::density(const Domain& domain, const VarietySpec& variety,
                               std::function<cplx(const Point&)> g, int k, ScalarField phi, ScalarField B,
                               int resolution) {
  if (k < 1) throw SpecError("functional: k must be >= 1");
  Functional f;
  f.kind_ = Kind::density;
  f.a_ = variety.point;
  const QuadratureRule rule = variety_rule(domain, variety, resolution);
  const double sk = std::pow(pi, k) / std::tgamma(k + 1.0);
  for (std::size_t n = 0; n < rule.size(); ++n) {
    const Point& x = rule.nodes[n];
    double e = 0.0;
    if (phi) e -= phi(x);
    if (B) e += k * B(x);
    const cplx w = sk * rule.weights[n] * std::conj(g(x)) * std::exp(e);
    if (!std::isfinite(w.real()) || !std::isfinite(w.imag())) detail::throw_non_finite(n, x);
    f.nodes_.push_back(x);
    f.weights_.push_back(w);
  }
  f.text_ = variety.kind == VarietyKind::slice ? "density on the slice z1 = c" : "density on a point";
  return f;
}

cplx Functional::apply(const std::function<cplx(const Point&)>& h) const {
  if (kind_ == Kind::point_mass) return h(a_);
  std::vector<cplx> terms(nodes_.size());
  for (std::size_t n = 0; n < nodes_.size(); ++n) terms[n] = h(nodes_[n]) * weights_[n];
  return pairwise_sum(std::span<const cplx>(terms));
}

Eigen::VectorXcd Functional::pairing(const Basis& basis) const {
  if (kind_ == Kind::point_mass) return basis(a_);
  const Eigen::Index m = static_cast<Eigen::Index>(basis.size());
  Eigen::VectorXcd w(m);
  std::vector<Eigen::VectorXcd> vals(nodes_.size());
  for (std::size_t n = 0; n < nodes_.size(); ++n) vals[n] = basis(nodes_[n]) * weights_[n];
  for (Eigen::Index i = 0; i < m; ++i) {
    std::vector<cplx> terms(nodes_.size());
    for (std::size_t n = 0; n < nodes_.size(); ++n) terms[n] = vals[n](i);
    w(i) = pairwise_sum(std::span<const cplx>(terms));
  }
  return w;
}

std::string Functional::describe() const { return text_; }

double dual_norm(const GramSystem& system, const Functional& xi) {
  const Eigen::VectorXcd u = xi.pairing(system.basis()).conjugate();
  if (u.norm() > 0.0 && system.retained_fraction(u) < 1e-10)
    throw NumericalError("dual_norm: the pairing vector lies in the dropped subspace");
  return std::sqrt(system.quadratic(u));
}

// Profiles

std::string to_string(ProfileMode m) { return m == ProfileMode::restricted ? "restricted" : "weighted"; }

std::vector<double> Profile::shifted() const {
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = values[i] + k * t[i];
  return out;
}

std::string Profile::to_csv() const {
  std::string s = "# profile-csv v1\nt,value,k_value,mode,p\n";
  const auto sh = shifted();
  char buf[160];
  for (std::size_t i = 0; i < t.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%s,%.17g\n", t[i], values[i], sh[i], to_string(mode).c_str(),
                  mode == ProfileMode::weighted ? p : 0.0);
    s += buf;
  }
  return s;
}

json Profile::to_json() const {
  return {{"schema", "profile/1"}, {"quantity", quantity}, {"mode", to_string(mode)},
          {"p", mode == ProfileMode::weighted ? p : 0.0}, {"k", k}, {"t", t}, {"values", values},
          {"k_values", shifted()}, {"truncated", truncated}, {"metadata", metadata}};
}

std::vector<double> t_grid(double t_min, double t_max, double step) {
  if (!(step > 0.0) || !(t_min <= t_max)) throw SpecError("t grid: need t_min <= t_max and step > 0");
  if (t_max > 0.0) throw SpecError("t grid: t must be <= 0");
  std::vector<double> g;
  const long n = std::lround(std::floor((t_max - t_min) / step + 1e-6));
  for (long i = 0; i <= n; ++i) g.push_back(t_min + static_cast<double>(i) * step);
  return g;
}

Basis profile_basis(const Domain& domain, const Point& center, double scale1, double scale2,
                    const ProfileOptions& options) {
  if (domain.dimension() == 2) return Basis::total_degree(options.degree2, center, scale1, scale2);
  if (domain.kind() == DomainKind::annulus)
    return Basis::local_laurent(options.degree, center.z1, scale1, options.laurent_J, domain.spec().r_inner);
  return Basis::monomials(options.degree, center.z1, scale1);
}

GramSystem sublevel_system(const Domain& domain, const GreenModel& model, const Point& center, double t,
                           const ProfileOptions& options) {
  SublevelOptions so;
  so.resolution = options.resolution;
  so.mode = options.mode == ProfileMode::restricted ? LevelMode::restrict : LevelMode::split;
  so.center = center.z1;
  so.center_is_pole = std::abs(center.z1 - model.variety().point.z1) < 1e-14;
  so.grading_rate = options.mode == ProfileMode::weighted ? options.p : 0.0;
  const ScalarField G = model.field();
  const bool fibered = domain.is_fibered() && G.z1_only && (!options.phi || options.phi.z1_only) &&
                       std::abs(center.z2) == 0.0;
  so.base_only = fibered;
  const SublevelRule sr = sublevel_rule(domain, G, t, so);
  if (sr.empty()) throw NumericalError("sublevel system: D_t has no nodes at this resolution");

  double s1 = 0.0, s2 = 0.0;
  for (const Point& x : sr.rule.nodes) {
    if (options.mode == ProfileMode::weighted && !(G(x) < t)) continue;
    s1 = std::max(s1, std::abs(x.z1 - center.z1));
    s2 = std::max(s2, fibered ? domain.fiber_radius(x.z1) : std::abs(x.z2 - center.z2));
  }
  if (s1 == 0.0) s1 = 1.0;
  if (s2 == 0.0) s2 = 1.0;
  const Basis basis = profile_basis(domain, center, s1, s2, options);

  ScalarField weight = options.phi;
  std::string tag = "restricted to D_t";
  if (options.mode == ProfileMode::weighted) {
    weight = WeightEvaluator(options.phi ? options.phi : zero_field(), G, t, options.p).field();
    tag = "phi + p max(G - t, 0)";
  }
  if (fibered) return fibered_gram(domain, sr.rule, basis, weight, options.threshold, tag);
  return gram(sr.rule, basis, weight, options.threshold, tag);
}

namespace {

Profile run_profile(const Domain& domain, const GreenModel& model, const Point& center,
                    const std::vector<double>& t, const ProfileOptions& options,
                    const std::function<double(const GramSystem&)>& value, std::string quantity) {
  for (std::size_t i = 1; i < t.size(); ++i)
    if (!(t[i] > t[i - 1])) throw SpecError("profile: t grid must be strictly ascending");
  std::vector<std::optional<double>> vals(t.size());
  std::vector<int> sizes(t.size(), 0), dropped(t.size(), 0);
  parallel_for(t.size(), [&](std::size_t i) {
    try {
      const GramSystem sys = sublevel_system(domain, model, center, t[i], options);
      const double v = std::log(value(sys));
      if (std::isfinite(v)) vals[i] = v;
      sizes[i] = static_cast<int>(sys.basis().size());
      dropped[i] = sys.dropped();
    } catch (const NumericalError&) {
    }
  });
  Profile pr;
  pr.mode = options.mode;
  pr.p = options.p;
  pr.k = options.k;
  pr.quantity = std::move(quantity);
  int max_drop = 0, size = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (vals[i]) {
      pr.t.push_back(t[i]);
      pr.values.push_back(*vals[i]);
      max_drop = std::max(max_drop, dropped[i]);
      size = std::max(size, sizes[i]);
    } else {
      pr.truncated.push_back(t[i]);
    }
  }
  pr.metadata = {{"domain", to_string(domain.kind())},
                 {"center", json::array({center.z1.real(), center.z1.imag(), center.z2.real(), center.z2.imag()})},
                 {"green", model.description()},
                 {"resolution", options.resolution},
                 {"basis_size", size},
                 {"max_dropped", max_drop},
                 {"threshold", options.threshold}};
  return pr;
}

}  // namespace

Profile kernel_profile(const Domain& domain, const GreenModel& model, const Point& a, const std::vector<double>& t,
                       const ProfileOptions& options) {
  return run_profile(
      domain, model, a, t, options, [&](const GramSystem& s) { return kernel_at(s, domain, a); }, "log K_t(a)");
}

Profile dual_profile(const Domain& domain, const GreenModel& model, const Functional& xi,
                     const std::vector<double>& t, const ProfileOptions& options) {
  return run_profile(
      domain, model, xi.point(), t, options,
      [&](const GramSystem& s) {
        const double d = dual_norm(s, xi);
        return d * d;
      },
      "log ||xi||^2_t");
}

}  // namespace sharpext
