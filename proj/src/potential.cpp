#include "sharpext/potential.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>

namespace sharpext {

std::string to_string(GreenMethod m) {
  switch (m) {
    case GreenMethod::analytic_series: return "analytic_series";
    case GreenMethod::mfs: return "mfs";
    case GreenMethod::user_supplied: return "user_supplied";
  }
  return "unknown";
}

namespace {

json cj(cplx z) { return json::array({z.real(), z.imag()}); }
cplx cj(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

double log_abs2(cplx z) { return std::log(std::norm(z)); }

// Möbius map of the disk |z - c0| < R sending a to 0.
cplx disk_mobius(cplx z, cplx a, cplx c0, double R) {
  const cplx w = (z - c0) / R, al = (a - c0) / R;
  return (w - al) / (1.0 - std::conj(al) * w);
}

}  // namespace

struct GreenModel::Impl {
  VarietySpec variety;
  GreenMethod method = GreenMethod::analytic_series;
  double accuracy = 0.0;
  bool z1_only = false;

  virtual ~Impl() = default;
  virtual double G(const Point& z) const = 0;
  virtual std::optional<double> h(const Point&) const { return std::nullopt; }
  virtual std::string describe() const = 0;
  virtual json to_json() const = 0;
};

namespace {

struct DiskGreen final : GreenModel::Impl {
  cplx c0;
  double R;
  DiskGreen(cplx center, double radius, cplx a) : c0(center), R(radius) {
    variety = VarietySpec::at_point(a);
    z1_only = true;
  }
  cplx a() const { return variety.point.z1; }
  double G(const Point& z) const override { return log_abs2(disk_mobius(z.z1, a(), c0, R)); }
  std::optional<double> h(const Point& z) const override {
    const cplx w = (z.z1 - c0) / R, al = (a() - c0) / R;
    return std::log(R * R) + log_abs2(1.0 - std::conj(al) * w);
  }
  std::string describe() const override { return "disk Green function (Moebius closed form)"; }
  json to_json() const override {
    return {{"model", "disk"}, {"method", "analytic_series"}, {"center", cj(c0)}, {"radius", R},
            {"pole", cj(a())}, {"accuracy", accuracy}};
  }
};

// Harmonic corrector of the annulus r_in < |z| < r_out written as
// alpha + beta log|w| + 2 Re sum_m [A_m w^m + B_m (rho_in / conj(w))^m], w = z / r_out.
struct AnnulusGreen final : GreenModel::Impl {
  double r_in, r_out;
  double alpha = 0.0, beta = 0.0;
  std::vector<cplx> A, B;

  double G(const Point& z) const override { return log_abs2(z.z1 - variety.point.z1) - *h(z); }
  std::optional<double> h(const Point& z) const override {
    const cplx w = z.z1 / r_out;
    const double rho = r_in / r_out;
    const cplx u = rho / std::conj(w);
    double s = alpha + beta * std::log(std::abs(w));
    cplx wp = 1.0, up = 1.0, acc = 0.0;
    for (std::size_t m = 0; m < A.size(); ++m) {
      wp *= w;
      up *= u;
      acc += A[m] * wp + B[m] * up;
    }
    return s + 2.0 * acc.real();
  }
  std::string describe() const override {
    std::ostringstream os;
    os << "annulus Green function (Fourier series, |m| <= " << A.size() << ")";
    return os.str();
  }
  json to_json() const override {
    json a = json::array(), b = json::array();
    for (cplx v : A) a.push_back(cj(v));
    for (cplx v : B) b.push_back(cj(v));
    return {{"model", "annulus"}, {"method", "analytic_series"}, {"r_inner", r_in}, {"r_outer", r_out},
            {"pole", cj(variety.point.z1)}, {"alpha", alpha}, {"beta", beta}, {"A", a}, {"B", b},
            {"accuracy", accuracy}};
  }
};

struct MfsGreen final : GreenModel::Impl {
  double q0 = 0.0;
  std::vector<cplx> charges;
  std::vector<double> q;

  double G(const Point& z) const override { return log_abs2(z.z1 - variety.point.z1) - *h(z); }
  std::optional<double> h(const Point& z) const override {
    double s = q0;
    for (std::size_t k = 0; k < charges.size(); ++k) s += q[k] * log_abs2(z.z1 - charges[k]);
    return s;
  }
  std::string describe() const override {
    return "method of fundamental solutions (" + std::to_string(charges.size()) + " charges)";
  }
  json to_json() const override {
    json ch = json::array();
    for (cplx c : charges) ch.push_back(cj(c));
    return {{"model", "mfs"}, {"method", "mfs"}, {"pole", cj(variety.point.z1)}, {"q0", q0},
            {"charges", ch}, {"q", q}, {"accuracy", accuracy}};
  }
};

struct SliceGreen final : GreenModel::Impl {
  explicit SliceGreen(cplx c) {
    variety = VarietySpec::slice(c);
    z1_only = true;
  }
  cplx c() const { return variety.point.z1; }
  double G(const Point& z) const override { return log_abs2(disk_mobius(z.z1, c(), 0.0, 1.0)); }
  std::optional<double> h(const Point& z) const override { return log_abs2(1.0 - std::conj(c()) * z.z1); }
  std::string describe() const override { return "slice Green function log|(z1-c)/(1-conj(c) z1)|^2"; }
  json to_json() const override { return {{"model", "slice"}, {"method", "analytic_series"}, {"c", cj(c())}}; }
};

struct BallLog final : GreenModel::Impl {
  BallLog() { variety = VarietySpec::at_point(Point(0.0, 0.0), 2); }
  double G(const Point& z) const override { return std::log(z.norm2()); }
  std::optional<double> h(const Point&) const override { return 0.0; }
  std::string describe() const override { return "pluricomplex Green function of the unit ball, pole 0"; }
  json to_json() const override { return {{"model", "ball_log"}, {"method", "analytic_series"}}; }
};

struct BidiskPluri final : GreenModel::Impl {
  explicit BidiskPluri(Point a) { variety = VarietySpec::at_point(a, 2); }
  double G(const Point& z) const override {
    const Point& a = variety.point;
    return std::max(log_abs2(disk_mobius(z.z1, a.z1, 0.0, 1.0)), log_abs2(disk_mobius(z.z2, a.z2, 0.0, 1.0)));
  }
  std::string describe() const override { return "pluricomplex Green function of the bidisk"; }
  json to_json() const override {
    return {{"model", "bidisk_pluricomplex"},
            {"method", "analytic_series"},
            {"pole", json::array({cj(variety.point.z1), cj(variety.point.z2)})}};
  }
};

struct UserGreen final : GreenModel::Impl {
  ScalarField f;
  std::function<double(const Point&)> corr;
  std::string text;
  double G(const Point& z) const override { return f(z); }
  std::optional<double> h(const Point& z) const override {
    if (!corr) return std::nullopt;
    return corr(z);
  }
  std::string describe() const override { return text; }
  json to_json() const override {
    return {{"model", "user_supplied"}, {"method", "user_supplied"}, {"description", text}};
  }
};

double boundary_residual(const GreenModel::Impl& m, const Domain& d, int probes) {
  double r = 0.0;
  for (cplx b : d.boundary_points(probes)) r = std::max(r, std::abs(m.G(Point(b))));
  return r;
}

std::shared_ptr<AnnulusGreen> annulus_series(const Domain& d, cplx a, int M) {
  auto g = std::make_shared<AnnulusGreen>();
  g->variety = VarietySpec::at_point(a);
  g->z1_only = true;
  g->r_in = d.spec().r_inner;
  g->r_out = d.spec().r_outer;
  const double rho = g->r_in / g->r_out;
  const int N = 4 * M + 8;
  // Fourier coefficients of the boundary data log|z - a|^2 on both circles,
  // in the convention f = F_0 + 2 Re sum_{m>=1} F_m e^{i m theta}.
  auto coeffs = [&](double radius) {
    std::vector<cplx> F(M + 1, 0.0);
    std::vector<double> f(N);
    for (int n = 0; n < N; ++n) f[n] = log_abs2(std::polar(radius, 2.0 * pi * n / N) - a);
    for (int m = 0; m <= M; ++m) {
      std::vector<cplx> terms(N);
      for (int n = 0; n < N; ++n) terms[n] = f[n] * std::polar(1.0, -2.0 * pi * m * n / N);
      F[m] = pairwise_sum(std::span<const cplx>(terms)) / static_cast<double>(N);
    }
    return F;
  };
  const auto Fo = coeffs(g->r_out);
  const auto Fi = coeffs(g->r_in);
  g->alpha = Fo[0].real();
  g->beta = (Fi[0].real() - Fo[0].real()) / std::log(rho);
  g->A.resize(M);
  g->B.resize(M);
  for (int m = 1; m <= M; ++m) {
    const double rm = std::pow(rho, m);
    const cplx Bm = (Fi[m] - rm * Fo[m]) / (1.0 - rm * rm);
    g->B[m - 1] = Bm;
    g->A[m - 1] = Fo[m] - Bm * rm;
  }
  g->accuracy = boundary_residual(*g, d, 512);
  return g;
}

std::shared_ptr<MfsGreen> mfs_fit(const Domain& d, cplx a, const GreenOptions& o) {
  auto g = std::make_shared<MfsGreen>();
  g->variety = VarietySpec::at_point(a);
  g->method = GreenMethod::mfs;
  g->z1_only = true;
  const cplx c = d.interior_point();
  const int nq = o.mfs_charges;
  const int nc = nq * o.mfs_oversampling;
  for (cplx b : d.boundary_points(nq)) g->charges.push_back(c + o.mfs_dilation * (b - c));
  const auto col = d.boundary_points(nc);
  const int ncol = static_cast<int>(col.size()), nch = static_cast<int>(g->charges.size());
  Eigen::MatrixXd M(ncol, nch + 1);
  Eigen::VectorXd rhs(ncol);
  for (int i = 0; i < ncol; ++i) {
    M(i, 0) = 1.0;
    for (int k = 0; k < nch; ++k) M(i, k + 1) = log_abs2(col[i] - g->charges[k]);
    rhs(i) = log_abs2(col[i] - a);
  }
  const Eigen::VectorXd x = M.completeOrthogonalDecomposition().solve(rhs);
  g->q0 = x(0);
  g->q.assign(x.data() + 1, x.data() + x.size());
  // Probe between collocation points.
  g->accuracy = boundary_residual(*g, d, 3 * nc + 7);
  if (g->accuracy > o.mfs_tolerance) {
    std::ostringstream os;
    os << "solve_green: MFS boundary residual " << g->accuracy << " exceeds tolerance " << o.mfs_tolerance;
    throw NumericalError(os.str(), g->accuracy);
  }
  return g;
}

}  // namespace

GreenModel::GreenModel(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

double GreenModel::operator()(const Point& z) const { return impl_->G(z); }

ScalarField GreenModel::field() const {
  auto impl = impl_;
  return {[impl](const Point& z) { return impl->G(z); }, impl->z1_only};
}

std::optional<double> GreenModel::corrector(const Point& z) const { return impl_->h(z); }
GreenMethod GreenModel::method() const { return impl_->method; }
const VarietySpec& GreenModel::variety() const { return impl_->variety; }
double GreenModel::accuracy() const { return impl_->accuracy; }
std::string GreenModel::description() const { return impl_->describe(); }
bool GreenModel::z1_only() const { return impl_->z1_only; }
json GreenModel::to_json() const { return impl_->to_json(); }

GreenModel GreenModel::from_json(const json& j) {
  const std::string model = j.at("model").get<std::string>();
  if (model == "disk") {
    auto g = std::make_shared<DiskGreen>(cj(j.at("center")), j.at("radius").get<double>(), cj(j.at("pole")));
    return GreenModel(g);
  }
  if (model == "annulus") {
    auto g = std::make_shared<AnnulusGreen>();
    g->variety = VarietySpec::at_point(cj(j.at("pole")));
    g->z1_only = true;
    g->r_in = j.at("r_inner").get<double>();
    g->r_out = j.at("r_outer").get<double>();
    g->alpha = j.at("alpha").get<double>();
    g->beta = j.at("beta").get<double>();
    for (const auto& v : j.at("A")) g->A.push_back(cj(v));
    for (const auto& v : j.at("B")) g->B.push_back(cj(v));
    if (g->A.size() != g->B.size()) throw SpecError("green model: A and B lengths differ");
    g->accuracy = j.value("accuracy", 0.0);
    return GreenModel(g);
  }
  if (model == "mfs") {
    auto g = std::make_shared<MfsGreen>();
    g->variety = VarietySpec::at_point(cj(j.at("pole")));
    g->method = GreenMethod::mfs;
    g->z1_only = true;
    g->q0 = j.at("q0").get<double>();
    for (const auto& v : j.at("charges")) g->charges.push_back(cj(v));
    g->q = j.at("q").get<std::vector<double>>();
    if (g->q.size() != g->charges.size()) throw SpecError("green model: charge/weight lengths differ");
    g->accuracy = j.value("accuracy", 0.0);
    return GreenModel(g);
  }
  if (model == "slice") return GreenModel(std::make_shared<SliceGreen>(cj(j.at("c"))));
  if (model == "ball_log") return GreenModel(std::make_shared<BallLog>());
  if (model == "bidisk_pluricomplex") {
    const auto& p = j.at("pole");
    return GreenModel(std::make_shared<BidiskPluri>(Point(cj(p.at(0)), cj(p.at(1)))));
  }
  throw SpecError("green model: cannot deserialize model '" + model + "'");
}

GreenModel GreenModel::user_supplied(ScalarField G, VarietySpec variety, std::string description,
                                     std::function<double(const Point&)> corrector) {
  auto g = std::make_shared<UserGreen>();
  g->variety = variety;
  g->method = GreenMethod::user_supplied;
  g->z1_only = G.z1_only;
  g->f = std::move(G);
  g->corr = std::move(corrector);
  g->text = std::move(description);
  return GreenModel(g);
}

GreenModel solve_green(const Domain& domain, Point pole, const GreenOptions& options) {
  if (!domain.contains(pole)) throw SpecError("solve_green: pole lies outside the domain");
  if (domain.dimension() == 2) {
    if (domain.kind() == DomainKind::ball2) {
      if (pole.norm2() > 1e-28)
        throw SpecError("solve_green: the ball's pluricomplex Green function ships for pole 0 only");
      return GreenModel(std::make_shared<BallLog>());
    }
    if (domain.kind() == DomainKind::bidisk) return GreenModel(std::make_shared<BidiskPluri>(pole));
    throw SpecError("solve_green: no pluricomplex Green function for this C^2 domain");
  }
  const cplx a = pole.z1;
  if (!options.force_mfs) {
    if (domain.kind() == DomainKind::disk)
      return GreenModel(std::make_shared<DiskGreen>(domain.spec().center, domain.spec().radius, a));
    if (domain.kind() == DomainKind::annulus)
      return GreenModel(annulus_series(domain, a, options.series_truncation));
  }
  if (domain.kind() == DomainKind::annulus)
    throw SpecError("solve_green: MFS fit is implemented for simply connected domains only");
  return GreenModel(mfs_fit(domain, a, options));
}

GreenModel slice_green(const Domain& domain, cplx c) {
  if (!domain.is_fibered()) throw SpecError("slice_green: needs ball2 or bidisk");
  if (!(std::abs(c) < 1.0)) throw SpecError("slice_green: |c| must be < 1");
  return GreenModel(std::make_shared<SliceGreen>(c));
}

namespace {

// Least-squares line through (x_j, y_j); returns {intercept, max residual}.
std::pair<double, double> affine_fit(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double den = n * sxx - sx * sx;
  const double slope = den == 0.0 ? 0.0 : (n * sxy - sx * sy) / den;
  const double icpt = (sy - slope * sx) / n;
  double res = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) res = std::max(res, std::abs(icpt + slope * x[i] - y[i]));
  return {icpt, res};
}

// Sample directions on the unit sphere of C^n.
std::vector<Point> sphere_directions(int dimension, int angles) {
  std::vector<Point> dirs;
  if (dimension == 1) {
    for (int k = 0; k < angles; ++k) dirs.emplace_back(std::polar(1.0, 2.0 * pi * (k + 0.5) / angles));
    return dirs;
  }
  const int na = 6, nt = std::max(8, angles / 4);
  for (int ia = 0; ia <= na; ++ia) {
    const double al = 0.5 * pi * ia / na;
    for (int i1 = 0; i1 < nt; ++i1)
      for (int i2 = 0; i2 < nt; ++i2)
        dirs.emplace_back(std::polar(std::cos(al), 2.0 * pi * (i1 + 0.5) / nt),
                          std::polar(std::sin(al), 2.0 * pi * (i2 + 0.5) / nt));
  }
  return dirs;
}

Point offset(const Point& a, const Point& dir, double r) { return Point(a.z1 + r * dir.z1, a.z2 + r * dir.z2); }

}  // namespace

RobinReport robin_constant(const GreenModel& model, const RobinOptions& options) {
  const VarietySpec& v = model.variety();
  if (v.kind != VarietyKind::point) throw SpecError("robin_constant: the model needs a point pole");
  RobinReport rep;
  rep.pole = v.point;
  if (options.use_closed_form) {
    if (auto h = model.corrector(v.point)) {
      rep.c = *h;
      rep.method = model.method() == GreenMethod::mfs ? "mfs_corrector" : "closed_form";
      rep.error_estimate = model.accuracy();
      return rep;
    }
  }
  const double r0 = options.base_radius > 0.0 ? options.base_radius : 0.25;
  const auto dirs = sphere_directions(v.dimension, options.angles);
  std::vector<double> xs;
  for (int j = 3; j <= 7; ++j) {
    const double r = r0 * std::ldexp(1.0, -j);
    std::vector<double> vals;
    vals.reserve(dirs.size());
    for (const Point& d : dirs) {
      const Point z = offset(v.point, d, r);
      vals.push_back(std::log(r * r) - model(z));
    }
    rep.radii.push_back(r);
    rep.means.push_back(pairwise_sum(std::span<const double>(vals)) / static_cast<double>(vals.size()));
    xs.push_back(r * r);
  }
  const auto [c, spread] = affine_fit(xs, rep.means);
  rep.c = c;
  rep.error_estimate = spread;
  rep.method = "circle_extrapolation";
  if (!(spread <= options.tolerance) || !std::isfinite(c)) {
    std::ostringstream os;
    os << "robin_constant: extrapolation spread " << spread << " above tolerance " << options.tolerance;
    throw NumericalError(os.str(), spread);
  }
  return rep;
}

double generalized_robin(const ScalarField& psi, Point pole, int dimension, double base_radius) {
  const auto dirs = sphere_directions(dimension, 64);
  std::vector<double> xs, ys;
  for (int j = 3; j <= 7; ++j) {
    const double r = base_radius * std::ldexp(1.0, -j);
    double m = -1e300;
    for (const Point& d : dirs) m = std::max(m, std::log(r * r) - psi(offset(pole, d, r)));
    xs.push_back(r);
    ys.push_back(m);
  }
  const double d_prev = ys[3] - ys[2], d_last = ys[4] - ys[3];
  if (!std::isfinite(ys.back()) || (std::abs(d_last) > 0.1 && std::abs(d_last) > 0.7 * std::abs(d_prev))) {
    std::ostringstream os;
    os << "generalized_robin: log|z|^2 - psi does not converge at the pole (last increment " << d_last << ")";
    throw NumericalError(os.str(), std::abs(d_last));
  }
  return affine_fit(xs, ys).first;
}

DefectBound defect_bound(const GreenModel& model, const Domain& domain, const VarietySpec& variety,
                         double tube_radius) {
  if (!(tube_radius > 0.0)) throw SpecError("defect_bound: tube radius must be positive");
  DefectBound out;
  out.radii = {tube_radius, tube_radius / 2, tube_radius / 4};
  out.A_est = -1e300;
  out.B_max = -1e300;

  // Base points of V and unit normal directions.
  std::vector<Point> base;
  std::vector<Point> normals;
  if (variety.kind == VarietyKind::point) {
    base.push_back(variety.point);
    normals = sphere_directions(variety.dimension, 64);
  } else {
    const double R = 0.9 * domain.fiber_radius(variety.point.z1);
    base.emplace_back(variety.point.z1, 0.0);
    for (int ir = 1; ir <= 3; ++ir)
      for (int k = 0; k < 8; ++k)
        base.emplace_back(variety.point.z1, std::polar(R * ir / 3.0, 2.0 * pi * k / 8));
    for (int k = 0; k < 16; ++k) normals.emplace_back(std::polar(1.0, 2.0 * pi * (k + 0.5) / 16), 0.0);
  }
  out.grid_spacing = 2.0 * pi * tube_radius / static_cast<double>(normals.size());

  for (double r : out.radii) {
    double bsup = -1e300;
    for (const Point& b : base)
      for (const Point& n : normals) {
        const Point z = offset(b, n, r);
        if (!domain.contains(z)) throw SpecError("defect_bound: tube grid leaves the domain; shrink the tube radius");
        const double g = model(z);
        const double ld = std::log(r * r);
        out.A_est = std::max(out.A_est, g - ld);
        bsup = std::max(bsup, ld - g);
      }
    out.B_sup.push_back(bsup);
    out.B_max = std::max(out.B_max, bsup);
  }
  const double g1 = out.B_sup[1] - out.B_sup[0], g2 = out.B_sup[2] - out.B_sup[1];
  if (!std::isfinite(out.B_max) || !std::isfinite(out.A_est) || (g1 > 0.5 && g2 > 0.5) ||
      (-g1 > 0.5 && -g2 > 0.5)) {
    std::ostringstream os;
    os << "defect_bound: log d_V^2 - G grows under tube refinement (" << out.B_sup[0] << ", " << out.B_sup[1]
       << ", " << out.B_sup[2] << "); G violates the logarithmic-pole conditions";
    throw NumericalError(os.str());
  }

  // B on V: circle means of log d^2 - G extrapolated affinely in d^2.
  const std::vector<Point> ring = normals;
  const double rl = tube_radius / 4;
  const VarietySpec V = variety;
  const GreenModel G = model;
  out.B_field = ScalarField{[G, V, ring, rl](const Point& z) {
                              const double d = V.distance(z);
                              if (d > 1e-6 * rl) return std::log(d * d) - G(z);
                              const Point b = V.project(z);
                              std::vector<double> xs, ys;
                              for (int j = 0; j < 3; ++j) {
                                const double r = rl * std::ldexp(1.0, -j);
                                double s = 0.0;
                                for (const Point& n : ring) s += std::log(r * r) - G(offset(b, n, r));
                                xs.push_back(r * r);
                                ys.push_back(s / static_cast<double>(ring.size()));
                              }
                              return affine_fit(xs, ys).first;
                            },
                            model.z1_only()};
  return out;
}

WeightEvaluator::WeightEvaluator(ScalarField phi, ScalarField G, double t, double p)
    : phi_(std::move(phi)), G_(std::move(G)), t_(t), p_(p) {
  if (t > 0.0) throw SpecError("weight_family: t must be <= 0");
  if (!(p > 0.0)) throw SpecError("weight_family: p must be positive");
}

double WeightEvaluator::operator()(const Point& z) const {
  const double g = G_(z);
  return (phi_ ? phi_(z) : 0.0) + (g > t_ ? p_ * (g - t_) : 0.0);
}

ScalarField WeightEvaluator::field() const {
  WeightEvaluator self = *this;
  return {[self](const Point& z) { return self(z); }, (!phi_ || phi_.z1_only) && G_.z1_only};
}

WeightEvaluator weight_family(const ScalarField& phi, const GreenModel& model, double t, double p) {
  return WeightEvaluator(phi, model.field(), t, p);
}

double laplacian_residual(const GreenModel& model, cplx z, double h) {
  const cplx e[4] = {h, -h, cplx(0, h), cplx(0, -h)};
  double s = -4.0 * model(Point(z));
  for (cplx d : e) s += model(Point(z + d));
  return std::abs(s) / (h * h);
}

}  // namespace sharpext
