#include "sharpext/extension.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <sstream>

namespace sharpext {

double sigma(int k) {
  if (k < 1) throw SpecError("sigma: k must be >= 1");
  return std::pow(pi, k) / std::tgamma(k + 1.0);
}

double restriction_norm(const Domain& domain, const VarietySpec& variety, const HoloFunction& f,
                        const ScalarField& phi, const ScalarField& B, int k, int resolution) {
  const QuadratureRule rule = variety_rule(domain, variety, resolution);
  const double s = integrate(rule, [&](const Point& x) {
    double e = 0.0;
    if (phi) e -= phi(x);
    if (B) e += k * B(x);
    return std::norm(f(x)) * std::exp(e);
  });
  return sigma(k) * s;
}

cplx Datum::operator()(const Point& p) const {
  cplx s = 0.0, pw = 1.0;
  for (cplx c : coefficients) {
    s += c * pw;
    pw *= p.z2;
  }
  return s;
}

cplx AdjointData::operator()(cplx z) const {
  if (kind == Kind::mobius) return (z - c) / (1.0 - std::conj(c) * z);
  return std::pow(z - c, power);
}

cplx AdjointData::derivative(cplx z) const {
  if (kind == Kind::mobius) {
    const cplx d = 1.0 - std::conj(c) * z;
    return (1.0 - std::norm(c)) / (d * d);
  }
  if (power == 1) return 1.0;
  return static_cast<double>(power) * std::pow(z - c, power - 1);
}

std::string AdjointData::describe() const {
  std::ostringstream os;
  if (kind == Kind::mobius) {
    os << "g = (z - c)/(1 - conj(c) z), c = " << c;
  } else {
    os << "g = (z - c)^" << power << ", c = " << c;
  }
  return os.str();
}

std::string to_string(ExtensionMode m) {
  switch (m) {
    case ExtensionMode::thm31: return "thm31";
    case ExtensionMode::thm36: return "thm36";
    case ExtensionMode::thm37: return "thm37";
  }
  return "unknown";
}

ExtensionMode extension_mode_from_string(const std::string& s) {
  if (s == "thm31") return ExtensionMode::thm31;
  if (s == "thm36") return ExtensionMode::thm36;
  if (s == "thm37") return ExtensionMode::thm37;
  throw SpecError("unknown extension mode '" + s + "' (expected thm31, thm36 or thm37)");
}

cplx ExtensionResult::operator()(const Point& p) const { return (basis(p).transpose() * coefficients)(0, 0); }

namespace {

json cvec(const Eigen::VectorXcd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(json::array({v(i).real(), v(i).imag()}));
  return a;
}

Basis extension_basis(const ExtensionProblem& pb) {
  const Domain& d = pb.domain;
  if (d.dimension() == 2) return Basis::total_degree(pb.degree);
  switch (d.kind()) {
    case DomainKind::disk: return Basis::monomials(pb.degree, d.spec().center, d.spec().radius);
    case DomainKind::annulus: return Basis::laurent(pb.degree, d.spec().r_inner, d.spec().r_outer);
    default: {
      const cplx c = d.interior_point();
      return Basis::monomials(pb.degree, c, d.max_radius_from(c));
    }
  }
}

ScalarField add_fields(const ScalarField& a, const ScalarField& b, double kb) {
  if (!a && !b) return {};
  if (!b) return a;
  return {[a, b, kb](const Point& p) { return (a ? a(p) : 0.0) + kb * b(p); }, (!a || a.z1_only) && b.z1_only};
}

// Constraint rows C and right side f with C c = f encoding F|_V = datum.
void constraints(const ExtensionProblem& pb, const Basis& basis, const Datum& datum, Eigen::MatrixXcd& C,
                 Eigen::VectorXcd& f) {
  const Eigen::Index m = static_cast<Eigen::Index>(basis.size());
  if (datum.coefficients.empty()) throw SpecError("extension: empty datum");
  if (pb.variety.kind == VarietyKind::point) {
    if (datum.coefficients.size() != 1) throw SpecError("extension: a point variety takes a single datum value");
    C = basis(pb.variety.point).transpose();
    f.resize(1);
    f(0) = datum.coefficients[0];
    return;
  }
  if (basis.dimension() != 2 || std::abs(basis.center2()) > 0.0)
    throw SpecError("extension: slice constraints need a C^2 basis centered at z2 = 0");
  int qmax = 0;
  for (const auto& t : basis.terms()) qmax = std::max(qmax, t.e2);
  if (static_cast<int>(datum.coefficients.size()) > qmax + 1) {
    std::ostringstream os;
    os << "extension: datum has z2-degree " << datum.coefficients.size() - 1 << " but the basis reaches only "
       << qmax << "; the constraints are infeasible";
    throw NumericalError(os.str());
  }
  C = Eigen::MatrixXcd::Zero(qmax + 1, m);
  const cplx u = (pb.variety.point.z1 - basis.center1()) / basis.scale1();
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto& t = basis.term(i);
    C(t.e2, i) = std::pow(u, t.e1) / std::pow(basis.scale2(), t.e2);
  }
  f = Eigen::VectorXcd::Zero(qmax + 1);
  for (std::size_t j = 0; j < datum.coefficients.size(); ++j) f(static_cast<Eigen::Index>(j)) = datum.coefficients[j];
}

ExtensionResult solve_constrained(const ExtensionProblem& pb, const Datum& datum, const ScalarField& weight) {
  bool analytic = false;
  const GramSystem sys = extension_system(pb, weight, &analytic);
  const Basis& basis = sys.basis();
  const Eigen::MatrixXcd& H = sys.matrix();
  const Eigen::Index m = H.rows();

  Eigen::MatrixXcd C;
  Eigen::VectorXcd f;
  constraints(pb, basis, datum, C, f);
  const Eigen::Index nc = C.rows();

  // Jacobi scaling of H and row scaling of C.
  Eigen::VectorXd s(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double d = H(i, i).real();
    s(i) = d > 0.0 ? 1.0 / std::sqrt(d) : 0.0;
  }
  const Eigen::MatrixXcd Hs = s.asDiagonal() * H * s.asDiagonal();
  Eigen::MatrixXcd Cs = C * s.asDiagonal();
  Eigen::VectorXcd fs = f;
  for (Eigen::Index r = 0; r < nc; ++r) {
    const double n = Cs.row(r).norm();
    if (n == 0.0) {
      if (std::abs(f(r)) > 0.0) {
        std::ostringstream os;
        os << "extension: constraint " << r << " has no support in the basis; worst residual " << std::abs(f(r));
        throw NumericalError(os.str(), std::abs(f(r)));
      }
      continue;
    }
    Cs.row(r) /= n;
    fs(r) /= n;
  }

  // Bordered system [Hs Cs*; Cs 0] with eigenvalue truncation.
  Eigen::MatrixXcd K = Eigen::MatrixXcd::Zero(m + nc, m + nc);
  K.topLeftCorner(m, m) = Hs;
  K.topRightCorner(m, nc) = Cs.adjoint();
  K.bottomLeftCorner(nc, m) = Cs;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(K);
  if (es.info() != Eigen::Success) throw NumericalError("extension: KKT eigen-decomposition failed");
  const Eigen::VectorXd& ev = es.eigenvalues();
  const double top = ev.cwiseAbs().maxCoeff();
  Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(m + nc);
  rhs.tail(nc) = fs;
  Eigen::VectorXcd y = es.eigenvectors().adjoint() * rhs;
  int rank = 0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (std::abs(ev(i)) >= pb.threshold * top) {
      y(i) /= ev(i);
      ++rank;
    } else {
      y(i) = 0.0;
    }
  }
  const Eigen::VectorXcd sol = es.eigenvectors() * y;
  const Eigen::VectorXcd ys = sol.head(m);
  const Eigen::VectorXcd c = s.asDiagonal() * ys;

  ExtensionResult res;
  res.basis = basis;
  res.coefficients = c;
  res.norm2 = sys.norm2(c);
  res.rank = rank;
  res.dropped = static_cast<int>(m + nc) - rank;
  res.analytic_path = analytic;

  const double fscale = std::max(1.0, f.cwiseAbs().maxCoeff());
  res.constraint_residual = (C * c - f).cwiseAbs().maxCoeff() / fscale;
  if (!(res.constraint_residual <= 1e-6)) {
    std::ostringstream os;
    os << "extension: constraints infeasible in the basis span; worst residual " << res.constraint_residual;
    throw NumericalError(os.str(), res.constraint_residual);
  }

  // Orthogonality against span cap I(V): null space of the scaled constraints.
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(Cs, Eigen::ComputeFullV);
  const Eigen::VectorXd& sv = svd.singularValues();
  Eigen::Index crank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > 1e-12 * std::max(1.0, sv(0))) ++crank;
  const double ynorm = std::sqrt(std::max(0.0, (ys.adjoint() * Hs * ys)(0, 0).real()));
  double orth = 0.0;
  for (Eigen::Index j = crank; j < m; ++j) {
    const Eigen::VectorXcd n = svd.matrixV().col(j);
    const double nn = (n.adjoint() * Hs * n)(0, 0).real();
    if (nn < 1e-8 || ynorm == 0.0) continue;
    orth = std::max(orth, std::abs((n.adjoint() * Hs * ys)(0, 0)) / (std::sqrt(nn) * ynorm));
  }
  res.orthogonality_residual = orth;
  res.diagnostics["gram"] = sys.summary();
  res.diagnostics["constraints"] = nc;
  return res;
}

}  // namespace

json ExtensionResult::to_json() const {
  return {{"mode", to_string(mode)},
          {"norm2", norm2},
          {"bound", bound},
          {"ratio", ratio},
          {"constraint_residual", constraint_residual},
          {"orthogonality_residual", orthogonality_residual},
          {"rank", rank},
          {"dropped", dropped},
          {"analytic_path", analytic_path},
          {"basis", basis.to_json()},
          {"coefficients", cvec(coefficients)},
          {"diagnostics", diagnostics}};
}

GramSystem extension_system(const ExtensionProblem& pb, const ScalarField& weight, bool* analytic) {
  const Basis basis = extension_basis(pb);
  if (analytic) *analytic = false;
  if (pb.analytic && !weight) {
    if (auto g = analytic_gram(pb.domain, basis, pb.threshold)) {
      if (analytic) *analytic = true;
      return *g;
    }
  }
  if (pb.domain.is_fibered() && (!weight || weight.z1_only)) {
    const QuadratureRule base = quadrature(pb.domain.base(), pb.resolution);
    return fibered_gram(pb.domain, base, basis, weight, pb.threshold);
  }
  return gram(quadrature(pb.domain, pb.resolution), basis, weight, pb.threshold);
}

ExtensionResult minimal_extension(const ExtensionProblem& pb) {
  if (pb.k < 1) throw SpecError("extension: k must be >= 1");
  ExtensionResult r = solve_constrained(pb, pb.datum, pb.phi);
  r.mode = ExtensionMode::thm31;
  r.bound = restriction_norm(pb.domain, pb.variety, pb.datum, pb.phi, pb.B, pb.k, pb.resolution);
  r.ratio = r.norm2 / r.bound;
  return r;
}

ExtensionResult adjoint_extension(const ExtensionProblem& pb) {
  if (!pb.adjoint) throw SpecError("adjoint_extension: the problem has no defining map g");
  const AdjointData& g = *pb.adjoint;
  if (g.kind == AdjointData::Kind::power && g.power < 1) throw SpecError("adjoint_extension: power must be >= 1");
  if (g.kind == AdjointData::Kind::mobius && !(std::abs(g.c) < 1.0))
    throw SpecError("adjoint_extension: Moebius parameter must satisfy |c| < 1");

  ExtensionProblem p = pb;
  p.variety = pb.domain.dimension() == 1 ? VarietySpec::at_point(g.c) : VarietySpec::slice(g.c);
  p.k = 1;
  if (pb.variety.kind != p.variety.kind || std::abs(pb.variety.point.z1 - g.c) > 1e-12)
    throw SpecError("adjoint_extension: the variety must be the zero set of g");

  // dg != 0 on V; along a slice dg = g'(c) dz1 at every node.
  const cplx dg = g.derivative(g.c);
  if (std::abs(dg) < 1e-8) {
    std::ostringstream os;
    os << "adjoint_extension: |dg| = " << std::abs(dg) << " < 1e-8 on V (" << g.describe() << ")";
    throw HypothesisError(os.str());
  }
  // |g| <= 1 on the nodes of D.
  const QuadratureRule rule = quadrature(pb.domain, std::max(16, pb.resolution / 2));
  for (std::size_t n = 0; n < rule.size(); ++n) {
    const double v = std::abs(g(rule.nodes[n].z1));
    if (v > 1.0 + 1e-12) {
      std::ostringstream os;
      os << "adjoint_extension: |g| = " << v << " > 1 at node " << n << " (" << rule.nodes[n].z1 << ")";
      throw HypothesisError(os.str());
    }
  }

  Datum d = pb.datum;
  for (cplx& c : d.coefficients) c *= dg;
  ExtensionResult r = solve_constrained(p, d, pb.phi);
  r.mode = ExtensionMode::thm36;
  r.bound = restriction_norm(p.domain, p.variety, pb.datum, pb.phi, {}, 1, pb.resolution);
  r.ratio = r.norm2 / r.bound;
  r.diagnostics["g"] = g.describe();
  r.diagnostics["dg_on_V"] = std::abs(dg);
  return r;
}

Eigen::Matrix2cd levi_form(const ScalarField& f, const Point& p, int dimension, double h) {
  // Real coordinates x1, y1, x2, y2.
  auto at = [&](const std::array<double, 4>& d) {
    return f(Point(p.z1 + cplx(d[0], d[1]), p.z2 + cplx(d[2], d[3])));
  };
  const int nr = 2 * dimension;
  double D[4][4] = {};
  const double f0 = f(p);
  for (int a = 0; a < nr; ++a)
    for (int b = a; b < nr; ++b) {
      std::array<double, 4> e{};
      if (a == b) {
        e[a] = h;
        const double fp = at(e);
        e[a] = -h;
        const double fm = at(e);
        D[a][a] = (fp - 2.0 * f0 + fm) / (h * h);
      } else {
        std::array<double, 4> pp{}, pm{}, mp{}, mm{};
        pp[a] = h, pp[b] = h;
        pm[a] = h, pm[b] = -h;
        mp[a] = -h, mp[b] = h;
        mm[a] = -h, mm[b] = -h;
        D[a][b] = D[b][a] = (at(pp) - at(pm) - at(mp) + at(mm)) / (4.0 * h * h);
      }
    }
  Eigen::Matrix2cd L = Eigen::Matrix2cd::Zero();
  for (int j = 0; j < dimension; ++j)
    for (int k = 0; k < dimension; ++k) {
      const int xj = 2 * j, yj = 2 * j + 1, xk = 2 * k, yk = 2 * k + 1;
      L(j, k) = 0.25 * cplx(D[xj][xk] + D[yj][yk], D[xj][yk] - D[yj][xk]);
    }
  return L;
}

ExtensionResult generalized_bound_check(const ExtensionProblem& pb) {
  if (!pb.generalized || !pb.generalized->psi) throw SpecError("generalized_bound_check: psi is missing");
  const GeneralizedData& gd = *pb.generalized;
  if (!(gd.delta > 0.0)) throw SpecError("generalized_bound_check: delta must be positive");
  const ScalarField phi = pb.phi ? pb.phi : zero_field();
  const int dim = pb.domain.dimension();

  const QuadratureRule rule = quadrature(pb.domain, std::max(16, pb.resolution / 2));
  if (pb.green) {
    for (std::size_t n = 0; n < rule.size(); ++n) {
      const Point& x = rule.nodes[n];
      const double g = pb.green(x), ps = gd.psi(x);
      if (!(g < ps)) {
        std::ostringstream os;
        os << "generalized_bound_check: G < psi fails at node " << n << " (" << x.z1 << ", " << x.z2 << "): G = " << g
           << ", psi = " << ps;
        throw HypothesisError(os.str());
      }
    }
  }
  // dd^c phi >= delta dd^c psi at probe points.
  const std::size_t stride = std::max<std::size_t>(1, rule.size() / 64);
  double worst = 0.0;
  for (std::size_t n = 0; n < rule.size(); n += stride) {
    const Point& x = rule.nodes[n];
    const Eigen::Matrix2cd Lp = levi_form(phi, x, dim), Ls = levi_form(gd.psi, x, dim);
    const Eigen::Matrix2cd M = (Lp - gd.delta * Ls).topLeftCorner(dim, dim);
    const double tol = 1e-5 * (1.0 + Lp.norm() + gd.delta * Ls.norm());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(Eigen::MatrixXcd(0.5 * (M + M.adjoint())));
    const double lo = es.eigenvalues()(0);
    worst = std::min(worst, lo);
    if (lo < -tol) {
      std::ostringstream os;
      os << "generalized_bound_check: dd^c phi >= delta dd^c psi fails at probe point (" << x.z1 << ", " << x.z2
         << "); smallest eigenvalue " << lo;
      throw HypothesisError(os.str());
    }
  }

  const ScalarField weight = add_fields(pb.phi, gd.psi, static_cast<double>(pb.k));
  ExtensionResult r = solve_constrained(pb, pb.datum, weight);
  r.mode = ExtensionMode::thm37;
  const double rn = restriction_norm(pb.domain, pb.variety, pb.datum, pb.phi, pb.B, pb.k, pb.resolution);
  r.bound = (pb.k / gd.delta + 1.0) * rn;
  r.ratio = r.norm2 / r.bound;
  r.diagnostics["delta"] = gd.delta;
  r.diagnostics["restriction_norm"] = rn;
  r.diagnostics["hessian_margin"] = worst;
  return r;
}

ExtensionResult solve_extension(const ExtensionProblem& problem) {
  switch (problem.mode) {
    case ExtensionMode::thm31: return minimal_extension(problem);
    case ExtensionMode::thm36: return adjoint_extension(problem);
    case ExtensionMode::thm37: return generalized_bound_check(problem);
  }
  throw SpecError("extension: unknown mode");
}

double dual_extension_bound(const GramSystem& system, const std::vector<Functional>& functionals,
                            const std::vector<cplx>& pairings_with_datum) {
  const std::size_t L = functionals.size();
  if (L == 0 || pairings_with_datum.size() != L) throw SpecError("dual bound: functionals and pairings must match");
  Eigen::MatrixXcd HU(system.matrix().rows(), static_cast<Eigen::Index>(L));
  Eigen::MatrixXcd U(system.matrix().rows(), static_cast<Eigen::Index>(L));
  for (std::size_t l = 0; l < L; ++l) {
    U.col(l) = functionals[l].pairing(system.basis()).conjugate();
    HU.col(l) = system.apply_pinv(U.col(l));
  }
  Eigen::MatrixXcd M = U.adjoint() * HU;
  M = 0.5 * (M + M.adjoint()).eval();
  Eigen::VectorXcd p(static_cast<Eigen::Index>(L));
  for (std::size_t l = 0; l < L; ++l) p(l) = pairings_with_datum[l];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(M);
  const Eigen::VectorXd& ev = es.eigenvalues();
  const double top = ev(ev.size() - 1);
  const Eigen::VectorXcd y = es.eigenvectors().adjoint() * p;
  double s = 0.0;
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    if (top > 0.0 && ev(i) >= 1e-12 * top) s += std::norm(y(i)) / ev(i);
  return std::sqrt(s);
}

}  // namespace sharpext
