#include "lightcone/spectral.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>

#include "lightcone/errors.hpp"
#include "lightcone/rng.hpp"

namespace lc {

ModeReport mode_roots(const QuadraticPoly& p) {
  if (p.a == 0.0) throw DomainError("leading coefficient must be nonzero");
  ModeReport rep;
  const double disc = p.b * p.b - 4.0 * p.a * p.c;
  if (disc >= 0.0) {
    const double sq = std::sqrt(disc);
    const double q = -0.5 * (p.b + (p.b >= 0 ? sq : -sq));
    if (q == 0.0) {
      rep.r1 = rep.r2 = 0.0;
    } else {
      const double x1 = q / p.a, x2 = p.c / q;
      rep.r1 = std::max(x1, x2);
      rep.r2 = std::min(x1, x2);
    }
  } else {
    const double re = -p.b / (2.0 * p.a);
    const double im = std::abs(std::sqrt(-disc) / (2.0 * p.a));
    rep.r1 = {re, im};
    rep.r2 = {re, -im};
  }
  rep.stable = rep.r1.real() < 0.0 && rep.r2.real() < 0.0;
  rep.verdict = rep.stable ? "mode stable" : "mode unstable";
  if (p.a == 1.0 && p.b == 3.0 && p.c == -4.0)
    rep.discrepancy =
        "the eigenvalues {4, -1} stated for this equation are not its roots; computed roots are {1, -4}; "
        "both sets contain a positive root so the instability verdict is unchanged";
  return rep;
}

cplx recurrence_denominator(long n, cplx nu, double kappa) {
  const double g = (1.0 - kappa) / (1.0 + kappa);
  const double nn = static_cast<double>(n);
  return nn * nn + (7.0 + 2.0 * nu) * nn + nu * nu + (8.0 - g) * nu + 12.0;
}

RecurrenceWeights recurrence_weights(long n, cplx nu, double kappa) {
  const double g = (1.0 - kappa) / (1.0 + kappa);
  const double nn = static_cast<double>(n);
  const cplx den = recurrence_denominator(n, nu, kappa);
  const double scale = 1.0 + nn * nn + std::norm(nu);
  if (std::abs(den) <= 1e-13 * scale) throw PoleError("recurrence weight denominator vanishes", n);
  const cplx num1 = (15.0 + 2.0 * nu) * nn + 3.0 * nu * nu +
                    (4.0 * kappa * kappa - 2.0 * g + 15.0) * nu + 24.0 - 4.0 * kappa * kappa;
  const cplx num2 = -((7.0 + 2.0 * nu) * nn + nu * nu + (8.0 - g) * nu + 12.0);
  return {num1 / den, num2 / den};
}

std::pair<mpq_class, mpq_class> recurrence_weights_exact(long n, const mpq_class& nu_in, const mpq_class& kappa_in) {
  mpq_class nu = nu_in, kappa = kappa_in;
  nu.canonicalize();
  kappa.canonicalize();
  const mpq_class g = (1 - kappa) / (1 + kappa);
  const mpq_class N(n);
  const mpq_class den = N * N + (7 + 2 * nu) * N + nu * nu + (8 - g) * nu + 12;
  if (den == 0) throw PoleError("recurrence weight denominator vanishes", n);
  const mpq_class num1 = (15 + 2 * nu) * N + 3 * nu * nu + (4 * kappa * kappa - 2 * g + 15) * nu + 24 -
                         4 * kappa * kappa;
  const mpq_class num2 = -((7 + 2 * nu) * N + nu * nu + (8 - g) * nu + 12);
  return {mpq_class(num1 / den), mpq_class(num2 / den)};
}

Scaled Scaled::from(cplx z) {
  Scaled s;
  const double mag = std::max(std::abs(z.real()), std::abs(z.imag()));
  if (mag == 0.0 || !std::isfinite(mag)) {
    s.m = z;
    return s;
  }
  int e = 0;
  std::frexp(mag, &e);
  s.m = {std::ldexp(z.real(), -e), std::ldexp(z.imag(), -e)};
  s.e = e;
  return s;
}

cplx Scaled::value() const {
  const int e2 = static_cast<int>(std::clamp(e, -100000L, 100000L));
  return {std::ldexp(m.real(), e2), std::ldexp(m.imag(), e2)};
}

double Scaled::log_abs() const {
  if (is_zero()) return -std::numeric_limits<double>::infinity();
  return std::log(std::abs(m)) + static_cast<double>(e) * std::numbers::ln2;
}

namespace {

cplx shift(cplx z, long by) {
  const int b = static_cast<int>(std::clamp(by, -100000L, 100000L));
  return {std::ldexp(z.real(), b), std::ldexp(z.imag(), b)};
}

}  // namespace

cplx scaled_ratio(const Scaled& x, const Scaled& y) {
  if (y.is_zero()) return {std::numeric_limits<double>::quiet_NaN(), 0.0};
  return shift(x.m / y.m, x.e - y.e);
}

cplx default_seed_a2(cplx nu, double kappa) {
  const double q = 1.0 - kappa * kappa;
  if (q == 0.0) throw DomainError("seed oracle requires kappa < 1");
  return (nu * nu + (4.0 * kappa * kappa - 1.0) * nu - 4.0 * kappa * kappa) / (4.0 * q);
}

FrobeniusSeries frobenius_series(cplx nu, double kappa, cplx a1, cplx a2, cplx a3, std::size_t N) {
  if (N < 4) throw DomainError("series length must be at least 4");
  FrobeniusSeries s;
  s.nu = nu;
  s.kappa = kappa;
  s.seeds[0] = a1;
  s.seeds[1] = a2;
  s.seeds[2] = a3;
  s.coeffs.reserve(N + 1);
  for (cplx z : {cplx(1.0, 0.0), a1, a2, a3}) s.coeffs.push_back(Scaled::from(z));
  for (std::size_t n = 0; n + 4 <= N; ++n) {
    const RecurrenceWeights w = recurrence_weights(static_cast<long>(n), nu, kappa);
    const Scaled& x0 = s.coeffs[n];
    const Scaled& x2 = s.coeffs[n + 2];
    long e = std::max(x0.is_zero() ? LONG_MIN : x0.e, x2.is_zero() ? LONG_MIN : x2.e);
    if (e == LONG_MIN) e = 0;
    const cplx next = recurrence_next(shift(x0.m, x0.e - e), shift(x2.m, x2.e - e), w);
    Scaled r = Scaled::from(next);
    if (!r.is_zero()) r.e += e;
    if (!r.is_zero() && r.log_abs() > std::log(1e300)) s.scaled = true;
    s.coeffs.push_back(r);
  }
  return s;
}

FrobeniusSeries frobenius_series(cplx nu, double kappa, std::size_t N) {
  return frobenius_series(nu, kappa, 0.0, default_seed_a2(nu, kappa), 0.0, N);
}

double recurrence_residual(const FrobeniusSeries& s) {
  double worst = 0.0;
  for (std::size_t n = 0; n + 4 < s.size(); ++n) {
    const RecurrenceWeights w = recurrence_weights(static_cast<long>(n), s.nu, s.kappa);
    const Scaled* t[3] = {&s.coeffs[n], &s.coeffs[n + 2], &s.coeffs[n + 4]};
    long e = LONG_MIN;
    for (auto* x : t)
      if (!x->is_zero()) e = std::max(e, x->e);
    if (e == LONG_MIN) continue;
    const cplx x0 = shift(t[0]->m, t[0]->e - e), x2 = shift(t[1]->m, t[1]->e - e),
               x4 = shift(t[2]->m, t[2]->e - e);
    const double mag = std::max({std::abs(x0), std::abs(x2), std::abs(x4)});
    const double r = std::abs(x4 + (-2.0 + w.p1) * x2 + (1.0 + w.p2) * x0) / mag;
    worst = std::max(worst, r);
  }
  return worst;
}

RatioDiagnostics ratio_diagnostics(const FrobeniusSeries& s, double xbar) {
  RatioDiagnostics d;
  const cplx nan(std::numeric_limits<double>::quiet_NaN(), 0.0);
  for (std::size_t n = 0; n + 2 < s.size(); ++n) {
    d.index.push_back(static_cast<long>(n));
    const bool zero = s.coeffs[n].is_zero();
    d.masked.push_back(zero);
    if (zero) {
      d.R.push_back(nan);
      d.d.push_back(nan);
      d.dtilde.push_back(nan);
      continue;
    }
    d.R.push_back(scaled_ratio(s.coeffs[n + 2], s.coeffs[n]));
    const cplx dn = scaled_ratio(s.coeffs[n + 1], s.coeffs[n]);
    d.d.push_back(dn);
    d.dtilde.push_back(std::pow(static_cast<double>(n), xbar) * dn);
  }
  return d;
}

namespace {

double cross(const PolyPoint& o, const PolyPoint& a, const PolyPoint& b) {
  return (a.alpha - o.alpha) * (b.beta - o.beta) - (a.beta - o.beta) * (b.alpha - o.alpha);
}

}  // namespace

NewtonPolygon newton_polygon(const std::vector<PolyPoint>& points) {
  if (points.empty()) throw DomainError("Newton polygon needs at least one point");
  for (const auto& p : points)
    if (!std::isfinite(p.alpha) || !std::isfinite(p.beta)) throw DomainError("non-finite polygon point");
  NewtonPolygon np;
  np.points = points;
  std::vector<PolyPoint> pts = points;
  std::sort(pts.begin(), pts.end(), [](const PolyPoint& a, const PolyPoint& b) {
    return a.alpha < b.alpha || (a.alpha == b.alpha && a.beta < b.beta);
  });
  std::vector<PolyPoint> lowest;
  for (const auto& p : pts)
    if (lowest.empty() || lowest.back().alpha != p.alpha) lowest.push_back(p);
  std::vector<PolyPoint> hull;
  for (const auto& p : lowest) {
    while (hull.size() >= 2 && cross(hull[hull.size() - 2], hull.back(), p) <= 0.0) hull.pop_back();
    hull.push_back(p);
  }
  for (std::size_t i = 0; i + 1 < hull.size(); ++i) {
    const double slope = (hull[i + 1].beta - hull[i].beta) / (hull[i + 1].alpha - hull[i].alpha);
    np.edges.push_back({hull[i], hull[i + 1], slope});
  }
  if (!np.edges.empty()) {
    np.steepest_slope = np.edges.front().slope;
    for (const auto& e : np.edges) np.steepest_slope = std::min(np.steepest_slope, e.slope);
    if (np.steepest_slope < 0.0) np.xbar = -1.0 / np.steepest_slope;
  }
  return np;
}

std::vector<PolyEdge> brute_force_hull(const std::vector<PolyPoint>& pts) {
  std::vector<PolyEdge> edges;
  const std::size_t n = pts.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const PolyPoint a = pts[i], b = pts[j];
      if (!(a.alpha < b.alpha)) continue;
      bool support = true, extreme = true;
      for (std::size_t k = 0; k < n && support; ++k) {
        const double c = cross(a, b, pts[k]);
        if (c < 0.0) support = false;
        if (c == 0.0 && (pts[k].alpha < a.alpha || pts[k].alpha > b.alpha)) extreme = false;
      }
      if (!support || !extreme) continue;
      bool dup = false;
      for (const auto& e : edges)
        if (e.from.alpha == a.alpha && e.from.beta == a.beta && e.to.alpha == b.alpha && e.to.beta == b.beta)
          dup = true;
      if (!dup) edges.push_back({a, b, (b.beta - a.beta) / (b.alpha - a.alpha)});
    }
  std::sort(edges.begin(), edges.end(), [](const PolyEdge& x, const PolyEdge& y) { return x.from.alpha < y.from.alpha; });
  return edges;
}

ReductionPolys reduction_polynomials(long n, cplx nu, double kappa) {
  const double g = (1.0 - kappa) / (1.0 + kappa);
  const double N = static_cast<double>(n);
  const double k2 = kappa * kappa;
  return {(N + 4.0) * (N + 3.0 + 2.0 * nu) + nu * nu - g * nu,
          nu * nu + nu * (4.0 * k2 - 2.0 * N - 1.0) - N * (2.0 * N - 1.0) - 4.0 * k2, cplx(N * N, 0.0)};
}

std::tuple<mpq_class, mpq_class, mpq_class> reduction_polynomials_exact(long n, const mpq_class& nu_in,
                                                                       const mpq_class& kappa_in) {
  mpq_class nu = nu_in, kappa = kappa_in;
  nu.canonicalize();
  kappa.canonicalize();
  const mpq_class g = (1 - kappa) / (1 + kappa);
  const mpq_class N(n);
  const mpq_class k2 = kappa * kappa;
  mpq_class p3 = (N + 4) * (N + 3 + 2 * nu) + nu * nu - g * nu;
  mpq_class p4 = nu * nu + nu * (4 * k2 - 2 * N - 1) - N * (2 * N - 1) - 4 * k2;
  mpq_class p5 = N * N;
  return {p3, p4, p5};
}

QuadraticPoly stable_root_poly(long n, double kappa) {
  const double g = (1.0 - kappa) / (1.0 + kappa);
  return {2.0, 4.0 * kappa * kappa - g + 7.0, 8.0 * static_cast<double>(n) + 12.0 - 4.0 * kappa * kappa};
}

StableRootReport stable_root_check(long n, double kappa) {
  if (!(kappa > 0 && kappa < 1)) throw DomainError("kappa must lie in (0,1)");
  const QuadraticPoly p = stable_root_poly(n, kappa);
  const ModeReport m = mode_roots(p);
  StableRootReport r;
  r.r1 = m.r1;
  r.r2 = m.r2;
  r.all_stable = m.r1.real() < -1e-12 && m.r2.real() < -1e-12;
  r.coefficients_positive = p.a > 0 && p.b > 0 && p.c > 0;
  r.agree = r.all_stable == r.coefficients_positive;
  return r;
}

Eigen::MatrixXd diff1_matrix(const RadialGrid& g) {
  const int n = g.n_cells;
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    Vec e(n, 0.0);
    e[j] = 1.0;
    for (int i = std::max(0, j - 1); i <= std::min(n - 1, j + 1); ++i) D(i, j) = stencil::d1(e.data(), i, n, g.h);
  }
  return D;
}

Eigen::MatrixXd diff2_matrix(const RadialGrid& g) {
  const int n = g.n_cells;
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    Vec e(n, 0.0);
    e[j] = 1.0;
    for (int i = std::max(0, j - 1); i <= std::min(n - 1, j + 1); ++i) D(i, j) = stencil::d2(e.data(), i, n, g.h);
  }
  return D;
}

Eigen::MatrixXd inv_rho_diff1_matrix(const RadialGrid& g) {
  const int n = g.n_cells;
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    Vec e(n, 0.0);
    e[j] = 1.0;
    for (int i = std::max(0, j - 1); i <= std::min(n - 1, j + 1); ++i)
      D(i, j) = stencil::inv_rho_d1(e.data(), i, n, g.h, g.nodes[i]);
  }
  return D;
}

OperatorMatrices assemble_operator(const RadialGrid& g, double kappa) {
  if (!(kappa > 0 && kappa < 1)) throw DomainError("kappa must lie in (0,1)");
  const int n = g.n_cells;
  const double k2 = kappa * kappa, q = 1.0 - k2;
  const Eigen::MatrixXd D1 = diff1_matrix(g), D2 = diff2_matrix(g), G = inv_rho_diff1_matrix(g);
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);

  OperatorMatrices m;
  m.n = n;
  m.kappa = kappa;
  m.a_rho.resize(n);
  m.b_rho.resize(n);
  Eigen::MatrixXd K(n, n), C(n, n), W1(n, n), W2(n, n), P1(n, n);
  for (int i = 0; i < n; ++i) {
    const double r = g.nodes[i], om = 1.0 - r * r;
    const double D = 1.0 + (k2 - 1.0) * r * r;
    const double a = -r * r * q * om / D - r * r;
    const double b = -4.0 * r * q * om / D + 2.0 * r * q * q * om * om / (D * D);
    m.a_rho[i] = a;
    m.b_rho[i] = b;
    const Eigen::RowVectorXd principal = q * om * om * D2.row(i) + q * om * G.row(i);
    K.row(i) = (principal + 4.0 * k2 * I.row(i)) / D;
    C.row(i) = (-(4.0 * k2 - 1.0 + (k2 - 1.0) * (k2 - 1.0) * r * r) * I.row(i) - 2.0 * q * r * om * D1.row(i)) / D;
    W1.row(i) = (principal + (a / r + b) * D1.row(i)) / D - I.row(i);
    W2.row(i) = C.row(i);
    P1.row(i) = (4.0 * k2 / (1.0 + (k2 - 1.0) * r) + 1.0) * I.row(i) - (a / r + b) * D1.row(i);
  }
  m.varpi1 = W1;
  m.varpi2 = W2;
  m.tabulated_a1_block = P1;
  m.A = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  m.A.topRightCorner(n, n) = I;
  m.A.bottomLeftCorner(n, n) = K;
  m.A.bottomRightCorner(n, n) = C;
  m.A0 = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  m.A0.topRightCorner(n, n) = I;
  m.A0.bottomLeftCorner(n, n) = W1;
  m.A0.bottomRightCorner(n, n) = W2;
  m.A1 = m.A - m.A0;
  return m;
}

std::vector<cplx> discrete_spectrum(const Eigen::MatrixXd& A) {
  if (A.rows() != A.cols()) throw DomainError("spectrum needs a square matrix");
  if (A.rows() > 1000) throw DomainError("matrix dimension exceeds the dense solver budget of 1000");
  Eigen::EigenSolver<Eigen::MatrixXd> es(A, false);
  if (es.info() != Eigen::Success) throw NumericalError("eigensolver did not converge");
  std::vector<cplx> ev(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  std::sort(ev.begin(), ev.end(), [](cplx a, cplx b) {
    return a.real() < b.real() || (a.real() == b.real() && a.imag() < b.imag());
  });
  return ev;
}

Vec random_boundary_function(const RadialGrid& g, std::uint64_t seed, std::uint64_t stream, int modes) {
  auto rng = make_rng(seed, stream);
  std::normal_distribution<double> nd(0.0, 1.0);
  std::vector<double> c(modes);
  for (auto& x : c) x = nd(rng);
  Vec u(g.size(), 0.0);
  for (std::size_t j = 0; j < g.size(); ++j)
    for (int k = 1; k <= modes; ++k)
      u[j] += c[k - 1] * std::cos((k - 0.5) * std::numbers::pi * g.nodes[j] / g.sigma) / (k * k);
  return u;
}

double dissipativity_form(const RadialGrid& g, const OperatorMatrices& m, const Vec& u1, const Vec& u2) {
  const int n = g.n_cells;
  if (static_cast<int>(u1.size()) != n || static_cast<int>(u2.size()) != n)
    throw DomainError("vector size does not match the grid");
  const Eigen::Map<const Eigen::VectorXd> U1(u1.data(), n), U2(u2.data(), n);
  const Eigen::VectorXd Au2 = m.varpi1 * U1 + m.varpi2 * U2;
  const Vec w(Au2.data(), Au2.data() + n);
  const Vec u1r = diff1(g, u1), u1rr = diff2(g, u1), u2r = diff1(g, u2), u2rr = diff2(g, u2), wr = diff1(g, w);
  double acc = 0.0;
  for (int j = 0; j < n; ++j) {
    const double r = g.nodes[j], r2 = r * r;
    acc += u2[j] * u1[j] + r2 * u2r[j] * u1r[j] + r2 * r2 * u2rr[j] * u1rr[j];
    acc += w[j] * u2[j] + r2 * wr[j] * u2r[j];
  }
  return acc * g.h;
}

DissipativityReport dissipativity_check(const RadialGrid& g, const OperatorMatrices& m, int trials,
                                        std::uint64_t seed) {
  if (trials < 1) throw DomainError("trials must be at least 1");
  DissipativityReport rep;
  rep.worst = -std::numeric_limits<double>::infinity();
  for (int t = 0; t < trials; ++t) {
    const Vec u1 = random_boundary_function(g, seed, 2 * static_cast<std::uint64_t>(t));
    const Vec u2 = random_boundary_function(g, seed, 2 * static_cast<std::uint64_t>(t) + 1);
    const double v = dissipativity_form(g, m, u1, u2);
    rep.values.push_back(v);
    rep.worst = std::max(rep.worst, v);
  }
  return rep;
}

}  // namespace lc
