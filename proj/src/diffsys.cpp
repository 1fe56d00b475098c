#include "lightcone/diffsys.hpp"

#include <cmath>
#include <sstream>

#include "lightcone/errors.hpp"

namespace lc {

RationalMatrix4::RationalMatrix4() {
  for (auto& x : e) x = 0;
}

RationalMatrix4 RationalMatrix4::identity() { return diagonal(1, 1, 1, 1); }

RationalMatrix4 RationalMatrix4::from_rows(std::initializer_list<std::initializer_list<mpq_class>> rows) {
  RationalMatrix4 m;
  int i = 0;
  for (const auto& r : rows) {
    int j = 0;
    for (const auto& x : r) m(i, j++) = x;
    ++i;
  }
  return m;
}

RationalMatrix4 RationalMatrix4::diagonal(const mpq_class& a, const mpq_class& b, const mpq_class& c,
                                          const mpq_class& d) {
  RationalMatrix4 m;
  m(0, 0) = a;
  m(1, 1) = b;
  m(2, 2) = c;
  m(3, 3) = d;
  return m;
}

RationalMatrix4 RationalMatrix4::operator*(const RationalMatrix4& o) const {
  RationalMatrix4 r;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      mpq_class acc = 0;
      for (int k = 0; k < 4; ++k) acc += (*this)(i, k) * o(k, j);
      r(i, j) = acc;
    }
  return r;
}

RationalMatrix4 RationalMatrix4::operator-(const RationalMatrix4& o) const {
  RationalMatrix4 r;
  for (int i = 0; i < 16; ++i) r.e[i] = e[i] - o.e[i];
  return r;
}

bool RationalMatrix4::operator==(const RationalMatrix4& o) const { return first_mismatch(*this, o) < 0; }

mpq_class RationalMatrix4::determinant() const {
  std::array<mpq_class, 16> a = e;
  mpq_class det = 1;
  for (int c = 0; c < 4; ++c) {
    int p = c;
    while (p < 4 && a[4 * p + c] == 0) ++p;
    if (p == 4) return 0;
    if (p != c) {
      for (int j = 0; j < 4; ++j) std::swap(a[4 * p + j], a[4 * c + j]);
      det = -det;
    }
    det *= a[4 * c + c];
    for (int r = c + 1; r < 4; ++r) {
      const mpq_class f = a[4 * r + c] / a[4 * c + c];
      for (int j = c; j < 4; ++j) a[4 * r + j] -= f * a[4 * c + j];
    }
  }
  return det;
}

std::string RationalMatrix4::to_string() const {
  std::ostringstream os;
  for (int i = 0; i < 4; ++i) {
    os << (i ? "; " : "[");
    for (int j = 0; j < 4; ++j) os << (j ? " " : "") << (*this)(i, j).get_str();
  }
  os << "]";
  return os.str();
}

int first_mismatch(const RationalMatrix4& a, const RationalMatrix4& b) {
  for (int i = 0; i < 16; ++i)
    if (a.e[i] != b.e[i]) return i;
  return -1;
}

namespace appendix {

using R = RationalMatrix4;

R D() { return R::from_rows({{0, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}, {-1, 0, 2, 0}}); }

R P() { return R::from_rows({{1, 0, 1, 0}, {1, 1, -1, 1}, {1, 2, 1, -2}, {1, 3, -1, 3}}); }

R P_inv() {
  const mpq_class h(1, 2), q(1, 4), t(3, 4);
  return R::from_rows({{h, t, 0, -q}, {-q, -q, q, q}, {h, -t, 0, q}, {q, -q, -q, q}});
}

R J() { return R::from_rows({{1, 1, 0, 0}, {0, 1, 0, 0}, {0, 0, -1, 1}, {0, 0, 0, -1}}); }

R P1() { return R::from_rows({{1, 2, 0, 0}, {1, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}}); }
R P1_inv() { return R::from_rows({{-1, 2, 0, 0}, {1, -1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}}); }
R P2() { return R::from_rows({{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, -1, -2}, {0, 0, 1, 1}}); }
R P2_inv() { return R::from_rows({{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 2}, {0, 0, -1, -1}}); }

namespace {
void require_positive(long n) {
  if (n < 1) throw DomainError("window index must be at least 1");
}
}  // namespace

R P3(long n) {
  require_positive(n);
  const mpq_class c = -(1 + mpq_class(1, n));
  return R::from_rows({{1, 1, 0, 0}, {-1, c, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}});
}

R P3_inv(long n) {
  require_positive(n);
  const mpq_class N(n);
  return R::from_rows({{N + 1, N, 0, 0}, {-N, -N, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}});
}

R P4(long n) {
  require_positive(n);
  const mpq_class c = -(1 + mpq_class(1, n));
  return R::from_rows({{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 1}, {0, 0, -1, c}});
}

R P4_inv(long n) {
  require_positive(n);
  const mpq_class N(n);
  return R::from_rows({{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, N + 1, N}, {0, 0, -N, -N}});
}

R M1(long n) { return P4_inv(n + 1) * P3_inv(n + 1) * P2_inv() * P1_inv(); }
R M2(long n) { return P1() * P2() * P3(n) * P4(n); }

R Dtilde(long n) {
  require_positive(n);
  const mpq_class g = 1 + mpq_class(1, n);
  return R::diagonal(1, g, -1, -g);
}

}  // namespace appendix

CompanionState companion_step(const CompanionState& s, const RecurrenceWeights& w) {
  CompanionState o = s;
  o.z = {s.z[1], s.z[2], s.z[3], recurrence_next(s.z[0], s.z[2], w)};
  o.n = s.n + 1;
  return o;
}

CompanionState companion_step(const CompanionState& s) {
  return companion_step(s, recurrence_weights(s.n, s.nu, s.kappa));
}

namespace {

std::string describe(const char* what, int idx, const RationalMatrix4& got, const RationalMatrix4& want) {
  std::ostringstream os;
  os << what << ": entry (" << idx / 4 + 1 << "," << idx % 4 + 1 << ") is " << got.e[idx].get_str()
     << ", expected " << want.e[idx].get_str();
  return os.str();
}

}  // namespace

JordanReport jordan_verify() {
  using namespace appendix;
  JordanReport r;
  const RationalMatrix4 I = RationalMatrix4::identity();
  const RationalMatrix4 pp = P() * P_inv();
  int k = first_mismatch(pp, I);
  r.p_inverse = k < 0;
  if (k >= 0 && r.failure.empty()) r.failure = describe("P P^-1", k, pp, I);
  const RationalMatrix4 pdp = P_inv() * D() * P();
  k = first_mismatch(pdp, J());
  r.jordan = k < 0;
  if (k >= 0 && r.failure.empty()) r.failure = describe("P^-1 D P", k, pdp, J());
  r.det_minus = (D() - I).determinant() == 0;
  if (!r.det_minus && r.failure.empty()) r.failure = "det(D - I) is nonzero";
  RationalMatrix4 dp = D();
  for (int i = 0; i < 4; ++i) dp(i, i) += 1;
  r.det_plus = dp.determinant() == 0;
  if (!r.det_plus && r.failure.empty()) r.failure = "det(D + I) is nonzero";
  return r;
}

WindowResult window_transform(long n) {
  using namespace appendix;
  if (n < 1) throw DomainError("window index must be at least 1");
  WindowResult w;
  w.product = M1(n) * J() * M2(n);
  const RationalMatrix4 want = Dtilde(n);
  const int k = first_mismatch(w.product, want);
  w.diagonal_ok = k < 0;
  if (k >= 0) w.failure = describe("M1 J M2", k, w.product, want);
  return w;
}

namespace {

using DMatrix4 = std::array<std::array<double, 4>, 4>;

DMatrix4 to_double(const RationalMatrix4& m) {
  DMatrix4 d{};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) d[i][j] = m(i, j).get_d();
  return d;
}

// Floating-point M1(n) and M2(n).
DMatrix4 m1_double(long n) {
  const double a = static_cast<double>(n + 1);
  DMatrix4 p34{};
  p34[0] = {a + 1, a, 0, 0};
  p34[1] = {-a, -a, 0, 0};
  p34[2] = {0, 0, a + 1, a};
  p34[3] = {0, 0, -a, -a};
  const DMatrix4 p21 = to_double(appendix::P2_inv() * appendix::P1_inv());
  DMatrix4 r{};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      for (int k = 0; k < 4; ++k) r[i][j] += p34[i][k] * p21[k][j];
  return r;
}

DMatrix4 m2_double(long n) {
  const double c = -(1.0 + 1.0 / static_cast<double>(n));
  DMatrix4 p34{};
  p34[0] = {1, 1, 0, 0};
  p34[1] = {-1, c, 0, 0};
  p34[2] = {0, 0, 1, 1};
  p34[3] = {0, 0, -1, c};
  const DMatrix4 p12 = to_double(appendix::P1() * appendix::P2());
  DMatrix4 r{};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      for (int k = 0; k < 4; ++k) r[i][j] += p12[i][k] * p34[k][j];
  return r;
}

}  // namespace

CMatrix4 ttilde_build(long n, const RecurrenceWeights& w) {
  if (n < 1) throw DomainError("window index must be at least 1");
  const DMatrix4 m1 = m1_double(n), m2 = m2_double(n);
  const DMatrix4 pi = to_double(appendix::P_inv()), p = to_double(appendix::P());
  // T(n) has a single nonzero row: (-p2, 0, -p1, 0) in the last position.
  CMatrix4 tp{};
  for (int j = 0; j < 4; ++j) tp[3][j] = -w.p2 * p[0][j] - w.p1 * p[2][j];
  CMatrix4 a{};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) a[i][j] = pi[i][3] * tp[3][j];
  CMatrix4 b{};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      for (int k = 0; k < 4; ++k) b[i][j] += m1[i][k] * a[k][j];
  CMatrix4 r{};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      for (int k = 0; k < 4; ++k) r[i][j] += b[i][k] * m2[k][j];
  return r;
}

CMatrix4 ttilde_build(long n, cplx nu, double kappa) {
  return ttilde_build(n, recurrence_weights(n, nu, kappa));
}

CMatrix4 ttilde_closed_form(long n, const RecurrenceWeights& w) {
  if (n < 1) throw DomainError("window index must be at least 1");
  const cplx p1 = w.p1, p2 = w.p2;
  const double N = static_cast<double>(n);
  CMatrix4 t{};
  t[0][0] = (N + 4) * (2.0 * p1 + p2) / 4.0;
  t[0][1] = (p1 * (N + 16.0 / N + 8) + p2 * (N + 8.0 / N + 6)) / 4.0;
  t[0][2] = (p1 * (5 * N + 2) + 2.0 * (N + 1) * p2) / 4.0;
  t[0][3] = (p1 * (5 * N * N - 2 * N - 16) + 2.0 * (N * N - 4)) / (4 * N);
  t[1][0] = -(N + 1) * (5.0 * p1 + 3.0 * p2) / 4.0;
  t[1][1] = (-p1 * (N + 1) * (5 + 8.0 / N) - p2 * (3 + 4.0 / N)) / 4.0;
  t[1][2] = (N + 1) * (p1 + p2) / 4.0;
  t[1][3] = (p1 * (N * N + 5 * N + 4) + p2 * (N * N + 3 * N + 2)) / (4 * N);
  t[2][0] = (N + 4) * (p1 + p2) / 4.0;
  t[2][1] = (N + 4) * ((1 + 4.0 / N) * p1 + (1 + 2.0 / N) * p2) / 4.0;
  t[2][2] = -(N + 4) * (p1 + p2) / 4.0;
  t[2][3] = -(N + 4) * (5.0 * p1 + 3.0 * p2) / (4 * N);
  t[3][0] = -(N + 1) * (p1 + p2) / 4.0;
  t[3][1] = -(N + 1) * ((1 + 4.0 / N) * p1 + (1 + 2.0 / N) * p2) / 4.0;
  t[3][2] = (N + 1) * (p1 - 3.0 * p2) / 4.0;
  t[3][3] = (N + 1) * (5.0 * p1 - 7.0 * p2) / (4 * N);
  return t;
}

GrowthProfile growth_profile(cplx nu, double kappa, long n_max, int start, bool diagonal_only) {
  if (n_max < 2) throw DomainError("n_max must be at least 2");
  if (start < 0 || start > 3) throw DomainError("start index must be 0..3");
  GrowthProfile g;
  g.start = start;
  g.log_norm.reserve(n_max + 1);
  std::array<cplx, 4> y{};
  y[start] = 1.0;
  double log_scale = 0.0;
  g.log_norm.push_back(0.0);
  for (long k = 1; k <= n_max; ++k) {
    const double gk = 1.0 + 1.0 / static_cast<double>(k);
    CMatrix4 m{};
    if (!diagonal_only) m = ttilde_build(k, nu, kappa);
    m[0][0] += 1.0;
    m[1][1] += gk;
    m[2][2] += -1.0;
    m[3][3] += -gk;
    std::array<cplx, 4> z{};
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) z[i] += m[i][j] * y[j];
    double nrm = 0.0;
    for (auto& x : z) nrm += std::norm(x);
    nrm = std::sqrt(nrm);
    if (!std::isfinite(nrm)) throw NumericalError("growth iteration overflowed");
    if (nrm == 0.0) {
      g.log_norm.push_back(-INFINITY);
      y = z;
      continue;
    }
    for (auto& x : z) x /= nrm;
    log_scale += std::log(nrm);
    y = z;
    g.log_norm.push_back(log_scale);
  }
  return g;
}

}  // namespace lc
