#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <gmpxx.h>

#include "lightcone/grid.hpp"

namespace lc {

using cplx = std::complex<double>;

/// a nu^2 + b nu + c with a != 0.
struct QuadraticPoly {
  double a, b, c;
};

struct ModeReport {
  cplx r1, r2;  // r1 has the larger real part
  bool stable = false;
  std::string verdict;      // "mode stable" or "mode unstable"
  std::string discrepancy;  // non-empty when the input is nu^2+3nu-4 (stated roots {4,-1} are wrong)
};

ModeReport mode_roots(const QuadraticPoly& p);

struct RecurrenceWeights {
  cplx p1, p2;
};

/// Denominator n^2 + (7+2nu) n + nu^2 + (8-g) nu + 12 with g = (1-kappa)/(1+kappa).
cplx recurrence_denominator(long n, cplx nu, double kappa);
RecurrenceWeights recurrence_weights(long n, cplx nu, double kappa);

/// Exact evaluation for rational (n, nu, kappa).
std::pair<mpq_class, mpq_class> recurrence_weights_exact(long n, const mpq_class& nu, const mpq_class& kappa);

/// a_{n+4} = (2 - p1) a_{n+2} - (1 + p2) a_n. Shared by the scalar series and
/// the companion iteration so both produce identical bits.
inline cplx recurrence_next(cplx a_n, cplx a_n2, const RecurrenceWeights& w) {
  return (2.0 - w.p1) * a_n2 - (1.0 + w.p2) * a_n;
}

/// Complex mantissa with a base-2 exponent: value = m * 2^e.
struct Scaled {
  cplx m{0.0, 0.0};
  long e = 0;

  static Scaled from(cplx z);
  cplx value() const;            // may overflow to inf
  double log_abs() const;        // natural log of |value|, -inf for zero
  bool is_zero() const { return m == cplx(0.0, 0.0); }
};

/// x / y for scaled numbers, returned as an ordinary complex.
cplx scaled_ratio(const Scaled& x, const Scaled& y);

struct FrobeniusSeries {
  cplx nu;
  double kappa = 0.0;
  std::vector<Scaled> coeffs;  // a_0 .. a_N
  cplx seeds[3];               // a_1, a_2, a_3
  bool scaled = false;         // true once any |a_n| exceeded 1e300

  cplx a(std::size_t n) const { return coeffs.at(n).value(); }
  std::size_t size() const { return coeffs.size(); }
};

/// Even-chain seed a_2* for which the truncated series matches the mode ODE
/// at its lowest orders (odd seeds vanish).
cplx default_seed_a2(cplx nu, double kappa);

FrobeniusSeries frobenius_series(cplx nu, double kappa, cplx a1, cplx a2, cplx a3, std::size_t N);
FrobeniusSeries frobenius_series(cplx nu, double kappa, std::size_t N);

/// max over n of |a_{n+4} + (-2+p1) a_{n+2} + (1+p2) a_n| / max(|a_n|,|a_{n+2}|,|a_{n+4}|).
double recurrence_residual(const FrobeniusSeries& s);

struct RatioDiagnostics {
  std::vector<long> index;
  std::vector<cplx> R, d, dtilde;
  std::vector<bool> masked;  // true where a zero coefficient blocks the ratio
};

RatioDiagnostics ratio_diagnostics(const FrobeniusSeries& s, double xbar = 0.25);

struct PolyPoint {
  double alpha, beta;
};

struct PolyEdge {
  PolyPoint from, to;
  double slope;
};

struct NewtonPolygon {
  std::vector<PolyPoint> points;
  std::vector<PolyEdge> edges;
  double steepest_slope = 0.0;  // most negative edge slope (0 when no edge)
  double xbar = 0.0;            // -1 / steepest_slope
};

NewtonPolygon newton_polygon(const std::vector<PolyPoint>& points);
/// Independent O(n^3) construction: every pair whose line supports the set
/// from below and whose endpoints are the extreme points on that line.
std::vector<PolyEdge> brute_force_hull(const std::vector<PolyPoint>& points);

struct ReductionPolys {
  cplx p3, p4, p5;
};

ReductionPolys reduction_polynomials(long n, cplx nu, double kappa);
std::tuple<mpq_class, mpq_class, mpq_class> reduction_polynomials_exact(long n, const mpq_class& nu,
                                                                       const mpq_class& kappa);
/// Coefficients (2, 4k^2 - g + 7, 8n + 12 - 4k^2) of the stable-root quadratic.
QuadraticPoly stable_root_poly(long n, double kappa);

struct StableRootReport {
  cplx r1, r2;
  bool all_stable = false;        // both Re < -1e-12 from the roots
  bool coefficients_positive = false;
  bool agree = false;
};

StableRootReport stable_root_check(long n, double kappa);

struct OperatorMatrices {
  int n = 0;
  double kappa = 0.0;
  Eigen::MatrixXd A, A0, A1;
  Eigen::MatrixXd varpi1, varpi2;  // N x N blocks of A0
  Eigen::MatrixXd tabulated_a1_block;
  Vec a_rho, b_rho;
};

/// Dense N x N difference matrices with the grid's ghost conventions.
Eigen::MatrixXd diff1_matrix(const RadialGrid& g);
Eigen::MatrixXd diff2_matrix(const RadialGrid& g);
Eigen::MatrixXd inv_rho_diff1_matrix(const RadialGrid& g);

OperatorMatrices assemble_operator(const RadialGrid& g, double kappa);

/// Eigenvalues sorted by increasing real part.
std::vector<cplx> discrete_spectrum(const Eigen::MatrixXd& A);
inline std::vector<cplx> discrete_spectrum(const OperatorMatrices& m) { return discrete_spectrum(m.A); }

struct DissipativityReport {
  double worst = 0.0;
  std::vector<double> values;
};

/// Random smooth field, even at rho = 0 and zero at rho = sigma:
/// sum_k c_k cos((k - 1/2) pi rho / sigma) / k^2.
Vec random_boundary_function(const RadialGrid& g, std::uint64_t seed, std::uint64_t stream, int modes = 8);

/// Discrete Re(A0 u | u) in the weighted Sobolev inner product (L^2 plus
/// rho^2 first-derivative and rho^4 second-derivative terms on the first
/// component, L^2 plus rho^2 first-derivative on the second).
double dissipativity_form(const RadialGrid& g, const OperatorMatrices& m, const Vec& u1, const Vec& u2);
DissipativityReport dissipativity_check(const RadialGrid& g, const OperatorMatrices& m, int trials,
                                        std::uint64_t seed);

}  // namespace lc
