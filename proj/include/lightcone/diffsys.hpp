#pragma once

#include <array>
#include <complex>
#include <string>
#include <vector>

#include <gmpxx.h>

#include "lightcone/spectral.hpp"

namespace lc {

/// 4x4 matrix over exact rationals, row-major.
struct RationalMatrix4 {
  std::array<mpq_class, 16> e;

  RationalMatrix4();
  static RationalMatrix4 identity();
  static RationalMatrix4 from_rows(std::initializer_list<std::initializer_list<mpq_class>> rows);
  static RationalMatrix4 diagonal(const mpq_class& a, const mpq_class& b, const mpq_class& c, const mpq_class& d);

  mpq_class& operator()(int i, int j) { return e[4 * i + j]; }
  const mpq_class& operator()(int i, int j) const { return e[4 * i + j]; }
  RationalMatrix4 operator*(const RationalMatrix4& o) const;
  RationalMatrix4 operator-(const RationalMatrix4& o) const;
  bool operator==(const RationalMatrix4& o) const;
  mpq_class determinant() const;
  std::string to_string() const;
};

/// First entry (row-major) where a and b differ, or -1.
int first_mismatch(const RationalMatrix4& a, const RationalMatrix4& b);

namespace appendix {
RationalMatrix4 D();
RationalMatrix4 P();
RationalMatrix4 P_inv();
RationalMatrix4 J();
RationalMatrix4 P1();
RationalMatrix4 P1_inv();
RationalMatrix4 P2();
RationalMatrix4 P2_inv();
RationalMatrix4 P3(long n);
RationalMatrix4 P3_inv(long n);
RationalMatrix4 P4(long n);
RationalMatrix4 P4_inv(long n);
RationalMatrix4 M1(long n);
RationalMatrix4 M2(long n);
/// diag(1, 1+1/n, -1, -(1+1/n))
RationalMatrix4 Dtilde(long n);
}  // namespace appendix

struct CompanionState {
  std::array<cplx, 4> z{};
  long n = 0;
  cplx nu{0.0, 0.0};
  double kappa = 0.0;
};

/// z <- (D + T(n)) z, n <- n + 1.
CompanionState companion_step(const CompanionState& s);
/// Same step with caller-supplied weights.
CompanionState companion_step(const CompanionState& s, const RecurrenceWeights& w);

struct JordanReport {
  bool p_inverse = false;   // P P^{-1} = I
  bool jordan = false;      // P^{-1} D P = J
  bool det_minus = false;   // det(D - I) = 0
  bool det_plus = false;    // det(D + I) = 0
  std::string failure;      // names the first offending entry
  bool ok() const { return p_inverse && jordan && det_minus && det_plus; }
};

JordanReport jordan_verify();

struct WindowResult {
  RationalMatrix4 product;  // M1(n) J M2(n)
  bool diagonal_ok = false;
  std::string failure;
};

WindowResult window_transform(long n);

using CMatrix4 = std::array<std::array<cplx, 4>, 4>;

/// M1(n) P^{-1} T(n) P M2(n) by matrix products.
CMatrix4 ttilde_build(long n, cplx nu, double kappa);
CMatrix4 ttilde_build(long n, const RecurrenceWeights& w);
/// Closed-form entries for the same product, entry by entry.
CMatrix4 ttilde_closed_form(long n, const RecurrenceWeights& w);

struct GrowthProfile {
  int start = 1;                 // index of the starting unit vector (0-based)
  std::vector<double> log_norm;  // log ||y_k|| after k steps, k = 0..n_max
};

/// Iterates y_{k+1} = (Dtilde(k) + Ttilde(k)) y_k from a unit vector with
/// y renormalized every step and the log norm accumulated.
GrowthProfile growth_profile(cplx nu, double kappa, long n_max, int start = 1, bool diagonal_only = false);

}  // namespace lc
