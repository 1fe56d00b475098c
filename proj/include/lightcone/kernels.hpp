#pragma once

#include <span>
#include <utility>

#include "lightcone/grid.hpp"
#include "lightcone/profiles.hpp"

namespace lc {

/// Pointwise coefficients of
///   P0 v_tt - P1 v_rr + P2 v_t + P3 v_tr + P4 v_r + P5 v = g
/// with the v_r coefficient stored pre-multiplied by rho (rP4 = rho * P4) so
/// that it combines with the blended rho^{-1} d/drho stencil.
struct OperatorCoeffs {
  Vec P0, P1, P2, P3, rP4, P5;
};

/// Jet arrays of a field on the grid nodes.
struct JetArrays {
  Vec w, wr, wrr, wt, wtr, wtt;
  explicit JetArrays(std::size_t n = 0) : w(n), wr(n), wrr(n), wt(n), wtr(n), wtt(n) {}
  std::size_t size() const { return w.size(); }
};

/// Forcing value plus its partial derivatives with respect to
/// (w, wr, wrr, wt, wtr, wtt).
struct ForcingPartials {
  Vec f, fw, fr, frr, ft, ftr, ftt;
  explicit ForcingPartials(std::size_t n = 0)
      : f(n), fw(n), fr(n), frr(n), ft(n), ftr(n), ftt(n) {}
};

/// Quarter-wave table C[k][j] = cos((k + 1/2) pi (j + 1/2) / n). The rows
/// are the DCT-IV modes on cell-centred nodes: even about rho = 0, zero at
/// rho = sigma, orthogonal with squared norm n/2.
struct ModeTable {
  int n = 0;
  Vec s;  // row-major n x n
  explicit ModeTable(int n);
  double operator()(int k, int j) const { return s[static_cast<std::size_t>(k) * n + j]; }
};

// The serial namespace holds the reference loops; the omp namespace holds
// the OpenMP versions. Both produce bit-identical results since every
// output element is computed independently with the same expression.
namespace kernels {
namespace serial {
void membrane_eval(const Field& u, std::span<const std::pair<double, double>> pts, double* out);
void linear_accel(const RadialGrid& g, const OperatorCoeffs& c, const double* v, const double* vt,
                  const double* forcing, double* out);
void nonlinear_split(const RadialGrid& g, double kappa, const double* w, const double* wt,
                     double* A, double* B);
void forcing_partials(const RadialGrid& g, double kappa, const JetArrays& jet, ForcingPartials& out);
void mode_project(const ModeTable& tab, int theta, const double* v, double* out);
}  // namespace serial

namespace omp {
void membrane_eval(const Field& u, std::span<const std::pair<double, double>> pts, double* out);
void linear_accel(const RadialGrid& g, const OperatorCoeffs& c, const double* v, const double* vt,
                  const double* forcing, double* out);
void nonlinear_split(const RadialGrid& g, double kappa, const double* w, const double* wt,
                     double* A, double* B);
void forcing_partials(const RadialGrid& g, double kappa, const JetArrays& jet, ForcingPartials& out);
void mode_project(const ModeTable& tab, int theta, const double* v, double* out);
}  // namespace omp

void membrane_eval(Exec e, const Field& u, std::span<const std::pair<double, double>> pts, double* out);
void linear_accel(Exec e, const RadialGrid& g, const OperatorCoeffs& c, const double* v,
                  const double* vt, const double* forcing, double* out);
void nonlinear_split(Exec e, const RadialGrid& g, double kappa, const double* w, const double* wt,
                     double* A, double* B);
void forcing_partials(Exec e, const RadialGrid& g, double kappa, const JetArrays& jet,
                      ForcingPartials& out);
void mode_project(Exec e, const ModeTable& tab, int theta, const double* v, double* out);

/// Exec used by library code that does not take an explicit policy.
Exec default_exec();
void set_default_exec(Exec e);
}  // namespace kernels

}  // namespace lc
