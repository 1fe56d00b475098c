#pragma once

#include <cstddef>
#include <vector>

namespace lc {

using Vec = std::vector<double>;

/// Cell-centred grid on (0, sigma]: node_j = (j + 1/2) h, h = sigma / n.
/// Ghost values: v_{-1} = v_0 (even reflection, v_rho = 0 at the origin) and
/// v_n = -v_{n-1} (Dirichlet at rho = sigma).
struct RadialGrid {
  double sigma = 0.5;
  int n_cells = 0;
  double h = 0.0;
  Vec nodes;

  RadialGrid(double sigma, int n_cells);
  std::size_t size() const { return static_cast<std::size_t>(n_cells); }
};

namespace stencil {

inline double left(const double* v, int j) { return j == 0 ? v[0] : v[j - 1]; }
inline double right(const double* v, int j, int n) { return j == n - 1 ? -v[n - 1] : v[j + 1]; }

inline double d1(const double* v, int j, int n, double h) {
  return (right(v, j, n) - left(v, j)) / (2.0 * h);
}

inline double d2(const double* v, int j, int n, double h) {
  return (right(v, j, n) - 2.0 * v[j] + left(v, j)) / (h * h);
}

/// Weight of the centred quotient D1 v / rho in the near-origin blend.
inline double blend_weight(double rho, double h) { return rho < 2.0 * h ? rho / (2.0 * h) : 1.0; }

/// rho^{-1} v_rho, replaced smoothly by v_rho_rho for rho < 2h.
inline double inv_rho_d1(const double* v, int j, int n, double h, double rho) {
  const double th = blend_weight(rho, h);
  const double q = d1(v, j, n, h) / rho;
  return th < 1.0 ? th * q + (1.0 - th) * d2(v, j, n, h) : q;
}

}  // namespace stencil

/// Whole-array versions of the stencils.
Vec diff1(const RadialGrid& g, const Vec& v);
Vec diff2(const RadialGrid& g, const Vec& v);
Vec inv_rho_diff1(const RadialGrid& g, const Vec& v);

/// One-sided second-order estimates of v_rho at rho = 0 (quadratic through
/// the first three nodes) and at rho = sigma (quadratic through the last two
/// nodes and the boundary value 0).
double boundary_slope_left(const RadialGrid& g, const Vec& v);
double boundary_slope_right(const RadialGrid& g, const Vec& v);
/// Value at rho = 0 extrapolated from the first three nodes.
double boundary_value_left(const RadialGrid& g, const Vec& v);

}  // namespace lc
