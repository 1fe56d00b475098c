#include "lightcone/grid.hpp"

#include "lightcone/errors.hpp"

namespace lc {

RadialGrid::RadialGrid(double sigma_, int n) : sigma(sigma_), n_cells(n) {
  if (!(sigma > 0.0 && sigma < 1.0)) throw DomainError("sigma must lie in (0,1)");
  if (n < 4) throw DomainError("n_cells must be at least 4");
  h = sigma / n;
  nodes.resize(n);
  for (int j = 0; j < n; ++j) nodes[j] = (j + 0.5) * h;
}

Vec diff1(const RadialGrid& g, const Vec& v) {
  Vec out(g.size());
  for (int j = 0; j < g.n_cells; ++j) out[j] = stencil::d1(v.data(), j, g.n_cells, g.h);
  return out;
}

Vec diff2(const RadialGrid& g, const Vec& v) {
  Vec out(g.size());
  for (int j = 0; j < g.n_cells; ++j) out[j] = stencil::d2(v.data(), j, g.n_cells, g.h);
  return out;
}

Vec inv_rho_diff1(const RadialGrid& g, const Vec& v) {
  Vec out(g.size());
  for (int j = 0; j < g.n_cells; ++j)
    out[j] = stencil::inv_rho_d1(v.data(), j, g.n_cells, g.h, g.nodes[j]);
  return out;
}

double boundary_slope_left(const RadialGrid& g, const Vec& v) {
  if (g.size() < 3) throw DomainError("boundary estimates need at least 3 cells");
  return (-2.0 * v[0] + 3.0 * v[1] - v[2]) / g.h;
}

double boundary_value_left(const RadialGrid& g, const Vec& v) {
  if (g.size() < 3) throw DomainError("boundary estimates need at least 3 cells");
  return (15.0 * v[0] - 10.0 * v[1] + 3.0 * v[2]) / 8.0;
}

double boundary_slope_right(const RadialGrid& g, const Vec& v) {
  const std::size_t n = g.size();
  return -(9.0 * v[n - 1] - v[n - 2]) / (3.0 * g.h);
}

}  // namespace lc
