#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

#include "lightcone/errors.hpp"
#include "lightcone/linearized.hpp"
#include "lightcone/nashmoser.hpp"
#include "lightcone/rng.hpp"

namespace lc {

void SmoothingOp::validate() const {
  if (theta < 1) throw DomainError("smoothing cutoff theta must be at least 1");
  if (basis_size < 1) throw DomainError("smoothing basis size must be positive");
}

namespace {

const ModeTable& table_for(int n) {
  static std::mutex mu;
  static std::map<int, std::unique_ptr<ModeTable>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<ModeTable>(n);
  return *slot;
}

}  // namespace

Vec smoothing_apply(const SmoothingOp& op, const Vec& field, Exec exec) {
  op.validate();
  if (static_cast<int>(field.size()) != op.basis_size)
    throw DomainError("field length does not match the smoothing basis");
  Vec out(field.size());
  kernels::mode_project(exec, table_for(op.basis_size), op.theta, field.data(), out.data());
  return out;
}

Eigen::MatrixXd smoothing_matrix(const SmoothingOp& op) {
  op.validate();
  const int n = op.basis_size;
  const ModeTable& t = table_for(n);
  const int kmax = std::min(op.theta, n);
  Eigen::MatrixXd S(kmax, n), W(kmax, n);
  for (int k = 0; k < kmax; ++k)
    for (int j = 0; j < n; ++j) {
      S(k, j) = t(k, j);
      W(k, j) = t(k, j) * (2.0 / n);
    }
  return S.transpose() * W;
}

SmoothingConstant measure_smoothing_constant(const RadialGrid& g, int k1, int k2, int trials,
                                             std::uint64_t seed) {
  if (k1 < 0 || k1 > 2 || k2 < 0 || k2 > 2) throw DomainError("Sobolev levels must lie in 0..2");
  if (trials < 1) throw DomainError("trials must be at least 1");
  const int n = g.n_cells;
  SmoothingConstant sc{k1, k2, 0.0, 0};
  for (int t = 0; t < trials; ++t) {
    auto rng = make_rng(seed, 1000 + static_cast<std::uint64_t>(t));
    std::normal_distribution<double> nd(0.0, 1.0);
    Vec w(g.size(), 0.0);
    for (int k = 1; k <= n; ++k) {
      const double c = nd(rng) / k;
      for (int j = 0; j < n; ++j) w[j] += c * std::cos((k - 0.5) * std::numbers::pi * g.nodes[j] / g.sigma);
    }
    const double base = sobolev_norm(g, w, k2);
    for (int theta = 1;; theta *= 2) {
      const int th = std::min(theta, n);
      const Vec p = smoothing_apply({th, n}, w, Exec::serial);
      const double ratio = sobolev_norm(g, p, k1) / (std::pow(th, std::max(0, k1 - k2)) * base);
      if (ratio > sc.C) {
        sc.C = ratio;
        sc.worst_theta = th;
      }
      if (th == n) break;
    }
  }
  return sc;
}

}  // namespace lc
