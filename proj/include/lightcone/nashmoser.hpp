#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lightcone/grid.hpp"
#include "lightcone/kernels.hpp"
#include "lightcone/profiles.hpp"

namespace lc {

/// Spectral cutoff Pi_theta on the quarter-wave cosine basis: keeps the theta
/// lowest modes of basis_size.
struct SmoothingOp {
  int theta = 1;
  int basis_size = 0;
  void validate() const;
};

Vec smoothing_apply(const SmoothingOp& op, const Vec& field, Exec exec = Exec::parallel);
Eigen::MatrixXd smoothing_matrix(const SmoothingOp& op);

/// Smallest C with ||Pi_theta w||_{H^k1} <= C theta^{(k1-k2)_+} ||w||_{H^k2}
/// over the sampled fields and cutoffs theta = 1, 2, 4, ..., N.
struct SmoothingConstant {
  int k1 = 0, k2 = 0;
  double C = 0.0;
  int worst_theta = 0;
};

SmoothingConstant measure_smoothing_constant(const RadialGrid& g, int k1, int k2, int trials,
                                             std::uint64_t seed);

enum class LinearizationMode { consistent, tabulated };

struct ScheduleParams {
  double N0 = 2.0;
  double l = 3.0;
  double k_bar = 2.0, k0 = 2.5, k = 3.0;
  double d = 0.5;
  int m_max = 12;
  double tau_horizon = 10.0;
  double dt = 0.01;
  double tol = 1e-8;
  double c_cap = 100.0;
  LinearizationMode mode = LinearizationMode::consistent;
  Exec exec = Exec::parallel;

  void validate() const;
  /// k_m = k_bar + (k - k_bar) / 2^m
  double k_level(int m) const;
  /// theta_m = N0^m, capped at the basis size.
  int theta(int m, int basis_size) const;
  int levels() const;  // number of residual levels K + 1
};

/// Time levels tau_k = k dt. For an unknown trajectory, levels 0..K+1 are
/// stored; level 0 is the zero initial datum.
struct Trajectory {
  double dt = 0.0;
  std::vector<Vec> levels;

  std::size_t size() const { return levels.size(); }
};

Trajectory zero_trajectory(const RadialGrid& g, const ScheduleParams& s);

/// Jets of level k: centred differences in time with the ghost level
/// w^{-1} = w^{1} (zero initial velocity).
JetArrays trajectory_jets(const RadialGrid& g, const Trajectory& w, std::size_t k);

/// Residual J(w)^k for k = 0..K.
Trajectory approx_residual(const Trajectory& w, double kappa, const RadialGrid& g, const SmoothingOp& op,
                           Exec exec = Exec::parallel);

/// sup over levels of the discrete L^2 norm.
double residual_norm(const RadialGrid& g, const Trajectory& e);
/// sup over levels 0..K of H^2(v) + H^1(v_tau).
double trajectory_norm(const RadialGrid& g, const Trajectory& w);

struct NewtonStepResult {
  Trajectory h;
  double norm_h = 0.0;
  double norm_E = 0.0;
  double ratio = 0.0;           // norm_h / norm_E
  double solve_residual = 0.0;  // max_k ||L h + E||_k / ||E||
  double min_time_margin = 0.0;
};

/// Solves L[w] h = -E level by level with h^0 = 0.
NewtonStepResult newton_step(const Trajectory& w, const Trajectory& E, double kappa, const RadialGrid& g,
                             const SmoothingOp& op, const ScheduleParams& s);

struct ErrorBoundReport {
  double c_m = 0.0;
  bool within_cap = true;
};

ErrorBoundReport error_bound_check(double norm_h, double norm_E_next, int m, const ScheduleParams& s);

struct StepRecord {
  int m = 0;
  int theta = 0;
  double k_m = 0.0;
  double norm_h = 0.0;
  double norm_E = 0.0;
  double c_m = 0.0;
  double h_over_E = 0.0;
  double solve_residual = 0.0;
  double norm_w = 0.0;
};

enum class IterationStatus { converged, max_iterations, diverged, hyperbolicity_lost, precondition_failed };
std::string to_string(IterationStatus s);

struct IterationState {
  int m = 0;
  Trajectory w0, w, h, E;
  std::vector<StepRecord> history;
};

struct ConvergenceReport {
  IterationStatus status = IterationStatus::max_iterations;
  std::string message;
  double E0 = 0.0;
  double precondition = 0.0;        // N0^8 ||E0||
  std::vector<double> log_E;        // log ||E^(m)|| for m = 0, 1, ...
  std::vector<double> doubling_ratios;  // log||E^(m)|| / log||E^(m-1)||
  double final_residual = 0.0;
  double accumulation_error = 0.0;  // ||w - (w0 + sum h)||
  bool converged() const { return status == IterationStatus::converged; }
};

struct IterationOutcome {
  IterationState state;
  ConvergenceReport report;
};

IterationOutcome run_iteration(const Trajectory& w0, double kappa, const RadialGrid& g, const ScheduleParams& s);

/// w - eps w0 + eps (e^{-tau} - 1) w1 at every level.
Trajectory shift_initial_data(const Trajectory& w, const RadialGrid& g, double eps, const Vec& w0_profile,
                              const Vec& w1_profile);

}  // namespace lc
