#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "lightcone/grid.hpp"
#include "lightcone/kernels.hpp"
#include "lightcone/profiles.hpp"

namespace lc {

struct FieldState {
  Vec v, v_tau;
  double tau = 0.0;

  FieldState() = default;
  explicit FieldState(std::size_t n) : v(n, 0.0), v_tau(n, 0.0) {}
};

/// Perturbation coefficients a0..a5 and the kappa-dependent principal
/// coefficients of the linearized operator
///   (b0+a0) v_tt - (b1+a1) v_rr + (b2+a2) v_t + (b3+a3) v_tr + (b4+a4) v_r + (b5+a5) v.
struct CoeffSet {
  double kappa = 1.0;
  Vec a0, a1, a2, a3, a4, a5;
  Vec base0, base1, base2, base3, base4, base5;

  OperatorCoeffs to_operator(const RadialGrid& g) const;
};

struct EnergyParams {
  double mu1 = 0.1;
  double mu2 = 1.5;
  void validate() const;
};

struct DecayReport {
  double rate = 0.0;
  double r_squared = 0.0;
  std::vector<std::pair<double, double>> series;
};

/// Principal coefficients with w = 0.
CoeffSet base_coeffs(const RadialGrid& g, double kappa);
CoeffSet assemble_coeffs(const RadialGrid& g, double kappa, const JetArrays& w);

/// Jets of a state: spatial derivatives by the grid stencils, second time
/// derivative supplied by the caller.
JetArrays jets_from_state(const RadialGrid& g, const Vec& v, const Vec& v_tau, const Vec& v_tautau);

Vec nonlinear_forcing(const RadialGrid& g, double kappa, const JetArrays& w);

/// Largest stable step for the RK4 stepper: 0.4 h / (max characteristic
/// speed), capped by the zeroth/first-order terms when the speed vanishes.
double stable_dt(const RadialGrid& g, const OperatorCoeffs& c, double cfl = 0.4);

FieldState step_linear(const RadialGrid& g, const FieldState& s, const CoeffSet& coeffs,
                       const Vec* forcing, double dt, Exec exec = Exec::parallel);

double energy_L2(const RadialGrid& g, const FieldState& s);
double energy_functional(const RadialGrid& g, const FieldState& s, const CoeffSet& c,
                         const EnergyParams& p);
double sobolev_norm(const RadialGrid& g, const Vec& v, int level);
std::pair<double, double> fit_decay_rate(const std::vector<std::pair<double, double>>& series);

using BackgroundFn = std::function<JetArrays(double tau)>;

/// Records (v, v_tau) levels at a uniform step and serves them back as a
/// background: second time derivatives by centred differences of v_tau,
/// linear interpolation between levels.
class TrajectoryRecorder {
 public:
  TrajectoryRecorder(RadialGrid g, double dt) : grid_(std::move(g)), dt_(dt) {}
  void record(const FieldState& s) { levels_.push_back(s); }
  std::size_t size() const { return levels_.size(); }
  BackgroundFn background() const;

 private:
  RadialGrid grid_;
  double dt_;
  std::vector<FieldState> levels_;
};

struct TrajectoryRow {
  double tau, energy_L2, energy_bracket, h1_norm, boundary_flux;
};

struct EvolveOptions {
  double tau_max = 1.0;
  double dt = 0.0;  // 0 selects stable_dt
  int sample_every = 10;
  bool forcing = false;
  EnergyParams energy;
  BackgroundFn background;  // empty means w = 0
  Exec exec = Exec::parallel;
};

struct EvolveResult {
  FieldState final_state;
  DecayReport decay;
  std::vector<TrajectoryRow> rows;
  double dt = 0.0;
  double energy0 = 0.0;
  double max_bracket_increase = 0.0;  // max over steps of bracket(n+1) - bracket(n)
};

EvolveResult evolve(const RadialGrid& g, const FieldState& s0, double kappa, const EvolveOptions& opt);

enum class RunStatus { completed, blowup, hyperbolicity_lost, non_finite };
std::string to_string(RunStatus s);

struct NonlinearOptions {
  double tau_max = 1.0;
  double dt = 0.0;
  double ceiling = 1.0;  // max |w| allowed before blowup is declared
  int sample_every = 10;
  double T = 1.0;
  EnergyParams energy;
  Exec exec = Exec::parallel;
};

struct PhysicalRow {
  double tau, t, ratio;
};

struct NonlinearResult {
  RunStatus status = RunStatus::completed;
  std::string message;
  double tau_reached = 0.0;
  FieldState final_state;
  std::vector<TrajectoryRow> rows;
  std::vector<PhysicalRow> physical;
  DecayReport decay;
  double dt = 0.0;
  double min_time_margin = 0.0;   // min of (P0 - df/dw_tt) over the run
  double min_space_margin = 0.0;  // min of (P1 + df/dw_rr) over the run
};

NonlinearResult evolve_nonlinear(const RadialGrid& g, const FieldState& s0, double kappa,
                                 const NonlinearOptions& opt);

/// || u - u_T ||_{H^1(Omega_{T-t})} / (T - t) for v = (kappa-1) phi + w.
double physical_h1_ratio(const RadialGrid& g, double T, double kappa, double tau, const Vec& w);

void write_checkpoint(const std::string& path, const RadialGrid& g, double kappa, const FieldState& s);
std::pair<FieldState, std::pair<double, double>> read_checkpoint(const std::string& path);

}  // namespace lc
