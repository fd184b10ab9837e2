#pragma once

#include <array>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "qpt/estimation.hpp"

namespace qpt {

enum class ScenarioKind {
  relaxation_only,
  static_quadratic_zeeman,
  static_linear_zeeman,
  three_axis_time_dependent,
  custom,
};

/// Accepts the enum spellings plus the short alias "three_axis".
ScenarioKind parse_scenario_kind(const std::string& name);
std::string scenario_kind_name(ScenarioKind kind);

/// Overrides for make_scenario; unset fields take the per-kind defaults.
struct ScenarioParams {
  std::optional<RelaxationModel> relaxation;   // default: reference_relaxation_model()
  bool include_relaxation = true;              // Hamiltonian scenarios only
  double quadratic_q = 2.0 * std::numbers::pi * 1.5e3;  // rad/s, H = q F_y^2
  int linear_axis = 0;
  double linear_omega = 2.0 * std::numbers::pi * 2.0e3;  // rad/s, H = omega F_axis
  double field_amplitude = 2.0 * std::numbers::pi * 10.0e3;  // rad/s per axis
  bool ramp = false;
  double ramp_duration = 64e-6;
  std::optional<std::vector<double>> times;    // replaces the default grid
  int substeps = 8;
};

/// Ground truth of a synthetic experiment. The generator at time t is
///   hamiltonian_superop(H + sum_k Omega_k(t) F_k) - R_T - dissipator(jumps),
/// or generator_override when set.
struct Scenario {
  std::string name;
  ScenarioKind kind = ScenarioKind::custom;
  int dim = 3;
  TimeGrid grid{std::vector<double>{}};
  std::vector<DensityMatrix> input_states;
  ComplexMatrix hamiltonian;
  std::vector<ComplexMatrix> jumps;
  std::optional<RelaxationModel> relaxation;
  std::vector<FieldWaveform> fields;
  bool ramp = false;           // x-axis field ramps linearly from 0 over ramp_duration
  double ramp_duration = 64e-6;
  std::optional<Superoperator> generator_override;
  int substeps = 8;            // midpoint sub-intervals per grid interval

  bool time_dependent() const { return !fields.empty() && !generator_override; }
  std::array<double, 3> field_at(double t) const;
  /// R_T of the relaxation model, or zero.
  Superoperator relaxation_superop() const;
  Superoperator liouvillian_at(double t) const;
  /// Propagator from t0 to t1 (piecewise-constant for time-dependent scenarios).
  ProcessMatrix process(double t0, double t1) const;
  /// P(0 -> t_n) for every grid time.
  std::vector<ProcessMatrix> true_processes() const;
};

Scenario make_scenario(ScenarioKind kind, const ScenarioParams& params = {});

/// Static scenario from an explicit generator, any dimension. Uses the
/// canonical qutrit states for d = 3 and a generic complete set otherwise.
Scenario custom_scenario(const std::string& name, const Superoperator& l, std::vector<double> times);

/// Informationally complete pure-state set for dimension d: |i>, and
/// (|i> + |j>)/sqrt 2, (|i> + i|j>)/sqrt 2 for i < j.
std::vector<DensityMatrix> complete_input_states(int d);

struct NoiseSpec {
  double bloch_sigma = 0.0;    // Gaussian sigma on each traceless Bloch coordinate
  double prep_fidelity = 1.0;  // weight of the target state against I/d
  std::uint64_t seed = 0;
};

/// Measured inputs are the prepared states plus noise; outputs are the
/// prepared states propagated to each grid time plus independent noise.
TomographySet generate_dataset(const Scenario& s, const NoiseSpec& noise);

/// Uhlmann fidelity (Tr sqrt(sqrt(a) b sqrt(a)))^2 with eigenvalues clipped at
/// zero. Throws InvalidState if either state has an eigenvalue below -0.05.
double state_fidelity(const DensityMatrix& a, const DensityMatrix& b);

/// max_n D_F(reconstructed P(t_n), true P(t_n)) for one noisy dataset.
double max_process_error(const Scenario& s, const NoiseSpec& noise);

/// Bisection on sigma so that the median of max_process_error over `n_seeds`
/// datasets equals `target`.
double calibrate_noise(const Scenario& s, double target = 0.049, std::uint64_t seed = 1, int n_seeds = 5,
                       double prep_fidelity = 1.0);

/// bootstrap() with datasets drawn from the scenario at the given noise.
BootstrapResult bootstrap(const FitProcedure& fit, const Scenario& s, const NoiseSpec& noise, int n_draws = 1000);

}  // namespace qpt
