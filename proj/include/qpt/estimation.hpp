#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qpt/tomography.hpp"

namespace qpt {

/// ||a - b||_F / ||b||_F. Throws InvalidArgument when ||b||_F == 0.
double frobenius_distance(const RealMatrix& a, const RealMatrix& b);
double frobenius_distance(const Superoperator& a, const Superoperator& b);
double frobenius_distance(const ProcessMatrix& a, const ProcessMatrix& b);

/// Three-channel relaxation model of a qutrit: residual Larmor precession,
/// dephasing with jump operators sqrt(gamma_k) F_k, and isotropic decay.
struct RelaxationModel {
  std::array<double, 3> omega_residual{};  // rad/s
  std::array<double, 3> gamma_dephase{};   // 1/s
  double gamma_iso = 0.0;                  // 1/s
};

/// Omega_L / 2pi = (-0.397, 0.3071, 2.511) Hz, gamma_k = (7.0, 7.9, 6.6) 1/s, gamma_i = 13.3 1/s.
RelaxationModel reference_relaxation_model();

/// Identity on the traceless block, zero on the trace component.
Superoperator isotropic_relaxation(int dim);

/// R_T = -G(Omega_L . F) + sum_k D(sqrt(gamma_k) F_k) + gamma_i (1 - delta_{d^2 d^2}).
Superoperator relaxation_superop(const RelaxationModel& model);

/// One Cartesian field component Omega_k(t) = amplitude * shape(2 pi f t + phase).
/// The triangle wave shares zero crossings and extrema with the sine.
struct FieldWaveform {
  enum class Shape { sine, triangle, constant };

  int axis = 0;  // 0 = x, 1 = y, 2 = z
  Shape shape = Shape::sine;
  double amplitude = 0.0;  // rad/s
  double frequency = 0.0;  // Hz
  double phase = 0.0;      // rad

  double value(double t) const;
};

/// Affine family of generators L(theta) = offset + sum_k theta_k directions_k.
class GeneratorFamily {
 public:
  GeneratorFamily(Superoperator offset, std::vector<Superoperator> directions, std::vector<std::string> names);

  int dim() const { return offset_.dim(); }
  size_t size() const { return directions_.size(); }
  const Superoperator& offset() const { return offset_; }
  const std::vector<std::string>& names() const { return names_; }

  Superoperator at(const RealVector& theta) const;
  /// Least-squares coordinates of (l - offset) in the span of the directions.
  RealVector project(const Superoperator& l) const;

 private:
  Superoperator offset_;
  std::vector<Superoperator> directions_;
  std::vector<std::string> names_;
  RealMatrix design_;  // columns are flattened directions
};

/// Restriction of the Liouvillian search space for the likelihood fit.
struct Constraint {
  enum class Kind { none, fixed_dissipator, hermitian_hamiltonian, parametric };

  Kind kind = Kind::none;
  std::optional<Superoperator> dissipator;  // R_T, subtracted when present
  std::optional<GeneratorFamily> family;    // for Kind::parametric

  /// Any trace-preserving generator (last row fixed at zero).
  static Constraint none();
  /// L = G - R_T with G any trace-preserving generator.
  static Constraint fixed_dissipator(Superoperator rt);
  /// L = hamiltonian_superop(H) - R_T with H Hermitian; R_T = 0 when omitted.
  static Constraint hermitian_hamiltonian(std::optional<Superoperator> rt = std::nullopt);
  static Constraint parametric(GeneratorFamily family);

  GeneratorFamily make_family(int dim) const;
};

/// L = sum_k omega_k G(F_k) - rt, the known-form field model.
GeneratorFamily field_family(const Superoperator& rt);
/// R_T parametrized by (Omega_L, gamma_k, gamma_i); L = -R_T.
GeneratorFamily relaxation_family();

struct FitReport {
  std::string model;
  std::optional<Superoperator> liouvillian;
  std::vector<std::string> param_names;
  std::vector<double> params;
  double cost = 0.0;
  double initial_cost = 0.0;
  std::vector<double> times;
  std::vector<double> df_per_time;
  int iterations = 0;
  bool converged = false;
  double residual = 0.0;
  std::vector<double> ci_low;   // empty unless a bootstrap was run
  std::vector<double> ci_high;
  std::optional<HermitianParams> hermitian;
  std::optional<RelaxationModel> relaxation;
  std::vector<std::string> warnings;
  std::uint64_t seed = 0;
};

struct MleOptions {
  int max_iters = 2000;
  double rel_tolerance = 1e-10;  // relative cost decrease over `window` iterations
  int window = 5;
  double fd_rel_step = 1e-6;     // central-difference step, relative
  int restarts = 3;              // perturbed restarts when not converged
  std::uint64_t seed = 0;
  std::optional<RealVector> initial;  // overrides the direct-estimate initialization
};

/// sum_n ||exp(L t_n) - P_n||_F^2 with t_n = P_n.duration().
double likelihood_cost(const Superoperator& l, std::span<const ProcessMatrix> pmeas);

/// Minimizes the Frobenius cost over the constrained family, initialized from
/// the direct log estimate at the earliest admissible time.
FitReport mle_liouvillian(std::span<const ProcessMatrix> pmeas, const Constraint& constraint,
                          const MleOptions& options = {});

/// Linear least-squares decomposition of R_T into the relaxation model, with
/// non-negative rates. Parameters: Omega_x, Omega_y, Omega_z (rad/s), gamma_x,
/// gamma_y, gamma_z, gamma_i (1/s).
FitReport fit_relaxation_model(const Superoperator& rt);

/// Averages log(P(t))/t + R_T over the admissible times and projects the
/// result onto Hermitian Hamiltonians by least squares. Qutrit only.
FitReport direct_hamiltonian(const TomographySet& ts, const Superoperator& rt, std::span<const double> times);

/// Hermitian-constrained likelihood fit of the Hamiltonian with R_T held fixed.
FitReport mle_hamiltonian(std::span<const ProcessMatrix> pmeas, const Superoperator& rt,
                          const MleOptions& options = {});

enum class FieldPath { direct, mle };

struct FieldStep {
  double t_start = 0.0;
  double t_end = 0.0;
  std::array<double, 3> omega{};             // rad/s
  std::optional<HermitianParams> hermitian;  // unknown-form fits only
  RealMatrix hamiltonian_generator;          // estimated G_n (generator convention)
  double df_process = 0.0;                   // D_F(P_n, exp(L_n dt))
  bool near_zero_field = false;
};

struct FieldReconstruction {
  std::vector<FieldStep> steps;
  FitReport report;
};

/// Per-step field estimation from stepwise processes. With known_form the
/// Hamiltonian is restricted to sum_k omega_k F_k; otherwise a full Hermitian
/// Hamiltonian is fitted per step (omega is then its projection on F_k).
FieldReconstruction estimate_fields(std::span<const ProcessMatrix> psteps, const TimeGrid& grid,
                                    const Superoperator& rt, bool known_form, FieldPath path = FieldPath::mle);

struct BootstrapResult {
  std::vector<double> low;     // 16th percentile
  std::vector<double> median;
  std::vector<double> high;    // 84th percentile
  std::vector<std::vector<double>> samples;
  int n_draws = 0;
  int n_failed = 0;
};

using FitProcedure = std::function<std::vector<double>(const TomographySet&)>;
using DatasetFactory = std::function<TomographySet(std::uint64_t draw_seed)>;

/// Refits `fit` on n_draws datasets from `factory`; draw k uses seed
/// derive_seed(seed, k). Failed draws are excluded; more than 10% failures throws.
BootstrapResult bootstrap(const FitProcedure& fit, const DatasetFactory& factory, int n_draws,
                          std::uint64_t seed);

void attach_intervals(FitReport& report, const BootstrapResult& result);

/// Linear-interpolated percentile (q in [0, 100]) of unsorted samples.
double percentile(std::vector<double> values, double q);

/// Deterministic sub-seed for (seed, index) pairs.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace qpt
