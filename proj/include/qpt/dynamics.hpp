#pragma once

#include <functional>
#include <span>
#include <vector>

#include "qpt/superop.hpp"

namespace qpt {

/// Propagator P(t) acting on Bloch vectors, with the evolution time it covers.
class ProcessMatrix {
 public:
  ProcessMatrix(int dim, RealMatrix matrix, double duration);
  static ProcessMatrix identity(int dim, double duration = 0.0);

  int dim() const { return dim_; }
  const RealMatrix& matrix() const { return matrix_; }
  double duration() const { return duration_; }

  double spectral_radius() const;
  /// Spectral radius <= 1 + tolerance. Checked, never enforced.
  bool is_contractive(double tolerance = 1e-6) const { return spectral_radius() <= 1.0 + tolerance; }
  /// Deviation of the last row from (0, ..., 0, 1).
  double trace_row_error() const;

 private:
  int dim_;
  RealMatrix matrix_;
  double duration_;
};

/// Strictly increasing sample times in seconds.
class TimeGrid {
 public:
  explicit TimeGrid(std::vector<double> times);
  /// start, start + step, ... up to and including stop (within step/1e6).
  static TimeGrid uniform(double start, double stop, double step);

  const std::vector<double>& times() const { return times_; }
  size_t size() const { return times_.size(); }
  size_t intervals() const { return times_.empty() ? 0 : times_.size() - 1; }
  double interval_length(size_t k) const { return times_[k + 1] - times_[k]; }
  bool is_uniform(double tolerance = 1e-12) const;
  /// Common spacing; throws InvalidArgument for non-uniform grids.
  double step() const;

 private:
  std::vector<double> times_;
};

/// exp(L t) by scaling-and-squaring Pade.
ProcessMatrix propagator(const Superoperator& l, double t);

/// Time-ordered product exp(L_{n-1} dt_{n-1}) ... exp(L_0 dt_0), one generator
/// per grid interval; later factors multiply on the left.
ProcessMatrix piecewise_propagator(std::span<const Superoperator> ls, const TimeGrid& grid);

/// Piecewise-constant approximation of a time-dependent generator, sampling
/// each sub-interval at its midpoint. Every grid interval is split into
/// `substeps` equal parts.
ProcessMatrix piecewise_propagator(const std::function<Superoperator(double)>& generator,
                                   const TimeGrid& grid, int substeps = 1);

BlochVector evolve(const BlochVector& v, const ProcessMatrix& p);

/// Angular distance (radians) below which eigenvalues count as on the branch cut.
inline constexpr double kBranchTolerance = 1e-6;

struct LogDiagnostics {
  double min_modulus = 0.0;    // smallest |lambda|
  double max_angle = 0.0;      // largest |arg lambda|
  double branch_margin = 0.0;  // pi - max_angle
};

LogDiagnostics log_diagnostics(const ProcessMatrix& p);

/// Real principal logarithm of p.matrix() (not divided by duration).
/// Throws SingularProcess for (near) singular input and BranchAmbiguity when an
/// eigenvalue lies within kBranchTolerance of the negative real axis.
Superoperator principal_log(const ProcessMatrix& p);

}  // namespace qpt
