#include "qpt/dynamics.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

namespace qpt {

namespace {

constexpr double kSingularRelTolerance = 1e-13;
constexpr double kLogImaginaryResidue = 1e-8;

void require_finite(const RealMatrix& m, const char* what) {
  if (!m.allFinite()) throw NonFinite(std::string(what) + " contains non-finite entries");
}

}  // namespace

ProcessMatrix::ProcessMatrix(int dim, RealMatrix matrix, double duration)
    : dim_(dim), matrix_(std::move(matrix)), duration_(duration) {
  if (dim < 2) throw InvalidDimension("process matrix requires d >= 2");
  if (matrix_.rows() != dim * dim || matrix_.cols() != dim * dim) {
    throw DimensionMismatch("process matrix must be d^2 x d^2");
  }
  require_finite(matrix_, "process matrix");
}

ProcessMatrix ProcessMatrix::identity(int dim, double duration) {
  return ProcessMatrix(dim, RealMatrix::Identity(dim * dim, dim * dim), duration);
}

double ProcessMatrix::spectral_radius() const {
  Eigen::EigenSolver<RealMatrix> solver(matrix_, false);
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

double ProcessMatrix::trace_row_error() const {
  RealVector expected = RealVector::Zero(matrix_.cols());
  expected(expected.size() - 1) = 1.0;
  return (matrix_.row(matrix_.rows() - 1).transpose() - expected).norm();
}

TimeGrid::TimeGrid(std::vector<double> times) : times_(std::move(times)) {
  for (size_t k = 0; k < times_.size(); ++k) {
    if (!std::isfinite(times_[k])) throw InvalidArgument("time grid contains a non-finite time");
    if (k > 0 && !(times_[k] > times_[k - 1])) throw InvalidArgument("time grid must be strictly increasing");
  }
}

TimeGrid TimeGrid::uniform(double start, double stop, double step) {
  if (!(step > 0.0)) throw InvalidArgument("time step must be positive");
  if (stop < start) throw InvalidArgument("time grid stop precedes start");
  const auto count = static_cast<size_t>(std::floor((stop - start) / step + 1e-6)) + 1;
  std::vector<double> times(count);
  for (size_t k = 0; k < count; ++k) times[k] = start + static_cast<double>(k) * step;
  return TimeGrid(std::move(times));
}

bool TimeGrid::is_uniform(double tolerance) const {
  if (times_.size() < 2) return true;
  const double h = interval_length(0);
  for (size_t k = 1; k < intervals(); ++k) {
    if (std::abs(interval_length(k) - h) > tolerance) return false;
  }
  return true;
}

double TimeGrid::step() const {
  if (times_.size() < 2) throw InvalidArgument("time grid has no intervals");
  if (!is_uniform()) throw InvalidArgument("time grid is not uniform");
  return (times_.back() - times_.front()) / static_cast<double>(intervals());
}

ProcessMatrix propagator(const Superoperator& l, double t) {
  if (!(t >= 0.0)) throw InvalidArgument("evolution time must be non-negative");
  require_finite(l.matrix(), "Liouvillian");
  RealMatrix scaled = l.matrix() * t;
  RealMatrix p = scaled.exp();
  require_finite(p, "propagator");
  return ProcessMatrix(l.dim(), std::move(p), t);
}

ProcessMatrix piecewise_propagator(std::span<const Superoperator> ls, const TimeGrid& grid) {
  if (ls.size() != grid.intervals()) {
    throw DimensionMismatch("piecewise propagator needs one generator per grid interval (" +
                            std::to_string(grid.intervals()) + "), got " + std::to_string(ls.size()));
  }
  if (ls.empty()) throw InvalidArgument("piecewise propagator needs at least one interval");
  const int d = ls.front().dim();
  RealMatrix total = RealMatrix::Identity(d * d, d * d);
  for (size_t k = 0; k < ls.size(); ++k) {
    if (ls[k].dim() != d) throw DimensionMismatch("generators have different dimensions");
    total = propagator(ls[k], grid.interval_length(k)).matrix() * total;
  }
  return ProcessMatrix(d, std::move(total), grid.times().back() - grid.times().front());
}

ProcessMatrix piecewise_propagator(const std::function<Superoperator(double)>& generator,
                                   const TimeGrid& grid, int substeps) {
  if (substeps < 1) throw InvalidArgument("substeps must be >= 1");
  if (grid.intervals() == 0) throw InvalidArgument("piecewise propagator needs at least one interval");
  std::vector<Superoperator> ls;
  std::vector<double> fine{grid.times().front()};
  for (size_t k = 0; k < grid.intervals(); ++k) {
    const double t0 = grid.times()[k];
    const double h = grid.interval_length(k) / substeps;
    for (int s = 0; s < substeps; ++s) {
      ls.push_back(generator(t0 + (s + 0.5) * h));
      fine.push_back(s + 1 == substeps ? grid.times()[k + 1] : t0 + (s + 1) * h);
    }
  }
  return piecewise_propagator(ls, TimeGrid(std::move(fine)));
}

BlochVector evolve(const BlochVector& v, const ProcessMatrix& p) {
  if (v.dim() != p.dim()) throw DimensionMismatch("state and process dimensions differ");
  return BlochVector(v.dim(), p.matrix() * v.coords());
}

LogDiagnostics log_diagnostics(const ProcessMatrix& p) {
  require_finite(p.matrix(), "process matrix");
  Eigen::EigenSolver<RealMatrix> solver(p.matrix(), false);
  const auto& values = solver.eigenvalues();
  LogDiagnostics diag;
  diag.min_modulus = values.cwiseAbs().minCoeff();
  diag.max_angle = 0.0;
  for (Eigen::Index k = 0; k < values.size(); ++k) {
    diag.max_angle = std::max(diag.max_angle, std::abs(std::arg(values(k))));
  }
  diag.branch_margin = std::numbers::pi - diag.max_angle;
  return diag;
}

Superoperator principal_log(const ProcessMatrix& p) {
  const LogDiagnostics diag = log_diagnostics(p);
  const double scale = std::max(1.0, p.matrix().norm());
  if (diag.min_modulus <= kSingularRelTolerance * scale) {
    std::ostringstream msg;
    msg << "process matrix is singular (smallest |eigenvalue| = " << diag.min_modulus << ")";
    throw SingularProcess(msg.str());
  }
  if (diag.branch_margin < kBranchTolerance) {
    std::ostringstream msg;
    msg << "process matrix has an eigenvalue on the negative real axis (angle " << diag.max_angle
        << " rad); the logarithm branch is ambiguous. Reduce the evolution time so that every "
           "rotation angle |Omega t| stays below pi";
    throw BranchAmbiguity(msg.str());
  }
  const ComplexMatrix log_c = p.matrix().cast<Complex>().log();
  if (!log_c.allFinite()) throw NonFinite("matrix logarithm produced non-finite entries");
  const double imag_residue = log_c.imag().norm();
  if (imag_residue > kLogImaginaryResidue * std::max(1.0, log_c.real().norm())) {
    throw BranchAmbiguity("principal logarithm is not real; the process has an unresolved branch");
  }
  return Superoperator(p.dim(), log_c.real());
}

}  // namespace qpt
