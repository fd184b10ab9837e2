#pragma once

#include <span>
#include <vector>

#include "qpt/types.hpp"

namespace qpt {

/// Eigenvalue floor accepted for measured density matrices. Reconstructed
/// laboratory states are often marginally unphysical.
inline constexpr double kPsdTolerance = -1e-6;

/// Orthonormal Hermitian operator basis {sigma_1 .. sigma_{d^2}} with
/// 1/2 Tr(sigma_i sigma_j) = delta_ij and sigma_{d^2} = sqrt(2/d) * Identity.
///
/// For d = 3 the first eight elements are the Gell-Mann matrices in their
/// conventional interleaved order (sym/antisym pairs for levels (1,2), then
/// lambda_3, then the (1,3) and (2,3) pairs, then lambda_8). For any other d the
/// generalized Gell-Mann order is used: all symmetric off-diagonal pairs in
/// row-major order, then the antisymmetric ones, then the diagonal ones.
class OperatorBasis {
 public:
  explicit OperatorBasis(int dim);

  int dim() const { return dim_; }
  int size() const { return static_cast<int>(elements_.size()); }
  const ComplexMatrix& operator[](int i) const { return elements_[static_cast<size_t>(i)]; }
  const std::vector<ComplexMatrix>& elements() const { return elements_; }

 private:
  int dim_;
  std::vector<ComplexMatrix> elements_;
};

OperatorBasis build_basis(int d);

/// Shared immutable basis instance for dimension d (constructed on first use).
const OperatorBasis& cached_basis(int d);

/// Hermitian, unit-trace d x d matrix.
class DensityMatrix {
 public:
  /// Validates Hermiticity (1e-10), unit trace (1e-10) and eigenvalues >= kPsdTolerance.
  static DensityMatrix from_matrix(const ComplexMatrix& m);
  /// Same as from_matrix but without the positivity requirement; for noisy
  /// reconstructed states that are ingested as-is.
  static DensityMatrix from_measured(const ComplexMatrix& m);

  int dim() const { return static_cast<int>(m_.rows()); }
  const ComplexMatrix& matrix() const { return m_; }
  double min_eigenvalue() const;
  bool is_physical(double tolerance = kPsdTolerance) const { return min_eigenvalue() >= tolerance; }

 private:
  explicit DensityMatrix(ComplexMatrix m) : m_(std::move(m)) {}
  ComplexMatrix m_;
};

/// Real Bloch-Fano coordinates a_i = 1/2 Tr(rho sigma_i), i = 1..d^2.
class BlochVector {
 public:
  BlochVector(int dim, RealVector coords);

  int dim() const { return dim_; }
  const RealVector& coords() const { return coords_; }
  double operator[](int i) const { return coords_(i); }

 private:
  int dim_;
  RealVector coords_;
};

/// Trace component sqrt(1/(2d)) carried by every unit-trace state.
double trace_coordinate(int d);

BlochVector vectorize(const DensityMatrix& rho, const OperatorBasis& basis);
DensityMatrix devectorize(const BlochVector& v, const OperatorBasis& basis);

/// Coordinates of an arbitrary Hermitian operator (no trace condition).
RealVector vectorize_operator(const ComplexMatrix& op, const OperatorBasis& basis);
/// sum_i coords_i sigma_i for any real coordinate vector.
ComplexMatrix devectorize_operator(const RealVector& coords, const OperatorBasis& basis);

/// Columns are the Bloch vectors of `states`.
RealMatrix state_matrix(std::span<const DensityMatrix> states, const OperatorBasis& basis);

bool is_hermitian(const ComplexMatrix& m, double tolerance);

}  // namespace qpt
