#include "qpt/basis.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <string>

#include <Eigen/Eigenvalues>

namespace qpt {

namespace {

constexpr double kHermitianTolerance = 1e-10;
constexpr double kTraceTolerance = 1e-10;
constexpr double kImaginaryResidue = 1e-10;

ComplexMatrix symmetric_pair(int d, int j, int k) {
  ComplexMatrix m = ComplexMatrix::Zero(d, d);
  m(j, k) = 1.0;
  m(k, j) = 1.0;
  return m;
}

ComplexMatrix antisymmetric_pair(int d, int j, int k) {
  ComplexMatrix m = ComplexMatrix::Zero(d, d);
  m(j, k) = Complex(0.0, -1.0);
  m(k, j) = Complex(0.0, 1.0);
  return m;
}

// sqrt(2/(l(l+1))) * (sum_{j<l} |j><j| - l |l><l|), l = 1..d-1
ComplexMatrix diagonal_element(int d, int l) {
  ComplexMatrix m = ComplexMatrix::Zero(d, d);
  const double scale = std::sqrt(2.0 / (l * (l + 1.0)));
  for (int j = 0; j < l; ++j) m(j, j) = scale;
  m(l, l) = -l * scale;
  return m;
}

void check_square(const ComplexMatrix& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() < 2) {
    throw InvalidDimension(std::string(what) + ": expected a square matrix of size >= 2");
  }
}

}  // namespace

bool is_hermitian(const ComplexMatrix& m, double tolerance) {
  if (m.rows() != m.cols()) return false;
  return (m - m.adjoint()).norm() <= tolerance;
}

OperatorBasis::OperatorBasis(int dim) : dim_(dim) {
  if (dim < 2) throw InvalidDimension("operator basis requires d >= 2, got " + std::to_string(dim));
  elements_.reserve(static_cast<size_t>(dim * dim));
  if (dim == 3) {
    elements_.push_back(symmetric_pair(3, 0, 1));
    elements_.push_back(antisymmetric_pair(3, 0, 1));
    elements_.push_back(diagonal_element(3, 1));
    elements_.push_back(symmetric_pair(3, 0, 2));
    elements_.push_back(antisymmetric_pair(3, 0, 2));
    elements_.push_back(symmetric_pair(3, 1, 2));
    elements_.push_back(antisymmetric_pair(3, 1, 2));
    elements_.push_back(diagonal_element(3, 2));
  } else {
    for (int j = 0; j < dim; ++j)
      for (int k = j + 1; k < dim; ++k) elements_.push_back(symmetric_pair(dim, j, k));
    for (int j = 0; j < dim; ++j)
      for (int k = j + 1; k < dim; ++k) elements_.push_back(antisymmetric_pair(dim, j, k));
    for (int l = 1; l < dim; ++l) elements_.push_back(diagonal_element(dim, l));
  }
  elements_.push_back(std::sqrt(2.0 / dim) * ComplexMatrix::Identity(dim, dim));
}

OperatorBasis build_basis(int d) { return OperatorBasis(d); }

const OperatorBasis& cached_basis(int d) {
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<OperatorBasis>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto& slot = cache[d];
  if (!slot) slot = std::make_unique<OperatorBasis>(d);
  return *slot;
}

DensityMatrix DensityMatrix::from_measured(const ComplexMatrix& m) {
  check_square(m, "density matrix");
  if (!is_hermitian(m, kHermitianTolerance)) throw NonHermitian("density matrix is not Hermitian");
  const Complex tr = m.trace();
  if (std::abs(tr - 1.0) > kTraceTolerance) {
    throw InvalidState("density matrix trace is " + std::to_string(tr.real()) + ", expected 1");
  }
  return DensityMatrix(m);
}

DensityMatrix DensityMatrix::from_matrix(const ComplexMatrix& m) {
  DensityMatrix rho = from_measured(m);
  const double lowest = rho.min_eigenvalue();
  if (lowest < kPsdTolerance) {
    throw InvalidState("density matrix has eigenvalue " + std::to_string(lowest) +
                       " below the positivity tolerance");
  }
  return rho;
}

double DensityMatrix::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(m_, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

BlochVector::BlochVector(int dim, RealVector coords) : dim_(dim), coords_(std::move(coords)) {
  if (dim < 2) throw InvalidDimension("Bloch vector requires d >= 2");
  if (coords_.size() != dim * dim) {
    throw DimensionMismatch("Bloch vector of dimension " + std::to_string(dim) + " needs " +
                            std::to_string(dim * dim) + " coordinates");
  }
}

double trace_coordinate(int d) { return std::sqrt(1.0 / (2.0 * d)); }

RealVector vectorize_operator(const ComplexMatrix& op, const OperatorBasis& basis) {
  if (op.rows() != basis.dim() || op.cols() != basis.dim()) {
    throw DimensionMismatch("operator and basis dimensions differ");
  }
  RealVector coords(basis.size());
  for (int i = 0; i < basis.size(); ++i) {
    // Tr(A B) = sum_jk A_jk B_kj = sum of elementwise product with B^T
    const Complex value = 0.5 * (op.cwiseProduct(basis[i].transpose())).sum();
    if (std::abs(value.imag()) > kImaginaryResidue) {
      throw NonHermitian("operator has a non-negligible anti-Hermitian part");
    }
    coords(i) = value.real();
  }
  return coords;
}

ComplexMatrix devectorize_operator(const RealVector& coords, const OperatorBasis& basis) {
  if (coords.size() != basis.size()) throw DimensionMismatch("coordinate vector and basis sizes differ");
  ComplexMatrix op = ComplexMatrix::Zero(basis.dim(), basis.dim());
  for (int i = 0; i < basis.size(); ++i) op += coords(i) * basis[i];
  return op;
}

BlochVector vectorize(const DensityMatrix& rho, const OperatorBasis& basis) {
  if (rho.dim() != basis.dim()) throw DimensionMismatch("state and basis dimensions differ");
  return BlochVector(basis.dim(), vectorize_operator(rho.matrix(), basis));
}

DensityMatrix devectorize(const BlochVector& v, const OperatorBasis& basis) {
  if (v.dim() != basis.dim()) throw DimensionMismatch("Bloch vector and basis dimensions differ");
  return DensityMatrix::from_measured(devectorize_operator(v.coords(), basis));
}

RealMatrix state_matrix(std::span<const DensityMatrix> states, const OperatorBasis& basis) {
  RealMatrix m(basis.size(), static_cast<Eigen::Index>(states.size()));
  for (size_t k = 0; k < states.size(); ++k) {
    m.col(static_cast<Eigen::Index>(k)) = vectorize(states[k], basis).coords();
  }
  return m;
}

}  // namespace qpt
