#include "qpt/superop.hpp"

#include <cmath>
#include <string>

#include <Eigen/QR>

namespace qpt {

namespace {

constexpr double kRealResidue = 1e-10;
constexpr double kHermitianRelTolerance = 1e-10;
constexpr double kStructureRelTolerance = 1e-9;

// 1/2 Tr(a b)
Complex half_trace_product(const ComplexMatrix& a, const ComplexMatrix& b) {
  return 0.5 * a.cwiseProduct(b.transpose()).sum();
}

double scale_of(const ComplexMatrix& m) { return std::max(1.0, m.norm()); }

void require_hermitian(const ComplexMatrix& h, const char* what) {
  if (h.rows() != h.cols()) throw InvalidDimension(std::string(what) + " must be square");
  if ((h - h.adjoint()).norm() > kHermitianRelTolerance * scale_of(h)) {
    throw NonHermitian(std::string(what) + " is not Hermitian");
  }
}

double take_real(Complex value, double scale, const char* what) {
  if (std::abs(value.imag()) > kRealResidue * scale) {
    throw NonHermitian(std::string(what) + " has a non-real Bloch-Fano representation");
  }
  return value.real();
}

}  // namespace

Superoperator::Superoperator(int dim, RealMatrix matrix) : dim_(dim), matrix_(std::move(matrix)) {
  if (dim < 2) throw InvalidDimension("superoperator requires d >= 2");
  if (matrix_.rows() != dim * dim || matrix_.cols() != dim * dim) {
    throw DimensionMismatch("superoperator of dimension " + std::to_string(dim) + " must be " +
                            std::to_string(dim * dim) + "x" + std::to_string(dim * dim));
  }
}

Superoperator Superoperator::zero(int dim) { return Superoperator(dim, RealMatrix::Zero(dim * dim, dim * dim)); }

Superoperator Superoperator::identity(int dim) {
  return Superoperator(dim, RealMatrix::Identity(dim * dim, dim * dim));
}

Superoperator Superoperator::operator+(const Superoperator& other) const {
  if (other.dim_ != dim_) throw DimensionMismatch("superoperator dimensions differ");
  return Superoperator(dim_, matrix_ + other.matrix_);
}

Superoperator Superoperator::operator-(const Superoperator& other) const {
  if (other.dim_ != dim_) throw DimensionMismatch("superoperator dimensions differ");
  return Superoperator(dim_, matrix_ - other.matrix_);
}

Superoperator Superoperator::operator*(double scale) const { return Superoperator(dim_, matrix_ * scale); }

ComplexMatrix hermitian_matrix(const HermitianParams& p) {
  const auto& h = p.h;
  const Complex i(0.0, 1.0);
  ComplexMatrix m(3, 3);
  m << h[0], h[1] - i * h[2], h[3] - i * h[4],
       h[1] + i * h[2], h[5], h[6] - i * h[7],
       h[3] + i * h[4], h[6] + i * h[7], h[8];
  return m;
}

HermitianParams params_from_hermitian(const ComplexMatrix& m) {
  if (m.rows() != 3 || m.cols() != 3) throw DimensionMismatch("Hermitian parametrization is defined for 3x3");
  require_hermitian(m, "matrix");
  HermitianParams p;
  p.h = {m(0, 0).real(), m(1, 0).real(), m(1, 0).imag(), m(2, 0).real(), m(2, 0).imag(),
         m(1, 1).real(), m(2, 1).real(), m(2, 1).imag(), m(2, 2).real()};
  return p;
}

Superoperator hamiltonian_superop(const ComplexMatrix& h, const OperatorBasis& basis) {
  if (h.rows() != basis.dim() || h.cols() != basis.dim()) {
    throw DimensionMismatch("Hamiltonian and basis dimensions differ");
  }
  require_hermitian(h, "Hamiltonian");
  const int n = basis.size();
  const double scale = scale_of(h);
  const Complex minus_i(0.0, -1.0);
  RealMatrix out(n, n);
  for (int j = 0; j < n; ++j) {
    const ComplexMatrix comm = h * basis[j] - basis[j] * h;
    for (int i = 0; i < n; ++i) {
      out(i, j) = take_real(minus_i * half_trace_product(comm, basis[i]), scale, "Hamiltonian");
    }
  }
  return Superoperator(basis.dim(), std::move(out));
}

Superoperator dissipator_superop(std::span<const ComplexMatrix> jumps, const OperatorBasis& basis) {
  const int d = basis.dim();
  const int n = basis.size();
  RealMatrix out = RealMatrix::Zero(n, n);
  for (const auto& jump : jumps) {
    if (jump.rows() != d || jump.cols() != d) throw DimensionMismatch("jump operator dimension differs from basis");
    const ComplexMatrix ldl = jump.adjoint() * jump;
    const ComplexMatrix jump_dag = jump.adjoint();
    const double scale = std::max(1.0, ldl.norm());
    for (int j = 0; j < n; ++j) {
      const ComplexMatrix& s = basis[j];
      const ComplexMatrix image = 0.5 * (ldl * s + s * ldl) - jump * s * jump_dag;
      for (int i = 0; i < n; ++i) {
        out(i, j) += take_real(half_trace_product(image, basis[i]), scale, "dissipator");
      }
    }
  }
  return Superoperator(d, std::move(out));
}

Superoperator assemble_liouvillian(const Superoperator& hc, const Superoperator& rt) {
  if (hc.dim() != rt.dim()) throw DimensionMismatch("Hamiltonian and dissipator dimensions differ");
  const RealMatrix& a = hc.matrix();
  if ((a + a.transpose()).norm() > kStructureRelTolerance * std::max(1.0, a.norm())) {
    throw InvalidArgument("Hamiltonian superoperator is not antisymmetric");
  }
  const RealMatrix& r = rt.matrix();
  if (r.row(r.rows() - 1).norm() > kStructureRelTolerance * std::max(1.0, r.norm())) {
    throw InvalidArgument("dissipator does not preserve trace (non-zero last row)");
  }
  return hc - rt;
}

Superoperator lindblad_liouvillian(const LindbladModel& model, const OperatorBasis& basis) {
  return hamiltonian_superop(model.hamiltonian, basis) - dissipator_superop(model.jumps, basis);
}

Superoperator explicit_qutrit_superop(const HermitianParams& p) {
  const auto& h = p.h;
  const double H1 = h[0], H2 = h[1], H3 = h[2], H4 = h[3], H5 = h[4], H6 = h[5], H7 = h[6], H8 = h[7], H9 = h[8];
  const double r3 = std::sqrt(3.0);
  // The Hamiltonian superoperator written as -i * m; its generator -i * (-i * m) is -m.
  RealMatrix m(9, 9);
  m << 0, H1 - H6, -2 * H3, H8, -H7, H5, -H4, 0, 0,
       H6 - H1, 0, 2 * H2, H7, H8, -H4, -H5, 0, 0,
       2 * H3, -2 * H2, 0, H5, -H4, -H8, H7, 0, 0,
       -H8, -H7, -H5, 0, H1 - H9, H3, H2, -r3 * H5, 0,
       H7, -H8, H4, H9 - H1, 0, -H2, H3, r3 * H4, 0,
       -H5, H4, H8, -H3, H2, 0, H6 - H9, -r3 * H8, 0,
       H4, H5, -H7, -H2, -H3, H9 - H6, 0, r3 * H7, 0,
       0, 0, 0, r3 * H5, -r3 * H4, r3 * H8, -r3 * H7, 0, 0,
       0, 0, 0, 0, 0, 0, 0, 0, 0;
  return Superoperator(3, -m);
}

HermitianFit params_from_superop(const Superoperator& hs) {
  if (hs.dim() != 3) throw DimensionMismatch("Hermitian parametrization is defined for d = 3");
  static const RealMatrix design = [] {
    RealMatrix a(81, 9);
    for (int k = 0; k < 9; ++k) {
      HermitianParams unit;
      unit.h[static_cast<size_t>(k)] = 1.0;
      a.col(k) = explicit_qutrit_superop(unit).matrix().reshaped();
    }
    return a;
  }();
  const RealVector target = hs.matrix().reshaped();
  Eigen::CompleteOrthogonalDecomposition<RealMatrix> cod(design);
  const RealVector solution = cod.solve(target);
  HermitianFit fit;
  for (int k = 0; k < 9; ++k) fit.params.h[static_cast<size_t>(k)] = solution(k);
  fit.residual = (design * solution - target).norm();
  return fit;
}

KossakowskiMatrix kossakowski_shift(const KossakowskiMatrix& c, const ComplexMatrix& hr,
                                    const OperatorBasis& basis) {
  const int d = basis.dim();
  const int n = basis.size();
  if (c.dim != d || c.c.rows() != n || c.c.cols() != n) {
    throw DimensionMismatch("Kossakowski matrix and basis dimensions differ");
  }
  if (hr.rows() != d || hr.cols() != d) throw DimensionMismatch("residual Hamiltonian and basis dimensions differ");
  require_hermitian(hr, "residual Hamiltonian");
  std::vector<double> hk(static_cast<size_t>(n));
  for (int k = 0; k < n; ++k) hk[static_cast<size_t>(k)] = (hr * basis[k]).trace().real();

  const Complex factor = Complex(0.0, std::sqrt(static_cast<double>(d)) / (2.0 * std::sqrt(2.0)));
  const int last = n - 1;
  KossakowskiMatrix shifted = c;
  for (int k = 0; k < last; ++k) {
    shifted.c(k, last) -= factor * hk[static_cast<size_t>(k)];
    shifted.c(last, k) += factor * hk[static_cast<size_t>(k)];
  }
  return shifted;
}

Superoperator gkls_generator(const KossakowskiMatrix& c, const ComplexMatrix& h, const OperatorBasis& basis) {
  const int d = basis.dim();
  const int n = basis.size();
  if (c.dim != d || c.c.rows() != n || c.c.cols() != n) {
    throw DimensionMismatch("Kossakowski matrix and basis dimensions differ");
  }
  RealMatrix out = hamiltonian_superop(h, basis).matrix();
  const double scale = std::max(1.0, c.c.norm());
  for (int b = 0; b < n; ++b) {
    const ComplexMatrix& rho = basis[b];
    ComplexMatrix image = ComplexMatrix::Zero(d, d);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        const Complex cij = c.c(i, j);
        if (cij == Complex(0.0, 0.0)) continue;
        const ComplexMatrix ji = basis[j] * basis[i];
        image += cij * (basis[i] * rho * basis[j] - 0.5 * (ji * rho + rho * ji));
      }
    }
    for (int a = 0; a < n; ++a) out(a, b) += take_real(half_trace_product(image, basis[a]), scale, "GKLS dissipator");
  }
  return Superoperator(d, std::move(out));
}

SpinOperators spin1_operators() {
  const double s = 1.0 / std::sqrt(2.0);
  const Complex i(0.0, 1.0);
  SpinOperators f;
  f.fx = ComplexMatrix::Zero(3, 3);
  f.fx << 0, s, 0, s, 0, s, 0, s, 0;
  f.fy = ComplexMatrix::Zero(3, 3);
  f.fy << 0, -i * s, 0, i * s, 0, -i * s, 0, i * s, 0;
  f.fz = ComplexMatrix::Zero(3, 3);
  f.fz << 1, 0, 0, 0, 0, 0, 0, 0, -1;
  return f;
}

ComplexMatrix zeeman_hamiltonian(const std::array<double, 3>& omega, const std::array<double, 3>& q) {
  const SpinOperators f = spin1_operators();
  ComplexMatrix h = ComplexMatrix::Zero(3, 3);
  for (int k = 0; k < 3; ++k) {
    const auto kk = static_cast<size_t>(k);
    h += omega[kk] * f[k] + q[kk] * (f[k] * f[k]);
  }
  // F_k^2 products are Hermitian up to rounding; symmetrize so downstream checks are exact.
  return 0.5 * (h + h.adjoint());
}

}  // namespace qpt
