#pragma once

#include <array>
#include <span>
#include <vector>

#include "qpt/basis.hpp"

namespace qpt {

/// Real d^2 x d^2 matrix acting on Bloch-Fano vectors.
///
/// Every superoperator in this library is stored in generator convention: a
/// Hamiltonian H is represented by the real matrix of -i[H, .], so that
/// d|rho>>/dt = S |rho>> holds directly. Dissipators are stored with the
/// opposite sign (the Liouvillian is G - R).
class Superoperator {
 public:
  Superoperator(int dim, RealMatrix matrix);
  static Superoperator zero(int dim);
  static Superoperator identity(int dim);

  int dim() const { return dim_; }
  const RealMatrix& matrix() const { return matrix_; }

  Superoperator operator+(const Superoperator& other) const;
  Superoperator operator-(const Superoperator& other) const;
  Superoperator operator*(double scale) const;

 private:
  int dim_;
  RealMatrix matrix_;
};

struct LindbladModel {
  ComplexMatrix hamiltonian;
  std::vector<ComplexMatrix> jumps;
};

/// Nine real parameters of a 3x3 Hermitian matrix:
///   [[H1, H2 - iH3, H4 - iH5], [H2 + iH3, H6, H7 - iH8], [H4 + iH5, H7 + iH8, H9]]
struct HermitianParams {
  std::array<double, 9> h{};
};

ComplexMatrix hermitian_matrix(const HermitianParams& p);
HermitianParams params_from_hermitian(const ComplexMatrix& h);

struct KossakowskiMatrix {
  int dim = 0;
  ComplexMatrix c;  // d^2 x d^2 over the full basis including sigma_{d^2}
};

struct SpinOperators {
  ComplexMatrix fx, fy, fz;
  const ComplexMatrix& operator[](int axis) const { return axis == 0 ? fx : (axis == 1 ? fy : fz); }
};

/// Real matrix of -i[H, .]; entries -(i/2) Tr([H, sigma_j] sigma_i).
Superoperator hamiltonian_superop(const ComplexMatrix& h, const OperatorBasis& basis);

/// R_ij = 1/2 sum_mu Tr((1/2 {L^dag L, sigma_j} - L sigma_j L^dag) sigma_i).
Superoperator dissipator_superop(std::span<const ComplexMatrix> jumps, const OperatorBasis& basis);

/// L = hc - rt. `hc` must be antisymmetric and `rt` must have a zero last row.
Superoperator assemble_liouvillian(const Superoperator& hc, const Superoperator& rt);

/// Liouvillian of a Lindblad model: hamiltonian_superop(H) - dissipator_superop(jumps).
Superoperator lindblad_liouvillian(const LindbladModel& model, const OperatorBasis& basis);

/// Closed-form qutrit Hamiltonian generator in the d = 3 basis, built entry by
/// entry from the nine Hermitian parameters. Equals
/// hamiltonian_superop(hermitian_matrix(p), qutrit basis).
Superoperator explicit_qutrit_superop(const HermitianParams& p);

struct HermitianFit {
  HermitianParams params;
  double residual = 0.0;  // Frobenius norm of the non-representable part
};

/// Least-squares Hermitian parameters over all 81 entries. The superoperator
/// is blind to the trace of H, so the minimum-norm (traceless) solution is
/// returned.
HermitianFit params_from_superop(const Superoperator& hs);

/// C'_ij = C_ij - (i sqrt(d) / (2 sqrt(2))) (h_i delta_{j,d^2} - h_j delta_{i,d^2}),
/// h_k = Tr(H_R sigma_k). Absorbs -i[H_R, .] into the dissipator.
KossakowskiMatrix kossakowski_shift(const KossakowskiMatrix& c, const ComplexMatrix& hr,
                                    const OperatorBasis& basis);

/// Generator of d rho/dt = -i[H, rho] + sum_ij C_ij (sigma_i rho sigma_j - 1/2 {sigma_j sigma_i, rho}).
Superoperator gkls_generator(const KossakowskiMatrix& c, const ComplexMatrix& h,
                             const OperatorBasis& basis);

/// f = 1 angular momentum matrices in the |+1>, |0>, |-1> ordering.
SpinOperators spin1_operators();

/// H = sum_k omega_k F_k + sum_k q_k F_k^2 (rad/s).
ComplexMatrix zeeman_hamiltonian(const std::array<double, 3>& omega, const std::array<double, 3>& q);

}  // namespace qpt
