// Shared test helpers: seeded generators and independent reference
// implementations used as oracles.
#pragma once

#include <cmath>
#include <random>
#include <vector>

#include <unsupported/Eigen/KroneckerProduct>

#include "qpt/basis.hpp"
#include "qpt/superop.hpp"

namespace qpt::testing {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo = -1.0, double hi = 1.0) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline double gaussian(Rng& rng) { return std::normal_distribution<double>(0.0, 1.0)(rng); }

inline ComplexMatrix random_complex(Rng& rng, int d, double scale = 1.0) {
  ComplexMatrix m(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = Complex(gaussian(rng), gaussian(rng)) * scale;
  return m;
}

inline ComplexMatrix random_hermitian(Rng& rng, int d, double scale = 1.0) {
  const ComplexMatrix a = random_complex(rng, d, scale);
  return 0.5 * (a + a.adjoint());
}

inline ComplexMatrix random_density(Rng& rng, int d) {
  const ComplexMatrix a = random_complex(rng, d);
  ComplexMatrix rho = a * a.adjoint();
  return rho / rho.trace().real();
}

// vec() stacks columns; vec(A X B) = (B^T kron A) vec(X).
inline ComplexMatrix vec_basis(const OperatorBasis& basis) {
  const int d = basis.dim();
  ComplexMatrix u(d * d, basis.size());
  for (int k = 0; k < basis.size(); ++k) u.col(k) = basis[k].reshaped();
  return u;
}

// Real Bloch-Fano matrix of a linear map given in column-stacked Liouville form.
inline RealMatrix to_bloch(const ComplexMatrix& liouville, const OperatorBasis& basis) {
  const ComplexMatrix u = vec_basis(basis);
  const ComplexMatrix s = 0.5 * u.adjoint() * liouville * u;
  return s.real();
}

// Liouville form of rho -> -i[H, rho] + sum_k (L rho L^dag - 1/2 {L^dag L, rho}).
inline ComplexMatrix lindblad_liouville(const ComplexMatrix& h, const std::vector<ComplexMatrix>& jumps) {
  const int d = static_cast<int>(h.rows());
  const ComplexMatrix id = ComplexMatrix::Identity(d, d);
  const Complex i(0.0, 1.0);
  ComplexMatrix l = -i * (Eigen::kroneckerProduct(id, h).eval() - Eigen::kroneckerProduct(h.transpose(), id).eval());
  for (const auto& j : jumps) {
    const ComplexMatrix jdj = j.adjoint() * j;
    l += Eigen::kroneckerProduct(j.conjugate(), j).eval();
    l -= 0.5 * (Eigen::kroneckerProduct(id, jdj).eval() + Eigen::kroneckerProduct(jdj.transpose(), id).eval());
  }
  return l;
}

// rho' = f(rho) for the master equation, used by the RK4 oracle.
inline ComplexMatrix lindblad_rhs(const ComplexMatrix& h, const std::vector<ComplexMatrix>& jumps,
                                  const ComplexMatrix& rho) {
  const Complex i(0.0, 1.0);
  ComplexMatrix out = -i * (h * rho - rho * h);
  for (const auto& j : jumps) {
    const ComplexMatrix jdj = j.adjoint() * j;
    out += j * rho * j.adjoint() - 0.5 * (jdj * rho + rho * jdj);
  }
  return out;
}

inline ComplexMatrix rk4_evolve(const ComplexMatrix& h, const std::vector<ComplexMatrix>& jumps,
                                ComplexMatrix rho, double t, int steps) {
  const double dt = t / steps;
  for (int n = 0; n < steps; ++n) {
    const ComplexMatrix k1 = lindblad_rhs(h, jumps, rho);
    const ComplexMatrix k2 = lindblad_rhs(h, jumps, rho + 0.5 * dt * k1);
    const ComplexMatrix k3 = lindblad_rhs(h, jumps, rho + 0.5 * dt * k2);
    const ComplexMatrix k4 = lindblad_rhs(h, jumps, rho + dt * k3);
    rho += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return rho;
}

struct RandomModel {
  ComplexMatrix h;
  std::vector<ComplexMatrix> jumps;
};

inline RandomModel random_model(Rng& rng, int d, double h_scale, double jump_scale, int n_jumps) {
  RandomModel m{random_hermitian(rng, d, h_scale), {}};
  for (int k = 0; k < n_jumps; ++k) m.jumps.push_back(random_complex(rng, d, jump_scale));
  return m;
}

inline double rel_frobenius(const RealMatrix& a, const RealMatrix& b) { return (a - b).norm() / b.norm(); }

}  // namespace qpt::testing
