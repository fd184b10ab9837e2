// Prepared input states of the qutrit vapor-cell experiment (theory and
// measured), with the reported state fidelities.
#pragma once

#include <array>
#include <vector>

#include "qpt/types.hpp"

namespace qpt::testing {

struct MeasuredState {
  ComplexMatrix theory;
  ComplexMatrix measured;
  double fidelity;
};

// Entries are listed for the upper triangle; the lower triangle is the
// Hermitian completion. (The printed table carries one lower-triangle entry
// of rho_13 that disagrees with its mirror in the third decimal.)
inline ComplexMatrix hermitian_from_upper(double a00, Complex a01, Complex a02, double a11, Complex a12, double a22) {
  ComplexMatrix m(3, 3);
  m << a00, a01, a02, std::conj(a01), a11, a12, std::conj(a02), std::conj(a12), a22;
  return m;
}

inline std::vector<MeasuredState> measured_input_states() {
  using C = Complex;
  const C i(0.0, 1.0);
  std::vector<MeasuredState> s;
  s.push_back({hermitian_from_upper(1, 0, 0, 0, 0, 0),
               hermitian_from_upper(0.919, C(0.001, -0.080), C(0.011, 0.011), 0.045, C(-0.012, -0.017), 0.036),
               0.919});
  s.push_back({hermitian_from_upper(0, 0, 0, 1, 0, 0),
               hermitian_from_upper(0.069, C(-0.017, 0.039), C(-0.018, -0.001), 0.878, C(0.004, 0.007), 0.053),
               0.878});
  s.push_back({hermitian_from_upper(0, 0, 0, 0, 0, 1),
               hermitian_from_upper(0.036, C(0.011, 0.015), C(0.007, -0.027), 0.072, C(0.0, -0.038), 0.892),
               0.892});
  s.push_back({hermitian_from_upper(0.5, 0.5, 0, 0.5, 0, 0),
               hermitian_from_upper(0.460, C(0.423, -0.018), C(0.020, -0.030), 0.478, C(0.044, -0.077), 0.062),
               0.892});
  s.push_back({hermitian_from_upper(0.5, -0.5 * i, 0, 0.5, 0, 0),
               hermitian_from_upper(0.467, C(0.041, -0.436), C(-0.010, 0.021), 0.480, C(-0.035, -0.033), 0.053),
               0.909});
  s.push_back({hermitian_from_upper(0.5, -0.5, 0, 0.5, 0, 0),
               hermitian_from_upper(0.473, C(-0.437, -0.092), C(0.047, -0.026), 0.514, C(-0.043, 0.045), 0.013),
               0.931});
  s.push_back({hermitian_from_upper(0.5, 0.5 * i, 0, 0.5, 0, 0),
               hermitian_from_upper(0.472, C(-0.144, 0.402), C(-0.053, 0.036), 0.487, C(0.023, 0.021), 0.041),
               0.882});
  s.push_back({hermitian_from_upper(0, 0, 0, 0.5, 0.5, 0.5),
               hermitian_from_upper(0.034, C(0.066, 0.011), C(0.042, -0.031), 0.532, C(0.410, -0.075), 0.434),
               0.893});
  s.push_back({hermitian_from_upper(0, 0, 0, 0.5, -0.5 * i, 0.5),
               hermitian_from_upper(0.041, C(0.025, -0.052), C(-0.047, 0.008), 0.544, C(-0.033, -0.421), 0.415),
               0.901});
  s.push_back({hermitian_from_upper(0, 0, 0, 0.5, -0.5, 0.5),
               hermitian_from_upper(0.054, C(-0.066, -0.019), C(0.027, 0.005), 0.513, C(-0.408, 0.006), 0.433),
               0.881});
  s.push_back({hermitian_from_upper(0, 0, 0, 0.5, 0.5 * i, 0.5),
               hermitian_from_upper(0.057, C(-0.049, 0.068), C(-0.022, 0.005), 0.527, C(-0.038, 0.419), 0.416),
               0.890});
  s.push_back({hermitian_from_upper(0.5, 0, 0.5, 0, 0, 0.5),
               hermitian_from_upper(0.523, C(-0.016, -0.010), C(0.415, -0.002), 0.037, C(-0.007, -0.002), 0.440),
               0.897});
  s.push_back({hermitian_from_upper(0.5, 0, -0.5 * i, 0, 0, 0.5),
               hermitian_from_upper(0.540, C(-0.041, -0.010), C(0.063, -0.435), 0.036, C(0.021, 0.025), 0.424),
               0.917});
  s.push_back({hermitian_from_upper(0.5, 0, -0.5, 0, 0, 0.5),
               hermitian_from_upper(0.540, C(-0.005, 0.013), C(-0.397, -0.070), 0.025, C(0.012, 0.007), 0.435),
               0.885});
  s.push_back({hermitian_from_upper(0.5, 0, 0.5 * i, 0, 0, 0.5),
               hermitian_from_upper(0.525, C(0.019, 0.022), C(-0.134, 0.404), 0.044, C(0.004, -0.006), 0.431),
               0.882});
  return s;
}

}  // namespace qpt::testing
