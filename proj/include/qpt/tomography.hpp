#pragma once

#include <map>
#include <vector>

#include "qpt/dynamics.hpp"

namespace qpt {

/// Refuse inversion when the symmetrized input matrix is worse conditioned than this.
inline constexpr double kMaxInputCondition = 1e8;

/// Input states (Bloch vectors as columns) and measured outputs per evolution time.
class TomographySet {
 public:
  /// Validates N >= d^2, matching shapes and the trace component of every column.
  TomographySet(int dim, RealMatrix inputs, std::map<double, RealMatrix> outputs);

  int dim() const { return dim_; }
  int n_states() const { return static_cast<int>(inputs_.cols()); }
  const RealMatrix& inputs() const { return inputs_; }
  const std::map<double, RealMatrix>& outputs() const { return outputs_; }
  std::vector<double> times() const;
  /// Output matrix at t (matched to 1e-12 s); throws InvalidArgument if absent.
  const RealMatrix& output_at(double t) const;

  int input_rank() const;
  /// Condition number of the symmetrized input matrix M_in M_in^T.
  double input_condition() const;

 private:
  int dim_;
  RealMatrix inputs_;
  std::map<double, RealMatrix> outputs_;
};

/// The 15 qutrit states |i> and (|i> + e^{i phi}|j>)/sqrt 2, phi in {0, pi/2, pi, 3pi/2},
/// ordered as: the three basis states, then four phases for each of the level
/// pairs (+1,0), (0,-1), (+1,-1).
std::vector<DensityMatrix> canonical_input_states();

struct SymmetrizedPair {
  RealMatrix input;   // M_in M_in^T
  RealMatrix output;  // M_out M_in^T
};

SymmetrizedPair symmetrize(const RealMatrix& inputs, const RealMatrix& outputs);
SymmetrizedPair symmetrize(const TomographySet& ts, double t);

/// P = sym(M_out) sym(M_in)^{-1}, solved as a linear system.
ProcessMatrix reconstruct_from_matrices(int dim, const RealMatrix& inputs, const RealMatrix& outputs,
                                        double duration);
ProcessMatrix reconstruct_process(const TomographySet& ts, double t);

/// log(P(t)) / t.
Superoperator direct_liouvillian(const TomographySet& ts, double t);

/// P_n with M(t_{n+1}) = P_n M(t_n), using the measured output matrices at
/// consecutive times as input/output pairs.
std::vector<ProcessMatrix> stepwise_processes(const TomographySet& ts);

}  // namespace qpt
