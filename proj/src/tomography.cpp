#include "qpt/tomography.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace qpt {

namespace {

constexpr double kTraceComponentTolerance = 1e-9;
constexpr double kTimeMatchTolerance = 1e-12;
constexpr double kRankRelTolerance = 1e-10;

int numerical_rank(const RealMatrix& m) {
  Eigen::JacobiSVD<RealMatrix> svd(m);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  int rank = 0;
  for (Eigen::Index k = 0; k < s.size(); ++k) {
    if (s(k) > kRankRelTolerance * s(0)) ++rank;
  }
  return rank;
}

double symmetric_condition(const RealMatrix& sym) {
  Eigen::SelfAdjointEigenSolver<RealMatrix> solver(sym, Eigen::EigenvaluesOnly);
  const auto& ev = solver.eigenvalues();
  if (ev(0) <= 0.0) return std::numeric_limits<double>::infinity();
  return ev(ev.size() - 1) / ev(0);
}

void check_state_columns(int dim, const RealMatrix& m, const char* what) {
  const double expected = trace_coordinate(dim);
  for (Eigen::Index k = 0; k < m.cols(); ++k) {
    if (std::abs(m(m.rows() - 1, k) - expected) > kTraceComponentTolerance) {
      std::ostringstream msg;
      msg << what << " column " << k << " has trace component " << m(m.rows() - 1, k) << ", expected "
          << expected;
      throw InvalidState(msg.str());
    }
  }
}

}  // namespace

TomographySet::TomographySet(int dim, RealMatrix inputs, std::map<double, RealMatrix> outputs)
    : dim_(dim), inputs_(std::move(inputs)), outputs_(std::move(outputs)) {
  if (dim < 2) throw InvalidDimension("tomography set requires d >= 2");
  const int n = dim * dim;
  if (inputs_.rows() != n) throw DimensionMismatch("input state matrix must have d^2 rows");
  if (inputs_.cols() < n) {
    throw InvalidArgument("informationally complete tomography needs N >= d^2 = " + std::to_string(n) +
                          " input states, got " + std::to_string(inputs_.cols()));
  }
  check_state_columns(dim, inputs_, "input");
  for (const auto& [t, out] : outputs_) {
    if (!(t >= 0.0)) throw InvalidArgument("output times must be non-negative");
    if (out.rows() != n || out.cols() != inputs_.cols()) {
      throw DimensionMismatch("output state matrix shape differs from the input matrix");
    }
    check_state_columns(dim, out, "output");
  }
}

std::vector<double> TomographySet::times() const {
  std::vector<double> ts;
  ts.reserve(outputs_.size());
  for (const auto& entry : outputs_) ts.push_back(entry.first);
  return ts;
}

const RealMatrix& TomographySet::output_at(double t) const {
  auto it = outputs_.lower_bound(t - kTimeMatchTolerance);
  if (it == outputs_.end() || std::abs(it->first - t) > kTimeMatchTolerance) {
    std::ostringstream msg;
    msg << "no output states recorded at t = " << t << " s";
    throw InvalidArgument(msg.str());
  }
  return it->second;
}

int TomographySet::input_rank() const { return numerical_rank(inputs_); }

double TomographySet::input_condition() const {
  return symmetric_condition(inputs_ * inputs_.transpose());
}

std::vector<DensityMatrix> canonical_input_states() {
  std::vector<DensityMatrix> states;
  states.reserve(15);
  for (int i = 0; i < 3; ++i) {
    ComplexMatrix rho = ComplexMatrix::Zero(3, 3);
    rho(i, i) = 1.0;
    states.push_back(DensityMatrix::from_matrix(rho));
  }
  const std::pair<int, int> pairs[] = {{0, 1}, {1, 2}, {0, 2}};
  for (const auto& [i, j] : pairs) {
    for (int q = 0; q < 4; ++q) {
      const double phi = q * std::numbers::pi / 2.0;
      Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(3);
      psi(i) = 1.0 / std::sqrt(2.0);
      psi(j) = std::polar(1.0 / std::sqrt(2.0), phi);
      ComplexMatrix rho = psi * psi.adjoint();
      rho = 0.5 * (rho + rho.adjoint());
      // cos/sin of multiples of pi/2 leave ~1e-17 residue; snap to the exact values.
      rho = rho.unaryExpr([](Complex z) {
        auto snap = [](double x) { return std::abs(x) < 1e-15 ? 0.0 : x; };
        return Complex(snap(z.real()), snap(z.imag()));
      });
      states.push_back(DensityMatrix::from_matrix(rho));
    }
  }
  return states;
}

SymmetrizedPair symmetrize(const RealMatrix& inputs, const RealMatrix& outputs) {
  if (inputs.rows() != outputs.rows() || inputs.cols() != outputs.cols()) {
    throw DimensionMismatch("input and output state matrices differ in shape");
  }
  const RealMatrix in_t = inputs.transpose();
  return {inputs * in_t, outputs * in_t};
}

SymmetrizedPair symmetrize(const TomographySet& ts, double t) {
  return symmetrize(ts.inputs(), ts.output_at(t));
}

ProcessMatrix reconstruct_from_matrices(int dim, const RealMatrix& inputs, const RealMatrix& outputs,
                                        double duration) {
  const int n = dim * dim;
  if (inputs.rows() != n) throw DimensionMismatch("state matrices must have d^2 rows");
  const int rank = numerical_rank(inputs);
  if (rank < n) {
    throw RankDeficient("input states are not informationally complete: rank " + std::to_string(rank) +
                            " < " + std::to_string(n),
                        rank);
  }
  const SymmetrizedPair sym = symmetrize(inputs, outputs);
  const double cond = symmetric_condition(sym.input);
  if (cond > kMaxInputCondition) {
    std::ostringstream msg;
    msg << "symmetrized input matrix is ill-conditioned (condition number " << cond << ")";
    throw IllConditioned(msg.str(), cond);
  }
  // P S = O with S symmetric positive definite  <=>  S P^T = O^T
  Eigen::LLT<RealMatrix> llt(sym.input);
  if (llt.info() != Eigen::Success) throw RankDeficient("symmetrized input matrix is not positive definite", rank);
  RealMatrix p = llt.solve(sym.output.transpose()).transpose();
  return ProcessMatrix(dim, std::move(p), duration);
}

ProcessMatrix reconstruct_process(const TomographySet& ts, double t) {
  return reconstruct_from_matrices(ts.dim(), ts.inputs(), ts.output_at(t), t);
}

Superoperator direct_liouvillian(const TomographySet& ts, double t) {
  if (!(t > 0.0)) throw InvalidArgument("direct Liouvillian estimate needs t > 0");
  const ProcessMatrix p = reconstruct_process(ts, t);
  return principal_log(p) * (1.0 / t);
}

std::vector<ProcessMatrix> stepwise_processes(const TomographySet& ts) {
  const auto& outputs = ts.outputs();
  if (outputs.size() < 2) throw InvalidArgument("stepwise reconstruction needs at least two output times");
  std::vector<ProcessMatrix> steps;
  steps.reserve(outputs.size() - 1);
  auto prev = outputs.begin();
  size_t index = 0;
  for (auto it = std::next(outputs.begin()); it != outputs.end(); ++it, ++prev, ++index) {
    try {
      steps.push_back(reconstruct_from_matrices(ts.dim(), prev->second, it->second, it->first - prev->first));
    } catch (const RankDeficient& e) {
      std::ostringstream msg;
      msg << "step " << index << " (t = " << prev->first << " s): " << e.what();
      throw RankDeficient(msg.str(), e.rank());
    } catch (const IllConditioned& e) {
      std::ostringstream msg;
      msg << "step " << index << " (t = " << prev->first << " s): " << e.what();
      throw IllConditioned(msg.str(), e.condition());
    }
  }
  return steps;
}

}  // namespace qpt
