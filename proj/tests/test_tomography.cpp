#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "qpt/tomography.hpp"
#include "si_states.hpp"
#include "support.hpp"

using namespace qpt;
using namespace qpt::testing;

namespace {

double max_abs(const RealMatrix& m) { return m.cwiseAbs().maxCoeff(); }

RealMatrix canonical_inputs() { return state_matrix(canonical_input_states(), cached_basis(3)); }

Superoperator random_liouvillian(Rng& rng, double h_scale = 2.0 * M_PI * 300.0, double jump_scale = 5.0) {
  const RandomModel m = random_model(rng, 3, h_scale, jump_scale, 3);
  return lindblad_liouvillian(LindbladModel{m.h, m.jumps}, cached_basis(3));
}

TomographySet synthetic(const Superoperator& l, const RealMatrix& inputs, const std::vector<double>& times) {
  std::map<double, RealMatrix> outputs;
  for (double t : times) outputs[t] = propagator(l, t).matrix() * inputs;
  return TomographySet(3, inputs, outputs);
}

}  // namespace

TEST_CASE("canonical input states equal the tabulated theory states") {
  const auto states = canonical_input_states();
  const auto table = measured_input_states();
  REQUIRE(states.size() == 15);
  for (size_t k = 0; k < 15; ++k) {
    INFO("state " << k + 1);
    CHECK((states[k].matrix() - table[k].theory).norm() < 1e-15);
  }
  ComplexMatrix rho13(3, 3);
  const Complex i(0.0, 1.0);
  rho13 << 0.5, 0, -0.5 * i, 0, 0, 0, 0.5 * i, 0, 0.5;
  CHECK((states[12].matrix() - rho13).norm() < 1e-15);
  Eigen::FullPivLU<RealMatrix> lu(canonical_inputs());
  CHECK(lu.rank() == 9);
}

TEST_CASE("symmetrized input matrix is symmetric positive definite") {
  const RealMatrix m = canonical_inputs();
  const SymmetrizedPair s = symmetrize(m, m);
  CHECK(max_abs(s.input - s.output) == 0.0);
  CHECK(max_abs(s.input - s.input.transpose()) < 1e-15);
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(s.input);
  CHECK(es.eigenvalues().minCoeff() > 0.0);
  const TomographySet ts(3, m, {{1e-3, m}});
  CHECK(ts.input_rank() == 9);
  CHECK(ts.input_condition() == doctest::Approx(es.eigenvalues().maxCoeff() / es.eigenvalues().minCoeff()));
  CHECK_THROWS_AS(symmetrize(ts, 2e-3), InvalidArgument);
}

TEST_CASE("nine spanning inputs: symmetrization equals plain inversion") {
  Rng rng(12);
  // Nine random mixed states span the Bloch space almost surely.
  RealMatrix inputs(9, 9);
  for (int k = 0; k < 9; ++k)
    inputs.col(k) = vectorize(DensityMatrix::from_matrix(random_density(rng, 3)), cached_basis(3)).coords();
  const Superoperator l = random_liouvillian(rng);
  const RealMatrix outputs = propagator(l, 1e-3).matrix() * inputs;
  REQUIRE(Eigen::FullPivLU<RealMatrix>(inputs).rank() == 9);
  const ProcessMatrix p = reconstruct_from_matrices(3, inputs, outputs, 1e-3);
  // Random mixed inputs are moderately conditioned; scale the tolerance accordingly.
  const double cond = inputs.jacobiSvd().singularValues()(0) / inputs.jacobiSvd().singularValues()(8);
  CHECK(max_abs(p.matrix() - outputs * inputs.inverse()) < 1e-13 * cond * cond);
}

TEST_CASE("identity outputs reconstruct the identity") {
  const RealMatrix m = canonical_inputs();
  const TomographySet ts(3, m, {{1e-3, m}});
  CHECK(max_abs(reconstruct_process(ts, 1e-3).matrix() - RealMatrix::Identity(9, 9)) < 1e-13);
  CHECK(max_abs(direct_liouvillian(ts, 1e-3).matrix()) < 1e-9);
}

TEST_CASE("noiseless quadratic Zeeman data is reconstructed exactly") {
  const double q = 2.0 * M_PI * 1500.0;
  const Superoperator l = hamiltonian_superop(zeeman_hamiltonian({0, 0, 0}, {0, q, 0}), cached_basis(3));
  std::vector<double> times;
  for (int k = 10; k <= 18; ++k) times.push_back(k * 10e-6);
  const TomographySet ts = synthetic(l, canonical_inputs(), times);
  RealMatrix avg = RealMatrix::Zero(9, 9);
  for (double t : times) {
    CHECK(max_abs(reconstruct_process(ts, t).matrix() - propagator(l, t).matrix()) < 1e-10);
    const Superoperator direct = direct_liouvillian(ts, t);
    CHECK(rel_frobenius(direct.matrix(), l.matrix()) < 1e-8);
    avg += direct.matrix() / static_cast<double>(times.size());
  }
  CHECK(rel_frobenius(avg, l.matrix()) < 1e-8);
}

TEST_CASE("inversion is exact for arbitrary linear maps, physical or not (property)") {
  Rng rng(13);
  const auto table = measured_input_states();
  std::vector<DensityMatrix> mixed;
  for (const auto& s : table) mixed.push_back(DensityMatrix::from_measured(s.measured));
  const RealMatrix measured_inputs = state_matrix(mixed, cached_basis(3));
  for (int trial = 0; trial < 50; ++trial) {
    RealMatrix p(9, 9);
    for (int i = 0; i < 9; ++i)
      for (int j = 0; j < 9; ++j) p(i, j) = gaussian(rng);
    const RealMatrix inputs = trial % 2 == 0 ? canonical_inputs() : measured_inputs;
    const ProcessMatrix rec = reconstruct_from_matrices(3, inputs, p * inputs, 1.0);
    CHECK(max_abs(rec.matrix() - p) < 1e-10);
  }
}

TEST_CASE("reconstruction trace row and column-permutation invariance") {
  Rng rng(14);
  const Superoperator l = random_liouvillian(rng);
  RealMatrix inputs = canonical_inputs();
  const RealMatrix outputs = propagator(l, 2e-3).matrix() * inputs;
  const ProcessMatrix p = reconstruct_from_matrices(3, inputs, outputs, 2e-3);
  CHECK(p.trace_row_error() < 1e-9);
  std::vector<int> order(15);
  for (int k = 0; k < 15; ++k) order[static_cast<size_t>(k)] = k;
  std::shuffle(order.begin(), order.end(), rng);
  RealMatrix pi(9, 15), po(9, 15);
  for (int k = 0; k < 15; ++k) {
    pi.col(k) = inputs.col(order[static_cast<size_t>(k)]);
    po.col(k) = outputs.col(order[static_cast<size_t>(k)]);
  }
  CHECK(max_abs(reconstruct_from_matrices(3, pi, po, 2e-3).matrix() - p.matrix()) < 1e-12);
}

TEST_CASE("rank-deficient and ill-conditioned inputs are refused") {
  RealMatrix m = canonical_inputs();
  // Duplicate columns: 15 states that span only 8 dimensions.
  RealMatrix deficient = m;
  for (int k = 0; k < 15; ++k) deficient(0, k) = 0.0;
  try {
    reconstruct_from_matrices(3, deficient, deficient, 1.0);
    FAIL("expected RankDeficient");
  } catch (const RankDeficient& e) {
    CHECK(e.rank() == 8);
  }
  RealMatrix nearly = m;
  nearly.row(0) *= 1e-6;
  CHECK_THROWS_AS(reconstruct_from_matrices(3, nearly, nearly, 1.0), IllConditioned);
  CHECK_THROWS_AS(TomographySet(3, m.leftCols(8), {}), InvalidArgument);
  RealMatrix bad_trace = m;
  bad_trace(8, 3) = 0.5;
  CHECK_THROWS_AS(TomographySet(3, bad_trace, {}), InvalidState);
  CHECK_THROWS_AS(TomographySet(3, m, {{1.0, m.leftCols(9)}}), DimensionMismatch);
  CHECK_THROWS_AS(TomographySet(3, m.topRows(4), {}), DimensionMismatch);
}

TEST_CASE("stepwise processes for a static generator") {
  Rng rng(15);
  const Superoperator l = random_liouvillian(rng);
  std::vector<double> times;
  for (int k = 0; k <= 10; ++k) times.push_back(k * 0.5e-3);
  const TomographySet ts = synthetic(l, canonical_inputs(), times);
  const auto steps = stepwise_processes(ts);
  REQUIRE(steps.size() == 10);
  const RealMatrix expected = propagator(l, 0.5e-3).matrix();
  RealMatrix product = RealMatrix::Identity(9, 9);
  for (const auto& p : steps) {
    CHECK(p.duration() == doctest::Approx(0.5e-3));
    CHECK(max_abs(p.matrix() - expected) < 1e-9);
    product = p.matrix() * product;
  }
  CHECK(max_abs(product - reconstruct_process(ts, 5e-3).matrix()) < 1e-8);
}

TEST_CASE("stepwise reconstruction names the failing step") {
  // Complete depolarization collapses every output onto the mixed state.
  RealMatrix r = 1e5 * RealMatrix::Identity(9, 9);
  r(8, 8) = 0.0;
  const Superoperator l(3, -r);
  const TomographySet ts = synthetic(l, canonical_inputs(), {0.0, 1e-3, 2e-3});
  try {
    stepwise_processes(ts);
    FAIL("expected a numeric error");
  } catch (const NumericError& e) {
    CHECK(std::string(e.what()).find("step") != std::string::npos);
  }
  const TomographySet one = synthetic(l, canonical_inputs(), {1e-3});
  CHECK_THROWS_AS(stepwise_processes(one), InvalidArgument);
  CHECK_THROWS_AS(direct_liouvillian(one, 0.0), InvalidArgument);
}

TEST_CASE("output lookup tolerates floating-point time keys") {
  const RealMatrix m = canonical_inputs();
  const TomographySet ts(3, m, {{0.1 + 0.2, m}});
  CHECK_NOTHROW(ts.output_at(0.3));
  CHECK_THROWS_AS(ts.output_at(0.31), InvalidArgument);
  CHECK(ts.times().size() == 1);
}
