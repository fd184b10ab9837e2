#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qpt/synthlab.hpp"
#include "si_states.hpp"
#include "support.hpp"

using namespace qpt;
using namespace qpt::testing;

namespace {

double max_abs(const RealMatrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("scenario defaults") {
  const Scenario rel = make_scenario(ScenarioKind::relaxation_only);
  CHECK(rel.grid.size() == 21);
  CHECK(rel.grid.times().front() == doctest::Approx(0.5e-3));
  CHECK(rel.grid.times().back() == doctest::Approx(10.5e-3));
  CHECK(rel.input_states.size() == 15);
  CHECK(max_abs(rel.liouvillian_at(0.0).matrix() + relaxation_superop(reference_relaxation_model()).matrix()) < 1e-12);

  const Scenario quad = make_scenario(ScenarioKind::static_quadratic_zeeman);
  CHECK(quad.grid.size() == 9);
  CHECK(quad.grid.times().front() == doctest::Approx(100e-6));
  CHECK(quad.grid.times().back() == doctest::Approx(180e-6));
  const ComplexMatrix fy = spin1_operators().fy;
  CHECK((quad.hamiltonian - 2.0 * M_PI * 1500.0 * fy * fy).norm() < 1e-9);

  const Scenario three = make_scenario(ScenarioKind::three_axis_time_dependent);
  REQUIRE(three.fields.size() == 3);
  std::vector<double> freqs;
  for (const auto& f : three.fields) freqs.push_back(f.frequency);
  std::sort(freqs.begin(), freqs.end());
  CHECK(freqs == std::vector<double>{5e3, 7.5e3, 10e3});
  CHECK(three.fields[0].shape == FieldWaveform::Shape::triangle);
  CHECK(three.time_dependent());
  CHECK(three.grid.step() == doctest::Approx(4e-6));
  CHECK(three.grid.times().back() == doctest::Approx(200e-6));
}

TEST_CASE("linear Zeeman scenario") {
  ScenarioParams p;
  p.linear_axis = 0;
  p.include_relaxation = false;
  const Scenario s = make_scenario(ScenarioKind::static_linear_zeeman, p);
  CHECK((s.hamiltonian - p.linear_omega * spin1_operators().fx).norm() < 1e-9);
  CHECK(max_abs(s.relaxation_superop().matrix()) == 0.0);
}

TEST_CASE("scenario kind names") {
  CHECK(parse_scenario_kind("three_axis") == ScenarioKind::three_axis_time_dependent);
  CHECK(parse_scenario_kind(scenario_kind_name(ScenarioKind::relaxation_only)) == ScenarioKind::relaxation_only);
  CHECK_THROWS_AS(parse_scenario_kind("bogus"), InvalidArgument);
}

TEST_CASE("noiseless closed loop recovers the true processes") {
  for (ScenarioKind kind : {ScenarioKind::relaxation_only, ScenarioKind::static_quadratic_zeeman,
                            ScenarioKind::three_axis_time_dependent}) {
    const Scenario s = make_scenario(kind);
    const TomographySet ts = generate_dataset(s, NoiseSpec{});
    const auto truth = s.true_processes();
    REQUIRE(truth.size() == ts.times().size());
    for (const auto& p : truth) CHECK(max_abs(reconstruct_process(ts, p.duration()).matrix() - p.matrix()) < 1e-10);
  }
}

TEST_CASE("time-dependent truth matches a fine RK4 integration") {
  const Scenario s = make_scenario(ScenarioKind::three_axis_time_dependent);
  const OperatorBasis& b = cached_basis(3);
  Rng rng(1);
  const ComplexMatrix rho = random_density(rng, 3);
  // Oracle: RK4 with the exact field evaluated at every stage, no relaxation.
  ScenarioParams p;
  p.include_relaxation = false;
  p.substeps = 64;
  const Scenario pure = make_scenario(ScenarioKind::three_axis_time_dependent, p);
  const SpinOperators f = spin1_operators();
  const double t_end = 40e-6;
  const int n = 4000;
  const double dt = t_end / n;
  ComplexMatrix r = rho;
  auto h_at = [&](double t) {
    const auto w = pure.field_at(t);
    return ComplexMatrix(w[0] * f.fx + w[1] * f.fy + w[2] * f.fz);
  };
  auto rhs = [&](double t, const ComplexMatrix& x) {
    const ComplexMatrix h = h_at(t);
    return ComplexMatrix(Complex(0.0, -1.0) * (h * x - x * h));
  };
  for (int k = 0; k < n; ++k) {
    const double t = k * dt;
    const ComplexMatrix k1 = rhs(t, r);
    const ComplexMatrix k2 = rhs(t + 0.5 * dt, r + 0.5 * dt * k1);
    const ComplexMatrix k3 = rhs(t + 0.5 * dt, r + 0.5 * dt * k2);
    const ComplexMatrix k4 = rhs(t + dt, r + dt * k3);
    r += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  const BlochVector v = evolve(vectorize(DensityMatrix::from_matrix(rho), b), pure.process(0.0, t_end));
  CHECK((v.coords() - vectorize_operator(0.5 * (r + r.adjoint()), b)).norm() < 1e-4);
  CHECK(s.process(0.0, t_end).trace_row_error() < 1e-12);
}

TEST_CASE("preparation fidelity") {
  // rho_f = f rho + (1 - f) I/3 has fidelity f + (1 - f)/3 with the pure target.
  const Scenario s = make_scenario(ScenarioKind::relaxation_only);
  const TomographySet ts = generate_dataset(s, NoiseSpec{0.0, 0.9, 1});
  const OperatorBasis& b = cached_basis(3);
  const double expected = 0.9 + 0.1 / 3.0;
  for (int k = 0; k < ts.n_states(); ++k) {
    const DensityMatrix prepared = devectorize(BlochVector(3, ts.inputs().col(k)), b);
    CHECK(state_fidelity(s.input_states[static_cast<size_t>(k)], prepared) == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("state fidelity") {
  Rng rng(2);
  const ComplexMatrix a = random_density(rng, 3);
  CHECK(state_fidelity(DensityMatrix::from_matrix(a), DensityMatrix::from_matrix(a)) == doctest::Approx(1.0));
  ComplexMatrix zero = ComplexMatrix::Zero(3, 3);
  zero(0, 0) = 1.0;
  CHECK(state_fidelity(DensityMatrix::from_matrix(zero), DensityMatrix::from_matrix(ComplexMatrix::Identity(3, 3) / 3.0)) ==
        doctest::Approx(1.0 / 3.0));
  const auto table = measured_input_states();
  CHECK(state_fidelity(DensityMatrix::from_matrix(table[0].theory), DensityMatrix::from_measured(table[0].measured)) ==
        doctest::Approx(0.919).epsilon(1e-3));
  for (const auto& row : table) {
    const double f = state_fidelity(DensityMatrix::from_matrix(row.theory), DensityMatrix::from_measured(row.measured));
    CHECK(std::abs(f - row.fidelity) < 1e-3);
  }
  // Symmetric in its arguments.
  const ComplexMatrix c = random_density(rng, 3);
  CHECK(state_fidelity(DensityMatrix::from_matrix(a), DensityMatrix::from_matrix(c)) ==
        doctest::Approx(state_fidelity(DensityMatrix::from_matrix(c), DensityMatrix::from_matrix(a))).epsilon(1e-9));
  ComplexMatrix bad = ComplexMatrix::Zero(3, 3);
  bad(0, 0) = 1.2;
  bad(1, 1) = -0.2;
  CHECK_THROWS_AS(state_fidelity(DensityMatrix::from_measured(bad), DensityMatrix::from_matrix(a)), InvalidState);
}

TEST_CASE("datasets are deterministic in the seed") {
  const Scenario s = make_scenario(ScenarioKind::static_quadratic_zeeman);
  const TomographySet a = generate_dataset(s, NoiseSpec{1e-2, 0.95, 42});
  const TomographySet b = generate_dataset(s, NoiseSpec{1e-2, 0.95, 42});
  const TomographySet c = generate_dataset(s, NoiseSpec{1e-2, 0.95, 43});
  CHECK((a.inputs().array() == b.inputs().array()).all());
  for (double t : a.times()) CHECK((a.output_at(t).array() == b.output_at(t).array()).all());
  CHECK(max_abs(a.inputs() - c.inputs()) > 0.0);
}

TEST_CASE("noise is honest and trace components stay pinned") {
  const Scenario s = make_scenario(ScenarioKind::relaxation_only);
  const double sigma = 0.02;
  const RealMatrix prepared = state_matrix(s.input_states, cached_basis(3));
  const auto truth = s.true_processes();
  std::vector<double> deviations;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const TomographySet ts = generate_dataset(s, NoiseSpec{sigma, 1.0, seed});
    const RealMatrix din = ts.inputs() - prepared;
    CHECK((ts.inputs().row(8).array() == trace_coordinate(3)).all());
    for (int k = 0; k < 15; ++k)
      for (int i = 0; i < 8; ++i) deviations.push_back(din(i, k));
    for (const auto& p : truth) {
      const RealMatrix dout = ts.output_at(p.duration()) - p.matrix() * prepared;
      CHECK((ts.output_at(p.duration()).row(8).array() == trace_coordinate(3)).all());
      for (int k = 0; k < 15; ++k)
        for (int i = 0; i < 8; ++i) deviations.push_back(dout(i, k));
    }
  }
  REQUIRE(deviations.size() >= 10000);
  double sum = 0.0, sq = 0.0;
  for (double x : deviations) {
    sum += x;
    sq += x * x;
  }
  const double n = static_cast<double>(deviations.size());
  const double sd = std::sqrt(sq / n - (sum / n) * (sum / n));
  CHECK(std::abs(sd / sigma - 1.0) < 0.02);
  CHECK(std::abs(sum / n) < 5.0 * sigma / std::sqrt(n));
}

TEST_CASE("invalid noise specifications") {
  const Scenario s = make_scenario(ScenarioKind::relaxation_only);
  CHECK_THROWS_AS(generate_dataset(s, NoiseSpec{-1.0, 1.0, 0}), InvalidArgument);
  CHECK_THROWS_AS(generate_dataset(s, NoiseSpec{0.0, 0.0, 0}), InvalidArgument);
  CHECK_THROWS_AS(generate_dataset(s, NoiseSpec{0.0, 1.5, 0}), InvalidArgument);
}

TEST_CASE("noise calibration hits its target") {
  const Scenario s = make_scenario(ScenarioKind::relaxation_only);
  const double sigma = calibrate_noise(s, 0.049, 1, 5);
  CHECK(sigma > 1e-4);
  CHECK(sigma < 0.1);
  std::vector<double> values;
  for (std::uint64_t k = 0; k < 5; ++k) values.push_back(max_process_error(s, NoiseSpec{sigma, 1.0, derive_seed(1, k)}));
  CHECK(percentile(values, 50.0) == doctest::Approx(0.049).epsilon(1e-3));
  // Monotone: a larger sigma gives a larger error for the same seed.
  CHECK(max_process_error(s, NoiseSpec{2.0 * sigma, 1.0, 9}) > max_process_error(s, NoiseSpec{sigma, 1.0, 9}));
}

TEST_CASE("custom scenarios in other dimensions") {
  Rng rng(3);
  for (int d : {2, 4}) {
    const RandomModel m = random_model(rng, d, 50.0, 2.0, 2);
    const Superoperator l = lindblad_liouvillian(LindbladModel{m.h, m.jumps}, cached_basis(d));
    const Scenario s = custom_scenario("random", l, {1e-3, 2e-3});
    CHECK(s.input_states.size() == static_cast<size_t>(d * d));
    const TomographySet ts = generate_dataset(s, NoiseSpec{});
    CHECK(ts.input_rank() == d * d);
    CHECK(max_abs(reconstruct_process(ts, 2e-3).matrix() - propagator(l, 2e-3).matrix()) < 1e-10);
  }
}

TEST_CASE("supply ramp scales the x field") {
  ScenarioParams p;
  p.ramp = true;
  const Scenario s = make_scenario(ScenarioKind::three_axis_time_dependent, p);
  const Scenario plain = make_scenario(ScenarioKind::three_axis_time_dependent);
  const double t = 20e-6;
  CHECK(s.field_at(t)[0] == doctest::Approx(plain.field_at(t)[0] * t / 64e-6));
  CHECK(s.field_at(t)[1] == doctest::Approx(plain.field_at(t)[1]));
  CHECK(s.field_at(100e-6)[0] == doctest::Approx(plain.field_at(100e-6)[0]));
}
