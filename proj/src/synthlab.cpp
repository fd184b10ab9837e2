#include "qpt/synthlab.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include <Eigen/Eigenvalues>

namespace qpt {

namespace {

constexpr double kFidelityPsdFloor = -0.05;

std::vector<double> range_inclusive(double start, double stop, double step) {
  return TimeGrid::uniform(start, stop, step).times();
}

ComplexMatrix clipped_sqrt(const ComplexMatrix& rho) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(0.5 * (rho + rho.adjoint()));
  const RealVector ev = solver.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return solver.eigenvectors() * ev.cast<Complex>().asDiagonal() * solver.eigenvectors().adjoint();
}

void add_noise(RealMatrix& states, double sigma, std::uint64_t seed, int dim) {
  const double pinned = trace_coordinate(dim);
  const Eigen::Index last = states.rows() - 1;
  if (sigma > 0.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, sigma);
    for (Eigen::Index c = 0; c < states.cols(); ++c) {
      for (Eigen::Index r = 0; r < last; ++r) states(r, c) += normal(rng);
    }
  }
  states.row(last).setConstant(pinned);
}

}  // namespace

ScenarioKind parse_scenario_kind(const std::string& name) {
  if (name == "relaxation_only" || name == "relaxation") return ScenarioKind::relaxation_only;
  if (name == "static_quadratic_zeeman" || name == "quadratic_zeeman") return ScenarioKind::static_quadratic_zeeman;
  if (name == "static_linear_zeeman" || name == "linear_zeeman") return ScenarioKind::static_linear_zeeman;
  if (name == "three_axis_time_dependent" || name == "three_axis") return ScenarioKind::three_axis_time_dependent;
  throw InvalidArgument("unknown scenario kind '" + name + "'");
}

std::string scenario_kind_name(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::relaxation_only: return "relaxation_only";
    case ScenarioKind::static_quadratic_zeeman: return "static_quadratic_zeeman";
    case ScenarioKind::static_linear_zeeman: return "static_linear_zeeman";
    case ScenarioKind::three_axis_time_dependent: return "three_axis_time_dependent";
    case ScenarioKind::custom: return "custom";
  }
  return "custom";
}

std::array<double, 3> Scenario::field_at(double t) const {
  std::array<double, 3> omega{};
  for (const auto& w : fields) omega[static_cast<size_t>(w.axis)] += w.value(t);
  if (ramp && ramp_duration > 0.0) omega[0] *= std::clamp(t / ramp_duration, 0.0, 1.0);
  return omega;
}

Superoperator Scenario::relaxation_superop() const {
  return relaxation ? qpt::relaxation_superop(*relaxation) : Superoperator::zero(dim);
}

Superoperator Scenario::liouvillian_at(double t) const {
  if (generator_override) return *generator_override;
  const OperatorBasis& basis = cached_basis(dim);
  ComplexMatrix h = hamiltonian.size() ? hamiltonian : ComplexMatrix::Zero(dim, dim);
  if (!fields.empty()) {
    if (dim != 3) throw InvalidDimension("field waveforms are defined for qutrits");
    const SpinOperators f = spin1_operators();
    const auto omega = field_at(t);
    for (int k = 0; k < 3; ++k) h += omega[static_cast<size_t>(k)] * f[k];
  }
  Superoperator l = hamiltonian_superop(h, basis) - relaxation_superop();
  if (!jumps.empty()) l = l - dissipator_superop(jumps, basis);
  return l;
}

ProcessMatrix Scenario::process(double t0, double t1) const {
  if (t1 < t0) throw InvalidArgument("process end time precedes its start");
  if (!time_dependent()) {
    ProcessMatrix p = propagator(liouvillian_at(t0), t1 - t0);
    return p;
  }
  if (t1 == t0) return ProcessMatrix::identity(dim, 0.0);
  return piecewise_propagator([this](double t) { return liouvillian_at(t); }, TimeGrid({t0, t1}), substeps);
}

std::vector<ProcessMatrix> Scenario::true_processes() const {
  std::vector<ProcessMatrix> out;
  const auto& ts = grid.times();
  out.reserve(ts.size());
  if (!time_dependent()) {
    for (double t : ts) out.push_back(process(0.0, t));
    return out;
  }
  RealMatrix cumulative = RealMatrix::Identity(dim * dim, dim * dim);
  double prev = 0.0;
  for (double t : ts) {
    cumulative = process(prev, t).matrix() * cumulative;
    out.emplace_back(dim, cumulative, t);
    prev = t;
  }
  return out;
}

std::vector<DensityMatrix> complete_input_states(int d) {
  if (d < 2) throw InvalidDimension("state set requires d >= 2");
  std::vector<DensityMatrix> states;
  for (int i = 0; i < d; ++i) {
    ComplexMatrix rho = ComplexMatrix::Zero(d, d);
    rho(i, i) = 1.0;
    states.push_back(DensityMatrix::from_matrix(rho));
  }
  for (int i = 0; i < d; ++i) {
    for (int j = i + 1; j < d; ++j) {
      for (const Complex phase : {Complex(1.0, 0.0), Complex(0.0, 1.0)}) {
        Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(d);
        psi(i) = 1.0 / std::sqrt(2.0);
        psi(j) = phase / std::sqrt(2.0);
        states.push_back(DensityMatrix::from_matrix(psi * psi.adjoint()));
      }
    }
  }
  return states;
}

Scenario make_scenario(ScenarioKind kind, const ScenarioParams& params) {
  Scenario s;
  s.kind = kind;
  s.name = scenario_kind_name(kind);
  s.dim = 3;
  s.input_states = canonical_input_states();
  s.hamiltonian = ComplexMatrix::Zero(3, 3);
  s.substeps = params.substeps;
  const RelaxationModel relax = params.relaxation.value_or(reference_relaxation_model());
  std::vector<double> times;
  switch (kind) {
    case ScenarioKind::relaxation_only:
      s.relaxation = relax;
      times = range_inclusive(0.5e-3, 10.5e-3, 0.5e-3);
      break;
    case ScenarioKind::static_quadratic_zeeman: {
      if (params.include_relaxation) s.relaxation = relax;
      const SpinOperators f = spin1_operators();
      s.hamiltonian = params.quadratic_q * f.fy * f.fy;
      times = range_inclusive(100e-6, 180e-6, 10e-6);
      break;
    }
    case ScenarioKind::static_linear_zeeman: {
      if (params.linear_axis < 0 || params.linear_axis > 2) throw InvalidArgument("linear Zeeman axis must be 0, 1 or 2");
      if (params.include_relaxation) s.relaxation = relax;
      s.hamiltonian = params.linear_omega * spin1_operators()[params.linear_axis];
      times = range_inclusive(100e-6, 180e-6, 10e-6);
      break;
    }
    case ScenarioKind::three_axis_time_dependent: {
      if (params.include_relaxation) s.relaxation = relax;
      using Shape = FieldWaveform::Shape;
      const double a = params.field_amplitude;
      s.fields = {
          {0, Shape::triangle, a, 5.0e3, 0.0},
          {1, Shape::sine, a, 7.5e3, std::numbers::pi},
          {2, Shape::sine, a, 10.0e3, std::numbers::pi / 2.0},
      };
      s.ramp = params.ramp;
      s.ramp_duration = params.ramp_duration;
      times = range_inclusive(0.0, 200e-6, 4e-6);
      break;
    }
    case ScenarioKind::custom:
      throw InvalidArgument("custom scenarios are built with custom_scenario()");
  }
  if (params.times) times = *params.times;
  s.grid = TimeGrid(std::move(times));
  if (s.grid.size() == 0) throw InvalidArgument("scenario grid is empty");
  return s;
}

Scenario custom_scenario(const std::string& name, const Superoperator& l, std::vector<double> times) {
  Scenario s;
  s.name = name;
  s.kind = ScenarioKind::custom;
  s.dim = l.dim();
  s.input_states = s.dim == 3 ? canonical_input_states() : complete_input_states(s.dim);
  s.hamiltonian = ComplexMatrix::Zero(s.dim, s.dim);
  s.generator_override = l;
  s.grid = TimeGrid(std::move(times));
  return s;
}

TomographySet generate_dataset(const Scenario& s, const NoiseSpec& noise) {
  if (noise.bloch_sigma < 0.0) throw InvalidArgument("noise sigma must be non-negative");
  if (!(noise.prep_fidelity > 0.0 && noise.prep_fidelity <= 1.0)) {
    throw InvalidArgument("preparation fidelity must lie in (0, 1]");
  }
  const OperatorBasis& basis = cached_basis(s.dim);
  RealMatrix prepared = state_matrix(s.input_states, basis);
  // Depolarizing admixture scales the traceless coordinates only.
  prepared.topRows(prepared.rows() - 1) *= noise.prep_fidelity;

  RealMatrix inputs = prepared;
  add_noise(inputs, noise.bloch_sigma, derive_seed(noise.seed, 0), s.dim);

  std::map<double, RealMatrix> outputs;
  const std::vector<ProcessMatrix> truth = s.true_processes();
  for (size_t n = 0; n < truth.size(); ++n) {
    RealMatrix out = truth[n].matrix() * prepared;
    add_noise(out, noise.bloch_sigma, derive_seed(noise.seed, n + 1), s.dim);
    outputs.emplace(s.grid.times()[n], std::move(out));
  }
  return TomographySet(s.dim, std::move(inputs), std::move(outputs));
}

double state_fidelity(const DensityMatrix& a, const DensityMatrix& b) {
  if (a.dim() != b.dim()) throw DimensionMismatch("fidelity of states with different dimensions");
  if (a.min_eigenvalue() < kFidelityPsdFloor || b.min_eigenvalue() < kFidelityPsdFloor) {
    throw InvalidState("state is too far from positive semidefinite for a fidelity");
  }
  const ComplexMatrix sa = clipped_sqrt(a.matrix());
  const ComplexMatrix inner = sa * b.matrix() * sa;
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(0.5 * (inner + inner.adjoint()), Eigen::EigenvaluesOnly);
  const double root_trace = solver.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
  return std::clamp(root_trace * root_trace, 0.0, 1.0);
}

double max_process_error(const Scenario& s, const NoiseSpec& noise) {
  const TomographySet ts = generate_dataset(s, noise);
  const std::vector<ProcessMatrix> truth = s.true_processes();
  double worst = 0.0;
  for (const auto& p : truth) {
    worst = std::max(worst, frobenius_distance(reconstruct_process(ts, p.duration()), p));
  }
  return worst;
}

double calibrate_noise(const Scenario& s, double target, std::uint64_t seed, int n_seeds, double prep_fidelity) {
  if (!(target > 0.0)) throw InvalidArgument("calibration target must be positive");
  if (n_seeds < 1) throw InvalidArgument("calibration needs at least one seed");
  auto metric = [&](double sigma) {
    std::vector<double> values;
    for (int k = 0; k < n_seeds; ++k) {
      values.push_back(max_process_error(s, {sigma, prep_fidelity, derive_seed(seed, static_cast<std::uint64_t>(k))}));
    }
    return percentile(values, 50.0);
  };
  double lo = 1e-6;
  double hi = 0.5;
  if (metric(lo) > target) return lo;
  if (metric(hi) < target) throw InvalidArgument("calibration target is not reachable with sigma <= 0.5");
  for (int iter = 0; iter < 50; ++iter) {
    const double mid = std::sqrt(lo * hi);
    (metric(mid) < target ? lo : hi) = mid;
    if (hi / lo < 1.0 + 1e-6) break;
  }
  return std::sqrt(lo * hi);
}

BootstrapResult bootstrap(const FitProcedure& fit, const Scenario& s, const NoiseSpec& noise, int n_draws) {
  const DatasetFactory factory = [&](std::uint64_t draw_seed) {
    NoiseSpec draw = noise;
    draw.seed = draw_seed;
    return generate_dataset(s, draw);
  };
  return bootstrap(fit, factory, n_draws, noise.seed);
}

}  // namespace qpt
