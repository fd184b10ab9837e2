#include "qpt/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include <Eigen/QR>
#include <unsupported/Eigen/LevenbergMarquardt>
#include <unsupported/Eigen/MatrixFunctions>

namespace qpt {

namespace {

constexpr double kLastRowTolerance = 1e-3;
constexpr double kNearZeroFieldFraction = 0.1;
constexpr double kRestartPerturbation = 1e-2;
constexpr double kMaxFailureFraction = 0.1;

RealVector flatten(const RealMatrix& m) { return Eigen::Map<const RealVector>(m.data(), m.size()); }

std::vector<ComplexMatrix> spin_list() {
  const SpinOperators f = spin1_operators();
  return {f.fx, f.fy, f.fz};
}

// exp(L t_n) for every measured time, sharing exponentials between equal increments.
class PropagatorSeries {
 public:
  explicit PropagatorSeries(std::span<const ProcessMatrix> pmeas) {
    order_.resize(pmeas.size());
    for (size_t k = 0; k < order_.size(); ++k) order_[k] = k;
    std::stable_sort(order_.begin(), order_.end(),
                     [&](size_t a, size_t b) { return pmeas[a].duration() < pmeas[b].duration(); });
    double prev = 0.0;
    for (size_t k : order_) {
      steps_.push_back(pmeas[k].duration() - prev);
      prev = pmeas[k].duration();
    }
  }

  // Propagators in the original order of pmeas.
  std::vector<RealMatrix> evaluate(const RealMatrix& l) const {
    std::vector<std::pair<double, RealMatrix>> cache;
    auto step_exp = [&](double dt) -> const RealMatrix& {
      for (const auto& [h, e] : cache) {
        if (std::abs(h - dt) <= 1e-12 * std::max(std::abs(dt), 1e-300)) return e;
      }
      RealMatrix scaled = l * dt;
      cache.emplace_back(dt, scaled.exp());
      return cache.back().second;
    };
    std::vector<RealMatrix> out(order_.size());
    RealMatrix current = RealMatrix::Identity(l.rows(), l.cols());
    for (size_t k = 0; k < order_.size(); ++k) {
      if (steps_[k] != 0.0) current = step_exp(steps_[k]) * current;
      out[order_[k]] = current;
    }
    return out;
  }

 private:
  std::vector<size_t> order_;
  std::vector<double> steps_;
};

struct CostFunctor : Eigen::DenseFunctor<double> {
  CostFunctor(const GeneratorFamily& family, std::span<const ProcessMatrix> pmeas, RealVector typical,
              double fd_rel_step)
      : Eigen::DenseFunctor<double>(static_cast<int>(family.size()),
                                    static_cast<int>(pmeas.size()) * family.dim() * family.dim() *
                                        family.dim() * family.dim()),
        family(family),
        pmeas(pmeas),
        series(pmeas),
        typical(std::move(typical)),
        fd_rel_step(fd_rel_step) {}

  int operator()(const InputType& x, ValueType& fvec) const {
    const RealMatrix l = family.at(x).matrix();
    const std::vector<RealMatrix> props = series.evaluate(l);
    const Eigen::Index block = l.size();
    fvec.resize(values());
    for (size_t n = 0; n < pmeas.size(); ++n) {
      fvec.segment(static_cast<Eigen::Index>(n) * block, block) = flatten(props[n] - pmeas[n].matrix());
    }
    if (!fvec.allFinite()) fvec.setConstant(1e150);
    return 0;
  }

  int df(const InputType& x, JacobianType& jac) const {
    jac.resize(values(), inputs());
    ValueType plus(values()), minus(values());
    InputType probe = x;
    for (Eigen::Index k = 0; k < x.size(); ++k) {
      const double h = fd_rel_step * std::max(std::abs(x(k)), typical(k));
      probe(k) = x(k) + h;
      (*this)(probe, plus);
      probe(k) = x(k) - h;
      (*this)(probe, minus);
      probe(k) = x(k);
      jac.col(k) = (plus - minus) / (2.0 * h);
    }
    return 0;
  }

  const GeneratorFamily& family;
  std::span<const ProcessMatrix> pmeas;
  PropagatorSeries series;
  RealVector typical;
  double fd_rel_step;
};

struct LmOutcome {
  RealVector theta;
  double cost = 0.0;
  double initial_cost = 0.0;
  int iterations = 0;
  bool converged = false;
};

RealVector typical_scale(const RealVector& theta0) {
  const double big = theta0.size() > 0 ? theta0.cwiseAbs().maxCoeff() : 0.0;
  RealVector t(theta0.size());
  for (Eigen::Index k = 0; k < t.size(); ++k) t(k) = std::max({std::abs(theta0(k)), 1e-3 * big, 1e-8});
  return t;
}

LmOutcome run_lm(const GeneratorFamily& family, std::span<const ProcessMatrix> pmeas, const RealVector& theta0,
                 const MleOptions& options) {
  CostFunctor functor(family, pmeas, typical_scale(theta0), options.fd_rel_step);
  LmOutcome out;
  RealVector x = theta0;
  RealVector r(functor.values());
  functor(x, r);
  out.initial_cost = r.squaredNorm();
  out.theta = x;
  out.cost = out.initial_cost;
  if (out.initial_cost == 0.0) {
    out.converged = true;
    return out;
  }

  Eigen::LevenbergMarquardt<CostFunctor> lm(functor);
  lm.setMaxfev(std::numeric_limits<int>::max() / 2);
  lm.setFtol(1e-15);
  lm.setXtol(1e-15);
  lm.setGtol(0.0);
  if (lm.minimizeInit(x) == Eigen::LevenbergMarquardtSpace::ImproperInputParameters) {
    return out;
  }
  std::vector<double> history{out.initial_cost};
  for (int iter = 0; iter < options.max_iters; ++iter) {
    const auto status = lm.minimizeOneStep(x);
    const double cost = lm.fnorm() * lm.fnorm();
    out.iterations = iter + 1;
    if (cost <= out.cost) {
      out.cost = cost;
      out.theta = x;
    }
    history.push_back(out.cost);
    const size_t w = static_cast<size_t>(options.window);
    if (history.size() > w) {
      const double before = history[history.size() - 1 - w];
      if (before - out.cost <= options.rel_tolerance * before) {
        out.converged = true;
        break;
      }
    }
    if (out.cost == 0.0) {
      out.converged = true;
      break;
    }
    if (status != Eigen::LevenbergMarquardtSpace::Running) {
      // MINPACK stops when no step can reduce the cost at machine precision.
      out.converged = status != Eigen::LevenbergMarquardtSpace::ImproperInputParameters &&
                      status != Eigen::LevenbergMarquardtSpace::TooManyFunctionEvaluation &&
                      status != Eigen::LevenbergMarquardtSpace::UserAsked;
      break;
    }
  }
  return out;
}

std::optional<Superoperator> earliest_direct_estimate(std::span<const ProcessMatrix> pmeas) {
  std::vector<size_t> order(pmeas.size());
  for (size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return pmeas[a].duration() < pmeas[b].duration(); });
  for (size_t k : order) {
    try {
      return principal_log(pmeas[k]) * (1.0 / pmeas[k].duration());
    } catch (const NumericError&) {
    }
  }
  return std::nullopt;
}

std::vector<double> df_series(const Superoperator& l, std::span<const ProcessMatrix> pmeas) {
  const std::vector<RealMatrix> props = PropagatorSeries(pmeas).evaluate(l.matrix());
  std::vector<double> df;
  df.reserve(pmeas.size());
  for (size_t n = 0; n < pmeas.size(); ++n) df.push_back(frobenius_distance(props[n], pmeas[n].matrix()));
  return df;
}

std::string constraint_name(Constraint::Kind kind) {
  switch (kind) {
    case Constraint::Kind::none: return "mle";
    case Constraint::Kind::fixed_dissipator: return "mle_fixed_dissipator";
    case Constraint::Kind::hermitian_hamiltonian: return "mle_hermitian";
    case Constraint::Kind::parametric: return "mle_parametric";
  }
  return "mle";
}

std::vector<std::string> hermitian_names() {
  std::vector<std::string> names;
  for (int k = 1; k <= 9; ++k) names.push_back("H" + std::to_string(k));
  return names;
}

double median_of(std::vector<double> v) { return v.empty() ? 0.0 : percentile(std::move(v), 50.0); }

}  // namespace

double frobenius_distance(const RealMatrix& a, const RealMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionMismatch("Frobenius distance of different shapes");
  const double ref = b.norm();
  if (ref == 0.0) throw InvalidArgument("Frobenius distance undefined for a zero reference");
  return (a - b).norm() / ref;
}

double frobenius_distance(const Superoperator& a, const Superoperator& b) {
  return frobenius_distance(a.matrix(), b.matrix());
}

double frobenius_distance(const ProcessMatrix& a, const ProcessMatrix& b) {
  return frobenius_distance(a.matrix(), b.matrix());
}

RelaxationModel reference_relaxation_model() {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  RelaxationModel m;
  m.omega_residual = {two_pi * -0.397, two_pi * 0.3071, two_pi * 2.511};
  m.gamma_dephase = {7.0, 7.9, 6.6};
  m.gamma_iso = 13.3;
  return m;
}

Superoperator isotropic_relaxation(int dim) {
  RealMatrix m = RealMatrix::Identity(dim * dim, dim * dim);
  m(dim * dim - 1, dim * dim - 1) = 0.0;
  return Superoperator(dim, std::move(m));
}

Superoperator relaxation_superop(const RelaxationModel& model) {
  const OperatorBasis& basis = cached_basis(3);
  const std::vector<ComplexMatrix> f = spin_list();
  ComplexMatrix hr = ComplexMatrix::Zero(3, 3);
  std::vector<ComplexMatrix> jumps;
  for (int k = 0; k < 3; ++k) {
    if (model.gamma_dephase[k] < 0.0) throw InvalidArgument("dephasing rates must be non-negative");
    hr += model.omega_residual[k] * f[k];
    jumps.push_back(std::sqrt(model.gamma_dephase[k]) * f[k]);
  }
  if (model.gamma_iso < 0.0) throw InvalidArgument("isotropic rate must be non-negative");
  return hamiltonian_superop(hr, basis) * -1.0 + dissipator_superop(jumps, basis) +
         isotropic_relaxation(3) * model.gamma_iso;
}

double FieldWaveform::value(double t) const {
  if (frequency < 0.0) throw InvalidArgument("waveform frequency must be non-negative");
  if (axis < 0 || axis > 2) throw InvalidArgument("waveform axis must be 0, 1 or 2");
  const double theta = 2.0 * std::numbers::pi * frequency * t + phase;
  switch (shape) {
    case Shape::sine: return amplitude * std::sin(theta);
    case Shape::triangle: return amplitude * (2.0 / std::numbers::pi) * std::asin(std::sin(theta));
    case Shape::constant: return amplitude;
  }
  return 0.0;
}

GeneratorFamily::GeneratorFamily(Superoperator offset, std::vector<Superoperator> directions,
                                 std::vector<std::string> names)
    : offset_(std::move(offset)), directions_(std::move(directions)), names_(std::move(names)) {
  if (names_.size() != directions_.size()) throw DimensionMismatch("one name per family direction required");
  const int n = offset_.dim() * offset_.dim();
  design_.resize(n * n, static_cast<Eigen::Index>(directions_.size()));
  for (size_t k = 0; k < directions_.size(); ++k) {
    if (directions_[k].dim() != offset_.dim()) throw DimensionMismatch("family directions differ in dimension");
    design_.col(static_cast<Eigen::Index>(k)) = flatten(directions_[k].matrix());
  }
}

Superoperator GeneratorFamily::at(const RealVector& theta) const {
  if (theta.size() != static_cast<Eigen::Index>(directions_.size())) {
    throw DimensionMismatch("parameter vector length differs from the family size");
  }
  RealMatrix m = offset_.matrix();
  Eigen::Map<RealVector>(m.data(), m.size()) += design_ * theta;
  return Superoperator(dim(), std::move(m));
}

RealVector GeneratorFamily::project(const Superoperator& l) const {
  if (l.dim() != dim()) throw DimensionMismatch("generator dimension differs from the family");
  return design_.completeOrthogonalDecomposition().solve(flatten(l.matrix() - offset_.matrix()));
}

Constraint Constraint::none() { return Constraint{}; }

Constraint Constraint::fixed_dissipator(Superoperator rt) {
  Constraint c;
  c.kind = Kind::fixed_dissipator;
  c.dissipator = std::move(rt);
  return c;
}

Constraint Constraint::hermitian_hamiltonian(std::optional<Superoperator> rt) {
  Constraint c;
  c.kind = Kind::hermitian_hamiltonian;
  c.dissipator = std::move(rt);
  return c;
}

Constraint Constraint::parametric(GeneratorFamily family) {
  Constraint c;
  c.kind = Kind::parametric;
  c.family = std::move(family);
  return c;
}

GeneratorFamily Constraint::make_family(int dim) const {
  if (kind == Kind::parametric) {
    if (!family) throw InvalidArgument("parametric constraint without a model family");
    if (family->dim() != dim) throw DimensionMismatch("parametric family dimension differs from the data");
    return *family;
  }
  if (dissipator && dissipator->dim() != dim) throw DimensionMismatch("dissipator dimension differs from the data");
  const int n = dim * dim;
  Superoperator offset = dissipator ? *dissipator * -1.0 : Superoperator::zero(dim);
  std::vector<Superoperator> dirs;
  std::vector<std::string> names;
  if (kind == Kind::hermitian_hamiltonian) {
    const OperatorBasis& basis = cached_basis(dim);
    for (int k = 0; k < n - 1; ++k) {
      dirs.push_back(hamiltonian_superop(basis[k], basis));
      names.push_back("h_sigma" + std::to_string(k + 1));
    }
  } else {
    for (int i = 0; i < n - 1; ++i) {
      for (int j = 0; j < n; ++j) {
        RealMatrix e = RealMatrix::Zero(n, n);
        e(i, j) = 1.0;
        dirs.emplace_back(dim, std::move(e));
        names.push_back("L" + std::to_string(i + 1) + "_" + std::to_string(j + 1));
      }
    }
  }
  return GeneratorFamily(std::move(offset), std::move(dirs), std::move(names));
}

GeneratorFamily field_family(const Superoperator& rt) {
  if (rt.dim() != 3) throw InvalidDimension("field family is defined for qutrits");
  const OperatorBasis& basis = cached_basis(3);
  const std::vector<ComplexMatrix> f = spin_list();
  std::vector<Superoperator> dirs;
  for (const auto& fk : f) dirs.push_back(hamiltonian_superop(fk, basis));
  return GeneratorFamily(rt * -1.0, std::move(dirs), {"omega_x", "omega_y", "omega_z"});
}

GeneratorFamily relaxation_family() {
  const OperatorBasis& basis = cached_basis(3);
  const std::vector<ComplexMatrix> f = spin_list();
  std::vector<Superoperator> dirs;
  for (const auto& fk : f) dirs.push_back(hamiltonian_superop(fk, basis));
  for (const auto& fk : f) {
    const ComplexMatrix jump[] = {fk};
    dirs.push_back(dissipator_superop(jump, basis) * -1.0);
  }
  dirs.push_back(isotropic_relaxation(3) * -1.0);
  return GeneratorFamily(Superoperator::zero(3), std::move(dirs),
                         {"omega_x", "omega_y", "omega_z", "gamma_x", "gamma_y", "gamma_z", "gamma_iso"});
}

double likelihood_cost(const Superoperator& l, std::span<const ProcessMatrix> pmeas) {
  const std::vector<RealMatrix> props = PropagatorSeries(pmeas).evaluate(l.matrix());
  double cost = 0.0;
  for (size_t n = 0; n < pmeas.size(); ++n) cost += (props[n] - pmeas[n].matrix()).squaredNorm();
  return cost;
}

FitReport mle_liouvillian(std::span<const ProcessMatrix> pmeas, const Constraint& constraint,
                          const MleOptions& options) {
  if (pmeas.empty()) throw InvalidArgument("likelihood fit needs at least one process matrix");
  const int d = pmeas.front().dim();
  for (const auto& p : pmeas) {
    if (p.dim() != d) throw DimensionMismatch("process matrices differ in dimension");
    if (!(p.duration() > 0.0)) throw InvalidArgument("likelihood fit needs evolution times > 0");
  }
  const GeneratorFamily family = constraint.make_family(d);
  if (family.size() > pmeas.size() * static_cast<size_t>(d * d * d * d)) {
    throw InvalidArgument("more free parameters than measured matrix entries");
  }

  FitReport report;
  report.model = constraint_name(constraint.kind);
  report.seed = options.seed;
  RealVector theta0;
  if (options.initial) {
    theta0 = *options.initial;
    if (theta0.size() != static_cast<Eigen::Index>(family.size())) {
      throw DimensionMismatch("initial parameter vector length differs from the family size");
    }
  } else if (auto direct = earliest_direct_estimate(pmeas)) {
    theta0 = family.project(*direct);
  } else {
    theta0 = RealVector::Zero(static_cast<Eigen::Index>(family.size()));
    report.warnings.push_back("no admissible time for the direct estimate; starting from zero");
  }

  LmOutcome best = run_lm(family, pmeas, theta0, options);
  report.iterations = best.iterations;
  if (!best.converged && options.restarts > 0) {
    std::mt19937_64 rng(derive_seed(options.seed, 0x5eed));
    std::normal_distribution<double> normal(0.0, 1.0);
    const RealVector typical = typical_scale(theta0);
    for (int r = 0; r < options.restarts; ++r) {
      RealVector start = theta0;
      for (Eigen::Index k = 0; k < start.size(); ++k) start(k) += kRestartPerturbation * typical(k) * normal(rng);
      LmOutcome trial = run_lm(family, pmeas, start, options);
      report.iterations += trial.iterations;
      const bool better = (trial.converged && !best.converged) ||
                          (trial.converged == best.converged && trial.cost < best.cost);
      if (better) {
        const double initial = best.initial_cost;
        best = trial;
        best.initial_cost = initial;
      }
      if (best.converged) break;
    }
  }

  const Superoperator l = family.at(best.theta);
  report.liouvillian = l;
  report.param_names = family.names();
  report.params.assign(best.theta.data(), best.theta.data() + best.theta.size());
  report.cost = best.cost;
  report.initial_cost = best.initial_cost;
  report.converged = best.converged;
  for (const auto& p : pmeas) report.times.push_back(p.duration());
  report.df_per_time = df_series(l, pmeas);
  if (constraint.kind == Constraint::Kind::hermitian_hamiltonian && d == 3) {
    const Superoperator g = constraint.dissipator ? l + *constraint.dissipator : l;
    const HermitianFit fit = params_from_superop(g);
    report.hermitian = fit.params;
    report.residual = fit.residual;
  }
  if (!report.converged) report.warnings.push_back("optimizer did not converge within max_iters");
  return report;
}

FitReport fit_relaxation_model(const Superoperator& rt) {
  if (rt.dim() != 3) throw InvalidDimension("relaxation model is defined for qutrits");
  const RealMatrix& m = rt.matrix();
  const double scale = m.norm();
  if (m.row(m.rows() - 1).norm() > kLastRowTolerance * std::max(scale, 1e-300)) {
    throw InvalidArgument("relaxation superoperator must have a zero last row");
  }
  // R = sum_k theta_k c_k with c_k = -(relaxation family direction k).
  const GeneratorFamily family = relaxation_family();
  RealMatrix design(81, 7);
  for (int k = 0; k < 7; ++k) {
    RealVector e = RealVector::Zero(7);
    e(k) = 1.0;
    design.col(k) = -flatten(family.at(e).matrix());
  }
  const RealVector target = flatten(m);

  // Non-negativity on the four rates: enumerate which rates are clamped at zero.
  RealVector best_theta = RealVector::Zero(7);
  double best_residual = std::numeric_limits<double>::infinity();
  for (int mask = 0; mask < 16; ++mask) {
    std::vector<int> free_cols{0, 1, 2};
    for (int r = 0; r < 4; ++r) {
      if (!(mask & (1 << r))) free_cols.push_back(3 + r);
    }
    RealMatrix sub(81, static_cast<Eigen::Index>(free_cols.size()));
    for (size_t c = 0; c < free_cols.size(); ++c) sub.col(static_cast<Eigen::Index>(c)) = design.col(free_cols[c]);
    const RealVector x = sub.colPivHouseholderQr().solve(target);
    bool feasible = true;
    RealVector theta = RealVector::Zero(7);
    for (size_t c = 0; c < free_cols.size(); ++c) {
      theta(free_cols[c]) = x(static_cast<Eigen::Index>(c));
      if (free_cols[c] >= 3 && x(static_cast<Eigen::Index>(c)) < 0.0) feasible = false;
    }
    if (!feasible) continue;
    const double residual = (design * theta - target).norm();
    if (residual < best_residual) {
      best_residual = residual;
      best_theta = theta;
    }
  }

  RelaxationModel model;
  for (int k = 0; k < 3; ++k) {
    model.omega_residual[k] = best_theta(k);
    model.gamma_dephase[k] = best_theta(3 + k);
  }
  model.gamma_iso = best_theta(6);

  FitReport report;
  report.model = "relaxation";
  report.relaxation = model;
  report.param_names = family.names();
  report.params.assign(best_theta.data(), best_theta.data() + 7);
  report.liouvillian = relaxation_superop(model) * -1.0;
  report.residual = best_residual;
  report.cost = best_residual * best_residual;
  report.initial_cost = report.cost;
  report.converged = true;
  return report;
}

FitReport direct_hamiltonian(const TomographySet& ts, const Superoperator& rt, std::span<const double> times) {
  if (ts.dim() != 3 || rt.dim() != 3) throw InvalidDimension("Hamiltonian reconstruction is defined for qutrits");
  if (times.empty()) throw InvalidArgument("direct Hamiltonian estimate needs at least one time");
  FitReport report;
  report.model = "direct_hamiltonian";
  RealMatrix sum = RealMatrix::Zero(9, 9);
  std::vector<ProcessMatrix> used;
  for (double t : times) {
    try {
      const ProcessMatrix p = reconstruct_process(ts, t);
      sum += (principal_log(p) * (1.0 / t) + rt).matrix();
      used.push_back(p);
    } catch (const NumericError& e) {
      std::ostringstream msg;
      msg << "t = " << t << " s excluded: " << e.what();
      report.warnings.push_back(msg.str());
    }
  }
  if (used.empty()) throw BranchAmbiguity("no admissible time for the direct Hamiltonian estimate");
  const Superoperator avg(3, sum / static_cast<double>(used.size()));
  const HermitianFit fit = params_from_superop(avg);
  const Superoperator l = explicit_qutrit_superop(fit.params) - rt;
  report.liouvillian = l;
  report.hermitian = fit.params;
  report.residual = fit.residual;
  report.param_names = hermitian_names();
  report.params.assign(fit.params.h.begin(), fit.params.h.end());
  for (const auto& p : used) report.times.push_back(p.duration());
  report.df_per_time = df_series(l, used);
  report.cost = likelihood_cost(l, used);
  report.initial_cost = report.cost;
  report.converged = true;
  return report;
}

FitReport mle_hamiltonian(std::span<const ProcessMatrix> pmeas, const Superoperator& rt, const MleOptions& options) {
  if (rt.dim() != 3) throw InvalidDimension("Hamiltonian reconstruction is defined for qutrits");
  FitReport report = mle_liouvillian(pmeas, Constraint::hermitian_hamiltonian(rt), options);
  report.model = "mle_hamiltonian";
  report.param_names = hermitian_names();
  report.params.assign(report.hermitian->h.begin(), report.hermitian->h.end());
  return report;
}

FieldReconstruction estimate_fields(std::span<const ProcessMatrix> psteps, const TimeGrid& grid,
                                    const Superoperator& rt, bool known_form, FieldPath path) {
  if (rt.dim() != 3) throw InvalidDimension("field estimation is defined for qutrits");
  if (!grid.is_uniform(1e-12 * std::max(1.0, std::abs(grid.times().back())) + 1e-15)) {
    throw InvalidArgument("field estimation needs a uniform time grid");
  }
  if (psteps.size() != grid.intervals()) {
    throw DimensionMismatch("one step process per grid interval required (" + std::to_string(grid.intervals()) +
                            "), got " + std::to_string(psteps.size()));
  }
  const double dt = grid.step();
  const GeneratorFamily fields = field_family(rt);
  const GeneratorFamily hermitian = Constraint::hermitian_hamiltonian(rt).make_family(3);

  FieldReconstruction out;
  FitReport& report = out.report;
  report.model = known_form ? "fields_known_form" : "fields_unknown_form";
  report.converged = true;
  std::vector<double> strengths;
  for (size_t n = 0; n < psteps.size(); ++n) {
    const ProcessMatrix step(3, psteps[n].matrix(), dt);
    Superoperator direct = Superoperator::zero(3);
    try {
      direct = principal_log(step) * (1.0 / dt);
    } catch (const SingularProcess& e) {
      throw SingularProcess("step " + std::to_string(n) + ": " + e.what());
    } catch (const BranchAmbiguity& e) {
      throw BranchAmbiguity("step " + std::to_string(n) + ": " + e.what());
    }
    FieldStep fs;
    fs.t_start = grid.times()[n];
    fs.t_end = grid.times()[n + 1];
    const std::span<const ProcessMatrix> single(&step, 1);
    Superoperator l = Superoperator::zero(3);
    if (known_form) {
      RealVector omega = fields.project(direct);
      if (path == FieldPath::mle) {
        MleOptions opts;
        opts.initial = omega;
        const FitReport fit = mle_liouvillian(single, Constraint::parametric(fields), opts);
        omega = Eigen::Map<const RealVector>(fit.params.data(), 3);
        report.iterations += fit.iterations;
        report.converged = report.converged && fit.converged;
      }
      l = fields.at(omega);
      for (int k = 0; k < 3; ++k) fs.omega[k] = omega(k);
    } else {
      RealVector theta = hermitian.project(direct);
      if (path == FieldPath::mle) {
        MleOptions opts;
        opts.initial = theta;
        const FitReport fit = mle_liouvillian(single, Constraint::parametric(hermitian), opts);
        theta = Eigen::Map<const RealVector>(fit.params.data(), static_cast<Eigen::Index>(fit.params.size()));
        report.iterations += fit.iterations;
        report.converged = report.converged && fit.converged;
      }
      l = hermitian.at(theta);
      fs.hermitian = params_from_superop(l + rt).params;
      const RealVector omega = fields.project(l);
      for (int k = 0; k < 3; ++k) fs.omega[k] = omega(k);
    }
    fs.hamiltonian_generator = (l + rt).matrix();
    const RealMatrix predicted = propagator(l, dt).matrix();
    fs.df_process = frobenius_distance(predicted, step.matrix());
    report.cost += (predicted - step.matrix()).squaredNorm();
    report.times.push_back(fs.t_end);
    report.df_per_time.push_back(fs.df_process);
    strengths.push_back(fs.hamiltonian_generator.norm());
    out.steps.push_back(std::move(fs));
  }
  const double median = median_of(strengths);
  for (size_t n = 0; n < out.steps.size(); ++n) {
    if (strengths[n] < kNearZeroFieldFraction * median) {
      out.steps[n].near_zero_field = true;
      std::ostringstream msg;
      msg << "step " << n << " (t = " << out.steps[n].t_start << " s) has near-zero total field; relative errors there "
          << "are dominated by the normalization";
      report.warnings.push_back(msg.str());
    }
  }
  report.initial_cost = report.cost;
  return out;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  // SplitMix64 finalizer over the combined state.
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double percentile(std::vector<double> values, double q) {
  if (values.empty()) throw InvalidArgument("percentile of an empty sample");
  if (q < 0.0 || q > 100.0) throw InvalidArgument("percentile must lie in [0, 100]");
  std::sort(values.begin(), values.end());
  const double pos = q / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<size_t>(std::floor(pos));
  const size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

BootstrapResult bootstrap(const FitProcedure& fit, const DatasetFactory& factory, int n_draws, std::uint64_t seed) {
  if (n_draws < 2) throw InvalidArgument("bootstrap needs at least two draws");
  BootstrapResult result;
  result.n_draws = n_draws;
  std::string first_failure;
  for (int k = 0; k < n_draws; ++k) {
    try {
      std::vector<double> params = fit(factory(derive_seed(seed, static_cast<std::uint64_t>(k))));
      if (!result.samples.empty() && params.size() != result.samples.front().size()) {
        throw DimensionMismatch("fit procedure returned a different number of parameters");
      }
      result.samples.push_back(std::move(params));
    } catch (const Error& e) {
      if (first_failure.empty()) first_failure = e.what();
      ++result.n_failed;
    }
  }
  if (result.n_failed > kMaxFailureFraction * n_draws || result.samples.empty()) {
    std::ostringstream msg;
    msg << result.n_failed << " of " << n_draws << " bootstrap fits failed (first: " << first_failure << ")";
    throw NumericError(msg.str());
  }
  const size_t n_params = result.samples.front().size();
  for (size_t p = 0; p < n_params; ++p) {
    std::vector<double> column;
    column.reserve(result.samples.size());
    for (const auto& s : result.samples) column.push_back(s[p]);
    result.low.push_back(percentile(column, 16.0));
    result.median.push_back(percentile(column, 50.0));
    result.high.push_back(percentile(column, 84.0));
  }
  return result;
}

void attach_intervals(FitReport& report, const BootstrapResult& result) {
  if (result.low.size() != report.params.size()) {
    throw DimensionMismatch("bootstrap parameter count differs from the report");
  }
  report.ci_low = result.low;
  report.ci_high = result.high;
  for (size_t p = 0; p < report.params.size(); ++p) {
    if (report.params[p] < report.ci_low[p] || report.params[p] > report.ci_high[p]) {
      const std::string name = p < report.param_names.size() ? report.param_names[p] : std::to_string(p);
      report.warnings.push_back("estimate of " + name +
                                " lies outside its 16-84 percentile band; band widened to include it");
      report.ci_low[p] = std::min(report.ci_low[p], report.params[p]);
      report.ci_high[p] = std::max(report.ci_high[p], report.params[p]);
    }
  }
}

}  // namespace qpt
