#include "qpt/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "qpt/io.hpp"

namespace qpt {

namespace fs = std::filesystem;

namespace {

struct Options {
  // simulate
  std::string kind;
  std::string scenario_file;
  double sigma = -1.0;
  bool calibrate = false;
  double prep_fidelity = -1.0;
  bool ramp = false;
  // shared
  std::uint64_t seed = 0;
  std::string out_dir;
  std::string dataset;
  // reconstruct
  std::string mode = "process";
  std::string reference;
  // fit
  std::string model = "mle";
  std::string fixed_dissipator;
  std::string superop;
  bool known_form = false;
  bool direct = false;
  int bootstrap = 0;
  int max_iters = 2000;
  // report
  std::string run_dir;
};

std::string index_name(const std::string& stem, size_t k) {
  std::ostringstream name;
  name << stem << '_' << std::setw(3) << std::setfill('0') << k << ".json";
  return name.str();
}

fs::path require_out_dir(const std::string& dir) {
  if (dir.empty()) throw InvalidArgument("an output directory is required (-o)");
  const fs::path p(dir);
  if (!fs::is_directory(p)) throw InvalidArgument("output directory " + dir + " does not exist");
  return p;
}

std::uint64_t resolve_seed(std::uint64_t configured) {
  const char* env = std::getenv("QPT_SEED");
  if (env == nullptr || *env == '\0') return configured;
  try {
    size_t used = 0;
    const unsigned long long v = std::stoull(env, &used);
    if (used != std::string(env).size()) throw std::invalid_argument(env);
    return v;
  } catch (const std::exception&) {
    throw InvalidArgument(std::string("QPT_SEED is not an unsigned integer: ") + env);
  }
}

Json read_input(const std::string& path) {
  try {
    return read_json(path);
  } catch (const MissingArtifact& e) {
    // Absent inputs are configuration errors for every command except report.
    throw InvalidArgument(e.what());
  }
}

std::pair<double, double> max_median(const std::vector<double>& v) {
  if (v.empty()) return {NAN, NAN};
  return {*std::max_element(v.begin(), v.end()), percentile(v, 50.0)};
}

Json number_or_null(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

// Reference for D_F columns: a static generator and/or true processes per time.
struct Reference {
  std::optional<Superoperator> generator;
  std::map<double, RealMatrix> processes;

  std::optional<RealMatrix> process_at(double t) const {
    for (const auto& [tp, m] : processes) {
      if (std::abs(tp - t) <= 1e-12) return m;
    }
    if (generator) return propagator(*generator, t).matrix();
    return std::nullopt;
  }
};

Reference load_reference(const std::string& path) {
  Reference ref;
  if (path.empty()) return ref;
  const Json j = read_input(path);
  if (j.contains("matrix")) ref.generator = superop_from_json(j);
  if (j.contains("liouvillian")) ref.generator = superop_from_json(j["liouvillian"]);
  if (j.contains("true_processes")) {
    for (const auto& pj : j["true_processes"]) {
      const ProcessMatrix p = process_from_json(pj);
      ref.processes.emplace(p.duration(), p.matrix());
    }
  }
  if (!ref.generator && ref.processes.empty()) {
    throw InvalidArgument("reference " + path + " holds neither a generator nor true processes");
  }
  return ref;
}

Json manifest(const std::string& command, std::uint64_t seed) {
  return stamp({{"command", command}}, seed);
}

std::vector<ProcessMatrix> dataset_processes(const TomographySet& ts) {
  std::vector<ProcessMatrix> out;
  for (double t : ts.times()) {
    if (t <= 0.0) continue;
    try {
      out.push_back(reconstruct_process(ts, t));
    } catch (const NumericError& e) {
      std::ostringstream msg;
      msg << "t = " << format_double(t) << " s: " << e.what();
      throw NumericError(msg.str());
    }
  }
  if (out.empty()) throw InvalidArgument("dataset has no evolution times > 0");
  return out;
}

// ---------------------------------------------------------------- simulate

int cmd_simulate(const Options& o, std::ostream& out) {
  const fs::path dir = require_out_dir(o.out_dir);
  ScenarioSpec spec;
  if (!o.scenario_file.empty()) {
    spec = scenario_spec_from_json(read_input(o.scenario_file));
  } else {
    if (o.kind.empty()) throw InvalidArgument("simulate needs --kind or --scenario");
    ScenarioParams params;
    params.ramp = o.ramp;
    spec.scenario = make_scenario(parse_scenario_kind(o.kind), params);
  }
  Scenario& s = spec.scenario;
  if (o.ramp) s.ramp = true;
  NoiseSpec noise = spec.noise;
  noise.seed = resolve_seed(o.seed != 0 || o.scenario_file.empty() ? o.seed : noise.seed);
  if (o.prep_fidelity >= 0.0) noise.prep_fidelity = o.prep_fidelity;
  if (o.calibrate) {
    noise.bloch_sigma = calibrate_noise(make_scenario(ScenarioKind::relaxation_only), 0.049, 1, 5, noise.prep_fidelity);
  } else if (o.sigma >= 0.0) {
    noise.bloch_sigma = o.sigma;
  }

  const TomographySet ts = generate_dataset(s, noise);
  Json dataset = stamp(to_json(ts), noise.seed);
  dataset["noise"] = to_json(noise);
  dataset["scenario"] = s.name;
  write_json_atomic(dir / "dataset.json", dataset);

  Json truth = stamp({{"scenario", s.name}, {"dim", s.dim}, {"times_s", s.grid.times()}}, noise.seed);
  if (!s.time_dependent()) truth["liouvillian"] = to_json(s.liouvillian_at(0.0));
  if (s.relaxation) {
    truth["relaxation"] = to_json(*s.relaxation);
    truth["relaxation_superop"] = to_json(s.relaxation_superop());
  }
  if (s.dim == 3 && !s.generator_override && s.hamiltonian.size()) {
    truth["hermitian"] = to_json(params_from_hermitian(s.hamiltonian));
  }
  if (s.time_dependent()) {
    Json fields = Json::array();
    const auto& ts_grid = s.grid.times();
    for (size_t k = 0; k + 1 < ts_grid.size(); ++k) {
      const double mid = 0.5 * (ts_grid[k] + ts_grid[k + 1]);
      fields.push_back({{"t_start_s", ts_grid[k]}, {"t_end_s", ts_grid[k + 1]}, {"omega", s.field_at(mid)}});
    }
    truth["fields"] = fields;
  }
  Json procs = Json::array();
  for (const auto& p : s.true_processes()) procs.push_back(to_json(p));
  truth["true_processes"] = procs;
  write_json_atomic(dir / "truth.json", truth);

  Json m = manifest("simulate", noise.seed);
  m["scenario"] = s.name;
  m["noise"] = to_json(noise);
  m["ramp"] = s.ramp;
  m["n_times"] = s.grid.size();
  m["artifacts"] = {"dataset.json", "truth.json"};
  write_json_atomic(dir / "manifest.json", m);
  out << "simulated " << s.name << ": " << s.grid.size() << " times, sigma = " << format_double(noise.bloch_sigma)
      << ", seed = " << noise.seed << '\n';
  return kExitOk;
}

// ------------------------------------------------------------- reconstruct

int cmd_reconstruct(const Options& o, std::ostream& out) {
  const fs::path dir = require_out_dir(o.out_dir);
  const Json dj = read_input(o.dataset);
  const TomographySet ts = tomography_from_json(dj);
  const std::uint64_t seed = resolve_seed(o.seed != 0 ? o.seed : dj.value("seed", std::uint64_t{0}));
  const Reference ref = load_reference(o.reference);
  const bool has_ref = !o.reference.empty();

  std::vector<std::string> artifacts;
  std::vector<std::vector<double>> rows;
  std::vector<double> dfs;
  auto fail = [](double t, const NumericError& e) {
    std::ostringstream msg;
    msg << "t = " << format_double(t) << " s: " << e.what();
    return NumericError(msg.str());
  };

  if (o.mode == "process" || o.mode == "liouvillian") {
    size_t k = 0;
    for (double t : ts.times()) {
      if (o.mode == "liouvillian" && t <= 0.0) continue;
      double df = NAN;
      Json j;
      try {
        const ProcessMatrix p = reconstruct_process(ts, t);
        if (o.mode == "process") {
          j = to_json(p);
          if (auto pr = ref.process_at(t)) df = frobenius_distance(p.matrix(), *pr);
        } else {
          const Superoperator l = principal_log(p) * (1.0 / t);
          j = to_json(l);
          j["duration_s"] = t;
          if (ref.generator) {
            df = frobenius_distance(l, *ref.generator);
          } else if (auto pr = ref.process_at(t)) {
            df = frobenius_distance(propagator(l, t).matrix(), *pr);
          }
        }
      } catch (const NumericError& e) {
        throw fail(t, e);
      }
      const std::string name = index_name(o.mode, k++);
      write_json_atomic(dir / name, stamp(j, seed));
      artifacts.push_back(name);
      rows.push_back(has_ref ? std::vector<double>{t, df} : std::vector<double>{t});
      if (std::isfinite(df)) dfs.push_back(df);
    }
  } else if (o.mode == "stepwise") {
    const std::vector<double> times = ts.times();
    std::vector<ProcessMatrix> steps;
    steps = stepwise_processes(ts);
    for (size_t k = 0; k < steps.size(); ++k) {
      double df = NAN;
      const double t0 = times[k];
      const double t1 = times[k + 1];
      auto p0 = ref.processes.empty() ? std::nullopt : ref.process_at(t0);
      auto p1 = ref.processes.empty() ? std::nullopt : ref.process_at(t1);
      if (p0 && p1) {
        const RealMatrix step = *p1 * p0->inverse();
        df = frobenius_distance(steps[k].matrix(), step);
      } else if (ref.generator) {
        df = frobenius_distance(steps[k].matrix(), propagator(*ref.generator, t1 - t0).matrix());
      }
      Json j = to_json(steps[k]);
      j["t_start_s"] = t0;
      const std::string name = index_name("step", k);
      write_json_atomic(dir / name, stamp(j, seed));
      artifacts.push_back(name);
      rows.push_back(has_ref ? std::vector<double>{t0, t1, df} : std::vector<double>{t0, t1});
      if (std::isfinite(df)) dfs.push_back(df);
    }
  } else {
    throw InvalidArgument("unknown reconstruction mode '" + o.mode + "'");
  }

  std::vector<std::string> header = o.mode == "stepwise" ? std::vector<std::string>{"t_start_s", "t_end_s"}
                                                         : std::vector<std::string>{"t_s"};
  if (has_ref) header.push_back("df");
  const std::string csv_name = "df_" + o.mode + ".csv";
  write_text_atomic(dir / csv_name, csv_table(header, rows));
  artifacts.push_back(csv_name);

  Json m = manifest("reconstruct", seed);
  m["mode"] = o.mode;
  m["n_times"] = rows.size();
  const auto [mx, med] = max_median(dfs);
  m["max_df"] = number_or_null(mx);
  m["median_df"] = number_or_null(med);
  m["artifacts"] = artifacts;
  write_json_atomic(dir / ("manifest_reconstruct_" + o.mode + ".json"), m);
  out << "reconstructed " << rows.size() << " " << o.mode << " matrices";
  if (!dfs.empty()) out << ", max D_F = " << format_double(mx);
  out << '\n';
  return kExitOk;
}

// --------------------------------------------------------------------- fit

FitProcedure fit_procedure(const Options& o, std::optional<Superoperator> rt, std::uint64_t seed) {
  MleOptions mle;
  mle.max_iters = o.max_iters;
  mle.seed = seed;
  if (o.model == "mle") {
    return [rt, mle](const TomographySet& ts) {
      const auto pm = dataset_processes(ts);
      const Constraint c = rt ? Constraint::fixed_dissipator(*rt) : Constraint::none();
      return mle_liouvillian(pm, c, mle).params;
    };
  }
  if (o.model == "relaxation") {
    return [mle](const TomographySet& ts) {
      const auto pm = dataset_processes(ts);
      const FitReport fit = mle_liouvillian(pm, Constraint::none(), mle);
      return fit_relaxation_model(*fit.liouvillian * -1.0).params;
    };
  }
  if (o.model == "hermitian") {
    const bool direct = o.direct;
    return [rt, mle, direct](const TomographySet& ts) {
      if (direct) {
        std::vector<double> times;
        for (double t : ts.times()) {
          if (t > 0.0) times.push_back(t);
        }
        return direct_hamiltonian(ts, *rt, times).params;
      }
      return mle_hamiltonian(dataset_processes(ts), *rt, mle).params;
    };
  }
  throw InvalidArgument("bootstrap is not available for model '" + o.model + "'");
}

int cmd_fit(const Options& o, std::ostream& out) {
  const fs::path dir = require_out_dir(o.out_dir);
  const std::uint64_t seed_cfg = o.seed;
  std::optional<Superoperator> rt;
  if (!o.fixed_dissipator.empty()) {
    const Json j = read_input(o.fixed_dissipator);
    rt = superop_from_json(j.contains("relaxation_superop") ? j["relaxation_superop"] : j);
  }
  if (o.bootstrap < 0 || o.bootstrap == 1) throw InvalidArgument("--bootstrap needs at least 2 draws");

  FitReport report;
  std::optional<TomographySet> ts;
  Json dj;
  std::uint64_t seed = resolve_seed(seed_cfg);
  std::vector<std::vector<double>> extra_rows;
  MleOptions mle;
  mle.max_iters = o.max_iters;

  if (o.model == "relaxation" && !o.superop.empty()) {
    const Json j = read_input(o.superop);
    report = fit_relaxation_model(superop_from_json(j.contains("matrix") ? j : j.at("relaxation_superop")));
  } else {
    if (o.dataset.empty()) throw InvalidArgument("fit needs --dataset");
    dj = read_input(o.dataset);
    ts = tomography_from_json(dj);
    if (seed_cfg == 0) seed = resolve_seed(dj.value("seed", std::uint64_t{0}));
    mle.seed = seed;
    if (o.model == "mle") {
      const auto pm = dataset_processes(*ts);
      report = mle_liouvillian(pm, rt ? Constraint::fixed_dissipator(*rt) : Constraint::none(), mle);
    } else if (o.model == "relaxation") {
      const auto pm = dataset_processes(*ts);
      const FitReport fit = mle_liouvillian(pm, Constraint::none(), mle);
      report = fit_relaxation_model(*fit.liouvillian * -1.0);
      report.times = fit.times;
      report.df_per_time = fit.df_per_time;
      report.iterations = fit.iterations;
      report.converged = fit.converged;
      report.cost = fit.cost;
      report.initial_cost = fit.initial_cost;
      report.warnings.insert(report.warnings.end(), fit.warnings.begin(), fit.warnings.end());
    } else if (o.model == "hermitian") {
      if (!rt) throw InvalidArgument("hermitian fits need --fixed-dissipator");
      if (o.direct) {
        std::vector<double> times;
        for (double t : ts->times()) {
          if (t > 0.0) times.push_back(t);
        }
        report = direct_hamiltonian(*ts, *rt, times);
      } else {
        report = mle_hamiltonian(dataset_processes(*ts), *rt, mle);
      }
    } else if (o.model == "fields") {
      if (!rt) throw InvalidArgument("field fits need --fixed-dissipator");
      if (o.bootstrap > 0) throw InvalidArgument("bootstrap is not available for field fits");
      const auto steps = stepwise_processes(*ts);
      const FieldReconstruction rec = estimate_fields(steps, TimeGrid(ts->times()), *rt, o.known_form,
                                                      o.direct ? FieldPath::direct : FieldPath::mle);
      report = rec.report;
      for (const auto& st : rec.steps) {
        extra_rows.push_back({st.t_start, st.t_end, st.omega[0], st.omega[1], st.omega[2], st.df_process,
                              st.near_zero_field ? 1.0 : 0.0});
      }
    } else {
      throw InvalidArgument("unknown model '" + o.model + "'");
    }
  }
  report.seed = seed;

  if (o.bootstrap > 0) {
    if (!ts || !report.liouvillian) throw InvalidArgument("bootstrap needs a dataset-based fit");
    NoiseSpec noise = dj.contains("noise") ? noise_from_json(dj["noise"]) : NoiseSpec{};
    if (o.sigma >= 0.0) noise.bloch_sigma = o.sigma;
    if (!dj.contains("noise") && o.sigma < 0.0) {
      throw InvalidArgument("bootstrap needs --sigma when the dataset does not record its noise level");
    }
    noise.seed = seed;
    std::vector<double> times;
    for (double t : ts->times()) {
      if (t > 0.0) times.push_back(t);
    }
    const Scenario fitted = custom_scenario("fitted", *report.liouvillian, times);
    const BootstrapResult b = bootstrap(fit_procedure(o, rt, seed), fitted, noise, o.bootstrap);
    attach_intervals(report, b);
  }

  const std::string stem = "fit_" + o.model + (o.model == "fields" ? (o.known_form ? "_known" : "_unknown") : "");
  Json rj = stamp(to_json(report), seed);
  if (!o.dataset.empty()) rj["dataset"] = fs::path(o.dataset).filename().string();
  write_json_atomic(dir / (stem + ".json"), rj);
  std::vector<std::vector<double>> rows;
  for (size_t k = 0; k < report.df_per_time.size(); ++k) rows.push_back({report.times[k], report.df_per_time[k]});
  write_text_atomic(dir / (stem + "_df.csv"), csv_table({"t_s", "df"}, rows));
  std::vector<std::string> artifacts{stem + ".json", stem + "_df.csv"};
  if (!extra_rows.empty()) {
    write_text_atomic(dir / (stem + "_steps.csv"),
                      csv_table({"t_start_s", "t_end_s", "omega_x", "omega_y", "omega_z", "df", "near_zero_field"},
                                extra_rows));
    artifacts.push_back(stem + "_steps.csv");
  }

  Json m = manifest("fit", seed);
  m["model"] = o.model;
  m["converged"] = report.converged;
  m["n_times"] = report.df_per_time.size();
  const auto [mx, med] = max_median(report.df_per_time);
  m["max_df"] = number_or_null(mx);
  m["median_df"] = number_or_null(med);
  m["artifacts"] = artifacts;
  write_json_atomic(dir / ("manifest_" + stem + ".json"), m);

  out << "fit " << report.model << ": cost = " << format_double(report.cost)
      << (report.converged ? "" : " (not converged)") << '\n';
  for (size_t k = 0; k < report.params.size(); ++k) {
    out << "  " << (k < report.param_names.size() ? report.param_names[k] : std::to_string(k)) << " = "
        << format_double(report.params[k]);
    if (!report.ci_low.empty()) {
      out << "  [" << format_double(report.ci_low[k]) << ", " << format_double(report.ci_high[k]) << "]";
    }
    out << '\n';
  }
  return kExitOk;
}

// ------------------------------------------------------------------ report

int cmd_report(const Options& o, std::ostream& out, std::ostream& err) {
  const fs::path root(o.run_dir);
  if (!fs::is_directory(root)) {
    err << "run directory " << o.run_dir << " does not exist\n";
    return kExitMissing;
  }
  std::vector<fs::path> manifests;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    const std::string name = entry.path().filename().string();
    if (entry.is_regular_file() && name.starts_with("manifest") && entry.path().extension() == ".json") {
      manifests.push_back(entry.path());
    }
  }
  std::sort(manifests.begin(), manifests.end());
  if (manifests.empty()) {
    err << "no manifests found under " << o.run_dir << '\n';
    return kExitMissing;
  }

  std::vector<std::string> missing;
  std::ostringstream csv;
  csv << "run,command,detail,n_times,max_df,median_df\n";
  out << std::left << std::setw(48) << "run" << std::setw(12) << "command" << std::setw(28) << "detail"
      << std::setw(8) << "n" << std::setw(24) << "max_df" << "median_df\n";
  for (const auto& path : manifests) {
    Json m;
    try {
      m = read_json(path);
    } catch (const Error& e) {
      missing.push_back(path.string() + " (unreadable)");
      continue;
    }
    const std::string command = m.value("command", "");
    std::string detail = m.value("scenario", m.value("mode", m.value("model", "")));
    for (const auto& a : m.value("artifacts", Json::array())) {
      if (!fs::exists(path.parent_path() / a.get<std::string>())) {
        missing.push_back((path.parent_path() / a.get<std::string>()).string());
      }
    }
    auto num = [&](const char* key) {
      return m.contains(key) && m[key].is_number() ? format_double(m[key].get<double>()) : std::string("");
    };
    const std::string run = fs::relative(path, root).string();
    const std::string n = m.contains("n_times") ? std::to_string(m["n_times"].get<long long>()) : "";
    out << std::setw(48) << run << std::setw(12) << command << std::setw(28) << detail << std::setw(8) << n
        << std::setw(24) << num("max_df") << num("median_df") << '\n';
    csv << run << ',' << command << ',' << detail << ',' << n << ',' << num("max_df") << ',' << num("median_df")
        << '\n';
  }
  if (!missing.empty()) {
    err << "missing artifacts:\n";
    for (const auto& name : missing) err << "  " << name << '\n';
    return kExitMissing;
  }
  write_text_atomic(root / "report.csv", csv.str());
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Liouvillian reconstruction from process tomography", "qpt"};
  app.require_subcommand(1);
  Options o;

  auto* sim = app.add_subcommand("simulate", "generate a synthetic tomography dataset");
  auto* kind_opt = sim->add_option("--kind", o.kind, "relaxation_only | static_quadratic_zeeman | "
                                                     "static_linear_zeeman | three_axis");
  sim->add_option("--scenario", o.scenario_file, "scenario spec JSON")->excludes(kind_opt);
  sim->add_option("--sigma", o.sigma, "Gaussian sigma on traceless Bloch coordinates");
  sim->add_flag("--calibrated", o.calibrate, "use the sigma calibrated on the relaxation scenario");
  sim->add_option("--prep-fidelity", o.prep_fidelity, "weight of the target input state against I/d");
  sim->add_flag("--ramp", o.ramp, "linear supply-settling ramp on the x field");
  sim->add_option("--seed", o.seed);
  sim->add_option("-o,--out", o.out_dir, "existing output directory")->required();

  auto* rec = app.add_subcommand("reconstruct", "process matrices, direct generators or stepwise processes");
  rec->add_option("dataset", o.dataset, "dataset JSON")->required();
  rec->add_option("--mode", o.mode)->check(CLI::IsMember({"process", "liouvillian", "stepwise"}));
  rec->add_option("--reference", o.reference, "truth.json or a Superoperator JSON for D_F columns");
  rec->add_option("--seed", o.seed);
  rec->add_option("-o,--out", o.out_dir)->required();

  auto* fit = app.add_subcommand("fit", "likelihood and model fits");
  fit->add_option("dataset", o.dataset, "dataset JSON");
  fit->add_option("--model", o.model)->check(CLI::IsMember({"mle", "relaxation", "hermitian", "fields"}));
  fit->add_option("--fixed-dissipator", o.fixed_dissipator, "R_T as Superoperator JSON or truth.json");
  fit->add_option("--superop", o.superop, "fit the relaxation model to this R_T instead of a dataset");
  fit->add_flag("--known-form", o.known_form, "restrict fields to sum_k omega_k F_k");
  fit->add_flag("--direct", o.direct, "closed-form estimate instead of the likelihood fit");
  fit->add_option("--bootstrap", o.bootstrap, "number of parametric bootstrap draws");
  fit->add_option("--sigma", o.sigma, "bootstrap noise level when the dataset does not record one");
  fit->add_option("--max-iters", o.max_iters);
  fit->add_option("--seed", o.seed);
  fit->add_option("-o,--out", o.out_dir)->required();

  auto* rep = app.add_subcommand("report", "summarize manifests under a run directory");
  rep->add_option("run_dir", o.run_dir)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (sim->parsed()) return cmd_simulate(o, out);
    if (rec->parsed()) return cmd_reconstruct(o, out);
    if (fit->parsed()) return cmd_fit(o, out);
    return cmd_report(o, out, err);
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const MissingArtifact& e) {
    err << "missing artifact: " << e.what() << '\n';
    return kExitMissing;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const nlohmann::json::exception& e) {
    err << "error: malformed JSON input: " << e.what() << '\n';
    return kExitConfig;
  }
}

}  // namespace qpt
