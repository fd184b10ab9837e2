#include "qpt/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>
#include <unistd.h>

namespace qpt {

namespace {

Json matrix_rows(const RealMatrix& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

RealMatrix rows_matrix(const Json& j, Eigen::Index rows, Eigen::Index cols, const char* what) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows) {
    throw InvalidArgument(std::string(what) + ": expected " + std::to_string(rows) + " rows");
  }
  RealMatrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Json& row = j[static_cast<size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw InvalidArgument(std::string(what) + ": row " + std::to_string(r) + " must have " +
                            std::to_string(cols) + " entries");
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      const Json& v = row[static_cast<size_t>(c)];
      if (!v.is_number()) throw InvalidArgument(std::string(what) + ": non-numeric entry");
      m(r, c) = v.get<double>();
    }
  }
  return m;
}

// State matrices are stored as lists of columns (one Bloch vector per state).
Json column_list(const RealMatrix& m) { return matrix_rows(m.transpose()); }

RealMatrix columns_matrix(const Json& j, Eigen::Index n, const char* what) {
  if (!j.is_array() || j.empty()) throw InvalidArgument(std::string(what) + ": expected a list of state vectors");
  return rows_matrix(j, static_cast<Eigen::Index>(j.size()), n, what).transpose();
}

int read_dim(const Json& j) {
  if (!j.is_object() || !j.contains("dim") || !j["dim"].is_number_integer()) {
    throw InvalidArgument("missing integer \"dim\"");
  }
  const int d = j["dim"].get<int>();
  if (d < 2) throw InvalidDimension("dim must be >= 2");
  return d;
}

template <typename T>
T member_or(const Json& j, const char* key, T fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("bad value for \"") + key + "\": " + e.what());
  }
}

std::array<double, 3> triple(const Json& j, const char* what) {
  if (!j.is_array() || j.size() != 3) throw InvalidArgument(std::string(what) + " must have 3 entries");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

}  // namespace

Json to_json(const DensityMatrix& rho) {
  return {{"dim", rho.dim()}, {"re", matrix_rows(rho.matrix().real())}, {"im", matrix_rows(rho.matrix().imag())}};
}

Json to_json(const BlochVector& v) {
  return {{"dim", v.dim()}, {"coords", std::vector<double>(v.coords().data(), v.coords().data() + v.coords().size())}};
}

Json to_json(const Superoperator& s) { return {{"dim", s.dim()}, {"matrix", matrix_rows(s.matrix())}}; }

Json to_json(const ProcessMatrix& p) {
  return {{"dim", p.dim()}, {"matrix", matrix_rows(p.matrix())}, {"duration_s", p.duration()}};
}

Json to_json(const HermitianParams& p) { return {{"h", p.h}}; }

Json to_json(const RelaxationModel& m) {
  return {{"omega_residual", m.omega_residual}, {"gamma_dephase", m.gamma_dephase}, {"gamma_iso", m.gamma_iso}};
}

Json to_json(const TomographySet& ts) {
  Json outputs = Json::object();
  for (const auto& [t, m] : ts.outputs()) outputs[format_double(t)] = column_list(m);
  return {{"dim", ts.dim()}, {"times_s", ts.times()}, {"inputs", column_list(ts.inputs())}, {"outputs", outputs}};
}

Json to_json(const FitReport& r) {
  Json j = {{"model", r.model},
            {"cost", r.cost},
            {"initial_cost", r.initial_cost},
            {"times_s", r.times},
            {"df_per_time", r.df_per_time},
            {"iterations", r.iterations},
            {"converged", r.converged},
            {"residual", r.residual},
            {"seed", r.seed},
            {"warnings", r.warnings}};
  Json estimate = Json::object();
  for (size_t k = 0; k < r.params.size(); ++k) {
    estimate[k < r.param_names.size() ? r.param_names[k] : std::to_string(k)] = r.params[k];
  }
  j["estimate"] = estimate;
  Json ci = Json::object();
  if (!r.ci_low.empty()) {
    ci["method"] = "percentile_16_84";
    for (size_t k = 0; k < r.ci_low.size(); ++k) {
      ci[k < r.param_names.size() ? r.param_names[k] : std::to_string(k)] = {r.ci_low[k], r.ci_high[k]};
    }
  }
  j["ci"] = ci;
  if (r.liouvillian) j["liouvillian"] = to_json(*r.liouvillian);
  if (r.hermitian) j["hermitian"] = to_json(*r.hermitian);
  if (r.relaxation) j["relaxation"] = to_json(*r.relaxation);
  return j;
}

Json to_json(const NoiseSpec& n) {
  return {{"bloch_sigma", n.bloch_sigma}, {"prep_fidelity", n.prep_fidelity}, {"seed", n.seed}};
}

DensityMatrix density_from_json(const Json& j) {
  const int d = read_dim(j);
  if (!j.contains("re")) throw InvalidArgument("density matrix needs \"re\"");
  const RealMatrix re = rows_matrix(j["re"], d, d, "re");
  const RealMatrix im = j.contains("im") ? rows_matrix(j["im"], d, d, "im") : RealMatrix::Zero(d, d);
  ComplexMatrix m(d, d);
  m.real() = re;
  m.imag() = im;
  return DensityMatrix::from_measured(m);
}

BlochVector bloch_from_json(const Json& j) {
  const int d = read_dim(j);
  if (!j.contains("coords")) throw InvalidArgument("Bloch vector needs \"coords\"");
  const RealMatrix c = rows_matrix(Json::array({j["coords"]}), 1, d * d, "coords");
  return BlochVector(d, c.row(0).transpose());
}

Superoperator superop_from_json(const Json& j) {
  const int d = read_dim(j);
  if (!j.contains("matrix")) throw InvalidArgument("superoperator needs \"matrix\"");
  return Superoperator(d, rows_matrix(j["matrix"], d * d, d * d, "matrix"));
}

ProcessMatrix process_from_json(const Json& j) {
  const Superoperator s = superop_from_json(j);
  if (!j.contains("duration_s") || !j["duration_s"].is_number()) {
    throw InvalidArgument("process matrix needs \"duration_s\"");
  }
  return ProcessMatrix(s.dim(), s.matrix(), j["duration_s"].get<double>());
}

HermitianParams hermitian_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("h") || !j["h"].is_array() || j["h"].size() != 9) {
    throw InvalidArgument("Hermitian parameters need \"h\" with 9 entries");
  }
  HermitianParams p;
  for (size_t k = 0; k < 9; ++k) p.h[k] = j["h"][k].get<double>();
  return p;
}

RelaxationModel relaxation_from_json(const Json& j) {
  RelaxationModel m = reference_relaxation_model();
  if (j.contains("omega_residual")) m.omega_residual = triple(j["omega_residual"], "omega_residual");
  if (j.contains("gamma_dephase")) m.gamma_dephase = triple(j["gamma_dephase"], "gamma_dephase");
  m.gamma_iso = member_or(j, "gamma_iso", m.gamma_iso);
  for (double g : m.gamma_dephase) {
    if (g < 0.0) throw InvalidArgument("dephasing rates must be non-negative");
  }
  if (m.gamma_iso < 0.0) throw InvalidArgument("isotropic rate must be non-negative");
  return m;
}

TomographySet tomography_from_json(const Json& j) {
  const int d = read_dim(j);
  if (!j.contains("inputs") || !j.contains("outputs") || !j["outputs"].is_object()) {
    throw InvalidArgument("tomography set needs \"inputs\" and an \"outputs\" object");
  }
  const RealMatrix inputs = columns_matrix(j["inputs"], d * d, "inputs");
  std::map<double, RealMatrix> outputs;
  for (const auto& [key, value] : j["outputs"].items()) {
    double t = 0.0;
    try {
      size_t used = 0;
      t = std::stod(key, &used);
      if (used != key.size()) throw std::invalid_argument(key);
    } catch (const std::exception&) {
      throw InvalidArgument("output key '" + key + "' is not a time in seconds");
    }
    outputs.emplace(t, columns_matrix(value, d * d, "outputs"));
  }
  return TomographySet(d, inputs, std::move(outputs));
}

NoiseSpec noise_from_json(const Json& j) {
  NoiseSpec n;
  n.bloch_sigma = member_or(j, "bloch_sigma", member_or(j, "sigma", n.bloch_sigma));
  n.prep_fidelity = member_or(j, "prep_fidelity", n.prep_fidelity);
  n.seed = member_or<std::uint64_t>(j, "seed", n.seed);
  if (n.bloch_sigma < 0.0) throw InvalidArgument("noise sigma must be non-negative");
  if (!(n.prep_fidelity > 0.0 && n.prep_fidelity <= 1.0)) throw InvalidArgument("prep_fidelity must lie in (0, 1]");
  return n;
}

ScenarioSpec scenario_spec_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) {
    throw InvalidArgument("scenario spec needs a string \"kind\"");
  }
  const ScenarioKind kind = parse_scenario_kind(j["kind"].get<std::string>());
  ScenarioParams params;
  const Json p = j.value("params", Json::object());
  if (p.contains("relaxation")) params.relaxation = relaxation_from_json(p["relaxation"]);
  params.include_relaxation = member_or(p, "include_relaxation", params.include_relaxation);
  params.quadratic_q = member_or(p, "q", params.quadratic_q);
  params.linear_axis = member_or(p, "axis", params.linear_axis);
  params.linear_omega = member_or(p, "omega", params.linear_omega);
  params.field_amplitude = member_or(p, "amplitude", params.field_amplitude);
  params.ramp = member_or(p, "ramp", params.ramp);
  params.ramp_duration = member_or(p, "ramp_duration_s", params.ramp_duration);
  params.substeps = member_or(p, "substeps", params.substeps);
  if (j.contains("grid")) {
    const Json& g = j["grid"];
    if (g.contains("times_s")) {
      params.times = g["times_s"].get<std::vector<double>>();
    } else if (g.contains("start_s") && g.contains("stop_s") && g.contains("step_s")) {
      params.times = TimeGrid::uniform(g["start_s"].get<double>(), g["stop_s"].get<double>(), g["step_s"].get<double>())
                         .times();
    } else {
      throw InvalidArgument("grid needs \"times_s\" or \"start_s\"/\"stop_s\"/\"step_s\"");
    }
  }
  ScenarioSpec spec{make_scenario(kind, params), {}};
  if (j.contains("noise")) spec.noise = noise_from_json(j["noise"]);
  return spec;
}

Json stamp(Json j, std::uint64_t seed) {
  j["schema_version"] = kSchemaVersion;
  j["seed"] = seed;
  return j;
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string csv_table(const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows) {
  std::ostringstream out;
  for (size_t k = 0; k < header.size(); ++k) out << (k ? "," : "") << header[k];
  out << '\n';
  for (const auto& row : rows) {
    for (size_t k = 0; k < row.size(); ++k) out << (k ? "," : "") << format_double(row[k]);
    out << '\n';
  }
  return out.str();
}

void write_text_atomic(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InvalidArgument("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw InvalidArgument("failed writing " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw InvalidArgument("cannot move output into place at " + path.string());
  }
}

void write_json_atomic(const std::filesystem::path& path, const Json& j) { write_text_atomic(path, j.dump(2) + "\n"); }

Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingArtifact("cannot read " + path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(path.string() + " is not valid JSON: " + e.what());
  }
}

}  // namespace qpt
