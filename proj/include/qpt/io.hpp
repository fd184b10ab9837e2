#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "qpt/synthlab.hpp"

namespace qpt {

using Json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

/// A file the caller expected is absent or unreadable.
class MissingArtifact : public Error {
 public:
  using Error::Error;
};

Json to_json(const DensityMatrix& rho);
Json to_json(const BlochVector& v);
Json to_json(const Superoperator& s);
Json to_json(const ProcessMatrix& p);
Json to_json(const HermitianParams& p);
Json to_json(const RelaxationModel& m);
Json to_json(const TomographySet& ts);
Json to_json(const FitReport& r);
Json to_json(const NoiseSpec& n);

/// Parsers validate the schema and throw InvalidArgument on malformed input.
DensityMatrix density_from_json(const Json& j);
BlochVector bloch_from_json(const Json& j);
Superoperator superop_from_json(const Json& j);
ProcessMatrix process_from_json(const Json& j);
HermitianParams hermitian_from_json(const Json& j);
RelaxationModel relaxation_from_json(const Json& j);
TomographySet tomography_from_json(const Json& j);
NoiseSpec noise_from_json(const Json& j);

/// Scenario spec: {"kind", "params": {...}, "grid": {"start_s", "stop_s", "step_s"} | {"times_s": [...]},
/// "noise": {...}}. Missing members take the per-kind defaults.
struct ScenarioSpec {
  Scenario scenario;
  NoiseSpec noise;
};
ScenarioSpec scenario_spec_from_json(const Json& j);

/// Adds "schema_version" and "seed".
Json stamp(Json j, std::uint64_t seed);

/// printf("%.17g").
std::string format_double(double x);

/// Header line plus one row per entry, numbers in format_double.
std::string csv_table(const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows);

/// Writes to a temporary sibling file and renames it over `path`.
void write_text_atomic(const std::filesystem::path& path, const std::string& content);
void write_json_atomic(const std::filesystem::path& path, const Json& j);

/// Throws MissingArtifact if the file cannot be read, InvalidArgument if it is not JSON.
Json read_json(const std::filesystem::path& path);

}  // namespace qpt
