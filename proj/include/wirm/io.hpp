#pragma once

#include "wirm/core.hpp"
#include "wirm/eval.hpp"
#include "wirm/pipeline.hpp"
#include "wirm/simulator.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace wirm {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr int kCsiSchemaVersion = 1;

// JSON mappings. Readers start from defaults, so missing keys keep their
// default value; unknown keys throw invalid_config.
void to_json(nlohmann::json& j, const Interval& v);
void from_json(const nlohmann::json& j, Interval& v);
void to_json(nlohmann::json& j, const NoiseConfig& v);
void from_json(const nlohmann::json& j, NoiseConfig& v);
void to_json(nlohmann::json& j, const SimConfig& v);
void from_json(const nlohmann::json& j, SimConfig& v);
void to_json(nlohmann::json& j, const BandLimits& v);
void from_json(const nlohmann::json& j, BandLimits& v);
void to_json(nlohmann::json& j, const PipelineParams& v);
void from_json(const nlohmann::json& j, PipelineParams& v);
void to_json(nlohmann::json& j, const RunMetrics& v);

namespace io {

namespace fs = std::filesystem;

/// Whole file as a string; io_failure if it cannot be opened.
std::string read_text(const fs::path& path);
/// Writes bytes verbatim (binary mode, so "\n" stays "\n").
void write_text(const fs::path& path, const std::string& text);

/// Parses JSON text; malformed_input on syntax errors.
nlohmann::json parse_json(const std::string& text, const std::string& what);
nlohmann::json read_json(const fs::path& path);
/// Two-space indented dump with a trailing newline.
std::string dump_json(const nlohmann::json& j);

SimConfig read_sim_config(const fs::path& path);
PipelineParams read_params(const fs::path& path);

struct SweepFile {
  PipelineParams params;
  std::vector<SweepSpec> specs;  // one per noise kind entry
};

/// {"runs_per_level", "base_config", "params", "sweeps": [{"noise_kind", "levels"}]}
SweepFile read_sweep_file(const fs::path& path);

/// printf("%.17g"); NaN as "NaN".
std::string format_double(double v);

struct CsiFileInfo {
  Index time = 0;
  int tx = 0;
  int rx = 0;
  Index subcarriers = 0;
  double fs = 0.0;
  std::optional<std::uint64_t> seed;
  nlohmann::json sim_config;  // null for imported data
};

/// Writes <dir>/<stem>.json (metadata) and <dir>/<stem>.bin (little-endian
/// doubles, time-major: for t, for link, for f: re, im).
void write_csi(const fs::path& sidecar, const CsiTensor& csi,
               const SimConfig* config);

/// Reads a tensor written by write_csi. io_failure when a file is missing,
/// malformed_input when metadata and payload disagree.
CsiTensor read_csi(const fs::path& sidecar, CsiFileInfo* info = nullptr);

std::string truth_csv(const GroundTruth& truth, double fs);
std::string rate_csv(const std::vector<RateSample>& rate, double fs);
std::string waveform_csv(Index start, const Eigen::Ref<const Eigen::VectorXd>& r,
                         double fs);

GroundTruth parse_truth_csv(const std::string& text);
std::vector<RateSample> parse_rate_csv(const std::string& text);
/// Returns (first n, samples); n must be consecutive.
std::pair<Index, Eigen::VectorXd> parse_waveform_csv(const std::string& text);

/// Per-run rows of every report, then a summary block of seed averages.
std::string report_csv(const std::vector<MetricReport>& reports);

/// Rate RMSE and waveform correlation tables, one per noise kind.
nlohmann::json tables_json(const std::vector<MetricReport>& reports);

}  // namespace io
}  // namespace wirm
