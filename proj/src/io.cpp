#include "wirm/io.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

namespace wirm {

namespace {

using nlohmann::json;

// Reads fields out of a JSON object and rejects keys nobody asked for.
class Fields {
 public:
  Fields(const json& j, const char* what) : j_(j), what_(what) {
    if (!j.is_object()) {
      throw Error(Errc::invalid_config, std::string(what) + " must be a JSON object");
    }
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      it->get_to(out);
    } catch (const json::exception& e) {
      throw Error(Errc::invalid_config,
                  std::string(what_) + "." + key + ": " + e.what());
    }
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) {
        throw Error(Errc::invalid_config,
                    std::string("unknown key '") + it.key() + "' in " + what_);
      }
    }
  }

 private:
  const json& j_;
  const char* what_;
  std::set<std::string> seen_;
};

json nan_as_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

// Lines of a CSV body after checking the header.
std::vector<std::vector<std::string>> csv_rows(const std::string& text,
                                               const std::string& header) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != header) {
    throw Error(Errc::malformed_input, "expected CSV header '" + header + "'");
  }
  const std::size_t cols = split(header, ',').size();
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto cells = split(line, ',');
    if (cells.size() != cols) {
      throw Error(Errc::malformed_input, "CSV row has the wrong number of fields");
    }
    rows.push_back(std::move(cells));
  }
  return rows;
}

double parse_double(const std::string& s) {
  if (s == "NaN") return std::numeric_limits<double>::quiet_NaN();
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw Error(Errc::malformed_input, "not a number: '" + s + "'");
}

Index parse_index(const std::string& s) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(s, &used);
    if (used == s.size()) return Index(v);
  } catch (const std::exception&) {
  }
  throw Error(Errc::malformed_input, "not an integer: '" + s + "'");
}

std::uint64_t to_little(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    std::uint64_t r = 0;
    for (int i = 0; i < 8; ++i) r = (r << 8) | ((v >> (8 * i)) & 0xff);
    return r;
  }
  return v;
}

}  // namespace

void to_json(json& j, const Interval& v) { j = json::array({v.lo, v.hi}); }

void from_json(const json& j, Interval& v) {
  if (!j.is_array() || j.size() != 2) {
    throw Error(Errc::invalid_config, "interval must be a two-element array");
  }
  v.lo = j[0].get<double>();
  v.hi = j[1].get<double>();
}

void to_json(json& j, const NoiseConfig& v) {
  j = json{{"thermal_std", v.thermal_std},
           {"mult_std", v.mult_std},
           {"phase_noise", v.phase_noise}};
}

void from_json(const json& j, NoiseConfig& v) {
  Fields f(j, "noise");
  f.get("thermal_std", v.thermal_std);
  f.get("mult_std", v.mult_std);
  f.get("phase_noise", v.phase_noise);
  f.finish();
}

void to_json(json& j, const SimConfig& v) {
  j = json{{"seed", v.seed},
           {"duration_samples", v.duration_samples},
           {"fs", v.fs},
           {"subcarriers", v.subcarriers},
           {"tx_antennas", v.tx_antennas},
           {"rx_antennas", v.rx_antennas},
           {"wavelength", v.wavelength},
           {"antenna_separation", v.antenna_separation},
           {"txrx_separation", v.txrx_separation},
           {"breather_count", v.breather_count},
           {"breath_bpm", v.breath_bpm},
           {"breath_phase_offset", v.breath_phase_offset},
           {"breath_depth", v.breath_depth},
           {"alpha", v.alpha},
           {"static_amplitude", v.static_amplitude},
           {"theta", v.theta},
           {"noise", v.noise}};
}

void from_json(const json& j, SimConfig& v) {
  Fields f(j, "sim config");
  f.get("seed", v.seed);
  f.get("duration_samples", v.duration_samples);
  f.get("fs", v.fs);
  f.get("subcarriers", v.subcarriers);
  f.get("tx_antennas", v.tx_antennas);
  f.get("rx_antennas", v.rx_antennas);
  f.get("wavelength", v.wavelength);
  f.get("antenna_separation", v.antenna_separation);
  f.get("txrx_separation", v.txrx_separation);
  f.get("breather_count", v.breather_count);
  f.get("breath_bpm", v.breath_bpm);
  f.get("breath_phase_offset", v.breath_phase_offset);
  f.get("breath_depth", v.breath_depth);
  f.get("alpha", v.alpha);
  f.get("static_amplitude", v.static_amplitude);
  f.get("theta", v.theta);
  f.get("noise", v.noise);
  f.finish();
}

void to_json(json& j, const BandLimits& v) {
  j = json{{"f_min", v.f_min}, {"f_max", v.f_max}};
}

void from_json(const json& j, BandLimits& v) {
  Fields f(j, "band");
  f.get("f_min", v.f_min);
  f.get("f_max", v.f_max);
  f.finish();
}

void to_json(json& j, const PipelineParams& v) {
  j = json{{"window_length", v.window_length},
           {"window_count", v.window_count},
           {"window_overlap", v.window_overlap},
           {"smoothing", v.smoothing},
           {"waveform_length", v.waveform_length},
           {"fif_chi", v.fif_chi},
           {"transition_sigma_bpm", v.transition_sigma_bpm},
           {"presence_gamma", v.presence_gamma},
           {"band", v.band},
           {"fs", v.fs}};
}

void from_json(const json& j, PipelineParams& v) {
  Fields f(j, "params");
  f.get("window_length", v.window_length);
  f.get("window_count", v.window_count);
  f.get("window_overlap", v.window_overlap);
  f.get("smoothing", v.smoothing);
  f.get("waveform_length", v.waveform_length);
  f.get("fif_chi", v.fif_chi);
  f.get("transition_sigma_bpm", v.transition_sigma_bpm);
  f.get("presence_gamma", v.presence_gamma);
  f.get("band", v.band);
  f.get("fs", v.fs);
  f.finish();
}

void to_json(json& j, const RunMetrics& v) {
  j = json{{"rmse_bpm", nan_as_null(v.rmse_bpm)},
           {"pct_within_3bpm", nan_as_null(v.pct_within_3bpm)},
           {"mean_abs_corr", nan_as_null(v.mean_abs_corr)},
           {"max_abs_corr", nan_as_null(v.max_abs_corr)},
           {"presence_fraction", nan_as_null(v.presence_fraction)}};
}

namespace io {

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io_failure, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::io_failure, "cannot write " + path.string());
  out.write(text.data(), std::streamsize(text.size()));
  if (!out) throw Error(Errc::io_failure, "write failed for " + path.string());
}

json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(Errc::malformed_input, what + ": " + e.what());
  }
}

json read_json(const fs::path& path) {
  return parse_json(read_text(path), path.string());
}

std::string dump_json(const json& j) { return j.dump(2) + "\n"; }

SimConfig read_sim_config(const fs::path& path) {
  SimConfig cfg = read_json(path).get<SimConfig>();
  cfg.validate();
  return cfg;
}

PipelineParams read_params(const fs::path& path) {
  PipelineParams p = read_json(path).get<PipelineParams>();
  p.validate();
  return p;
}

SweepFile read_sweep_file(const fs::path& path) {
  const json j = read_json(path);
  SweepFile out;
  int runs = 3;
  SimConfig base;
  json sweeps = json::array();
  Fields f(j, "sweep spec");
  f.get("runs_per_level", runs);
  f.get("base_config", base);
  f.get("params", out.params);
  f.get("sweeps", sweeps);
  f.finish();
  if (!sweeps.is_array() || sweeps.empty()) {
    throw Error(Errc::invalid_config, "sweep spec needs a nonempty 'sweeps' array");
  }
  for (const json& entry : sweeps) {
    SweepSpec spec;
    spec.runs_per_level = runs;
    spec.base_config = base;
    std::string kind;
    Fields e(entry, "sweeps[]");
    e.get("noise_kind", kind);
    e.get("levels", spec.levels);
    e.finish();
    spec.noise_kind = parse_noise_kind(kind);
    spec.validate();
    out.specs.push_back(std::move(spec));
  }
  out.params.validate();
  return out;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "NaN";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_csi(const fs::path& sidecar, const CsiTensor& csi,
               const SimConfig* config) {
  fs::path payload = sidecar;
  payload.replace_extension(".bin");

  const CsiMatrix& s = csi.samples();
  std::string bytes(std::size_t(s.size()) * 16, '\0');
  std::size_t pos = 0;
  for (Index t = 0; t < s.rows(); ++t) {
    for (Index c = 0; c < s.cols(); ++c) {
      for (double part : {s(t, c).real(), s(t, c).imag()}) {
        const std::uint64_t bits = to_little(std::bit_cast<std::uint64_t>(part));
        std::memcpy(bytes.data() + pos, &bits, 8);
        pos += 8;
      }
    }
  }

  json meta{{"schema_version", kCsiSchemaVersion},
            {"T", csi.time()},
            {"L", csi.links()},
            {"K", csi.subcarriers()},
            {"A", csi.tx_antennas()},
            {"B", csi.rx_antennas()},
            {"fs", 1.0 / csi.sample_period()},
            {"sample_period", csi.sample_period()},
            {"link_order", "link = a * B + b (tx a, rx b, zero-based)"},
            {"layout", "little-endian float64, for t, for link, for f: re, im"},
            {"payload", payload.filename().string()},
            {"payload_bytes", bytes.size()},
            {"seed", config ? json(config->seed) : json(nullptr)},
            {"sim_config", config ? json(*config) : json(nullptr)}};
  write_text(sidecar, dump_json(meta));
  write_text(payload, bytes);
}

CsiTensor read_csi(const fs::path& sidecar, CsiFileInfo* info) {
  const json meta = read_json(sidecar);
  CsiFileInfo fi;
  std::string payload_name;
  std::size_t payload_bytes = 0;
  double sample_period = 0.0;
  try {
    if (meta.at("schema_version").get<int>() != kCsiSchemaVersion) {
      throw Error(Errc::malformed_input, "unsupported CSI schema version");
    }
    fi.time = meta.at("T").get<Index>();
    fi.subcarriers = meta.at("K").get<Index>();
    fi.tx = meta.at("A").get<int>();
    fi.rx = meta.at("B").get<int>();
    sample_period = meta.at("sample_period").get<double>();
    fi.fs = meta.at("fs").get<double>();
    payload_name = meta.at("payload").get<std::string>();
    payload_bytes = meta.at("payload_bytes").get<std::size_t>();
    if (meta.contains("seed") && meta["seed"].is_number_unsigned()) {
      fi.seed = meta["seed"].get<std::uint64_t>();
    }
    if (meta.contains("sim_config")) fi.sim_config = meta["sim_config"];
    if (meta.at("L").get<Index>() != Index{fi.tx} * fi.rx) {
      throw Error(Errc::malformed_input, "L does not equal A * B");
    }
  } catch (const json::exception& e) {
    throw Error(Errc::malformed_input, sidecar.string() + ": " + e.what());
  }
  if (fi.time < 0 || fi.subcarriers < 1 || fi.tx < 1 || fi.rx < 1 ||
      !(sample_period > 0.0)) {
    throw Error(Errc::malformed_input, "invalid CSI dimensions");
  }

  const std::size_t expected =
      std::size_t(fi.time) * std::size_t(fi.tx * fi.rx) * std::size_t(fi.subcarriers) * 16;
  const std::string bytes = read_text(sidecar.parent_path() / payload_name);
  if (bytes.size() != expected || payload_bytes != expected) {
    throw Error(Errc::malformed_input, "CSI payload size does not match metadata");
  }

  CsiTensor csi(fi.time, fi.tx, fi.rx, fi.subcarriers, sample_period);
  CsiMatrix& s = csi.samples();
  std::size_t pos = 0;
  for (Index t = 0; t < s.rows(); ++t) {
    for (Index c = 0; c < s.cols(); ++c) {
      double part[2];
      for (double& p : part) {
        std::uint64_t bits = 0;
        std::memcpy(&bits, bytes.data() + pos, 8);
        p = std::bit_cast<double>(to_little(bits));
        pos += 8;
      }
      s(t, c) = Complex(part[0], part[1]);
    }
  }
  csi.validate();
  if (info) *info = std::move(fi);
  return csi;
}

std::string truth_csv(const GroundTruth& truth, double fs) {
  std::string out = "n,t_seconds,r,bpm\n";
  for (Index n = 0; n < truth.r.size(); ++n) {
    out += std::to_string(n) + "," + format_double(double(n) / fs) + "," +
           format_double(truth.r[n]) + "," + format_double(truth.bpm[n]) + "\n";
  }
  return out;
}

std::string rate_csv(const std::vector<RateSample>& rate, double fs) {
  std::string out = "n,t_seconds,bpm_estimate,breath_present\n";
  for (const RateSample& s : rate) {
    out += std::to_string(s.n) + "," + format_double(double(s.n) / fs) + "," +
           format_double(s.bpm) + "," + (s.breath_present ? "1" : "0") + "\n";
  }
  return out;
}

std::string waveform_csv(Index start, const Eigen::Ref<const Eigen::VectorXd>& r,
                         double fs) {
  std::string out = "n,t_seconds,r_estimate\n";
  for (Index i = 0; i < r.size(); ++i) {
    const Index n = start + i;
    out += std::to_string(n) + "," + format_double(double(n) / fs) + "," +
           format_double(r[i]) + "\n";
  }
  return out;
}

GroundTruth parse_truth_csv(const std::string& text) {
  const auto rows = csv_rows(text, "n,t_seconds,r,bpm");
  GroundTruth g;
  g.r.resize(Index(rows.size()));
  g.bpm.resize(Index(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (parse_index(rows[i][0]) != Index(i)) {
      throw Error(Errc::malformed_input, "truth rows must start at n = 0 and be consecutive");
    }
    g.r[Index(i)] = parse_double(rows[i][2]);
    g.bpm[Index(i)] = parse_double(rows[i][3]);
  }
  return g;
}

std::vector<RateSample> parse_rate_csv(const std::string& text) {
  std::vector<RateSample> out;
  for (const auto& row : csv_rows(text, "n,t_seconds,bpm_estimate,breath_present")) {
    RateSample s;
    s.n = parse_index(row[0]);
    s.bpm = parse_double(row[2]);
    const Index flag = parse_index(row[3]);
    if (flag != 0 && flag != 1) throw Error(Errc::malformed_input, "breath_present must be 0 or 1");
    s.breath_present = flag == 1;
    out.push_back(s);
  }
  return out;
}

std::pair<Index, Eigen::VectorXd> parse_waveform_csv(const std::string& text) {
  const auto rows = csv_rows(text, "n,t_seconds,r_estimate");
  Eigen::VectorXd r(Index(rows.size()));
  Index start = rows.empty() ? 0 : parse_index(rows[0][0]);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (parse_index(rows[i][0]) != start + Index(i)) {
      throw Error(Errc::malformed_input, "waveform rows must be consecutive");
    }
    r[Index(i)] = parse_double(rows[i][2]);
  }
  return {start, r};
}

std::string report_csv(const std::vector<MetricReport>& reports) {
  std::string out = "noise_kind,level,seed,rmse_bpm,pct_within_3bpm,mean_abs_corr,max_abs_corr\n";
  auto metrics = [](const RunMetrics& m) {
    return format_double(m.rmse_bpm) + "," + format_double(m.pct_within_3bpm) + "," +
           format_double(m.mean_abs_corr) + "," + format_double(m.max_abs_corr);
  };
  for (const MetricReport& rep : reports) {
    for (const SweepRow& row : rep.rows) {
      out += std::string(to_string(row.noise_kind)) + "," + format_double(row.level) +
             "," + std::to_string(row.seed) + "," + metrics(row.metrics) + "\n";
    }
  }
  out += "\n# summary: mean over successful runs\n";
  out += "noise_kind,level,runs,rmse_bpm,pct_within_3bpm,mean_abs_corr,max_abs_corr\n";
  for (const MetricReport& rep : reports) {
    for (const SweepLevelSummary& s : rep.summary) {
      out += std::string(to_string(s.noise_kind)) + "," + format_double(s.level) + "," +
             std::to_string(s.runs) + "," + metrics(s.mean) + "\n";
    }
  }
  return out;
}

json tables_json(const std::vector<MetricReport>& reports) {
  // Rate error tables first, then waveform correlation, each ordered
  // phase, multiplicative, thermal.
  const NoiseKind order[] = {NoiseKind::phase, NoiseKind::multiplicative,
                             NoiseKind::thermal};
  json tables = json::array();
  for (const char* metric : {"rmse_bpm", "mean_abs_corr"}) {
    for (NoiseKind kind : order) {
      for (const MetricReport& rep : reports) {
        if (rep.summary.empty() || rep.summary.front().noise_kind != kind) continue;
        json rows = json::array();
        for (const SweepLevelSummary& s : rep.summary) {
          const double v = std::string(metric) == "rmse_bpm" ? s.mean.rmse_bpm
                                                             : s.mean.mean_abs_corr;
          rows.push_back({{"level", s.level}, {"runs", s.runs}, {"value", nan_as_null(v)}});
        }
        tables.push_back({{"metric", metric}, {"noise_kind", to_string(kind)}, {"rows", rows}});
      }
    }
  }
  json errors = json::array();
  for (const MetricReport& rep : reports) {
    for (const SweepRow& row : rep.rows) {
      if (row.error.empty()) continue;
      errors.push_back({{"noise_kind", to_string(row.noise_kind)},
                        {"level", row.level},
                        {"seed", row.seed},
                        {"error", row.error}});
    }
  }
  return json{{"tables", tables}, {"failed_runs", errors}};
}

}  // namespace io
}  // namespace wirm
