#include <doctest.h>

#include "wirm/io.hpp"

#include <cstring>
#include <filesystem>

using namespace wirm;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("wirm_io_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("format_double") {
  CHECK(io::format_double(0.1) == "0.10000000000000001");
  CHECK(io::format_double(15.0) == "15");
  CHECK(io::format_double(std::nan("")) == "NaN");
  CHECK(std::stod(io::format_double(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("CSI files round-trip bit for bit") {
  const fs::path dir = scratch("csi");
  SimConfig c;
  c.duration_samples = 30;
  c.subcarriers = 5;
  c.noise.thermal_std = 0.3;
  const Simulation sim = simulate(c);
  io::write_csi(dir / "csi.json", sim.csi, &c);
  CHECK(fs::file_size(dir / "csi.bin") == 30u * 4u * 5u * 16u);

  io::CsiFileInfo info;
  const CsiTensor back = io::read_csi(dir / "csi.json", &info);
  CHECK(back.samples() == sim.csi.samples());
  CHECK(back.sample_period() == sim.csi.sample_period());
  CHECK(info.seed == std::optional<std::uint64_t>(1));
  CHECK(info.sim_config.get<SimConfig>().noise.thermal_std == 0.3);

  SUBCASE("truncated payload") {
    fs::resize_file(dir / "csi.bin", fs::file_size(dir / "csi.bin") - 8);
    try {
      io::read_csi(dir / "csi.json");
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::malformed_input);
    }
  }
  SUBCASE("missing files") {
    try {
      io::read_csi(dir / "nope.json");
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::io_failure);
    }
  }
  fs::remove_all(dir);
}

TEST_CASE("payload is little-endian time-major re, im") {
  const fs::path dir = scratch("layout");
  CsiTensor csi(2, 1, 2, 3, 0.5);
  csi(1, 1, 2) = Complex(1.0, -2.0);
  io::write_csi(dir / "x.json", csi, nullptr);
  const std::string bytes = io::read_text(dir / "x.bin");
  // (t = 1, link = 1, f = 2) is element 1 * 6 + 1 * 3 + 2 = 11.
  double re = 0, im = 0;
  std::memcpy(&re, bytes.data() + 11 * 16, 8);
  std::memcpy(&im, bytes.data() + 11 * 16 + 8, 8);
  CHECK(re == 1.0);
  CHECK(im == -2.0);
  CHECK(static_cast<unsigned char>(bytes[11 * 16 + 7]) == 0x3f);  // high byte of 1.0 last
  fs::remove_all(dir);
}

TEST_CASE("CSV writers and readers agree") {
  GroundTruth g;
  g.r = Eigen::Vector3d(0.0, 0.5, -1.0 / 3.0);
  g.bpm = Eigen::Vector3d::Constant(15.0);
  const std::string t = io::truth_csv(g, 9.9);
  CHECK(t.rfind("n,t_seconds,r,bpm\n0,0,0,15\n", 0) == 0);
  const GroundTruth back = io::parse_truth_csv(t);
  CHECK(back.r == g.r);
  CHECK(back.bpm == g.bpm);

  std::vector<RateSample> rate{{149, 15.07, true}, {150, 14.2, false}};
  const auto rb = io::parse_rate_csv(io::rate_csv(rate, 9.9));
  REQUIRE(rb.size() == 2);
  CHECK(rb[1].n == 150);
  CHECK(rb[1].bpm == 14.2);
  CHECK_FALSE(rb[1].breath_present);

  const Eigen::Vector3d w(0.1, -0.2, 0.3);
  const auto [start, wb] = io::parse_waveform_csv(io::waveform_csv(240, w, 9.9));
  CHECK(start == 240);
  CHECK(wb == w);

  CHECK_THROWS_AS(io::parse_truth_csv("n,r\n0,1\n"), Error);
  CHECK_THROWS_AS(io::parse_rate_csv("n,t_seconds,bpm_estimate,breath_present\n1,0,x,1\n"), Error);
  CHECK(io::truth_csv(g, 9.9).find('\r') == std::string::npos);
}

TEST_CASE("config JSON") {
  SimConfig c;
  c.seed = 42;
  c.noise.mult_std = 0.25;
  const SimConfig back = nlohmann::json(c).get<SimConfig>();
  CHECK(back.seed == 42);
  CHECK(back.noise.mult_std == 0.25);
  CHECK(back.wavelength == c.wavelength);

  CHECK_THROWS_AS(nlohmann::json::parse(R"({"sead": 3})").get<SimConfig>(), Error);
  CHECK_THROWS_AS(nlohmann::json::parse(R"({"band": {"f_mn": 0.1}})").get<PipelineParams>(), Error);
  const PipelineParams p = nlohmann::json::parse(R"({"smoothing": 1.5})").get<PipelineParams>();
  CHECK(p.smoothing == 1.5);
  CHECK(p.window_length == 150);
}

TEST_CASE("bundled sweep spec") {
  const io::SweepFile f = io::read_sweep_file(fs::path(WIRM_SOURCE_DIR) / "configs/tables.spec");
  REQUIRE(f.specs.size() == 3);
  CHECK(f.specs[0].noise_kind == NoiseKind::phase);
  CHECK(f.specs[1].levels == std::vector<double>{0.1, 0.25, 0.5, 0.75, 1.0});
  CHECK(f.specs[2].levels == std::vector<double>{0.1, 0.5, 1.0, 5.0, 10.0});
  for (const auto& s : f.specs) CHECK(s.runs_per_level == 3);
}

TEST_CASE("report formats") {
  MetricReport rep;
  SweepRow row;
  row.noise_kind = NoiseKind::thermal;
  row.level = 5.0;
  row.seed = 1;
  row.metrics = RunMetrics{2.5, 80.0, 0.4, 0.6, 1.0};
  rep.rows.push_back(row);
  row.seed = 2;
  row.metrics = RunMetrics{};
  row.error = "no-extrema: signal has no extrema";
  rep.rows.push_back(row);
  SweepLevelSummary s;
  s.noise_kind = NoiseKind::thermal;
  s.level = 5.0;
  s.runs = 1;
  s.mean = rep.rows[0].metrics;
  rep.summary.push_back(s);

  const std::string csv = io::report_csv({rep});
  CHECK(csv.rfind("noise_kind,level,seed,rmse_bpm,pct_within_3bpm,mean_abs_corr,max_abs_corr\n"
                  "thermal,5,1,2.5,80,0.40000000000000002,0.59999999999999998\n"
                  "thermal,5,2,NaN,NaN,NaN,NaN\n", 0) == 0);
  CHECK(csv.find("# summary") != std::string::npos);

  const nlohmann::json j = io::tables_json({rep});
  REQUIRE(j["tables"].size() == 2);
  CHECK(j["tables"][0]["metric"] == "rmse_bpm");
  CHECK(j["tables"][1]["metric"] == "mean_abs_corr");
  CHECK(j["failed_runs"].size() == 1);
}
