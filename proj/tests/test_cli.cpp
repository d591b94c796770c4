#include <doctest.h>

#include "wirm/io.hpp"

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>

using namespace wirm;
namespace fs = std::filesystem;

namespace {

const fs::path kRoot = fs::temp_directory_path() / "wirm_cli_test";

int run(const std::string& args) {
  const std::string cmd = std::string(WIRM_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

fs::path fresh(const std::string& name) {
  const fs::path dir = kRoot / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write(const fs::path& p, const std::string& text) { io::write_text(p, text); }

}  // namespace

TEST_CASE("simulate is byte-reproducible and matches the library") {
  const fs::path dir = fresh("sim");
  const std::string cfg = q(fs::path(WIRM_CONFIGS) / "default_sim.json");
  REQUIRE(run("simulate --config " + cfg + " --out " + q(dir / "a")) == 0);
  REQUIRE(run("simulate --config " + cfg + " --out " + q(dir / "b")) == 0);
  for (const char* f : {"csi.json", "csi.bin", "truth.csv", "config.json"}) {
    CHECK(io::read_text(dir / "a" / f) == io::read_text(dir / "b" / f));
  }
  CHECK(fs::exists(dir / "a" / "manifest.json"));

  const Simulation sim = simulate(io::read_sim_config(fs::path(WIRM_CONFIGS) / "default_sim.json"));
  CHECK(io::read_csi(dir / "a" / "csi.json").samples() == sim.csi.samples());
  CHECK(io::read_text(dir / "a" / "truth.csv") == io::truth_csv(sim.truth, 9.9));
  const auto dims = io::read_json(dir / "a" / "csi.json");
  CHECK(dims["L"] == 4);
  CHECK(dims["K"] == 114);

  REQUIRE(run("simulate --config " + cfg + " --seed 5 --out " + q(dir / "c")) == 0);
  CHECK(io::read_json(dir / "c" / "config.json")["seed"] == 5);
  CHECK(io::read_text(dir / "a" / "csi.bin") != io::read_text(dir / "c" / "csi.bin"));
}

TEST_CASE("simulate input errors") {
  const fs::path dir = fresh("sim_err");
  CHECK(run("simulate --config " + q(dir / "missing.json") + " --out " + q(dir / "o")) == 3);
  write(dir / "bad.json", R"({"rx_antennas": 1})");
  CHECK(run("simulate --config " + q(dir / "bad.json") + " --out " + q(dir / "o")) == 2);
  write(dir / "typo.json", R"({"sed": 1})");
  CHECK(run("simulate --config " + q(dir / "typo.json") + " --out " + q(dir / "o")) == 2);
  write(dir / "junk.json", "{not json");
  CHECK(run("simulate --config " + q(dir / "junk.json") + " --out " + q(dir / "o")) == 2);
  CHECK(run("simulate") == 2);
}

TEST_CASE("estimate and eval end to end") {
  const fs::path dir = fresh("est");
  REQUIRE(run("simulate --out " + q(dir / "sim")) == 0);
  REQUIRE(run("estimate --csi " + q(dir / "sim" / "csi.json") + " --out " + q(dir / "est")) == 0);

  // The CLI output equals the library output.
  const CsiTensor csi = io::read_csi(dir / "sim" / "csi.json");
  const PipelineParams p;
  const PipelineResult r = run_pipeline(csi, p, fif_config(p));
  CHECK(io::read_text(dir / "est" / "rate.csv") == io::rate_csv(r.rate_samples, p.fs));
  CHECK(io::read_text(dir / "est" / "waveform.csv") ==
        io::waveform_csv(r.waveform_start, r.waveform, p.fs));

  const double bin_bpm = 60.0 * 0.7 / 148.0;
  for (const RateSample& s : io::parse_rate_csv(io::read_text(dir / "est" / "rate.csv"))) {
    CHECK(std::abs(s.bpm - 15.0) <= bin_bpm);
  }

  REQUIRE(run("eval --rate " + q(dir / "est" / "rate.csv") + " --waveform " +
              q(dir / "est" / "waveform.csv") + " --truth " + q(dir / "sim" / "truth.csv") +
              " --out " + q(dir / "ev")) == 0);
  const auto m = io::read_json(dir / "ev" / "metrics.json");
  const Simulation sim = simulate(SimConfig{});
  const RunMetrics direct = evaluate(sim.truth, r, p);
  CHECK(m["rmse_bpm"].get<double>() == direct.rmse_bpm);
  CHECK(m["mean_abs_corr"].get<double>() == direct.mean_abs_corr);
  CHECK(m["mean_abs_corr"].get<double>() >= 0.95);
}

TEST_CASE("estimate input errors") {
  const fs::path dir = fresh("est_err");
  write(dir / "short.json", R"({"duration_samples": 599, "subcarriers": 8})");
  REQUIRE(run("simulate --config " + q(dir / "short.json") + " --out " + q(dir / "short")) == 0);
  CHECK(run("estimate --csi " + q(dir / "short" / "csi.json") + " --out " + q(dir / "o")) == 4);

  write(dir / "ok.json", R"({"duration_samples": 700, "subcarriers": 8})");
  REQUIRE(run("simulate --config " + q(dir / "ok.json") + " --out " + q(dir / "ok")) == 0);
  CHECK(run("estimate --csi " + q(dir / "ok" / "csi.json") + " --out " + q(dir / "o")) == 0);
  fs::resize_file(dir / "ok" / "csi.bin", fs::file_size(dir / "ok" / "csi.bin") / 2);
  CHECK(run("estimate --csi " + q(dir / "ok" / "csi.json") + " --out " + q(dir / "o")) == 2);
  CHECK(run("estimate --csi " + q(dir / "none.json") + " --out " + q(dir / "o")) == 3);
}

TEST_CASE("sweep writes table-shaped reports and rejects empty levels") {
  const fs::path dir = fresh("sweep");
  write(dir / "mini.spec", R"({
    "runs_per_level": 1,
    "base_config": {"subcarriers": 16},
    "sweeps": [
      {"noise_kind": "phase", "levels": [1]},
      {"noise_kind": "multiplicative", "levels": [0.5]},
      {"noise_kind": "thermal", "levels": [0.1]}
    ]})");
  REQUIRE(run("sweep --spec " + q(dir / "mini.spec") + " --out " + q(dir / "out")) == 0);
  const auto summary = io::read_json(dir / "out" / "summary.json");
  REQUIRE(summary["tables"].size() == 6);
  CHECK(summary["tables"][0]["noise_kind"] == "phase");
  CHECK(summary["tables"][2]["noise_kind"] == "thermal");
  CHECK(summary["tables"][3]["metric"] == "mean_abs_corr");
  const std::string csv = io::read_text(dir / "out" / "report.csv");
  CHECK(csv.rfind("noise_kind,level,seed,rmse_bpm,pct_within_3bpm,mean_abs_corr,max_abs_corr\n", 0) == 0);
  CHECK(fs::exists(dir / "out" / "manifest.json"));

  write(dir / "empty.spec", R"({"sweeps": [{"noise_kind": "thermal", "levels": []}]})");
  CHECK(run("sweep --spec " + q(dir / "empty.spec") + " --out " + q(dir / "e")) == 2);
  CHECK(run("sweep --spec " + q(dir / "absent.spec") + " --out " + q(dir / "e")) == 3);
}
