// Command-line front end: simulate, estimate, sweep, eval.
#include "wirm/eval.hpp"
#include "wirm/io.hpp"
#include "wirm/pipeline.hpp"
#include "wirm/simulator.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <ctime>
#include <iostream>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace wirm;

namespace {

enum Exit { kOk = 0, kBadInput = 2, kIo = 3, kInsufficient = 4 };

int exit_code(Errc code) {
  switch (code) {
    case Errc::io_failure: return kIo;
    case Errc::insufficient_samples: return kInsufficient;
    default: return kBadInput;
  }
}

std::string utc_timestamp() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw Error(Errc::io_failure, "cannot create directory " + dir.string());
  }
}

// Written before any result file so a partial directory still says what made it.
void write_manifest(const fs::path& dir, const std::string& command,
                    const std::vector<std::string>& argv, json config, json seeds,
                    json inputs, json outputs) {
  json m{{"tool", "wirm"},
         {"version", kVersion},
         {"command", command},
         {"argv", argv},
         {"config", std::move(config)},
         {"seeds", std::move(seeds)},
         {"inputs", std::move(inputs)},
         {"outputs", std::move(outputs)},
         {"timestamp", utc_timestamp()}};
  io::write_text(dir / "manifest.json", io::dump_json(m));
}

struct Options {
  std::vector<std::string> argv;

  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;

  std::string csi;
  std::string params;

  std::string spec;
  int jobs = 1;

  std::string rate;
  std::string waveform;
  std::string truth;
};

PipelineParams load_params(const std::string& path) {
  return path.empty() ? PipelineParams{} : io::read_params(path);
}

int cmd_simulate(const Options& o) {
  SimConfig cfg = o.config.empty() ? SimConfig{} : io::read_sim_config(o.config);
  if (o.seed) cfg.seed = *o.seed;
  cfg.validate();
  const fs::path out(o.out);
  ensure_dir(out);
  write_manifest(out, "simulate", o.argv, json(cfg), json::array({cfg.seed}),
                 json{{"config", o.config}},
                 json::array({"csi.json", "csi.bin", "truth.csv", "config.json"}));

  const Simulation sim = simulate(cfg);
  io::write_csi(out / "csi.json", sim.csi, &cfg);
  io::write_text(out / "truth.csv", io::truth_csv(sim.truth, cfg.fs));
  io::write_text(out / "config.json", io::dump_json(json(cfg)));
  return kOk;
}

int cmd_estimate(const Options& o) {
  io::CsiFileInfo info;
  const CsiTensor csi = io::read_csi(o.csi, &info);
  PipelineParams params = load_params(o.params);
  // The tensor's own sample rate wins over the params file.
  params.fs = 1.0 / csi.sample_period();
  params.validate();

  const fs::path out(o.out);
  ensure_dir(out);
  write_manifest(out, "estimate", o.argv, json(params),
                 info.seed ? json::array({*info.seed}) : json::array(),
                 json{{"csi", o.csi}, {"params", o.params}},
                 json::array({"rate.csv", "waveform.csv", "params.json"}));

  const PipelineResult result = run_pipeline(csi, params, fif_config(params));
  io::write_text(out / "rate.csv", io::rate_csv(result.rate_samples, params.fs));
  io::write_text(out / "waveform.csv",
                 io::waveform_csv(result.waveform_start, result.waveform, params.fs));
  io::write_text(out / "params.json", io::dump_json(json(params)));
  return kOk;
}

int cmd_sweep(const Options& o) {
  const io::SweepFile spec = io::read_sweep_file(o.spec);
  const fs::path out(o.out);
  ensure_dir(out);

  json seeds = json::array();
  for (int r = 0; r < spec.specs.front().runs_per_level; ++r) {
    seeds.push_back(spec.specs.front().base_config.seed + std::uint64_t(r));
  }
  write_manifest(out, "sweep", o.argv, io::read_json(o.spec), seeds,
                 json{{"spec", o.spec}}, json::array({"report.csv", "summary.json"}));

  std::vector<MetricReport> reports;
  const FifConfig fif = fif_config(spec.params);
  for (const SweepSpec& s : spec.specs) {
    reports.push_back(run_sweep(s, spec.params, fif, o.jobs));
  }
  io::write_text(out / "report.csv", io::report_csv(reports));
  io::write_text(out / "summary.json", io::dump_json(io::tables_json(reports)));
  return kOk;
}

int cmd_eval(const Options& o) {
  const PipelineParams params = load_params(o.params);
  const GroundTruth truth = io::parse_truth_csv(io::read_text(o.truth));
  const auto rate = io::parse_rate_csv(io::read_text(o.rate));
  const auto [start, waveform] = io::parse_waveform_csv(io::read_text(o.waveform));

  const fs::path out(o.out);
  ensure_dir(out);
  write_manifest(out, "eval", o.argv, json(params), json::array(),
                 json{{"rate", o.rate}, {"waveform", o.waveform}, {"truth", o.truth},
                      {"params", o.params}},
                 json::array({"metrics.json"}));

  const RunMetrics m =
      evaluate_series(truth, rate, start, waveform, params.waveform_length);
  io::write_text(out / "metrics.json", io::dump_json(json(m)));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  o.argv.assign(argv, argv + argc);

  CLI::App app{"Respiration monitoring from Wi-Fi CSI: simulation, estimation, evaluation"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  auto* sim = app.add_subcommand("simulate", "Simulate CSI and ground truth");
  sim->add_option("--config", o.config, "SimConfig JSON (defaults when omitted)");
  sim->add_option("--out", o.out, "Output directory")->required();
  sim->add_option("--seed", o.seed, "Override the config seed");

  auto* est = app.add_subcommand("estimate", "Estimate rate and waveform from CSI");
  est->add_option("--csi", o.csi, "CSI metadata file (csi.json)")->required();
  est->add_option("--params", o.params, "PipelineParams JSON (defaults when omitted)");
  est->add_option("--out", o.out, "Output directory")->required();

  auto* sweep = app.add_subcommand("sweep", "Run noise sweeps and write metric tables");
  sweep->add_option("--spec", o.spec, "Sweep spec JSON")->required();
  sweep->add_option("--out", o.out, "Output directory")->required();
  sweep->add_option("--jobs", o.jobs, "Parallel runs")->check(CLI::PositiveNumber);

  auto* ev = app.add_subcommand("eval", "Metrics from existing estimate and truth files");
  ev->add_option("--rate", o.rate, "Rate CSV")->required();
  ev->add_option("--waveform", o.waveform, "Waveform CSV")->required();
  ev->add_option("--truth", o.truth, "Ground-truth CSV")->required();
  ev->add_option("--params", o.params, "PipelineParams JSON (defaults when omitted)");
  ev->add_option("--out", o.out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kBadInput;
  }

  try {
    if (*sim) return cmd_simulate(o);
    if (*est) return cmd_estimate(o);
    if (*sweep) return cmd_sweep(o);
    if (*ev) return cmd_eval(o);
  } catch (const Error& e) {
    std::cerr << "wirm: " << to_string(e.code()) << ": " << e.what() << "\n";
    return exit_code(e.code());
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "wirm: invalid_config: " << e.what() << "\n";
    return kBadInput;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "wirm: io_failure: " << e.what() << "\n";
    return kIo;
  }
  return kBadInput;
}
