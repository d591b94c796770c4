#include "wirm/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

namespace wirm {

namespace {

void check_pair(Index a, Index b) {
  if (a != b) throw Error(Errc::length_mismatch, "sequence lengths differ");
  if (a == 0) throw Error(Errc::empty_input, "sequences are empty");
}

}  // namespace

double rmse_bpm(const Eigen::Ref<const Eigen::VectorXd>& estimate,
                const Eigen::Ref<const Eigen::VectorXd>& truth) {
  check_pair(estimate.size(), truth.size());
  return std::sqrt((estimate - truth).squaredNorm() / double(estimate.size()));
}

double pct_within(const Eigen::Ref<const Eigen::VectorXd>& estimate,
                  const Eigen::Ref<const Eigen::VectorXd>& truth, double tol) {
  check_pair(estimate.size(), truth.size());
  const Index hits = ((estimate - truth).cwiseAbs().array() <= tol).count();
  return 100.0 * double(hits) / double(estimate.size());
}

std::vector<std::optional<double>> sliding_abs_corr(
    const Eigen::Ref<const Eigen::VectorXd>& r,
    const Eigen::Ref<const Eigen::VectorXd>& r_est, Index window) {
  if (window < 2 || window > r.size() || window > r_est.size()) {
    throw Error(Errc::window_too_large,
                "correlation window exceeds the sequence length");
  }
  const Index count = std::min(r.size(), r_est.size()) - window + 1;
  std::vector<std::optional<double>> out(static_cast<std::size_t>(count));
  for (Index n = 0; n < count; ++n) {
    const auto a = r.segment(n, window);
    const auto b = r_est.segment(n, window);
    const Eigen::VectorXd da = a.array() - a.mean();
    const Eigen::VectorXd db = b.array() - b.mean();
    const double sa = da.norm();
    const double sb = db.norm();
    if (detail::is_effectively_constant(a, sa / std::sqrt(double(window))) ||
        detail::is_effectively_constant(b, sb / std::sqrt(double(window)))) {
      continue;
    }
    out[std::size_t(n)] = std::min(1.0, std::abs(da.dot(db)) / (sa * sb));
  }
  return out;
}

CorrelationSummary summarize(const std::vector<std::optional<double>>& values) {
  CorrelationSummary s;
  double sum = 0.0;
  double best = 0.0;
  for (const auto& v : values) {
    if (!v) continue;
    sum += *v;
    best = std::max(best, *v);
    ++s.defined;
  }
  if (s.defined > 0) {
    s.mean = sum / double(s.defined);
    s.max = best;
  }
  return s;
}

RunMetrics evaluate_series(const GroundTruth& truth,
                           const std::vector<RateSample>& rate,
                           Index waveform_start,
                           const Eigen::Ref<const Eigen::VectorXd>& waveform,
                           Index corr_window) {
  RunMetrics m;
  if (!rate.empty()) {
    Eigen::VectorXd est(Index(rate.size()));
    Eigen::VectorXd ref(Index(rate.size()));
    Index present = 0;
    for (std::size_t i = 0; i < rate.size(); ++i) {
      const Index n = rate[i].n;
      if (n < 0 || n >= truth.bpm.size()) {
        throw Error(Errc::length_mismatch, "rate estimate beyond ground truth");
      }
      est[Index(i)] = rate[i].bpm;
      ref[Index(i)] = truth.bpm[n];
      present += rate[i].breath_present ? 1 : 0;
    }
    m.rmse_bpm = rmse_bpm(est, ref);
    m.pct_within_3bpm = pct_within(est, ref, 3.0);
    m.presence_fraction = double(present) / double(rate.size());
  }
  if (waveform.size() >= corr_window && corr_window >= 2) {
    if (waveform_start < 0 || waveform_start + waveform.size() > truth.r.size()) {
      throw Error(Errc::length_mismatch, "waveform estimate beyond ground truth");
    }
    const auto corr = sliding_abs_corr(truth.r.segment(waveform_start, waveform.size()),
                                       waveform, corr_window);
    const CorrelationSummary s = summarize(corr);
    m.mean_abs_corr = s.mean;
    m.max_abs_corr = s.max;
  }
  return m;
}

RunMetrics evaluate(const GroundTruth& truth, const PipelineResult& result,
                    const PipelineParams& params) {
  return evaluate_series(truth, result.rate_samples, result.waveform_start,
                         result.waveform, params.waveform_length);
}

const char* to_string(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::thermal: return "thermal";
    case NoiseKind::multiplicative: return "multiplicative";
    case NoiseKind::phase: return "phase";
  }
  return "unknown";
}

NoiseKind parse_noise_kind(const std::string& name) {
  if (name == "thermal") return NoiseKind::thermal;
  if (name == "multiplicative") return NoiseKind::multiplicative;
  if (name == "phase") return NoiseKind::phase;
  throw Error(Errc::invalid_config, "unknown noise kind '" + name + "'");
}

void SweepSpec::validate() const {
  if (levels.empty()) throw Error(Errc::invalid_config, "sweep levels are empty");
  if (runs_per_level < 1) {
    throw Error(Errc::invalid_config, "runs_per_level must be at least 1");
  }
  for (double level : levels) {
    if (!(level >= 0.0) || !std::isfinite(level)) {
      throw Error(Errc::invalid_config, "sweep levels must be finite and >= 0");
    }
  }
  base_config.validate();
}

SimConfig sweep_config(const SweepSpec& spec, double level, int run) {
  SimConfig cfg = spec.base_config;
  cfg.seed = spec.base_config.seed + std::uint64_t(run);
  switch (spec.noise_kind) {
    case NoiseKind::thermal: cfg.noise.thermal_std = level; break;
    case NoiseKind::multiplicative: cfg.noise.mult_std = level; break;
    case NoiseKind::phase: cfg.noise.phase_noise = level != 0.0; break;
  }
  return cfg;
}

FifConfig fif_config(const PipelineParams& params) {
  FifConfig fif;
  fif.chi = params.fif_chi;
  return fif;
}

RunMetrics run_single(const SimConfig& config, const PipelineParams& params,
                      const FifConfig& fif) {
  const Simulation sim = simulate(config);
  const PipelineResult result = run_pipeline(sim.csi, params, fif);
  return evaluate(sim.truth, result, params);
}

MetricReport run_sweep(const SweepSpec& spec, const PipelineParams& params,
                       const FifConfig& fif, int jobs) {
  spec.validate();
  params.validate();

  std::vector<double> levels = spec.levels;
  std::stable_sort(levels.begin(), levels.end());

  MetricReport report;
  for (double level : levels) {
    for (int run = 0; run < spec.runs_per_level; ++run) {
      SweepRow row;
      row.noise_kind = spec.noise_kind;
      row.level = level;
      row.seed = sweep_config(spec, level, run).seed;
      report.rows.push_back(row);
    }
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < report.rows.size(); i = next++) {
      SweepRow& row = report.rows[i];
      const int run = int(i % std::size_t(spec.runs_per_level));
      try {
        row.metrics = run_single(sweep_config(spec, row.level, run), params, fif);
      } catch (const Error& e) {
        row.error = std::string(to_string(e.code())) + ": " + e.what();
      }
    }
  };
  const int threads = std::max(1, jobs);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  for (std::size_t i = 0; i < report.rows.size(); i += std::size_t(spec.runs_per_level)) {
    SweepLevelSummary sum;
    sum.noise_kind = spec.noise_kind;
    sum.level = report.rows[i].level;
    RunMetrics acc{0.0, 0.0, 0.0, 0.0, 0.0};
    Index corr_runs = 0;
    for (int r = 0; r < spec.runs_per_level; ++r) {
      const SweepRow& row = report.rows[i + std::size_t(r)];
      if (!row.error.empty()) continue;
      ++sum.runs;
      acc.rmse_bpm += row.metrics.rmse_bpm;
      acc.pct_within_3bpm += row.metrics.pct_within_3bpm;
      acc.presence_fraction += row.metrics.presence_fraction;
      if (std::isfinite(row.metrics.mean_abs_corr)) {
        acc.mean_abs_corr += row.metrics.mean_abs_corr;
        acc.max_abs_corr += row.metrics.max_abs_corr;
        ++corr_runs;
      }
    }
    if (sum.runs > 0) {
      sum.mean.rmse_bpm = acc.rmse_bpm / sum.runs;
      sum.mean.pct_within_3bpm = acc.pct_within_3bpm / sum.runs;
      sum.mean.presence_fraction = acc.presence_fraction / sum.runs;
    }
    if (corr_runs > 0) {
      sum.mean.mean_abs_corr = acc.mean_abs_corr / double(corr_runs);
      sum.mean.max_abs_corr = acc.max_abs_corr / double(corr_runs);
    }
    report.summary.push_back(sum);
  }
  return report;
}

}  // namespace wirm
