#pragma once

#include "wirm/core.hpp"
#include "wirm/fif.hpp"
#include "wirm/pipeline.hpp"
#include "wirm/simulator.hpp"

#include <optional>
#include <string>
#include <vector>

namespace wirm {

double rmse_bpm(const Eigen::Ref<const Eigen::VectorXd>& estimate,
                const Eigen::Ref<const Eigen::VectorXd>& truth);

/// Percentage of samples with |estimate - truth| <= tol.
double pct_within(const Eigen::Ref<const Eigen::VectorXd>& estimate,
                  const Eigen::Ref<const Eigen::VectorXd>& truth, double tol = 3.0);

/// |Pearson correlation| over every length-`window` span starting at
/// n = 0, 1, ...; spans where either signal is constant are std::nullopt.
std::vector<std::optional<double>> sliding_abs_corr(
    const Eigen::Ref<const Eigen::VectorXd>& r,
    const Eigen::Ref<const Eigen::VectorXd>& r_est, Index window);

struct CorrelationSummary {
  double mean = std::numeric_limits<double>::quiet_NaN();
  double max = std::numeric_limits<double>::quiet_NaN();
  Index defined = 0;
};

/// Mean and max over the defined entries.
CorrelationSummary summarize(const std::vector<std::optional<double>>& values);

struct RunMetrics {
  double rmse_bpm = std::numeric_limits<double>::quiet_NaN();
  double pct_within_3bpm = std::numeric_limits<double>::quiet_NaN();
  double mean_abs_corr = std::numeric_limits<double>::quiet_NaN();
  double max_abs_corr = std::numeric_limits<double>::quiet_NaN();
  double presence_fraction = std::numeric_limits<double>::quiet_NaN();
};

/// Rate metrics over the samples carrying a rate estimate; waveform metrics
/// over the stitched waveform span with a waveform_length correlation window.
RunMetrics evaluate(const GroundTruth& truth, const PipelineResult& result,
                    const PipelineParams& params);

/// Same metrics from already-written estimate series.
RunMetrics evaluate_series(const GroundTruth& truth,
                           const std::vector<RateSample>& rate,
                           Index waveform_start,
                           const Eigen::Ref<const Eigen::VectorXd>& waveform,
                           Index corr_window);

enum class NoiseKind { thermal, multiplicative, phase };

const char* to_string(NoiseKind kind);
NoiseKind parse_noise_kind(const std::string& name);

struct SweepSpec {
  NoiseKind noise_kind = NoiseKind::thermal;
  std::vector<double> levels;  // std values; for phase, 0 = off and nonzero = on
  int runs_per_level = 3;
  SimConfig base_config{};

  void validate() const;
};

/// Base config with the swept noise set to `level` and the seed offset by run.
SimConfig sweep_config(const SweepSpec& spec, double level, int run);

struct SweepRow {
  NoiseKind noise_kind = NoiseKind::thermal;
  double level = 0.0;
  std::uint64_t seed = 0;
  RunMetrics metrics;
  std::string error;  // empty on success
};

struct SweepLevelSummary {
  NoiseKind noise_kind = NoiseKind::thermal;
  double level = 0.0;
  int runs = 0;  // successful runs averaged
  RunMetrics mean;
};

struct MetricReport {
  std::vector<SweepRow> rows;  // sorted by (level, seed)
  std::vector<SweepLevelSummary> summary;
};

/// Runs simulate -> estimate -> evaluate for every (level, seed) cell.
/// Results do not depend on `jobs`.
MetricReport run_sweep(const SweepSpec& spec, const PipelineParams& params,
                       const FifConfig& fif, int jobs = 1);

/// Simulate, estimate and evaluate one configuration.
RunMetrics run_single(const SimConfig& config, const PipelineParams& params,
                      const FifConfig& fif);

FifConfig fif_config(const PipelineParams& params);

}  // namespace wirm
