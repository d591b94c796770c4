#pragma once

#include "wirm/fif.hpp"
#include "wirm/rate.hpp"
#include "wirm/waveform.hpp"

#include <vector>

namespace wirm {

struct RateSample {
  Index n = 0;
  double bpm = 0.0;
  bool breath_present = false;
};

struct WaveformSegment {
  Index start = 0;  // first sample covered
  WaveformEstimate estimate;
};

struct PipelineResult {
  Spectrogram spectrogram;             // one column per complete window
  RateTrace rate;                      // final-window value of each sliding AMTC run
  std::vector<RateSample> rate_samples;
  std::vector<WaveformSegment> segments;
  Index waveform_start = 0;            // first sample of the stitched waveform
  Eigen::VectorXd waveform;            // stitched, sign-aligned waveform
};

AmtcOptions amtc_options(const PipelineParams& params);

/// Sliding AMTC: for every window w, carve a trace over the trailing
/// min(W, w + 1) columns and keep its last value.
RateTrace sliding_amtc(const Spectrogram& s, const PipelineParams& params);

/// Stage 1 over all complete windows in csi.
PipelineResult estimate_rate(const CsiTensor& csi, const PipelineParams& params);

/// Stage 1 followed by a waveform estimate each time a window completes with
/// at least waveform_length samples behind it. Throws insufficient_samples when
/// csi is shorter than waveform_length.
PipelineResult run_pipeline(const CsiTensor& csi, const PipelineParams& params,
                            const FifConfig& fif);

/// Appends `next` (covering [next_start, next_start + next.size())) to the
/// stitched waveform, flipping its sign when it anti-correlates with the
/// overlap already present.
void stitch_segment(Eigen::VectorXd& stitched, Index stitched_start,
                    const Eigen::Ref<const Eigen::VectorXd>& next, Index next_start);

}  // namespace wirm
