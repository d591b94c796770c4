#include "wirm/pipeline.hpp"

namespace wirm {

AmtcOptions amtc_options(const PipelineParams& params) {
  AmtcOptions opt;
  opt.smoothing = params.smoothing;
  opt.sigma_bpm = params.transition_sigma_bpm;
  opt.presence_gamma = params.presence_gamma;
  return opt;
}

RateTrace sliding_amtc(const Spectrogram& s, const PipelineParams& params) {
  const AmtcOptions opt = amtc_options(params);
  const Index windows = s.windows();
  RateTrace out;
  out.bins.resize(std::size_t(windows));
  out.q.resize(windows);
  out.presence.resize(std::size_t(windows));
  for (Index w = 0; w < windows; ++w) {
    const Index first = std::max<Index>(0, w - params.window_count + 1);
    Spectrogram trailing;
    trailing.bin_frequencies = s.bin_frequencies;
    trailing.magnitudes = s.magnitudes.middleCols(first, w - first + 1);
    const RateTrace trace = amtc(trailing, opt);
    out.bins[std::size_t(w)] = trace.bins.back();
    out.q[w] = trace.q[trace.windows() - 1];
    out.presence[std::size_t(w)] = trace.presence.back();
  }
  return out;
}

PipelineResult estimate_rate(const CsiTensor& csi, const PipelineParams& params) {
  params.validate();
  csi.validate();
  if (csi.time() < params.window_length) {
    throw Error(Errc::insufficient_samples, "fewer CSI samples than one window");
  }
  const Index windows = Index(
      window_starts(csi.time(), params.window_length, params.window_overlap).size());

  PipelineResult out;
  out.spectrogram = build_spectrogram(csi, params, windows);
  out.rate = sliding_amtc(out.spectrogram, params);

  const Index last_end = (windows - 1) * params.hop() + params.window_length - 1;
  for (Index n = params.window_length - 1; n <= last_end; ++n) {
    const Index w = rate_window_index(n, params);
    out.rate_samples.push_back(
        RateSample{n, rate_at(out.rate, n, params), out.rate.presence[std::size_t(w)]});
  }
  return out;
}

void stitch_segment(Eigen::VectorXd& stitched, Index stitched_start,
                    const Eigen::Ref<const Eigen::VectorXd>& next, Index next_start) {
  if (stitched.size() == 0) {
    stitched = next;
    return;
  }
  const Index stitched_end = stitched_start + stitched.size();
  const Index next_end = next_start + next.size();
  const Index overlap = stitched_end - next_start;
  double sign = 1.0;
  if (overlap > 0) {
    const double dot = stitched.tail(overlap).dot(next.head(overlap));
    if (dot < 0.0) sign = -1.0;
  }
  const Index fresh = next_end - stitched_end;
  if (fresh <= 0) return;
  const Index old_size = stitched.size();
  stitched.conservativeResize(old_size + fresh);
  stitched.tail(fresh) = sign * next.tail(fresh);
}

PipelineResult run_pipeline(const CsiTensor& csi, const PipelineParams& params,
                            const FifConfig& fif) {
  params.validate();
  if (csi.time() < params.waveform_length) {
    throw Error(Errc::insufficient_samples,
                "fewer CSI samples than the waveform window");
  }
  PipelineResult out = estimate_rate(csi, params);

  const Index nt = params.waveform_length;
  for (Index w = 0; w < out.rate.windows(); ++w) {
    const Index end = w * params.hop() + params.window_length;  // exclusive
    if (end < nt) continue;
    const Index start = end - nt;
    WaveformSegment seg;
    seg.start = start;
    seg.estimate = estimate_waveform(csi.slice(start, nt), out.rate.q[w], params, fif);
    if (out.segments.empty()) out.waveform_start = start;
    stitch_segment(out.waveform, out.waveform_start, seg.estimate.r, start);
    out.segments.push_back(std::move(seg));
  }
  return out;
}

}  // namespace wirm
