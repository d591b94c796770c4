#include "wirm/waveform.hpp"

#include <cmath>
#include <limits>

namespace wirm {

ZMatrix build_z_matrix(const CsiTensor& csi, Index waveform_length) {
  if (waveform_length < 2 || csi.time() < waveform_length) {
    throw Error(Errc::insufficient_samples,
                "not enough CSI samples for the waveform window");
  }
  const ConjugateLinkSet cm =
      conjugate_multiply(csi.slice(csi.time() - waveform_length, waveform_length));
  const Index k = cm.subcarriers;
  ZMatrix z(waveform_length, 2 * k * cm.links);
  for (Index i = 0; i < cm.links; ++i) {
    for (Index f = 0; f < k; ++f) {
      z.col(2 * k * i + f) = z_score(cm.magnitude(i, f));
      z.col(2 * k * i + k + f) = z_score(cm.phase(i, f));
    }
  }
  return z;
}

SubcarrierSpectra dtft_at_rate(const Eigen::Ref<const ZMatrix>& z, double rate_hz,
                               Index window_length, double sample_period) {
  const Index rows = z.rows();
  const Index n = std::min(window_length, rows);
  const Index first = rows - n;
  Eigen::VectorXcd phasor(n);
  for (Index i = 0; i < n; ++i) {
    phasor[i] = std::polar(1.0, -kTwoPi * rate_hz * double(first + i) * sample_period);
  }
  SubcarrierSpectra out;
  out.values = z.bottomRows(n).transpose().cast<Complex>() * phasor;
  out.primary = out.values.size() > 0 ? select_primary(out.values) : 0;
  return out;
}

Index select_primary(const Eigen::Ref<const Eigen::VectorXcd>& spectra) {
  Index best = 0;
  double best_mag = -1.0;
  for (Index c = 0; c < spectra.size(); ++c) {
    const double mag = std::abs(spectra[c]);
    if (mag > best_mag) {
      best_mag = mag;
      best = c;
    }
  }
  return best;
}

double alignment_sign(double primary_phase, double phase) {
  return std::abs(wrap_to_pi(primary_phase - phase)) <= kPi / 2.0 ? 1.0 : -1.0;
}

Eigen::VectorXd combine_subcarriers(const Eigen::Ref<const ZMatrix>& z,
                                    const SubcarrierSpectra& spectra) {
  const Complex primary = spectra.values[spectra.primary];
  const double primary_mag = std::abs(primary);
  if (!(primary_mag > 0.0)) {
    throw Error(Errc::degenerate_primary,
                "primary subcarrier has no energy at the breathing rate");
  }
  const double primary_phase = std::arg(primary);
  Eigen::VectorXd weights(spectra.values.size());
  for (Index c = 0; c < weights.size(); ++c) {
    const Complex f = spectra.values[c];
    weights[c] = alignment_sign(primary_phase, std::arg(f)) * std::abs(f) / primary_mag;
  }
  return z * weights;
}

double dominant_frequency(const Eigen::Ref<const Eigen::VectorXd>& x,
                          const PipelineParams& params) {
  const Index n = std::min(params.window_length, x.size());
  const Index bins = params.window_length - 1;
  const Eigen::VectorXd spectrum =
      zoom_spectrum(x.tail(n), params.band, bins, params.fs);
  Index best = 0;
  for (Index i = 1; i < spectrum.size(); ++i) {
    if (spectrum[i] > spectrum[best]) best = i;
  }
  return zoom_frequencies(params.band, bins)[best];
}

Index nearest_peak(const Eigen::Ref<const Eigen::VectorXd>& peaks_hz, double rate_hz) {
  if (peaks_hz.size() == 0) {
    throw Error(Errc::no_imf_in_band, "no IMF to select from");
  }
  Index best = 0;
  double best_gap = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < peaks_hz.size(); ++i) {
    const double gap = std::abs(peaks_hz[i] - rate_hz);
    if (gap < best_gap) {
      best_gap = gap;
      best = i;
    }
  }
  return best;
}

WaveformEstimate estimate_waveform(const CsiTensor& csi, double rate_hz,
                                   const PipelineParams& params,
                                   const FifConfig& fif) {
  const ZMatrix z = build_z_matrix(csi, params.waveform_length);
  const SubcarrierSpectra spectra =
      dtft_at_rate(z, rate_hz, params.window_length, params.sample_period());
  const Eigen::VectorXd combined = combine_subcarriers(z, spectra);

  const ImfSet imfs = fif_decompose(combined, fif);
  WaveformEstimate out;
  out.rate_bpm = 60.0 * rate_hz;
  out.imf_peaks_hz.resize(imfs.count());
  for (Index i = 0; i < imfs.count(); ++i) {
    out.imf_peaks_hz[i] = dominant_frequency(imfs.imfs[std::size_t(i)], params);
  }
  out.imf_index = nearest_peak(out.imf_peaks_hz, rate_hz);
  out.r = imfs.imfs[std::size_t(out.imf_index)];
  return out;
}

}  // namespace wirm
