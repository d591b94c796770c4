#pragma once

#include "wirm/core.hpp"
#include "wirm/fif.hpp"
#include "wirm/rate.hpp"

#include <vector>

namespace wirm {

/// Z-scored magnitude and centred phase of every conjugate-multiplied
/// subcarrier: per link, K magnitude columns then K phase columns.
using ZMatrix = Eigen::MatrixXd;

struct SubcarrierSpectra {
  Eigen::VectorXcd values;  // one DTFT sample per Z column
  Index primary = 0;        // first column attaining max |F|
};

struct WaveformEstimate {
  Eigen::VectorXd r;                // selected IMF, waveform_length samples
  Index imf_index = 0;              // zero-based index into the IMF set
  double rate_bpm = 0.0;            // rate that guided the selection
  Eigen::VectorXd imf_peaks_hz;     // dominant in-band frequency per IMF
};

/// Z matrix over the trailing `waveform_length` samples of csi.
ZMatrix build_z_matrix(const CsiTensor& csi, Index waveform_length);

/// F_c = sum over the trailing N rows of Z(n, c) exp(-j 2 pi rate n Ts), with n
/// counted from the first row of Z.
SubcarrierSpectra dtft_at_rate(const Eigen::Ref<const ZMatrix>& z, double rate_hz,
                               Index window_length, double sample_period);

/// Lowest index attaining the maximum magnitude.
Index select_primary(const Eigen::Ref<const Eigen::VectorXcd>& spectra);

/// +1 when the wrapped phase gap to the primary is at most pi/2, else -1.
double alignment_sign(double primary_phase, double phase);

/// Sign-aligned sum of Z columns weighted by |F_c| / |F_primary|.
Eigen::VectorXd combine_subcarriers(const Eigen::Ref<const ZMatrix>& z,
                                    const SubcarrierSpectra& spectra);

/// Dominant frequency of the trailing N samples of x on the zoom grid, first
/// maximum on ties.
double dominant_frequency(const Eigen::Ref<const Eigen::VectorXd>& x,
                          const PipelineParams& params);

/// Index of the peak nearest the rate; ties to the lowest index.
Index nearest_peak(const Eigen::Ref<const Eigen::VectorXd>& peaks_hz, double rate_hz);

/// Waveform over the trailing params.waveform_length samples of csi, guided by
/// the Stage-1 rate.
WaveformEstimate estimate_waveform(const CsiTensor& csi, double rate_hz,
                                   const PipelineParams& params,
                                   const FifConfig& fif);

}  // namespace wirm
