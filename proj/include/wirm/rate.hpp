#pragma once

#include "wirm/core.hpp"

#include <vector>

namespace wirm {

/// Each non-reference link multiplied by the conjugate of the link from the
/// same transmitter to receiver 0. Columns are link-major, subcarrier fastest.
struct ConjugateLinkSet {
  Eigen::MatrixXcd values;  // time x (links * subcarriers)
  Index links = 0;
  Index subcarriers = 0;

  Index time() const { return values.rows(); }
  Index column(Index link, Index f) const { return link * subcarriers + f; }

  Eigen::VectorXd magnitude(Index link, Index f) const;
  /// arg(h(t) * conj(mean_t h)): phase about the window's mean phasor, so a
  /// trajectory that straddles +-pi needs no unwrapping.
  Eigen::VectorXd phase(Index link, Index f) const;
};

ConjugateLinkSet conjugate_multiply(const CsiTensor& window);

/// Normalised autocorrelation at lags 1..N-1 (lag 0 dropped). Mean-removed and
/// divided by the lag-0 energy; constant input yields zeros.
template <typename Derived>
Eigen::VectorXd acf(const Eigen::MatrixBase<Derived>& x) {
  const Index n = x.size();
  if (n < 2) return Eigen::VectorXd::Zero(std::max<Index>(n - 1, 0));
  const Eigen::VectorXd c = x.array() - x.mean();
  const double energy = c.squaredNorm();
  Eigen::VectorXd out(n - 1);
  if (detail::is_effectively_constant(x, std::sqrt(energy / double(n)))) {
    out.setZero();
    return out;
  }
  for (Index lag = 1; lag < n; ++lag) {
    out[lag - 1] = c.head(n - lag).dot(c.tail(n - lag)) / energy;
  }
  return out;
}

/// (N-1) x 2*K*L_cm: per link, K magnitude ACFs then K phase ACFs.
Eigen::MatrixXd build_acf_matrix(const ConjugateLinkSet& cm);

/// Fraction of DFT energy whose bin frequency lies inside the band.
double bnr(const Eigen::Ref<const Eigen::VectorXd>& x, const BandLimits& band,
           double fs);

/// BNR of every column at once.
Eigen::VectorXd bnr_columns(const Eigen::Ref<const Eigen::MatrixXd>& m,
                            const BandLimits& band, double fs);

/// Sum of the columns, each weighted by its BNR.
Eigen::VectorXd bnr_combine(const Eigen::Ref<const Eigen::MatrixXd>& m,
                            const BandLimits& band, double fs);

/// `bins` evenly spaced frequencies from f_min to f_max inclusive.
Eigen::VectorXd zoom_frequencies(const BandLimits& band, Index bins);

/// |sum_n x(n) exp(-j 2 pi f_i n / fs)| on the zoom_frequencies grid, computed
/// with a chirp-z transform.
Eigen::VectorXd zoom_spectrum(const Eigen::Ref<const Eigen::VectorXd>& x,
                              const BandLimits& band, Index bins, double fs);

struct Spectrogram {
  Eigen::MatrixXd magnitudes;       // bins x windows
  Eigen::VectorXd bin_frequencies;  // Hz

  Index bins() const { return magnitudes.rows(); }
  Index windows() const { return magnitudes.cols(); }
};

/// One spectrogram column from an N-sample window.
Eigen::VectorXd spectrogram_column(const CsiTensor& window,
                                   const PipelineParams& params);

/// Columns for the first `windows` windows of `csi`.
Spectrogram build_spectrogram(const CsiTensor& csi, const PipelineParams& params,
                              Index windows);

/// Columns for the first W = params.window_count windows.
Spectrogram build_spectrogram(const CsiTensor& csi, const PipelineParams& params);

struct RateTrace {
  std::vector<Index> bins;     // selected bin per window
  Eigen::VectorXd q;           // Hz per window
  std::vector<bool> presence;  // breath detected per window

  Index windows() const { return q.size(); }
};

/// Gaussian log density of a jump of `delta_bins` bins.
double transition_log_prob(double delta_bins, double sigma_bins);

/// Converts a per-window-step std in BPM into zoom-bin units.
double sigma_in_bins(const Eigen::VectorXd& bin_frequencies, double sigma_bpm);

/// Scales every column to unit sum; all-zero columns stay zero.
Eigen::MatrixXd normalize_columns(const Eigen::Ref<const Eigen::MatrixXd>& s);

struct AmtcOptions {
  double smoothing = 0.5;         // weight on the log prior
  double sigma_bpm = 4.552;       // transition std per window step
  bool normalize_columns = true;  // unit-sum columns before the energy term
  double presence_gamma = 2.0;
};

/// Exact maximiser of sum_w S[q_w, w] + smoothing * log P(q) by dynamic
/// programming, with a uniform prior on the first bin and Gaussian jumps.
/// Ties go to the lower bin index. Presence flags are filled by
/// breath_presence.
RateTrace amtc(const Spectrogram& s, const AmtcOptions& options);

/// Peak-to-median test of the traced bin in each column.
std::vector<bool> breath_presence(const Spectrogram& s,
                                  const std::vector<Index>& bins, double gamma);

/// Window index used for sample n: max(0, ceil((n - N + 1) / (N - Y))).
Index rate_window_index(Index n, const PipelineParams& params);

/// Rate in BPM at sample n.
double rate_at(const RateTrace& trace, Index n, const PipelineParams& params);

}  // namespace wirm
