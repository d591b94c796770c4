#include "wirm/rate.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <limits>

namespace wirm {

namespace {

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

// DFT bins of a length-n sequence whose |frequency| falls inside the band.
std::vector<Index> in_band_bins(Index n, const BandLimits& band, double fs) {
  std::vector<Index> bins;
  for (Index k = 0; k < n; ++k) {
    const Index signed_k = (2 * k <= n) ? k : k - n;
    const double f = std::abs(double(signed_k) * fs / double(n));
    if (f >= band.f_min && f <= band.f_max) bins.push_back(k);
  }
  return bins;
}

}  // namespace

Eigen::VectorXd ConjugateLinkSet::magnitude(Index link, Index f) const {
  return values.col(column(link, f)).cwiseAbs();
}

Eigen::VectorXd ConjugateLinkSet::phase(Index link, Index f) const {
  const auto col = values.col(column(link, f));
  const Complex centre = std::conj(col.mean());
  Eigen::VectorXd out(col.size());
  for (Index t = 0; t < col.size(); ++t) out[t] = std::arg(col[t] * centre);
  return out;
}

ConjugateLinkSet conjugate_multiply(const CsiTensor& window) {
  const int tx = window.tx_antennas();
  const int rx = window.rx_antennas();
  if (rx < 2) {
    throw Error(Errc::too_few_receivers,
                "conjugate multiplication needs at least two receive antennas");
  }
  const Index k = window.subcarriers();
  ConjugateLinkSet cm;
  cm.links = Index{tx} * (rx - 1);
  cm.subcarriers = k;
  cm.values.resize(window.time(), cm.links * k);
  const auto& s = window.samples();
  for (int a = 0; a < tx; ++a) {
    const Index ref = window.link_index(a, 0) * k;
    for (int b = 1; b < rx; ++b) {
      const Index src = window.link_index(a, b) * k;
      const Index dst = (Index{a} * (rx - 1) + (b - 1)) * k;
      cm.values.middleCols(dst, k) =
          s.middleCols(src, k).array() * s.middleCols(ref, k).array().conjugate();
    }
  }
  return cm;
}

Eigen::MatrixXd build_acf_matrix(const ConjugateLinkSet& cm) {
  const Index n = cm.time();
  const Index k = cm.subcarriers;
  Eigen::MatrixXd out(std::max<Index>(n - 1, 0), 2 * k * cm.links);
  for (Index i = 0; i < cm.links; ++i) {
    for (Index f = 0; f < k; ++f) {
      out.col(2 * k * i + f) = acf(cm.magnitude(i, f));
      out.col(2 * k * i + k + f) = acf(cm.phase(i, f));
    }
  }
  return out;
}

Eigen::VectorXd bnr_columns(const Eigen::Ref<const Eigen::MatrixXd>& m,
                            const BandLimits& band, double fs) {
  const Index n = m.rows();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(m.cols());
  if (n < 2 || m.cols() == 0) return out;

  // Parseval gives the full-spectrum energy; only in-band bins need a DFT.
  const std::vector<Index> bins = in_band_bins(n, band, fs);
  Eigen::MatrixXd basis_re(Index(bins.size()), n);
  Eigen::MatrixXd basis_im(Index(bins.size()), n);
  for (std::size_t b = 0; b < bins.size(); ++b) {
    for (Index t = 0; t < n; ++t) {
      // Reduce k*t modulo n before scaling so the angle stays small.
      const double angle = -kTwoPi * double((bins[b] * t) % n) / double(n);
      basis_re(Index(b), t) = std::cos(angle);
      basis_im(Index(b), t) = std::sin(angle);
    }
  }
  // The band excludes DC, so the in-band bins see only the mean-removed
  // signal; removing it first keeps constant columns at exactly zero.
  Eigen::MatrixXd centred = m.rowwise() - m.colwise().mean();
  for (Index c = 0; c < m.cols(); ++c) {
    const double spread = centred.col(c).norm() / std::sqrt(double(n));
    if (detail::is_effectively_constant(m.col(c), spread)) centred.col(c).setZero();
  }
  const Eigen::RowVectorXd in_band =
      ((basis_re * centred).array().square() + (basis_im * centred).array().square())
          .colwise()
          .sum();
  const Eigen::RowVectorXd total = double(n) * m.colwise().squaredNorm();
  for (Index c = 0; c < m.cols(); ++c) {
    out[c] = total[c] > 0.0 ? std::clamp(in_band[c] / total[c], 0.0, 1.0) : 0.0;
  }
  return out;
}

double bnr(const Eigen::Ref<const Eigen::VectorXd>& x, const BandLimits& band,
           double fs) {
  return bnr_columns(x, band, fs)[0];
}

Eigen::VectorXd bnr_combine(const Eigen::Ref<const Eigen::MatrixXd>& m,
                            const BandLimits& band, double fs) {
  return m * bnr_columns(m, band, fs);
}

Eigen::VectorXd zoom_frequencies(const BandLimits& band, Index bins) {
  if (bins <= 1) return Eigen::VectorXd::Constant(std::max<Index>(bins, 0), band.f_min);
  return Eigen::VectorXd::LinSpaced(bins, band.f_min, band.f_max);
}

Eigen::VectorXd zoom_spectrum(const Eigen::Ref<const Eigen::VectorXd>& x,
                              const BandLimits& band, Index bins, double fs) {
  const Index n = x.size();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(std::max<Index>(bins, 0));
  if (n == 0 || bins <= 0) return out;

  // Chirp-z (Bluestein): X_k = sum_n x_n A^-n W^nk with
  // A = exp(j 2 pi f_min / fs) and W = exp(-j 2 pi df / fs).
  const double df = bins > 1 ? (band.f_max - band.f_min) / double(bins - 1) : 0.0;
  const double start = kTwoPi * band.f_min / fs;
  const double step = kTwoPi * df / fs;
  auto chirp = [&](Index m) {  // W^(m^2 / 2)
    const double mm = double(m) * double(m);
    return std::polar(1.0, -0.5 * step * mm);
  };

  const std::size_t len = next_pow2(std::size_t(n + bins - 1));
  std::vector<Complex> a(len, Complex(0.0, 0.0));
  std::vector<Complex> b(len, Complex(0.0, 0.0));
  for (Index i = 0; i < n; ++i) {
    a[std::size_t(i)] = x[i] * std::polar(1.0, -start * double(i)) * chirp(i);
  }
  for (Index m = 0; m < bins; ++m) b[std::size_t(m)] = std::conj(chirp(m));
  for (Index m = 1; m < n; ++m) b[len - std::size_t(m)] = std::conj(chirp(m));

  Eigen::FFT<double> fft;
  std::vector<Complex> fa, fb, conv;
  fft.fwd(fa, a);
  fft.fwd(fb, b);
  for (std::size_t i = 0; i < len; ++i) fa[i] *= fb[i];
  fft.inv(conv, fa);
  for (Index k = 0; k < bins; ++k) out[k] = std::abs(conv[std::size_t(k)] * chirp(k));
  return out;
}

Eigen::VectorXd spectrogram_column(const CsiTensor& window,
                                   const PipelineParams& params) {
  const Eigen::MatrixXd acfs = build_acf_matrix(conjugate_multiply(window));
  const Eigen::VectorXd combined = bnr_combine(acfs, params.band, params.fs);
  return zoom_spectrum(combined, params.band, params.window_length - 1, params.fs);
}

Spectrogram build_spectrogram(const CsiTensor& csi, const PipelineParams& params,
                              Index windows) {
  params.validate();
  const Index n = params.window_length;
  const Index needed = (windows - 1) * params.hop() + n;
  if (windows < 1 || csi.time() < needed) {
    throw Error(Errc::insufficient_samples,
                "not enough CSI samples for the requested windows");
  }
  Spectrogram s;
  s.bin_frequencies = zoom_frequencies(params.band, n - 1);
  s.magnitudes.resize(n - 1, windows);
  for (Index w = 0; w < windows; ++w) {
    s.magnitudes.col(w) = spectrogram_column(csi.slice(w * params.hop(), n), params);
  }
  return s;
}

Spectrogram build_spectrogram(const CsiTensor& csi, const PipelineParams& params) {
  return build_spectrogram(csi, params, params.window_count);
}

double transition_log_prob(double delta_bins, double sigma_bins) {
  const double log_norm = -std::log(sigma_bins * std::sqrt(kTwoPi));
  return log_norm - delta_bins * delta_bins / (2.0 * sigma_bins * sigma_bins);
}

double sigma_in_bins(const Eigen::VectorXd& bin_frequencies, double sigma_bpm) {
  if (bin_frequencies.size() < 2) return sigma_bpm;
  const double spacing_bpm =
      60.0 * (bin_frequencies[bin_frequencies.size() - 1] - bin_frequencies[0]) /
      double(bin_frequencies.size() - 1);
  return spacing_bpm > 0.0 ? sigma_bpm / spacing_bpm : sigma_bpm;
}

Eigen::MatrixXd normalize_columns(const Eigen::Ref<const Eigen::MatrixXd>& s) {
  Eigen::MatrixXd out = s;
  for (Index w = 0; w < out.cols(); ++w) {
    const double sum = out.col(w).sum();
    if (sum > 0.0) {
      out.col(w) /= sum;
    } else {
      out.col(w).setZero();
    }
  }
  return out;
}

RateTrace amtc(const Spectrogram& s, const AmtcOptions& options) {
  const Index bins = s.bins();
  const Index windows = s.windows();
  RateTrace trace;
  if (bins == 0 || windows == 0) return trace;

  const Eigen::MatrixXd energy =
      options.normalize_columns ? normalize_columns(s.magnitudes) : s.magnitudes;
  const double lambda = options.smoothing;
  const double sigma = sigma_in_bins(s.bin_frequencies, options.sigma_bpm);
  const double log_prior = -std::log(double(bins));

  Eigen::VectorXd jump(bins);  // lambda * log P(jump of d bins)
  for (Index d = 0; d < bins; ++d) {
    jump[d] = lambda * transition_log_prob(double(d), sigma);
  }

  Eigen::VectorXd score(bins);
  for (Index j = 0; j < bins; ++j) score[j] = lambda * log_prior + energy(j, 0);

  Eigen::Matrix<Index, Eigen::Dynamic, Eigen::Dynamic> back(bins, windows);
  back.col(0).setConstant(-1);
  Eigen::VectorXd next(bins);
  for (Index w = 1; w < windows; ++w) {
    for (Index j = 0; j < bins; ++j) {
      Index best_i = 0;
      double best = -std::numeric_limits<double>::infinity();
      for (Index i = 0; i < bins; ++i) {
        const double cand = score[i] + jump[std::abs(i - j)];
        if (cand > best) {
          best = cand;
          best_i = i;
        }
      }
      next[j] = best + energy(j, w);
      back(j, w) = best_i;
    }
    score.swap(next);
  }

  Index end = 0;
  for (Index j = 1; j < bins; ++j) {
    if (score[j] > score[end]) end = j;
  }
  trace.bins.assign(std::size_t(windows), 0);
  trace.bins[std::size_t(windows - 1)] = end;
  for (Index w = windows - 1; w > 0; --w) {
    trace.bins[std::size_t(w - 1)] = back(trace.bins[std::size_t(w)], w);
  }
  trace.q.resize(windows);
  for (Index w = 0; w < windows; ++w) {
    trace.q[w] = s.bin_frequencies[trace.bins[std::size_t(w)]];
  }
  trace.presence = breath_presence(s, trace.bins, options.presence_gamma);
  return trace;
}

std::vector<bool> breath_presence(const Spectrogram& s,
                                  const std::vector<Index>& bins, double gamma) {
  std::vector<bool> out(bins.size(), false);
  std::vector<double> column;
  for (std::size_t w = 0; w < bins.size(); ++w) {
    const auto col = s.magnitudes.col(Index(w));
    column.assign(col.data(), col.data() + col.size());
    const std::size_t mid = column.size() / 2;
    std::nth_element(column.begin(), column.begin() + std::ptrdiff_t(mid), column.end());
    double median = column[mid];
    if (column.size() % 2 == 0) {
      const double lower = *std::max_element(column.begin(),
                                             column.begin() + std::ptrdiff_t(mid));
      median = 0.5 * (median + lower);
    }
    const double peak = s.magnitudes(bins[w], Index(w));
    // A flat column has no peak, whatever gamma is.
    out[w] = peak > median && peak >= gamma * median;
  }
  return out;
}

Index rate_window_index(Index n, const PipelineParams& params) {
  const double x = double(n - params.window_length + 1) / double(params.hop());
  return clamped_ceil(x);
}

double rate_at(const RateTrace& trace, Index n, const PipelineParams& params) {
  const Index w = rate_window_index(n, params);
  if (n < 0 || w >= trace.windows()) {
    throw Error(Errc::out_of_range, "sample index is outside the traced windows");
  }
  return 60.0 * trace.q[w];
}

}  // namespace wirm
