#include "wirm/core.hpp"

#include <cmath>
#include <sstream>

namespace wirm {

const char* to_string(Errc code) {
  switch (code) {
    case Errc::invalid_params: return "invalid-params";
    case Errc::invalid_config: return "invalid-config";
    case Errc::length_too_short: return "length-too-short";
    case Errc::insufficient_samples: return "insufficient-samples";
    case Errc::too_few_receivers: return "too-few-receivers";
    case Errc::no_extrema: return "no-extrema";
    case Errc::signal_too_short: return "signal-too-short";
    case Errc::degenerate_primary: return "degenerate-primary";
    case Errc::no_imf_in_band: return "no-imf-in-band";
    case Errc::out_of_range: return "out-of-range";
    case Errc::length_mismatch: return "length-mismatch";
    case Errc::empty_input: return "empty-input";
    case Errc::window_too_large: return "window-too-large";
    case Errc::malformed_input: return "malformed-input";
    case Errc::io_failure: return "io-failure";
  }
  return "unknown";
}

void BandLimits::validate(double fs) const {
  if (!(f_min > 0.0 && f_min < f_max && f_max < fs / 2.0)) {
    std::ostringstream os;
    os << "band [" << f_min << ", " << f_max
       << "] Hz must satisfy 0 < f_min < f_max < fs/2 = " << fs / 2.0;
    throw Error(Errc::invalid_params, os.str());
  }
}

void PipelineParams::validate() const {
  if (!(fs > 0.0) || !std::isfinite(fs)) {
    throw Error(Errc::invalid_params, "sample rate must be positive");
  }
  band.validate(fs);
  if (window_length < 3) {
    throw Error(Errc::invalid_params, "window length N must be at least 3");
  }
  if (window_overlap < 0 || window_overlap >= window_length) {
    throw Error(Errc::invalid_params, "overlap Y must satisfy 0 <= Y < N");
  }
  if (window_count < 1) {
    throw Error(Errc::invalid_params, "window count W must be at least 1");
  }
  if (waveform_length <= window_length) {
    throw Error(Errc::invalid_params, "waveform length must exceed N");
  }
  if (!(smoothing >= 0.0)) {
    throw Error(Errc::invalid_params, "AMTC smoothing must be nonnegative");
  }
  if (!(fif_chi > 0.0)) {
    throw Error(Errc::invalid_params, "FIF chi must be positive");
  }
  if (!(transition_sigma_bpm > 0.0)) {
    throw Error(Errc::invalid_params, "transition sigma must be positive");
  }
  if (!(presence_gamma >= 0.0)) {
    throw Error(Errc::invalid_params, "presence gamma must be nonnegative");
  }
}

CsiTensor::CsiTensor(Index time, int tx_antennas, int rx_antennas,
                     Index subcarriers, double sample_period)
    : samples_(CsiMatrix::Zero(time, Index{tx_antennas} * rx_antennas *
                                         subcarriers)),
      tx_(tx_antennas),
      rx_(rx_antennas),
      subcarriers_(subcarriers),
      sample_period_(sample_period) {}

CsiTensor CsiTensor::slice(Index start, Index length) const {
  if (start < 0 || length < 0 || start + length > time()) {
    throw Error(Errc::out_of_range, "CSI slice exceeds tensor bounds");
  }
  CsiTensor out;
  out.samples_ = samples_.middleRows(start, length);
  out.tx_ = tx_;
  out.rx_ = rx_;
  out.subcarriers_ = subcarriers_;
  out.sample_period_ = sample_period_;
  return out;
}

void CsiTensor::validate() const {
  if (tx_ < 1 || rx_ < 2 || subcarriers_ < 1 || time() < 1) {
    throw Error(Errc::malformed_input,
                "CSI tensor needs T >= 1, A >= 1, B >= 2, K >= 1");
  }
  if (!(sample_period_ > 0.0) || !std::isfinite(sample_period_)) {
    throw Error(Errc::malformed_input, "CSI sample period must be positive");
  }
  if (samples_.cols() != links() * subcarriers_) {
    throw Error(Errc::malformed_input, "CSI column count mismatch");
  }
  const auto* data = samples_.data();
  for (Index i = 0; i < samples_.size(); ++i) {
    if (!std::isfinite(data[i].real()) || !std::isfinite(data[i].imag())) {
      throw Error(Errc::malformed_input, "CSI tensor contains non-finite values");
    }
  }
}

std::vector<Index> window_starts(Index total_samples, Index window_length,
                                 Index overlap) {
  if (overlap < 0 || overlap >= window_length) {
    throw Error(Errc::invalid_params, "overlap Y must satisfy 0 <= Y < N");
  }
  if (window_length > total_samples) {
    throw Error(Errc::invalid_params, "window length exceeds available samples");
  }
  const Index hop = window_length - overlap;
  std::vector<Index> starts;
  for (Index s = 0; s + window_length - 1 < total_samples; s += hop) {
    starts.push_back(s);
  }
  return starts;
}

Index clamped_ceil(double x) {
  const double c = std::ceil(x);
  return c <= 0.0 ? 0 : static_cast<Index>(c);
}

double wrap_to_pi(double angle) {
  double w = std::remainder(angle, kTwoPi);  // [-pi, pi]
  if (w <= -kPi) w += kTwoPi;
  return w;
}

}  // namespace wirm
