#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace wirm {

using Index = Eigen::Index;
using Complex = std::complex<double>;

/// Complex samples laid out time-major: one row per time step, one column per
/// (link, subcarrier) pair with the subcarrier varying fastest.
using CsiMatrix =
    Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

enum class Errc {
  invalid_params,
  invalid_config,
  length_too_short,
  insufficient_samples,
  too_few_receivers,
  no_extrema,
  signal_too_short,
  degenerate_primary,
  no_imf_in_band,
  out_of_range,
  length_mismatch,
  empty_input,
  window_too_large,
  malformed_input,
  io_failure,
};

const char* to_string(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

/// Breathing band in Hz.
struct BandLimits {
  double f_min = 0.133;
  double f_max = 0.833;

  /// Throws invalid_params unless 0 < f_min < f_max < fs / 2.
  void validate(double fs) const;
};

struct PipelineParams {
  Index window_length = 150;      // N
  Index window_count = 46;        // W, trailing windows seen by each AMTC run
  Index window_overlap = 140;     // Y
  double smoothing = 0.5;         // AMTC weight on the log prior
  Index waveform_length = 600;    // samples fed to the waveform stage
  double fif_chi = 2.7;
  double transition_sigma_bpm = 4.552;
  double presence_gamma = 2.0;    // peak-to-median threshold for breath presence
  BandLimits band{};
  double fs = 9.9;

  double sample_period() const { return 1.0 / fs; }
  Index hop() const { return window_length - window_overlap; }

  void validate() const;
};

/// Raw CSI indexed by (time, link, subcarrier). Links are ordered row-major in
/// (transmit a, receive b), i.e. link = a * B + b with zero-based indices.
class CsiTensor {
 public:
  CsiTensor() = default;
  CsiTensor(Index time, int tx_antennas, int rx_antennas, Index subcarriers,
            double sample_period);

  Index time() const { return samples_.rows(); }
  Index links() const { return Index{tx_} * rx_; }
  Index subcarriers() const { return subcarriers_; }
  int tx_antennas() const { return tx_; }
  int rx_antennas() const { return rx_; }
  double sample_period() const { return sample_period_; }

  Index link_index(int a, int b) const { return Index{a} * rx_ + b; }

  Complex& operator()(Index t, Index link, Index f) {
    return samples_(t, link * subcarriers_ + f);
  }
  const Complex& operator()(Index t, Index link, Index f) const {
    return samples_(t, link * subcarriers_ + f);
  }

  const CsiMatrix& samples() const { return samples_; }
  CsiMatrix& samples() { return samples_; }

  /// Copy of `length` consecutive time steps starting at `start`.
  CsiTensor slice(Index start, Index length) const;

  /// Throws malformed_input on non-finite entries or invalid antenna counts.
  void validate() const;

 private:
  CsiMatrix samples_;
  int tx_ = 0;
  int rx_ = 0;
  Index subcarriers_ = 0;
  double sample_period_ = 0.0;
};

/// Start indices w * (N - Y) of every complete length-N window.
std::vector<Index> window_starts(Index total_samples, Index window_length,
                                 Index overlap);

/// max(0, ceil(x)).
Index clamped_ceil(double x);

namespace detail {

// A sequence whose spread is within rounding noise of its magnitude carries no
// signal; treating it as constant keeps z-scores and ACFs from amplifying
// floating-point dust.
template <typename Derived>
bool is_effectively_constant(const Eigen::MatrixBase<Derived>& x,
                             double spread) {
  const double scale = std::max(1.0, x.cwiseAbs().maxCoeff());
  return !(spread > 64.0 * std::numeric_limits<double>::epsilon() * scale);
}

}  // namespace detail

/// Z-score with population standard deviation. Constant input maps to zeros.
template <typename Derived>
Eigen::VectorXd z_score(const Eigen::MatrixBase<Derived>& x) {
  if (x.size() < 2) {
    throw Error(Errc::length_too_short, "z_score needs at least 2 samples");
  }
  const double mean = x.mean();
  Eigen::VectorXd centred = x.array() - mean;
  const double sd = std::sqrt(centred.squaredNorm() / double(x.size()));
  if (detail::is_effectively_constant(x, sd)) {
    return Eigen::VectorXd::Zero(x.size());
  }
  return centred / sd;
}

/// Wraps an angle to (-pi, pi].
double wrap_to_pi(double angle);

}  // namespace wirm
