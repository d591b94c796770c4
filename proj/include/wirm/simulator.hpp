#pragma once

#include "wirm/core.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace wirm {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

struct NoiseConfig {
  double thermal_std = 0.0;  // per real/imag component of the additive term
  double mult_std = 0.0;     // std of the normal underlying the log-normal gain
  bool phase_noise = false;  // uniform [-pi, pi] phase common to a receiver NIC
};

/// Simulation scene. Defaults reproduce the common and simulation parameter
/// tables of the reference setup (one breather at 15 BPM, 2x2 antennas,
/// 114 subcarriers sampled at 9.9 Hz).
struct SimConfig {
  std::uint64_t seed = 1;
  // Long enough for 25 waveform estimates with N = 150, Y = 140 and a
  // 600-sample waveform window: 600 + 24 * 10.
  Index duration_samples = 840;
  double fs = 9.9;
  Index subcarriers = 114;
  int tx_antennas = 2;
  int rx_antennas = 2;
  double wavelength = 299792458.0 / 5.18e9;
  double antenna_separation = 0.05;
  double txrx_separation = 5.0;
  int breather_count = 1;
  double breath_bpm = 15.0;
  double breath_phase_offset = 0.0;
  Interval breath_depth{0.005, 0.01};
  Interval alpha{0.2, 2.0};
  Interval static_amplitude{10.0, 20.0};
  double theta = kPi / 3.0;
  NoiseConfig noise{};

  /// Throws invalid_config when any field is out of its domain.
  void validate() const;
};

/// Per-scene random parameters, drawn once per (seed, link, subcarrier).
struct SceneDraws {
  struct Breather {
    Eigen::MatrixXd alpha;          // links x subcarriers
    Eigen::MatrixXd dynamic_phase;  // links x subcarriers
    Eigen::VectorXd depth;          // per link, metres
    Eigen::VectorXd rotation;       // per link, +1 or -1
    Eigen::VectorXd path_length;    // per link, metres
  };
  Eigen::MatrixXcd static_component;  // links x subcarriers
  std::vector<Breather> breathers;
};

/// Gaussian and uniform variates for one (t, link, subcarrier) cell.
struct NoiseDraw {
  double log_gain = 0.0;    // standard normal
  double thermal_re = 0.0;  // standard normal
  double thermal_im = 0.0;  // standard normal
  double phase = 0.0;       // uniform [-pi, pi]
};

struct GroundTruth {
  Eigen::VectorXd r;    // unit-amplitude respiratory waveform
  Eigen::VectorXd bpm;  // instantaneous rate
};

struct Simulation {
  CsiTensor csi;
  GroundTruth truth;
};

/// Counter-based generator: every variate is a pure function of its key, so
/// results do not depend on evaluation order or thread count.
namespace rng {

enum class Stream : std::uint64_t {
  static_amplitude = 1,
  static_phase,
  alpha,
  dynamic_phase,
  rotation,
  breath_depth,
  log_gain,
  thermal_re,
  thermal_im,
  phase_noise,
};

std::uint64_t hash(std::uint64_t seed, Stream stream,
                   std::array<std::uint64_t, 4> counter);

/// Uniform on [0, 1).
double uniform(std::uint64_t seed, Stream stream,
               std::array<std::uint64_t, 4> counter);

/// Standard normal (Box-Muller on two keyed uniforms).
double normal(std::uint64_t seed, Stream stream,
              std::array<std::uint64_t, 4> counter);

}  // namespace rng

double breath_waveform(const SimConfig& config, Index n);

SceneDraws draw_scene(const SimConfig& config);

NoiseDraw draw_noise(const SimConfig& config, Index t, Index link, Index f);

Complex ideal_csi(const SimConfig& config, const SceneDraws& draws, Index n,
                  Index link, Index f);

Complex apply_noise(Complex h, const NoiseConfig& noise, const NoiseDraw& draw);

/// Deterministic in (config, seed).
Simulation simulate(const SimConfig& config);

}  // namespace wirm
