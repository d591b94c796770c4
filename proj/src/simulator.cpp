#include "wirm/simulator.hpp"

#include <cmath>

namespace wirm {

namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

std::uint64_t mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

bool valid_interval(const Interval& i) {
  return std::isfinite(i.lo) && std::isfinite(i.hi) && i.lo > 0.0 &&
         i.lo <= i.hi;
}

double sample(const Interval& range, double u) {
  return range.lo + (range.hi - range.lo) * u;
}

// All receive antennas sit on a single NIC.
constexpr std::uint64_t kReceiverNic = 0;

}  // namespace

void SimConfig::validate() const {
  auto fail = [](const char* what) { throw Error(Errc::invalid_config, what); };
  if (duration_samples < 1) fail("duration_samples must be at least 1");
  if (!(fs > 0.0) || !std::isfinite(fs)) fail("fs must be positive");
  if (subcarriers < 1) fail("subcarriers must be at least 1");
  if (tx_antennas < 1) fail("tx_antennas must be at least 1");
  if (rx_antennas < 2) fail("rx_antennas must be at least 2");
  if (!(wavelength > 0.0)) fail("wavelength must be positive");
  if (!(antenna_separation > 0.0)) fail("antenna_separation must be positive");
  if (!(txrx_separation > 0.0)) fail("txrx_separation must be positive");
  if (breather_count < 1) fail("breather_count must be at least 1");
  if (!(breath_bpm > 0.0) || !std::isfinite(breath_bpm)) {
    fail("breath_bpm must be positive");
  }
  if (!std::isfinite(breath_phase_offset) || !std::isfinite(theta)) {
    fail("angles must be finite");
  }
  if (!valid_interval(breath_depth)) fail("breath_depth range is invalid");
  if (!valid_interval(alpha)) fail("alpha range is invalid");
  if (!valid_interval(static_amplitude)) fail("static_amplitude range is invalid");
  if (!(noise.thermal_std >= 0.0) || !std::isfinite(noise.thermal_std)) {
    fail("thermal_std must be nonnegative");
  }
  if (!(noise.mult_std >= 0.0) || !std::isfinite(noise.mult_std)) {
    fail("mult_std must be nonnegative");
  }
}

namespace rng {

std::uint64_t hash(std::uint64_t seed, Stream stream,
                   std::array<std::uint64_t, 4> counter) {
  std::uint64_t h = mix(seed + kGolden);
  h = mix(h ^ (static_cast<std::uint64_t>(stream) + kGolden));
  for (std::uint64_t c : counter) h = mix(h ^ (c + kGolden));
  return h;
}

double uniform(std::uint64_t seed, Stream stream,
               std::array<std::uint64_t, 4> counter) {
  return double(hash(seed, stream, counter) >> 11) * 0x1.0p-53;
}

double normal(std::uint64_t seed, Stream stream,
              std::array<std::uint64_t, 4> counter) {
  // The last counter slot is reserved for the two Box-Muller halves.
  auto c1 = counter;
  auto c2 = counter;
  c1[3] = 2 * counter[3];
  c2[3] = 2 * counter[3] + 1;
  const double u1 = 1.0 - uniform(seed, stream, c1);  // (0, 1]
  const double u2 = uniform(seed, stream, c2);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

}  // namespace rng

double breath_waveform(const SimConfig& config, Index n) {
  const double t = double(n) / config.fs;
  return std::sin(kTwoPi * (config.breath_bpm / 60.0) * t +
                  config.breath_phase_offset);
}

SceneDraws draw_scene(const SimConfig& config) {
  using rng::Stream;
  const Index links = Index{config.tx_antennas} * config.rx_antennas;
  const Index k = config.subcarriers;
  const auto seed = config.seed;

  SceneDraws draws;
  draws.static_component.resize(links, k);
  for (Index l = 0; l < links; ++l) {
    for (Index f = 0; f < k; ++f) {
      const std::array<std::uint64_t, 4> key{0, std::uint64_t(l),
                                             std::uint64_t(f), 0};
      const double amp = sample(config.static_amplitude,
                                rng::uniform(seed, Stream::static_amplitude, key));
      const double phase = kTwoPi * rng::uniform(seed, Stream::static_phase, key);
      draws.static_component(l, f) = std::polar(amp, phase);
    }
  }

  // Uniform linear arrays centred on the x axis, breather halfway between.
  const double tx_x = 0.0;
  const double rx_x = config.txrx_separation;
  const double person_x = config.txrx_separation / 2.0;
  const double person_y = 0.0;
  auto element_y = [&](int index, int count) {
    return (double(index) - double(count - 1) / 2.0) * config.antenna_separation;
  };

  for (int b = 0; b < config.breather_count; ++b) {
    SceneDraws::Breather br;
    br.alpha.resize(links, k);
    br.dynamic_phase.resize(links, k);
    br.depth.resize(links);
    br.rotation.resize(links);
    br.path_length.resize(links);
    const auto bk = std::uint64_t(b);
    for (int a = 0; a < config.tx_antennas; ++a) {
      for (int r = 0; r < config.rx_antennas; ++r) {
        const Index l = Index{a} * config.rx_antennas + r;
        const std::array<std::uint64_t, 4> link_key{bk, std::uint64_t(l), 0, 0};
        br.depth[l] = sample(config.breath_depth,
                             rng::uniform(seed, Stream::breath_depth, link_key));
        br.rotation[l] =
            rng::uniform(seed, Stream::rotation, link_key) < 0.5 ? -1.0 : 1.0;
        const double ty = element_y(a, config.tx_antennas);
        const double ry = element_y(r, config.rx_antennas);
        br.path_length[l] = std::hypot(person_x - tx_x, person_y - ty) +
                            std::hypot(rx_x - person_x, ry - person_y);
        for (Index f = 0; f < k; ++f) {
          const std::array<std::uint64_t, 4> key{bk, std::uint64_t(l),
                                                 std::uint64_t(f), 0};
          br.alpha(l, f) =
              sample(config.alpha, rng::uniform(seed, Stream::alpha, key));
          br.dynamic_phase(l, f) =
              kTwoPi * rng::uniform(seed, Stream::dynamic_phase, key);
        }
      }
    }
    draws.breathers.push_back(std::move(br));
  }
  return draws;
}

NoiseDraw draw_noise(const SimConfig& config, Index t, Index link, Index f) {
  using rng::Stream;
  const auto seed = config.seed;
  const std::array<std::uint64_t, 4> cell{std::uint64_t(t), std::uint64_t(link),
                                          std::uint64_t(f), 0};
  const std::array<std::uint64_t, 4> nic{std::uint64_t(t), kReceiverNic,
                                         std::uint64_t(f), 0};
  NoiseDraw d;
  d.log_gain = rng::normal(seed, Stream::log_gain, cell);
  d.thermal_re = rng::normal(seed, Stream::thermal_re, cell);
  d.thermal_im = rng::normal(seed, Stream::thermal_im, cell);
  d.phase = kTwoPi * rng::uniform(seed, Stream::phase_noise, nic) - kPi;
  return d;
}

Complex ideal_csi(const SimConfig& config, const SceneDraws& draws, Index n,
                  Index link, Index f) {
  const double k0 = kTwoPi / config.wavelength;
  const double r = breath_waveform(config, n);
  const double excursion = std::sin(config.theta) * r;
  Complex h = draws.static_component(link, f);
  for (const auto& br : draws.breathers) {
    const double phase =
        br.dynamic_phase(link, f) -
        k0 * (br.path_length[link] + br.rotation[link] * br.depth[link] * excursion);
    h += std::polar(br.alpha(link, f), phase);
  }
  return h;
}

Complex apply_noise(Complex h, const NoiseConfig& noise, const NoiseDraw& draw) {
  Complex out = h;
  if (noise.mult_std > 0.0) out *= std::exp(noise.mult_std * draw.log_gain);
  if (noise.phase_noise) out *= std::polar(1.0, -draw.phase);
  if (noise.thermal_std > 0.0) {
    out += Complex(noise.thermal_std * draw.thermal_re,
                   noise.thermal_std * draw.thermal_im);
  }
  return out;
}

Simulation simulate(const SimConfig& config) {
  config.validate();
  const SceneDraws draws = draw_scene(config);
  const Index links = Index{config.tx_antennas} * config.rx_antennas;

  Simulation sim{CsiTensor(config.duration_samples, config.tx_antennas,
                           config.rx_antennas, config.subcarriers,
                           1.0 / config.fs),
                 GroundTruth{}};
  for (Index t = 0; t < config.duration_samples; ++t) {
    for (Index l = 0; l < links; ++l) {
      for (Index f = 0; f < config.subcarriers; ++f) {
        sim.csi(t, l, f) = apply_noise(ideal_csi(config, draws, t, l, f),
                                       config.noise, draw_noise(config, t, l, f));
      }
    }
  }

  sim.truth.r.resize(config.duration_samples);
  for (Index t = 0; t < config.duration_samples; ++t) {
    sim.truth.r[t] = breath_waveform(config, t);
  }
  sim.truth.bpm = Eigen::VectorXd::Constant(config.duration_samples, config.breath_bpm);
  return sim;
}

}  // namespace wirm
