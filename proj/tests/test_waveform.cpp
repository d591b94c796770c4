#include <doctest.h>

#include "oracles.hpp"
#include "wirm/pipeline.hpp"
#include "wirm/simulator.hpp"
#include "wirm/waveform.hpp"

using namespace wirm;

namespace {

constexpr double kFs = 9.9;

SimConfig short_config() {
  SimConfig c;
  c.duration_samples = 600;
  c.subcarriers = 12;
  return c;
}

}  // namespace

TEST_CASE("z matrix shape and columns") {
  const Simulation sim = simulate(SimConfig{});
  const ZMatrix z = build_z_matrix(sim.csi, 600);
  CHECK(z.rows() == 600);
  CHECK(z.cols() == 456);
  for (Index c = 0; c < z.cols(); ++c) {
    if (z.col(c).isZero(0.0)) continue;
    CHECK(std::abs(z.col(c).mean()) < 1e-12);
    CHECK(std::abs(z.col(c).norm() / std::sqrt(600.0) - 1.0) < 1e-12);
  }
  CHECK_THROWS_AS(build_z_matrix(sim.csi, 900), Error);
}

TEST_CASE("constant subcarrier gives zero columns") {
  CsiTensor csi(40, 1, 2, 2, 0.1);
  for (Index t = 0; t < 40; ++t) {
    csi(t, 0, 0) = Complex(1.0, 1.0);
    csi(t, 1, 0) = Complex(2.0, -1.0);  // constant
    csi(t, 0, 1) = Complex(1.0, 0.0);
    csi(t, 1, 1) = std::polar(1.0 + 0.1 * std::sin(0.3 * double(t)), 0.2 * std::cos(0.3 * double(t)));
  }
  const ZMatrix z = build_z_matrix(csi, 40);
  CHECK(z.col(0).isZero(0.0));  // magnitude, subcarrier 0
  CHECK(z.col(2).isZero(0.0));  // phase, subcarrier 0
  CHECK_FALSE(z.col(1).isZero(0.0));
  CHECK_FALSE(z.col(3).isZero(0.0));
}

TEST_CASE("multiplicative noise leaves the phase columns unchanged") {
  SimConfig c = short_config();
  const ZMatrix clean = build_z_matrix(simulate(c).csi, 600);
  c.noise.mult_std = 1.0;
  const ZMatrix noisy = build_z_matrix(simulate(c).csi, 600);
  const Index k = c.subcarriers;
  for (Index link = 0; link < 2; ++link) {
    const auto a = clean.middleCols(2 * k * link + k, k);
    const auto b = noisy.middleCols(2 * k * link + k, k);
    CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("dtft_at_rate") {
  const Index rows = 600, n = 150;
  const double ts = 1.0 / kFs;
  const double rate = 4.0 * kFs / double(n);  // whole cycles over the trailing window

  ZMatrix z(rows, 2);
  for (Index i = 0; i < rows; ++i) z(i, 0) = std::cos(2 * M_PI * rate * double(i) * ts);
  z.col(1).setZero();
  const SubcarrierSpectra s = dtft_at_rate(z, rate, n, ts);
  CHECK(std::abs(s.values[0]) == doctest::Approx(n / 2.0).epsilon(1e-9));
  CHECK(s.values[1] == Complex(0.0, 0.0));
  CHECK(s.primary == 0);

  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> f(0.133, 0.833);
  for (int trial = 0; trial < 100; ++trial) {
    ZMatrix r(rows, 3);
    for (Index c = 0; c < 3; ++c) r.col(c) = oracle::random_vector(rng, rows);
    const double hz = f(rng);
    const SubcarrierSpectra got = dtft_at_rate(r, hz, n, ts);
    for (Index c = 0; c < 3; ++c) {
      const Eigen::VectorXd tail = r.col(c).tail(n);
      const auto ref = oracle::dtft(tail, hz, kFs, rows - n);
      const double err = double(std::abs(Complex(double(ref.real()), double(ref.imag())) - got.values[c]));
      CHECK(err <= 1e-9 * double(std::abs(ref)));
    }
  }
}

TEST_CASE("select_primary") {
  Eigen::VectorXcd f(3);
  f << 1.0, Complex(0.0, 5.0), Complex(-5.0, 0.0);
  CHECK(select_primary(f) == 1);
  Eigen::VectorXcd one(1);
  one << 0.5;
  CHECK(select_primary(one) == 0);
}

TEST_CASE("alignment_sign") {
  CHECK(alignment_sign(0.0, M_PI) == -1.0);
  CHECK(alignment_sign(0.1, -0.1) == 1.0);
  CHECK(alignment_sign(0.1, 2 * M_PI - 0.1) == 1.0);  // wrapped gap is 0.2
  CHECK(alignment_sign(0.0, M_PI / 2) == 1.0);
  CHECK(alignment_sign(0.0, M_PI / 2 + 1e-9) == -1.0);
}

TEST_CASE("combine_subcarriers") {
  const Index rows = 600, n = 150;
  const double ts = 1.0 / kFs;
  const Eigen::VectorXd tone = oracle::tone(rows, 0.25, kFs);
  std::mt19937_64 rng(6);

  SUBCASE("antiphase copies add up") {
    ZMatrix z(rows, 2);
    z.col(0) = tone + 0.3 * oracle::random_vector(rng, rows);
    z.col(1) = -tone + 0.3 * oracle::random_vector(rng, rows);
    const SubcarrierSpectra s = dtft_at_rate(z, 0.25, n, ts);
    const Eigen::VectorXd p = combine_subcarriers(z, s);
    const BandLimits band;
    const double combined = oracle::bnr(p, band.f_min, band.f_max, kFs);
    CHECK(combined >= oracle::bnr(z.col(0), band.f_min, band.f_max, kFs));
    CHECK(combined >= oracle::bnr(z.col(1), band.f_min, band.f_max, kFs));
    CHECK(oracle::pearson(p, tone) > 0.95 * std::abs(oracle::pearson(z.col(0), tone)));
  }
  SUBCASE("negating the input negates the output") {
    ZMatrix z(rows, 4);
    for (Index c = 0; c < 4; ++c) z.col(c) = oracle::random_vector(rng, rows) + tone;
    const ZMatrix neg = -z;
    const Eigen::VectorXd a = combine_subcarriers(z, dtft_at_rate(z, 0.25, n, ts));
    const Eigen::VectorXd b = combine_subcarriers(neg, dtft_at_rate(neg, 0.25, n, ts));
    CHECK((a + b).cwiseAbs().maxCoeff() <= 1e-12 * a.cwiseAbs().maxCoeff());
  }
  SUBCASE("strongest breath column is primary") {
    ZMatrix z(rows, 3);
    z.col(0) = 0.2 * tone + oracle::random_vector(rng, rows);
    z.col(1) = 2.0 * tone + 0.1 * oracle::random_vector(rng, rows);
    z.col(2) = oracle::random_vector(rng, rows);
    CHECK(dtft_at_rate(z, 0.25, n, ts).primary == 1);
  }
  SUBCASE("all-zero matrix is degenerate") {
    const ZMatrix z = ZMatrix::Zero(rows, 2);
    CHECK_THROWS_AS(combine_subcarriers(z, dtft_at_rate(z, 0.25, n, ts)), Error);
  }
}

TEST_CASE("nearest_peak") {
  const Eigen::Vector2d peaks(12.0 / 60.0, 30.0 / 60.0);
  CHECK(nearest_peak(peaks, 15.0 / 60.0) == 0);
  const Eigen::Vector2d tie(0.2, 0.3);
  CHECK(nearest_peak(tie, 0.25) == 0);
  CHECK_THROWS_AS(nearest_peak(Eigen::VectorXd(), 0.25), Error);
}

TEST_CASE("dominant_frequency uses the trailing window") {
  PipelineParams p;
  Eigen::VectorXd x(600);
  x.head(450) = oracle::tone(450, 0.6, kFs);
  x.tail(150) = oracle::tone(150, 0.25, kFs);
  const double spacing = 0.7 / 148.0;
  CHECK(std::abs(dominant_frequency(x, p) - 0.25) <= spacing);
}

TEST_CASE("noiseless waveform estimate tracks the breath") {
  const Simulation sim = simulate(SimConfig{});
  PipelineParams p;
  const WaveformEstimate w = estimate_waveform(sim.csi, 0.25, p, FifConfig{});
  CHECK(w.r.size() == 600);
  CHECK(w.rate_bpm == doctest::Approx(15.0));
  const Eigen::VectorXd truth = sim.truth.r.tail(600);
  CHECK(std::abs(oracle::pearson(w.r, truth)) >= 0.95);
  CHECK(std::abs(w.imf_peaks_hz[w.imf_index] - 0.25) <= 0.7 / 148.0);
}

TEST_CASE("stitching flips anti-correlated segments") {
  Eigen::VectorXd stitched = oracle::tone(100, 0.25, kFs);
  const Eigen::VectorXd full = oracle::tone(120, 0.25, kFs);
  const Eigen::VectorXd next = -full.tail(100);
  stitch_segment(stitched, 0, next, 20);
  REQUIRE(stitched.size() == 120);
  CHECK((stitched - full).cwiseAbs().maxCoeff() < 1e-12);
}
