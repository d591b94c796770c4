#include "wirm/fif.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>

namespace wirm {

void FifConfig::validate() const {
  if (!(chi > 0.0)) throw Error(Errc::invalid_params, "FIF chi must be positive");
  if (!(inner_tol > 0.0)) {
    throw Error(Errc::invalid_params, "FIF inner tolerance must be positive");
  }
  if (inner_max < 1 || max_imfs < 1) {
    throw Error(Errc::invalid_params, "FIF iteration caps must be at least 1");
  }
}

Eigen::VectorXd ImfSet::reconstruct() const {
  Eigen::VectorXd sum = residual;
  for (const auto& imf : imfs) sum += imf;
  return sum;
}

Index count_extrema(const Eigen::Ref<const Eigen::VectorXd>& x) {
  Index count = 0;
  int last_sign = 0;
  for (Index i = 1; i < x.size(); ++i) {
    const double d = x[i] - x[i - 1];
    const int sign = (d > 0.0) - (d < 0.0);
    if (sign == 0) continue;
    if (last_sign != 0 && sign != last_sign) ++count;
    last_sign = sign;
  }
  return count;
}

Index filter_length(Index m, Index k, double chi) {
  if (k < 1) throw Error(Errc::no_extrema, "signal has no extrema");
  const double raw = 2.0 * std::floor(chi * double(m) / double(k));
  Index l = raw > double(m) ? m : Index(raw);
  l = std::min(l, m - 1);
  if (l % 2 != 0) --l;
  return std::max<Index>(l, 2);
}

Eigen::VectorXd double_average_kernel(Index half) {
  const Index width = 2 * half + 1;
  Eigen::VectorXd kernel(2 * width - 1);
  for (Index i = 0; i < kernel.size(); ++i) {
    kernel[i] = double(width - std::abs(i - (width - 1)));
  }
  return kernel / kernel.sum();
}

Eigen::VectorXd smooth(const Eigen::Ref<const Eigen::VectorXd>& x,
                       const Eigen::Ref<const Eigen::VectorXd>& kernel, Index pad) {
  const Index m = x.size();
  const Index half = kernel.size() / 2;
  pad = std::max(pad, half);

  // Mirror about the end samples (no repetition), folding back when the pad
  // exceeds the signal.
  auto mirror = [m](Index i) {
    if (m == 1) return Index{0};
    const Index period = 2 * (m - 1);
    Index j = i % period;
    if (j < 0) j += period;
    return j < m ? j : period - j;
  };

  const Index ext_len = m + 2 * pad;
  std::size_t len = 1;
  while (len < std::size_t(ext_len + kernel.size())) len <<= 1;

  std::vector<double> ext(len, 0.0);
  for (Index i = 0; i < ext_len; ++i) ext[std::size_t(i)] = x[mirror(i - pad)];
  std::vector<double> ker(len, 0.0);
  for (Index i = 0; i < kernel.size(); ++i) {
    // Centre the kernel at index 0 so the circular convolution is zero-phase.
    const Index pos = i - half;
    ker[pos >= 0 ? std::size_t(pos) : len - std::size_t(-pos)] = kernel[i];
  }

  Eigen::FFT<double> fft;
  std::vector<Complex> fx, fk;
  fft.fwd(fx, ext);
  fft.fwd(fk, ker);
  for (std::size_t i = 0; i < fx.size(); ++i) fx[i] *= fk[i];
  std::vector<double> conv;
  fft.inv(conv, fx);

  Eigen::VectorXd out(m);
  for (Index i = 0; i < m; ++i) out[i] = conv[std::size_t(i + pad)];
  return out;
}

ImfExtraction extract_imf(const Eigen::Ref<const Eigen::VectorXd>& x,
                          const FifConfig& cfg) {
  const Index m = x.size();
  const Index k = count_extrema(x);
  if (k < 1) throw Error(Errc::no_extrema, "signal has no extrema");
  const Index l = filter_length(m, k, cfg.chi);
  const Eigen::VectorXd kernel = double_average_kernel(l / 2);

  ImfExtraction out;
  Eigen::VectorXd s = x;
  for (int it = 0; it < cfg.inner_max; ++it) {
    const Eigen::VectorXd mean = smooth(s, kernel, l);
    const double norm = s.squaredNorm();
    s -= mean;
    out.iterations = it + 1;
    if (norm == 0.0 || mean.squaredNorm() / norm < cfg.inner_tol) break;
  }
  out.remainder = x - s;
  out.imf = std::move(s);
  return out;
}

ImfSet fif_decompose(const Eigen::Ref<const Eigen::VectorXd>& x,
                     const FifConfig& cfg) {
  cfg.validate();
  if (x.size() < 8) {
    throw Error(Errc::signal_too_short, "FIF needs at least 8 samples");
  }
  ImfSet set;
  Eigen::VectorXd remainder = x;
  while (int(set.imfs.size()) < cfg.max_imfs && count_extrema(remainder) >= 3) {
    ImfExtraction step = extract_imf(remainder, cfg);
    set.imfs.push_back(std::move(step.imf));
    remainder = std::move(step.remainder);
  }
  set.residual = std::move(remainder);
  return set;
}

}  // namespace wirm
