#pragma once

#include "wirm/core.hpp"

#include <vector>

namespace wirm {

struct FifConfig {
  double chi = 2.7;
  double inner_tol = 1e-3;  // stop once ||local mean||^2 / ||s||^2 < tol
  int inner_max = 200;
  int max_imfs = 12;

  void validate() const;
};

struct ImfSet {
  std::vector<Eigen::VectorXd> imfs;  // highest frequency first
  Eigen::VectorXd residual;

  Index count() const { return Index(imfs.size()); }
  /// Sum of every IMF plus the residual.
  Eigen::VectorXd reconstruct() const;
};

/// Local extrema, counted as sign changes of the first difference with
/// plateaus collapsed to one extremum.
Index count_extrema(const Eigen::Ref<const Eigen::VectorXd>& x);

/// Filter length 2 * floor(chi * m / k), clamped to [2, m - 1] and forced even.
Index filter_length(Index m, Index k, double chi);

/// Unit-sum triangular kernel of half-width 2 * half: a uniform window of
/// half-width `half` convolved with itself.
Eigen::VectorXd double_average_kernel(Index half);

/// Convolves x with a symmetric kernel after mirroring `pad` samples onto each
/// end; the result has the length of x.
Eigen::VectorXd smooth(const Eigen::Ref<const Eigen::VectorXd>& x,
                       const Eigen::Ref<const Eigen::VectorXd>& kernel, Index pad);

struct ImfExtraction {
  Eigen::VectorXd imf;
  Eigen::VectorXd remainder;
  int iterations = 0;
};

/// Sifts one IMF off x: s <- s - smooth(s) with the filter length taken from
/// the extrema count of x.
ImfExtraction extract_imf(const Eigen::Ref<const Eigen::VectorXd>& x,
                          const FifConfig& cfg);

/// Peels IMFs off the running remainder until it has fewer than 3 extrema or
/// max_imfs is reached.
ImfSet fif_decompose(const Eigen::Ref<const Eigen::VectorXd>& x,
                     const FifConfig& cfg);

}  // namespace wirm
