#pragma once

#include <cstddef>
#include <span>

#include <Eigen/Dense>

namespace gspn {

/// Streaming population mean and covariance over k variables.
///
/// The count is a real so that pseudo-counts (a prior observation carried by a
/// freshly initialized node) need no special casing.
struct GaussianStats {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
  double count = 0.0;

  GaussianStats() = default;
  GaussianStats(Eigen::VectorXd mean, Eigen::MatrixXd cov, double count);

  /// k-dimensional statistics with zero mean, zero covariance and zero count.
  static GaussianStats zero(std::size_t k);

  std::size_t dim() const { return static_cast<std::size_t>(mean.size()); }

  /// Folds a batch (one point per row, k columns) into the statistics.
  ///
  /// Mean:       mu'_i  = (n mu_i + sum_k x_i) / (n + m)
  /// Covariance: S'_ij  = (n S_ij + sum_k (x_i - mu_i)(x_j - mu_j)) / (n + m)
  ///                      - (mu'_i - mu_i)(mu'_j - mu_j)
  /// where mu is the pre-update mean. Throws std::invalid_argument on a column
  /// count mismatch or an empty batch.
  void update(const Eigen::Ref<const Eigen::MatrixXd>& batch);

  /// Absolute Pearson coefficient |S_ij| / sqrt(S_ii S_jj), clamped to [0, 1].
  /// Returns 0 when either variance is below 1e-12.
  double correlation(std::size_t i, std::size_t j) const;

  /// Statistics restricted to the given positions (sub-vector, sub-matrix).
  GaussianStats slice(std::span<const std::size_t> positions) const;
};

/// Value-returning form of GaussianStats::update.
GaussianStats updated(GaussianStats stats, const Eigen::Ref<const Eigen::MatrixXd>& batch);

}  // namespace gspn
