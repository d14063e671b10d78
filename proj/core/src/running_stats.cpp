#include "gspn/running_stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace gspn {

namespace {

constexpr double kDegenerateVariance = 1e-12;

}  // namespace

GaussianStats::GaussianStats(Eigen::VectorXd mean_in, Eigen::MatrixXd cov_in, double count_in)
    : mean(std::move(mean_in)), cov(std::move(cov_in)), count(count_in) {
  if (cov.rows() != mean.size() || cov.cols() != mean.size()) {
    throw std::invalid_argument("GaussianStats: covariance shape does not match mean length");
  }
  if (count < 0.0) {
    throw std::invalid_argument("GaussianStats: negative count");
  }
}

GaussianStats GaussianStats::zero(std::size_t k) {
  const auto n = static_cast<Eigen::Index>(k);
  return GaussianStats(Eigen::VectorXd::Zero(n), Eigen::MatrixXd::Zero(n, n), 0.0);
}

void GaussianStats::update(const Eigen::Ref<const Eigen::MatrixXd>& batch) {
  const Eigen::Index k = mean.size();
  if (batch.cols() != k) {
    throw std::invalid_argument("GaussianStats::update: batch has " + std::to_string(batch.cols()) +
                                " columns, expected " + std::to_string(k));
  }
  const Eigen::Index m = batch.rows();
  if (m == 0) {
    throw std::invalid_argument("GaussianStats::update: empty batch");
  }

  const double n = count;
  const double total = n + static_cast<double>(m);

  Eigen::VectorXd new_mean = (n * mean + batch.colwise().sum().transpose()) / total;
  Eigen::VectorXd shift = new_mean - mean;

  // Deviations are taken from the pre-update mean. Only the upper triangle is
  // accumulated and then mirrored so the result is exactly symmetric.
  Eigen::MatrixXd dev = batch.rowwise() - mean.transpose();
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = i; j < k; ++j) {
      const double scatter = dev.col(i).dot(dev.col(j));
      const double value = (n * cov(i, j) + scatter) / total - shift(i) * shift(j);
      cov(i, j) = value;
      cov(j, i) = value;
    }
  }
  mean = std::move(new_mean);
  count = total;
}

double GaussianStats::correlation(std::size_t i, std::size_t j) const {
  const auto k = dim();
  if (i >= k || j >= k) {
    throw std::out_of_range("GaussianStats::correlation: index out of range");
  }
  const auto a = static_cast<Eigen::Index>(i);
  const auto b = static_cast<Eigen::Index>(j);
  const double vi = cov(a, a);
  const double vj = cov(b, b);
  if (vi < kDegenerateVariance || vj < kDegenerateVariance) return 0.0;
  const double r = std::abs(cov(a, b)) / std::sqrt(vi * vj);
  return std::min(r, 1.0);
}

GaussianStats GaussianStats::slice(std::span<const std::size_t> positions) const {
  const auto k = static_cast<Eigen::Index>(positions.size());
  GaussianStats out = zero(positions.size());
  out.count = count;
  for (Eigen::Index a = 0; a < k; ++a) {
    const auto pa = static_cast<Eigen::Index>(positions[static_cast<std::size_t>(a)]);
    if (pa >= mean.size()) throw std::out_of_range("GaussianStats::slice: position out of range");
    out.mean(a) = mean(pa);
    for (Eigen::Index b = 0; b < k; ++b) {
      out.cov(a, b) = cov(pa, static_cast<Eigen::Index>(positions[static_cast<std::size_t>(b)]));
    }
  }
  return out;
}

GaussianStats updated(GaussianStats stats, const Eigen::Ref<const Eigen::MatrixXd>& batch) {
  stats.update(batch);
  return stats;
}

}  // namespace gspn
