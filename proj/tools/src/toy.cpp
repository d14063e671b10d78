#include "gspn_cli/toy.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <random>

namespace gspn::cli {

namespace {

constexpr std::array<std::array<double, 2>, 4> kCentres{{{1.0, 2.0}, {11.0, 12.0}, {21.0, 22.0}, {31.0, 32.0}}};
constexpr double kVar0 = 1.0;
constexpr double kVar1 = 2.0;
constexpr double kMean2 = 3.0;
constexpr double kVar2 = 3.0;

double normal_log_pdf(double x, double mean, double var) {
  const double d = x - mean;
  return -0.5 * (std::log(2.0 * std::numbers::pi * var) + d * d / var);
}

}  // namespace

Eigen::MatrixXd generate_toy(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, 3);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd rows(static_cast<Eigen::Index>(n), 3);
  for (Eigen::Index r = 0; r < rows.rows(); ++r) {
    const auto& c = kCentres[static_cast<std::size_t>(pick(rng))];
    rows(r, 0) = c[0] + std::sqrt(kVar0) * normal(rng);
    rows(r, 1) = c[1] + std::sqrt(kVar1) * normal(rng);
    rows(r, 2) = kMean2 + std::sqrt(kVar2) * normal(rng);
  }
  return rows;
}

double toy_log_density(std::span<const double> row) {
  double hi = -INFINITY;
  std::array<double, 4> terms{};
  for (std::size_t k = 0; k < kCentres.size(); ++k) {
    terms[k] = std::log(0.25) + normal_log_pdf(row[0], kCentres[k][0], kVar0) +
               normal_log_pdf(row[1], kCentres[k][1], kVar1);
    hi = std::max(hi, terms[k]);
  }
  double acc = 0.0;
  for (double t : terms) acc += std::exp(t - hi);
  return hi + std::log(acc) + normal_log_pdf(row[2], kMean2, kVar2);
}

}  // namespace gspn::cli
