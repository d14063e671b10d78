#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

#include <Eigen/Dense>

namespace gspn::cli {

/// Three-variable benchmark: (x0, x1) from an equal-weight mixture of four
/// axis-aligned Gaussians with variances (1, 2) centred at (1, 2), (11, 12),
/// (21, 22), (31, 32); x2 ~ N(3, 3) independently.
Eigen::MatrixXd generate_toy(std::size_t n, std::uint64_t seed);

/// Exact log-density of the generating distribution at a row of length 3.
double toy_log_density(std::span<const double> row);

}  // namespace gspn::cli
