#pragma once

// Independent reference computations. None of these call into the code
// paths they are used to check.

#include <cstdint>
#include <span>
#include <vector>

namespace sisext::oracles {

/// P(hit y before 0 | start x) for a walk with up-step probability
/// lambda / (lambda + mu), by a dense linear solve over {0..y}.
double ruin_probability_linear_system(double lambda, double mu, std::int64_t x, std::int64_t y);

/// E|X_k - Y_k| for k = 0..steps under the contraction coupling of two
/// discrete chains, by propagating the full joint law over {0..N}^2.
std::vector<double> contraction_expected_distance(std::int64_t N, double lambda, double mu, double K,
                                                  std::int64_t x0, std::int64_t y0, std::uint64_t steps);

/// Integral of 1 - cdf over a uniform grid (composite Simpson; the number of
/// intervals must be even), plus an exponential tail fitted to the last two
/// survival values.
double mean_from_cdf(std::span<const double> cdf, double dt);

}  // namespace sisext::oracles
