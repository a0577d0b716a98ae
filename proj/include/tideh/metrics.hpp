#pragma once

#include <span>
#include <vector>

#include "tideh/model.hpp"

namespace tideh {

/// Observed counts of re-shares in (edges[k], edges[k+1]].
[[nodiscard]] std::vector<double> actual_activity(const Cascade& c, std::span<const double> edges);

/// Sum of absolute bin errors divided by (T_max - T) in hours.
[[nodiscard]] double error_per_hour(std::span<const double> predicted,
                                    std::span<const double> actual, double T, double T_max);

[[nodiscard]] double mean(std::span<const double> values);

/// Median; an even count averages the two middle order statistics.
[[nodiscard]] double median(std::span<const double> values);

} // namespace tideh
