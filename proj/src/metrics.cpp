#include "tideh/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tideh/error.hpp"

namespace tideh {

std::vector<double> actual_activity(const Cascade& c, std::span<const double> edges) {
    if (edges.size() < 2)
        throw Error(ErrorCode::bin_misalignment, "actual_activity: need at least two edges");
    std::vector<double> out;
    out.reserve(edges.size() - 1);
    for (std::size_t b = 0; b + 1 < edges.size(); ++b)
        out.push_back(static_cast<double>(c.retweets_until(edges[b + 1]) -
                                          c.retweets_until(edges[b])));
    return out;
}

double error_per_hour(std::span<const double> predicted, std::span<const double> actual, double T,
                      double T_max) {
    if (predicted.size() != actual.size() || predicted.empty())
        throw Error(ErrorCode::bin_misalignment,
                    "error_per_hour: series have " + std::to_string(predicted.size()) + " and " +
                        std::to_string(actual.size()) + " bins");
    if (!(T_max > T))
        throw Error(ErrorCode::invalid_argument, "error_per_hour: need T < T_max");
    double sum = 0.0;
    for (std::size_t k = 0; k < predicted.size(); ++k) sum += std::abs(predicted[k] - actual[k]);
    return sum / ((T_max - T) / kSecondsPerHour);
}

double mean(std::span<const double> values) {
    if (values.empty()) return std::nan("");
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum / static_cast<double>(values.size());
}

double median(std::span<const double> values) {
    if (values.empty()) return std::nan("");
    std::vector<double> v(values.begin(), values.end());
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    if (n % 2 == 1) return v[n / 2];
    return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

} // namespace tideh
