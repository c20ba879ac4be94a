#pragma once

#include <cmath>
#include <numeric>
#include <span>

namespace md3 {

/// Shannon entropy in bits of a count vector; 0 log 0 = 0.
inline double entropy(std::span<const double> counts) {
    const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
    if (total <= 0.0)
        return 0.0;
    double h = 0.0;
    for (double c : counts) {
        if (c > 0.0) {
            const double p = c / total;
            h -= p * std::log2(p);
        }
    }
    return h;
}

inline double binary_entropy(double a, double b) {
    const double counts[2] = {a, b};
    return entropy(counts);
}

inline double mean(std::span<const double> values) {
    if (values.empty())
        return 0.0;
    return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

/// Population standard deviation (divides by n).
inline double population_stddev(std::span<const double> values) {
    if (values.empty())
        return 0.0;
    const double m = mean(values);
    double ss = 0.0;
    for (double v : values)
        ss += (v - m) * (v - m);
    return std::sqrt(ss / static_cast<double>(values.size()));
}

/// Forgetting factor for a chunk of influence N: (N - 1) / N.
inline double forgetting_factor(std::size_t chunk) {
    return static_cast<double>(chunk - 1) / static_cast<double>(chunk);
}

inline double ewma_update(double previous, double signal, double lambda) {
    return lambda * previous + (1.0 - lambda) * signal;
}

} // namespace md3
