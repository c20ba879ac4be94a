#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "md3/data.hpp"
#include "md3/random.hpp"

namespace md3 {

/// Isotropic Gaussian per class.
struct GaussianBlobSpec {
    std::vector<double> positive_mean;
    std::vector<double> negative_mean;
    double positive_stddev = 0.1;
    double negative_stddev = 0.1;
};

enum class ScenarioKind { a0, a1, a2, a3, a4, b0, b1, c0, c1, hd20 };

struct ScenarioId {
    ScenarioKind kind = ScenarioKind::a0;
    /// Drifted-feature count for hd20, 0..15.
    int drifted_features = 0;

    friend bool operator==(const ScenarioId&, const ScenarioId&) = default;
};

inline constexpr int hd20_dimension = 20;
inline constexpr int hd20_irrelevant = 5;

inline std::string to_string(const ScenarioId& id) {
    static constexpr std::array<const char*, 9> names{"A0", "A1", "A2", "A3", "A4", "B0", "B1", "C0", "C1"};
    if (id.kind == ScenarioKind::hd20)
        return fmt::format("hd20:{}", id.drifted_features);
    return names[static_cast<std::size_t>(id.kind)];
}

/// Parses "A0".."C1" (case-insensitive) or "hd20:<i>".
inline ScenarioId parse_scenario(std::string_view text) {
    std::string lower(text);
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    static constexpr std::array<const char*, 9> names{"a0", "a1", "a2", "a3", "a4", "b0", "b1", "c0", "c1"};
    for (std::size_t k = 0; k < names.size(); ++k)
        if (lower == names[k])
            return {static_cast<ScenarioKind>(k), 0};
    if (lower.rfind("hd20:", 0) == 0) {
        auto tail = lower.substr(5);
        auto value = detail::parse_double(tail);
        if (!value || *value != std::floor(*value))
            throw Error(ErrorKind::parameter, fmt::format("bad hd20 drift count '{}'", tail));
        int i = static_cast<int>(*value);
        if (i < 0 || i > 15)
            throw Error(ErrorKind::parameter, fmt::format("hd20 drift count must lie in 0..15, got {}", i));
        return {ScenarioKind::hd20, i};
    }
    throw Error(ErrorKind::parameter, fmt::format("unknown scenario '{}'", text));
}

/// Scenario registry. The 2-D/3-D parameters are calibration constants that
/// reproduce the qualitative pattern (error/margin-density/Hellinger) of the
/// proof-of-concept drifts:
///   A1 moves class +1 across the boundary along x,
///   A2 / A3 shift class +1 by the same amount away from / toward the margin,
///   A4 throws class -1 far past class +1 (away from the margin),
///   B1 shifts the irrelevant z axis,
///   C0 is a tightly packed pair; C1 separates and swaps the classes.
struct ScenarioDistributions {
    GaussianBlobSpec before;
    GaussianBlobSpec after;
};

namespace detail {

inline GaussianBlobSpec blobs(std::vector<double> pos, std::vector<double> neg, double stddev) {
    return {std::move(pos), std::move(neg), stddev, stddev};
}

inline GaussianBlobSpec hd20_blobs(int drifted) {
    GaussianBlobSpec spec;
    spec.positive_mean.assign(hd20_dimension, 0.85);
    spec.negative_mean.assign(hd20_dimension, 0.15);
    for (int j = 0; j < hd20_irrelevant; ++j) {
        spec.positive_mean[static_cast<std::size_t>(j)] = 0.5;
        spec.negative_mean[static_cast<std::size_t>(j)] = 0.5;
    }
    for (int j = 0; j < drifted; ++j)
        spec.negative_mean[static_cast<std::size_t>(j)] = 0.75;
    spec.positive_stddev = spec.negative_stddev = 0.1;
    return spec;
}

} // namespace detail

inline constexpr double scenario_stddev = 0.08;

inline ScenarioDistributions scenario_distributions(const ScenarioId& id) {
    using detail::blobs;
    const double s = scenario_stddev;
    const auto a0 = blobs({0.7, 0.7}, {0.3, 0.3}, s);
    const auto b0 = blobs({0.7, 0.7, 0.3}, {0.3, 0.3, 0.3}, s);
    const auto c0 = blobs({0.55, 0.55}, {0.45, 0.45}, s);
    switch (id.kind) {
    case ScenarioKind::a0: return {a0, a0};
    case ScenarioKind::a1: return {a0, blobs({0.3, 0.7}, {0.3, 0.3}, s)};
    case ScenarioKind::a2: return {a0, blobs({0.82, 0.82}, {0.3, 0.3}, s)};
    case ScenarioKind::a3: return {a0, blobs({0.55, 0.55}, {0.3, 0.3}, s)};
    case ScenarioKind::a4: return {a0, blobs({0.7, 0.7}, {0.9, 0.9}, s)};
    case ScenarioKind::b0: return {b0, b0};
    case ScenarioKind::b1: return {b0, blobs({0.7, 0.7, 0.7}, {0.3, 0.3, 0.7}, s)};
    case ScenarioKind::c0: return {c0, c0};
    case ScenarioKind::c1: return {c0, blobs({0.2, 0.2}, {0.8, 0.8}, s)};
    case ScenarioKind::hd20:
        if (id.drifted_features < 0 || id.drifted_features > 15)
            throw Error(ErrorKind::parameter,
                        fmt::format("hd20 drift count must lie in 0..15, got {}", id.drifted_features));
        return {detail::hd20_blobs(0), detail::hd20_blobs(id.drifted_features)};
    }
    throw Error(ErrorKind::parameter, "unknown scenario");
}

inline std::vector<std::string> scenario_feature_names(std::size_t dimension) {
    if (dimension == 2)
        return {"x", "y"};
    if (dimension == 3)
        return {"x", "y", "z"};
    return Dataset::default_names(dimension);
}

/// n_per_class samples of each class from `spec`, clamped to [0,1], in
/// shuffled order.
inline std::vector<Instance> sample_blobs(const GaussianBlobSpec& spec, std::size_t n_per_class, Rng& rng) {
    if (spec.positive_mean.size() != spec.negative_mean.size() || spec.positive_mean.empty())
        throw Error(ErrorKind::shape, "class means must be non-empty and of equal length");
    if (!(spec.positive_stddev > 0.0) || !(spec.negative_stddev > 0.0))
        throw Error(ErrorKind::parameter, "standard deviation must be positive");
    std::vector<Instance> rows;
    rows.reserve(2 * n_per_class);
    std::normal_distribution<double> unit(0.0, 1.0);
    auto draw = [&](const std::vector<double>& mu, double sd, Label y) {
        Instance x;
        x.label = y;
        x.features.reserve(mu.size());
        for (double m : mu)
            x.features.push_back(std::clamp(m + sd * unit(rng), 0.0, 1.0));
        rows.push_back(std::move(x));
    };
    for (std::size_t i = 0; i < n_per_class; ++i) {
        draw(spec.positive_mean, spec.positive_stddev, Label::positive);
        draw(spec.negative_mean, spec.negative_stddev, Label::negative);
    }
    std::shuffle(rows.begin(), rows.end(), rng);
    return rows;
}

enum class ScenarioPhase { before, after };

/// Independent draw of one phase of a scenario.
inline Dataset generate_phase(const ScenarioId& id, ScenarioPhase phase, std::size_t n_per_class,
                              std::uint64_t seed) {
    if (n_per_class < 1)
        throw Error(ErrorKind::parameter, "n_per_class must be at least 1");
    auto dist = scenario_distributions(id);
    const auto& spec = phase == ScenarioPhase::before ? dist.before : dist.after;
    Rng rng(derive_seed(seed, phase == ScenarioPhase::before ? "scenario-before" : "scenario-after"));
    return Dataset(scenario_feature_names(spec.positive_mean.size()), sample_blobs(spec, n_per_class, rng));
}

/// Abrupt-drift stream for a scenario: each class contributes n_per_class
/// rows, the first ceil(n/2) drawn from the initial distribution and the
/// remaining floor(n/2) from the changed one. The change point is therefore
/// at row 2 * ceil(n/2).
inline Dataset generate_scenario(const ScenarioId& id, std::size_t n_per_class, std::uint64_t seed) {
    if (n_per_class < 1)
        throw Error(ErrorKind::parameter, "n_per_class must be at least 1");
    const std::size_t n_after = n_per_class / 2;
    const std::size_t n_before = n_per_class - n_after;
    auto before = generate_phase(id, ScenarioPhase::before, n_before, seed);
    std::vector<Instance> rows = before.instances();
    if (n_after > 0) {
        auto after = generate_phase(id, ScenarioPhase::after, n_after, seed);
        rows.insert(rows.end(), after.instances().begin(), after.instances().end());
    }
    return Dataset(before.feature_names(), std::move(rows));
}

inline std::size_t scenario_change_point(std::size_t n_per_class) { return 2 * (n_per_class - n_per_class / 2); }

// ---------------------------------------------------------------------------
// Static 16-feature benchmark (a stand-in for small UCI tables such as the
// digit pairs) used as raw material for drift induction.

/// Twelve informative features with decreasing class separation and
/// alternating polarity, followed by four class-independent features with
/// distinct means. Balanced classes, shuffled, clamped to [0,1].
inline GaussianBlobSpec static16_spec() {
    static constexpr std::array<double, 12> separation{0.10, 0.09, 0.08, 0.07, 0.06, 0.06,
                                                       0.06, 0.06, 0.05, 0.05, 0.05, 0.05};
    static constexpr std::array<double, 4> irrelevant{0.35, 0.65, 0.45, 0.55};
    GaussianBlobSpec spec;
    for (std::size_t j = 0; j < separation.size(); ++j) {
        const double polarity = j % 2 == 0 ? 1.0 : -1.0;
        spec.positive_mean.push_back(0.5 + polarity * separation[j]);
        spec.negative_mean.push_back(0.5 - polarity * separation[j]);
    }
    for (double m : irrelevant) {
        spec.positive_mean.push_back(m);
        spec.negative_mean.push_back(m);
    }
    spec.positive_stddev = spec.negative_stddev = 0.07;
    return spec;
}

inline Dataset generate_static16(std::size_t rows, std::uint64_t seed) {
    if (rows < 2)
        throw Error(ErrorKind::parameter, "static16 needs at least 2 rows");
    Rng rng(derive_seed(seed, "static16"));
    auto spec = static16_spec();
    auto instances = sample_blobs(spec, (rows + 1) / 2, rng);
    instances.resize(rows);
    return Dataset::with_default_names(spec.positive_mean.size(), std::move(instances));
}

} // namespace md3
