#pragma once

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "md3/data.hpp"
#include "md3/stats.hpp"

namespace md3 {

struct RankedFeature {
    std::size_t feature = 0;
    double gain = 0.0;
};

/// Features in descending information gain; ties keep the lower index first.
using FeatureRanking = std::vector<RankedFeature>;

enum class InductionMode { top_fraction, bottom_fraction };

struct InductionPlan {
    Label target_class = Label::negative;
    std::vector<std::size_t> feature_subset;
    double change_point = 0.5;
    InductionMode mode = InductionMode::top_fraction;
    double fraction = 0.25;
};

/// Index of the first instance affected by the plan.
inline std::size_t change_index(double change_point, std::size_t n) {
    return static_cast<std::size_t>(std::ceil(change_point * static_cast<double>(n)));
}

inline void validate(const InductionPlan& plan, std::size_t dimension) {
    if (plan.feature_subset.empty())
        throw Error(ErrorKind::parameter, "induction plan has an empty feature subset");
    if (!(plan.change_point > 0.0 && plan.change_point < 1.0))
        throw Error(ErrorKind::parameter,
                    fmt::format("change point must lie strictly inside (0,1), got {}", plan.change_point));
    std::vector<std::size_t> sorted = plan.feature_subset;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw Error(ErrorKind::parameter, "induction plan repeats a feature");
    if (sorted.back() >= dimension)
        throw Error(ErrorKind::index,
                    fmt::format("feature index {} out of range for dimension {}", sorted.back(), dimension));
}

/// Information gain H(label) - H(label | bin) per feature with `bins`
/// equal-width bins on [0,1] (values outside are clamped into the edge bins).
inline FeatureRanking rank_by_information_gain(const Dataset& data, std::size_t bins = 10) {
    if (!data.fully_labeled() || data.empty())
        throw Error(ErrorKind::missing_labels, "information gain ranking needs labeled data");
    if (bins < 2)
        throw Error(ErrorKind::parameter, "information gain needs at least 2 bins");

    const double n = static_cast<double>(data.size());
    const double positives = static_cast<double>(data.count(Label::positive));
    const double label_entropy = binary_entropy(positives, n - positives);

    FeatureRanking ranking;
    for (std::size_t f = 0; f < data.dimension(); ++f) {
        std::vector<double> pos(bins, 0.0), neg(bins, 0.0);
        for (const auto& x : data.instances()) {
            const double v = std::clamp(x.features[f], 0.0, 1.0);
            auto b = std::min(static_cast<std::size_t>(v * static_cast<double>(bins)), bins - 1);
            (*x.label == Label::positive ? pos : neg)[b] += 1.0;
        }
        double conditional = 0.0;
        for (std::size_t b = 0; b < bins; ++b) {
            const double total = pos[b] + neg[b];
            if (total > 0)
                conditional += (total / n) * binary_entropy(pos[b], neg[b]);
        }
        ranking.push_back({f, std::max(0.0, label_entropy - conditional)});
    }
    std::stable_sort(ranking.begin(), ranking.end(),
                     [](const RankedFeature& a, const RankedFeature& b) { return a.gain > b.gain; });
    return ranking;
}

/// For every target-class instance at or after the change point, cyclically
/// right-shifts the values at the subset positions: f1 <- fk, fj <- f(j-1).
inline Dataset rotate_features(const Dataset& data, const InductionPlan& plan) {
    validate(plan, data.dimension());
    require_labels(data, "rotate_features");
    std::vector<Instance> rows = data.instances();
    const auto& subset = plan.feature_subset;
    const std::size_t k = subset.size();
    for (std::size_t i = change_index(plan.change_point, rows.size()); i < rows.size(); ++i) {
        auto& x = rows[i];
        if (x.label != plan.target_class)
            continue;
        const double last = x.features[subset[k - 1]];
        for (std::size_t j = k - 1; j > 0; --j)
            x.features[subset[j]] = x.features[subset[j - 1]];
        x.features[subset[0]] = last;
    }
    return Dataset(data.feature_names(), std::move(rows));
}

/// ceil(fraction * d) features taken from the head or tail of a ranking, in
/// ranking order.
inline std::vector<std::size_t> select_features(const FeatureRanking& ranking, InductionMode mode, double fraction) {
    if (!(fraction > 0.0 && fraction <= 1.0))
        throw Error(ErrorKind::parameter, fmt::format("fraction must lie in (0,1], got {}", fraction));
    const auto count = std::min(ranking.size(),
                                static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(ranking.size()) - 1e-9)));
    std::vector<std::size_t> subset;
    if (mode == InductionMode::top_fraction) {
        for (std::size_t i = 0; i < count; ++i)
            subset.push_back(ranking[i].feature);
    } else {
        for (std::size_t i = ranking.size() - count; i < ranking.size(); ++i)
            subset.push_back(ranking[i].feature);
    }
    return subset;
}

struct InductionResult {
    Dataset data;
    InductionPlan plan;
    FeatureRanking ranking;
};

/// Rank, select, rotate.
inline InductionResult induce(const Dataset& data, InductionMode mode, double fraction = 0.25,
                              double change_point = 0.5, Label target_class = Label::negative,
                              std::size_t bins = 10) {
    auto ranking = rank_by_information_gain(data, bins);
    InductionPlan plan{target_class, select_features(ranking, mode, fraction), change_point, mode, fraction};
    auto induced = rotate_features(data, plan);
    return {std::move(induced), std::move(plan), std::move(ranking)};
}

} // namespace md3
