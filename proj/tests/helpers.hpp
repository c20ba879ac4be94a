#pragma once

#include <random>
#include <vector>

#include "md3/md3.hpp"

namespace md3::testing {

inline Dataset make_dataset(const std::vector<std::vector<double>>& rows, const std::vector<int>& labels) {
    std::vector<Instance> out;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        Instance x;
        x.features = rows[i];
        if (i < labels.size())
            x.label = labels[i] > 0 ? Label::positive : Label::negative;
        out.push_back(std::move(x));
    }
    return Dataset::with_default_names(rows.empty() ? 0 : rows[0].size(), std::move(out));
}

/// Two 1-D Gaussian blobs, `n` samples each, interleaved.
inline Dataset blobs_1d(double negative_mean, double positive_mean, double stddev, std::size_t n,
                        std::uint64_t seed) {
    Rng rng(seed);
    std::normal_distribution<double> noise(0.0, stddev);
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    for (std::size_t i = 0; i < n; ++i) {
        rows.push_back({negative_mean + noise(rng)});
        labels.push_back(-1);
        rows.push_back({positive_mean + noise(rng)});
        labels.push_back(1);
    }
    return make_dataset(rows, labels);
}

/// An ensemble whose members are single-leaf trees, `positive` of them voting +1.
inline SubspaceEnsemble constant_vote_ensemble(std::size_t members, std::size_t positive, std::size_t dimension = 1) {
    SubspaceEnsemble e;
    e.dimension = dimension;
    for (std::size_t k = 0; k < members; ++k) {
        TreeModel leaf;
        leaf.dimension = 1;
        TreeNode node;
        node.label = k < positive ? Label::positive : Label::negative;
        (k < positive ? node.positives : node.negatives) = 1.0;
        leaf.nodes.push_back(node);
        e.members.push_back({{0}, leaf});
    }
    return e;
}

inline LinearModel linear(std::vector<double> w, double b, LinearKind kind = LinearKind::svm) {
    LinearModel m;
    m.weights = std::move(w);
    m.bias = b;
    m.kind = kind;
    return m;
}

} // namespace md3::testing
