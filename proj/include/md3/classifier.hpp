#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <variant>

#include "md3/ensemble.hpp"
#include "md3/linear.hpp"
#include "md3/tree.hpp"

namespace md3 {

enum class LearnerKind { linear_svm, logistic_l2, logistic_l1, tree, subspace_ensemble };

struct TrainConfig {
    LearnerKind learner = LearnerKind::linear_svm;
    double c = 1.0;
    std::size_t members = 20;
    /// J; defaults to ceil(0.5 * d).
    std::optional<std::size_t> subspace_size;
    BaseLearner base = BaseLearner::tree;
    TreeConfig tree;
    std::uint64_t seed = 0;

    std::size_t resolved_subspace_size(std::size_t dimension) const {
        return subspace_size.value_or((dimension + 1) / 2);
    }
};

/// Linear SVM with C = 1.
inline TrainConfig svm_config(std::uint64_t seed = 0) {
    TrainConfig config;
    config.seed = seed;
    return config;
}

/// 20 trees, each on half of the features.
inline TrainConfig random_subspace_config(std::uint64_t seed = 0) {
    TrainConfig config;
    config.learner = LearnerKind::subspace_ensemble;
    config.seed = seed;
    return config;
}

using Classifier = std::variant<LinearModel, TreeModel, SubspaceEnsemble>;

inline Classifier train(const Dataset& data, const TrainConfig& config) {
    switch (config.learner) {
    case LearnerKind::linear_svm: return train_linear_svm(data, config.c, config.seed);
    case LearnerKind::logistic_l2: return train_logistic(data, Penalty::l2, config.c, config.seed);
    case LearnerKind::logistic_l1: return train_logistic(data, Penalty::l1, config.c, config.seed);
    case LearnerKind::tree: return train_tree(data, config.tree);
    case LearnerKind::subspace_ensemble: {
        MemberConfig member{config.base, config.c, config.tree};
        return train_subspace_ensemble(data, config.members, config.resolved_subspace_size(data.dimension()),
                                       member, config.seed);
    }
    }
    throw Error(ErrorKind::parameter, "unknown learner kind");
}

inline Label predict(const Classifier& model, std::span<const double> x) {
    return std::visit([&](const auto& m) { return m.predict(x); }, model);
}

inline std::size_t dimension(const Classifier& model) {
    return std::visit(
        [](const auto& m) -> std::size_t {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, LinearModel>)
                return m.dimension();
            else
                return m.dimension;
        },
        model);
}

/// |p(+1|x) - p(-1|x)|. Ensembles use vote fractions, trees leaf frequencies,
/// logistic models the posterior. A hinge SVM has no posterior; its
/// confidence is min(|w.x + b|, 1), which is below 1 exactly inside the margin.
inline double confidence(const Classifier& model, std::span<const double> x) {
    return std::visit(
        [&](const auto& m) -> double {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, LinearModel>) {
                if (m.probabilistic())
                    return std::abs(2.0 * m.probability_positive(x) - 1.0);
                return std::min(std::abs(m.score(x)), 1.0);
            } else if constexpr (std::is_same_v<T, TreeModel>) {
                auto [pp, pm] = m.leaf_probabilities(x);
                return std::abs(pp - pm);
            } else {
                auto [pp, pm] = m.confidence(x);
                return std::abs(pp - pm);
            }
        },
        model);
}

inline double accuracy(const Classifier& model, const Dataset& data) {
    require_labels(data, "accuracy");
    if (data.empty())
        throw Error(ErrorKind::empty_input, "accuracy of an empty dataset");
    std::size_t correct = 0;
    for (const auto& x : data.instances())
        correct += predict(model, x.features) == *x.label ? 1 : 0;
    return static_cast<double>(correct) / static_cast<double>(data.size());
}

} // namespace md3
