#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <span>
#include <variant>
#include <vector>

#include "md3/data.hpp"
#include "md3/linear.hpp"
#include "md3/log.hpp"
#include "md3/random.hpp"
#include "md3/tree.hpp"

namespace md3 {

enum class BaseLearner { tree, linear_svm, logistic_l2, logistic_l1 };

struct EnsembleMember {
    /// Feature indices in draw order; the member model sees them in this order.
    std::vector<std::size_t> features;
    std::variant<TreeModel, LinearModel> model;

    std::vector<double> project(std::span<const double> x) const {
        std::vector<double> out;
        out.reserve(features.size());
        for (auto f : features)
            out.push_back(x[f]);
        return out;
    }

    Label vote(std::span<const double> x) const {
        auto view = project(x);
        return std::visit([&](const auto& m) { return m.predict(view); }, model);
    }
};

/// Random-subspace ensemble with hard majority voting.
struct SubspaceEnsemble {
    std::size_t dimension = 0;
    BaseLearner base = BaseLearner::tree;
    std::vector<EnsembleMember> members;

    std::size_t positive_votes(std::span<const double> x) const {
        if (x.size() != dimension)
            throw Error(ErrorKind::shape, fmt::format("ensemble expects {} features, got {}", dimension, x.size()));
        std::size_t votes = 0;
        for (const auto& m : members)
            votes += m.vote(x) == Label::positive ? 1 : 0;
        return votes;
    }

    /// (p_plus, p_minus) as vote fractions.
    std::pair<double, double> confidence(std::span<const double> x) const {
        const double p = static_cast<double>(positive_votes(x)) / static_cast<double>(members.size());
        return {p, 1.0 - p};
    }

    /// Majority vote, exact ties to +1.
    Label predict(std::span<const double> x) const {
        return 2 * positive_votes(x) >= members.size() ? Label::positive : Label::negative;
    }
};

struct MemberConfig {
    BaseLearner base = BaseLearner::tree;
    double c = 1.0;
    TreeConfig tree;
};

namespace detail {

inline Dataset project_dataset(const Dataset& data, std::span<const std::size_t> features) {
    std::vector<std::string> names;
    for (auto f : features)
        names.push_back(data.feature_names()[f]);
    std::vector<Instance> rows;
    rows.reserve(data.size());
    for (const auto& x : data.instances()) {
        Instance p;
        p.label = x.label;
        p.features.reserve(features.size());
        for (auto f : features)
            p.features.push_back(x.features[f]);
        rows.push_back(std::move(p));
    }
    return Dataset(std::move(names), std::move(rows));
}

inline std::variant<TreeModel, LinearModel> train_member(const Dataset& view, const MemberConfig& config,
                                                         std::uint64_t seed) {
    switch (config.base) {
    case BaseLearner::tree: return train_tree(view, config.tree);
    case BaseLearner::linear_svm: return train_linear_svm(view, config.c, seed);
    case BaseLearner::logistic_l2: return train_logistic(view, Penalty::l2, config.c, seed);
    case BaseLearner::logistic_l1: return train_logistic(view, Penalty::l1, config.c, seed);
    }
    throw Error(ErrorKind::parameter, "unknown base learner");
}

} // namespace detail

/// Trains one member per given feature subset (explicit subspaces, e.g. the
/// two orthogonal single-feature trees of a 2-D demonstration).
inline SubspaceEnsemble train_subspace_ensemble(const Dataset& data,
                                                const std::vector<std::vector<std::size_t>>& subsets,
                                                const MemberConfig& config, std::uint64_t seed) {
    require_labels(data, "train_subspace_ensemble");
    if (subsets.size() < 2)
        throw Error(ErrorKind::parameter, "a subspace ensemble needs at least 2 members");
    SubspaceEnsemble ensemble;
    ensemble.dimension = data.dimension();
    ensemble.base = config.base;
    for (std::size_t k = 0; k < subsets.size(); ++k) {
        const auto& subset = subsets[k];
        if (subset.empty())
            throw Error(ErrorKind::parameter, "empty member subspace");
        std::vector<std::size_t> sorted = subset;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end() || sorted.back() >= data.dimension())
            throw Error(ErrorKind::index, fmt::format("member {} subspace has repeated or out-of-range indices", k));
        auto view = detail::project_dataset(data, subset);
        ensemble.members.push_back(
            {subset, detail::train_member(view, config, derive_seed(seed, "ensemble-member", k))});
    }
    return ensemble;
}

/// K members, each on J features drawn without replacement (independently
/// per member, so members may overlap). Deterministic per seed.
inline SubspaceEnsemble train_subspace_ensemble(const Dataset& data, std::size_t members, std::size_t subspace_size,
                                                const MemberConfig& config, std::uint64_t seed) {
    if (members < 2)
        throw Error(ErrorKind::parameter, fmt::format("ensemble needs K >= 2 members, got {}", members));
    if (subspace_size < 1 || subspace_size > data.dimension())
        throw Error(ErrorKind::parameter,
                    fmt::format("subspace size J={} must lie in [1, {}]", subspace_size, data.dimension()));
    Rng rng(derive_seed(seed, "subspaces"));
    std::vector<std::vector<std::size_t>> subsets;
    std::vector<bool> covered(data.dimension(), false);
    for (std::size_t k = 0; k < members; ++k) {
        std::vector<std::size_t> pool(data.dimension());
        std::iota(pool.begin(), pool.end(), std::size_t{0});
        // Partial Fisher-Yates; the drawn prefix keeps draw order, which also
        // spreads tied splits across features.
        for (std::size_t j = 0; j < subspace_size; ++j) {
            std::uniform_int_distribution<std::size_t> pick(j, pool.size() - 1);
            std::swap(pool[j], pool[pick(rng)]);
            covered[pool[j]] = true;
        }
        pool.resize(subspace_size);
        subsets.push_back(std::move(pool));
    }
    auto uncovered = static_cast<std::size_t>(std::count(covered.begin(), covered.end(), false));
    if (uncovered > 0)
        log_warning(fmt::format("{} of {} features are not used by any ensemble member", uncovered,
                                data.dimension()));
    return train_subspace_ensemble(data, subsets, config, seed);
}

} // namespace md3
