#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "md3/data.hpp"
#include "md3/stats.hpp"

namespace md3 {

struct TreeConfig {
    std::size_t max_depth = 10;
    std::size_t min_leaf = 2;
};

struct TreeNode {
    // Internal nodes: feature >= 0, children set. Leaves: feature == -1.
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double negatives = 0.0;
    double positives = 0.0;
    Label label = Label::positive;

    bool leaf() const noexcept { return feature < 0; }
};

/// Binary decision tree over numeric thresholds: x[feature] <= threshold goes
/// left. Node 0 is the root.
struct TreeModel {
    std::vector<TreeNode> nodes;
    std::size_t dimension = 0;

    const TreeNode& leaf_for(std::span<const double> x) const {
        if (x.size() != dimension)
            throw Error(ErrorKind::shape, fmt::format("tree expects {} features, got {}", dimension, x.size()));
        const TreeNode* node = &nodes.front();
        while (!node->leaf())
            node = &nodes[static_cast<std::size_t>(x[static_cast<std::size_t>(node->feature)] <= node->threshold
                                                       ? node->left
                                                       : node->right)];
        return *node;
    }

    Label predict(std::span<const double> x) const { return leaf_for(x).label; }

    /// Leaf class frequencies as (p_plus, p_minus).
    std::pair<double, double> leaf_probabilities(std::span<const double> x) const {
        const auto& leaf = leaf_for(x);
        const double total = leaf.negatives + leaf.positives;
        const double p = total > 0 ? leaf.positives / total : 0.5;
        return {p, 1.0 - p};
    }

    std::size_t depth() const {
        std::size_t best = 0;
        std::vector<std::pair<int, std::size_t>> stack{{0, 0}};
        while (!stack.empty()) {
            auto [id, depth] = stack.back();
            stack.pop_back();
            best = std::max(best, depth);
            const auto& node = nodes[static_cast<std::size_t>(id)];
            if (!node.leaf()) {
                stack.emplace_back(node.left, depth + 1);
                stack.emplace_back(node.right, depth + 1);
            }
        }
        return best;
    }
};

namespace detail {

struct SplitCandidate {
    double gain = -1.0; // below any real gain, so zero-gain splits still count
    int feature = -1;
    double threshold = 0.0;
};

inline SplitCandidate best_split(const Dataset& data, std::span<const std::size_t> rows, std::size_t min_leaf) {
    const std::size_t n = rows.size();
    double pos_total = 0;
    for (auto r : rows)
        pos_total += data[r].label == Label::positive ? 1.0 : 0.0;
    const double parent = binary_entropy(pos_total, static_cast<double>(n) - pos_total);

    SplitCandidate best;
    std::vector<std::size_t> sorted(rows.begin(), rows.end());
    for (std::size_t f = 0; f < data.dimension(); ++f) {
        std::stable_sort(sorted.begin(), sorted.end(), [&](std::size_t a, std::size_t b) {
            return data[a].features[f] < data[b].features[f];
        });
        double pos_left = 0;
        for (std::size_t k = 0; k + 1 < n; ++k) {
            pos_left += data[sorted[k]].label == Label::positive ? 1.0 : 0.0;
            const double here = data[sorted[k]].features[f];
            const double next = data[sorted[k + 1]].features[f];
            if (!(here < next))
                continue;
            const std::size_t n_left = k + 1;
            const std::size_t n_right = n - n_left;
            if (n_left < min_leaf || n_right < min_leaf)
                continue;
            const double nl = static_cast<double>(n_left);
            const double nr = static_cast<double>(n_right);
            const double gain = parent - (nl / static_cast<double>(n)) * binary_entropy(pos_left, nl - pos_left) -
                                (nr / static_cast<double>(n)) *
                                    binary_entropy(pos_total - pos_left, nr - (pos_total - pos_left));
            // Earlier (feature, threshold) wins ties.
            if (gain > best.gain + 1e-12) {
                best.gain = gain;
                best.feature = static_cast<int>(f);
                best.threshold = 0.5 * (here + next);
            }
        }
    }
    return best;
}

} // namespace detail

/// Greedy top-down induction maximising information gain (log base 2) over
/// (feature, midpoint threshold) splits. Stops on purity, max depth, or when
/// every split would leave a child smaller than min_leaf. A zero-gain split is
/// still taken on an impure node, so XOR-like layouts can be resolved one
/// level down.
/// Ties go to the lower feature index, then the lower threshold. Single-class
/// data yields a single leaf. Leaf label is the majority class, ties to +1.
inline TreeModel train_tree(const Dataset& data, const TreeConfig& config = {}) {
    require_labels(data, "train_tree");
    if (data.empty())
        throw Error(ErrorKind::empty_input, "train_tree: empty dataset");

    TreeModel tree;
    tree.dimension = data.dimension();

    struct Pending {
        int node;
        std::vector<std::size_t> rows;
        std::size_t depth;
    };
    std::vector<std::size_t> all(data.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    tree.nodes.emplace_back();
    std::vector<Pending> stack;
    stack.push_back({0, std::move(all), 0});

    while (!stack.empty()) {
        Pending job = std::move(stack.back());
        stack.pop_back();
        TreeNode node;
        for (auto r : job.rows)
            (data[r].label == Label::positive ? node.positives : node.negatives) += 1.0;
        node.label = node.positives >= node.negatives ? Label::positive : Label::negative;

        const bool pure = node.positives == 0 || node.negatives == 0;
        if (!pure && job.depth < config.max_depth && job.rows.size() >= 2 * config.min_leaf) {
            auto split = detail::best_split(data, job.rows, std::max<std::size_t>(config.min_leaf, 1));
            if (split.feature >= 0) {
                std::vector<std::size_t> left, right;
                for (auto r : job.rows)
                    (data[r].features[static_cast<std::size_t>(split.feature)] <= split.threshold ? left : right)
                        .push_back(r);
                node.feature = split.feature;
                node.threshold = split.threshold;
                node.left = static_cast<int>(tree.nodes.size());
                node.right = node.left + 1;
                tree.nodes.emplace_back();
                tree.nodes.emplace_back();
                // Right pushed first so the left subtree is expanded first.
                stack.push_back({node.right, std::move(right), job.depth + 1});
                stack.push_back({node.left, std::move(left), job.depth + 1});
            }
        }
        tree.nodes[static_cast<std::size_t>(job.node)] = node;
    }
    return tree;
}

} // namespace md3
