#pragma once

#include <cmath>
#include <span>

#include "md3/classifier.hpp"

namespace md3 {

enum class MarginKind { svm_geometric, ensemble_disagreement, probabilistic_confidence };

struct MarginSpec {
    MarginKind kind = MarginKind::svm_geometric;
    /// Ignored by svm_geometric. Values in [0.25, 0.75] are the useful range.
    double theta_margin = 0.5;
};

inline void validate(const MarginSpec& spec) {
    if (spec.kind != MarginKind::svm_geometric && !(spec.theta_margin > 0.0 && spec.theta_margin < 1.0))
        throw Error(ErrorKind::parameter, fmt::format("theta_margin must lie in (0,1), got {}", spec.theta_margin));
}

/// Margin kind that matches a learner: hinge SVMs have a geometric margin,
/// ensembles a disagreement margin, everything else a posterior margin.
inline MarginSpec default_margin_spec(LearnerKind learner, double theta_margin = 0.5) {
    switch (learner) {
    case LearnerKind::linear_svm: return {MarginKind::svm_geometric, theta_margin};
    case LearnerKind::subspace_ensemble: return {MarginKind::ensemble_disagreement, theta_margin};
    default: return {MarginKind::probabilistic_confidence, theta_margin};
    }
}

/// 1 iff |w.x + b| <= 1.
inline int svm_margin_signal(const LinearModel& model, std::span<const double> x) {
    return std::abs(model.score(x)) <= 1.0 ? 1 : 0;
}

/// 1 iff |p_plus - p_minus| <= theta_margin over the vote fractions.
inline int ensemble_margin_signal(const SubspaceEnsemble& ensemble, std::span<const double> x, double theta_margin) {
    // Exact rational comparison: |2v - K| / K <= theta.
    const auto votes = static_cast<double>(ensemble.positive_votes(x));
    const auto k = static_cast<double>(ensemble.members.size());
    return std::abs(2.0 * votes - k) <= theta_margin * k + 1e-12 ? 1 : 0;
}

/// 1 iff |p(+1|x) - p(-1|x)| <= theta_margin under the logistic link.
inline int probabilistic_margin_signal(const LinearModel& model, std::span<const double> x, double theta_margin) {
    if (!model.probabilistic())
        throw Error(ErrorKind::parameter, "probabilistic margin needs a logistic model");
    return std::abs(2.0 * model.probability_positive(x) - 1.0) <= theta_margin + 1e-12 ? 1 : 0;
}

inline int margin_signal(const Classifier& model, const MarginSpec& spec, std::span<const double> x) {
    switch (spec.kind) {
    case MarginKind::svm_geometric:
        if (auto* linear = std::get_if<LinearModel>(&model))
            return svm_margin_signal(*linear, x);
        throw Error(ErrorKind::parameter, "geometric margin needs a linear model");
    case MarginKind::ensemble_disagreement:
        if (auto* ensemble = std::get_if<SubspaceEnsemble>(&model))
            return ensemble_margin_signal(*ensemble, x, spec.theta_margin);
        throw Error(ErrorKind::parameter, "disagreement margin needs a subspace ensemble");
    case MarginKind::probabilistic_confidence:
        if (auto* linear = std::get_if<LinearModel>(&model))
            return probabilistic_margin_signal(*linear, x, spec.theta_margin);
        if (auto* tree = std::get_if<TreeModel>(&model)) {
            auto [pp, pm] = tree->leaf_probabilities(x);
            return std::abs(pp - pm) <= spec.theta_margin + 1e-12 ? 1 : 0;
        }
        throw Error(ErrorKind::parameter, "posterior margin needs a logistic model or a tree");
    }
    return 0;
}

/// Fraction of the batch inside the margin.
inline double margin_density(const Classifier& model, const MarginSpec& spec, const Dataset& batch) {
    if (batch.empty())
        throw Error(ErrorKind::empty_input, "margin density of an empty batch");
    std::size_t inside = 0;
    for (const auto& x : batch.instances())
        inside += static_cast<std::size_t>(margin_signal(model, spec, x.features));
    return static_cast<double>(inside) / static_cast<double>(batch.size());
}

} // namespace md3
