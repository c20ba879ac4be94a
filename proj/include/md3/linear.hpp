#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "md3/data.hpp"
#include "md3/random.hpp"

namespace md3 {

enum class LinearKind { svm, logistic };
enum class Penalty { l2, l1 };

/// Affine decision function w.x + b. Logistic models additionally expose the
/// posterior p(y=+1|x) through the logistic link.
struct LinearModel {
    std::vector<double> weights;
    double bias = 0.0;
    double c = 1.0;
    LinearKind kind = LinearKind::svm;
    Penalty penalty = Penalty::l2;

    std::size_t dimension() const noexcept { return weights.size(); }
    bool probabilistic() const noexcept { return kind == LinearKind::logistic; }

    double score(std::span<const double> x) const {
        if (x.size() != weights.size())
            throw Error(ErrorKind::shape,
                        fmt::format("linear model expects {} features, got {}", weights.size(), x.size()));
        return std::inner_product(weights.begin(), weights.end(), x.begin(), bias);
    }

    /// Score 0 resolves to +1.
    Label predict(std::span<const double> x) const { return label_from_score(score(x)); }

    double probability_positive(std::span<const double> x) const { return 1.0 / (1.0 + std::exp(-score(x))); }
};

struct LinearSolverOptions {
    double tolerance = 1e-6;
    std::size_t max_epochs = 1000;
    /// Value of the constant feature that carries the SVM bias. Larger values
    /// weaken the penalty on the bias.
    double intercept_scaling = 1.0;
};

namespace detail {

inline void check_trainable(const Dataset& data, std::string_view what) {
    require_labels(data, what);
    if (data.count(Label::positive) == 0 || data.count(Label::negative) == 0)
        throw Error(ErrorKind::degenerate_training, fmt::format("{}: training data has a single class", what));
    const auto& first = data[0].features;
    bool all_same = std::all_of(data.instances().begin(), data.instances().end(),
                                [&](const Instance& x) { return x.features == first; });
    if (all_same)
        throw Error(ErrorKind::degenerate_training,
                    fmt::format("{}: all feature vectors are identical, nothing to learn", what));
}

} // namespace detail

/// L2-regularised hinge-loss SVM, min 1/2|w~|^2 + C sum max(0, 1 - y w~.x~),
/// solved in the dual by coordinate descent over a seeded per-epoch
/// permutation. The bias is s times the weight of a constant augmented
/// feature of value s (intercept_scaling) and is regularised with the rest. Stops when the relative change
/// of the dual objective drops below the tolerance or after max_epochs.
inline LinearModel train_linear_svm(const Dataset& data, double c, std::uint64_t seed,
                                    LinearSolverOptions options = {}) {
    if (!(c > 0.0))
        throw Error(ErrorKind::parameter, "SVM regularisation constant C must be positive");
    detail::check_trainable(data, "train_linear_svm");

    const std::size_t n = data.size();
    const std::size_t d = data.dimension();
    std::vector<double> w(d, 0.0);
    double wb = 0.0;
    std::vector<double> alpha(n, 0.0);
    std::vector<double> qii(n);
    const double s = options.intercept_scaling;
    if (!(s > 0.0))
        throw Error(ErrorKind::parameter, "intercept scaling must be positive");
    for (std::size_t i = 0; i < n; ++i) {
        const auto& x = data[i].features;
        qii[i] = std::inner_product(x.begin(), x.end(), x.begin(), s * s);
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(seed);
    double sum_alpha = 0.0;
    double previous_dual = 0.0;

    for (std::size_t epoch = 0; epoch < options.max_epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (auto i : order) {
            const auto& x = data[i].features;
            const double y = sign_of(*data[i].label);
            const double g = y * (std::inner_product(w.begin(), w.end(), x.begin(), s * wb)) - 1.0;
            double pg = g;
            if (alpha[i] == 0.0)
                pg = std::min(g, 0.0);
            else if (alpha[i] == c)
                pg = std::max(g, 0.0);
            if (pg == 0.0)
                continue;
            const double old = alpha[i];
            alpha[i] = std::clamp(old - g / qii[i], 0.0, c);
            const double step = (alpha[i] - old) * y;
            for (std::size_t j = 0; j < d; ++j)
                w[j] += step * x[j];
            wb += step * s;
            sum_alpha += alpha[i] - old;
        }
        const double norm2 = std::inner_product(w.begin(), w.end(), w.begin(), wb * wb);
        const double dual = sum_alpha - 0.5 * norm2;
        if (epoch > 0 && std::abs(dual - previous_dual) <= options.tolerance * std::max(std::abs(dual), 1e-12))
            break;
        previous_dual = dual;
    }

    LinearModel model;
    model.weights = std::move(w);
    model.bias = s * wb;
    model.c = c;
    model.kind = LinearKind::svm;
    return model;
}

/// Regularised logistic regression,
///   min C sum log(1 + exp(-y (w.x + b))) + R(w),
/// with R = 1/2|w|^2 (L2) or |w|_1 (L1); the bias is not penalised. Solved by
/// FISTA with backtracking, so L1 solutions contain exact zeros. The problem
/// is convex and the solver visits samples in a fixed order; `seed` is kept
/// for interface symmetry with the other trainers.
inline LinearModel train_logistic(const Dataset& data, Penalty penalty, double c, std::uint64_t /*seed*/ = 0,
                                  LinearSolverOptions options = {.tolerance = 1e-10, .max_epochs = 20000}) {
    if (!(c > 0.0))
        throw Error(ErrorKind::parameter, "logistic regularisation constant C must be positive");
    detail::check_trainable(data, "train_logistic");

    const std::size_t n = data.size();
    const std::size_t d = data.dimension();
    const std::size_t p = d + 1; // last coordinate is the bias

    auto smooth = [&](const std::vector<double>& theta, std::vector<double>* grad) {
        double loss = 0.0;
        if (grad)
            std::fill(grad->begin(), grad->end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const auto& x = data[i].features;
            const double y = sign_of(*data[i].label);
            const double s = std::inner_product(x.begin(), x.end(), theta.begin(), theta[d]);
            const double m = y * s;
            // log(1 + exp(-m)) computed stably
            loss += m > 0 ? std::log1p(std::exp(-m)) : -m + std::log1p(std::exp(m));
            if (grad) {
                const double sig = 1.0 / (1.0 + std::exp(m)); // sigma(-m)
                const double coef = -c * y * sig;
                for (std::size_t j = 0; j < d; ++j)
                    (*grad)[j] += coef * x[j];
                (*grad)[d] += coef;
            }
        }
        return c * loss;
    };
    auto regulariser = [&](const std::vector<double>& theta) {
        double r = 0.0;
        for (std::size_t j = 0; j < d; ++j)
            r += penalty == Penalty::l1 ? std::abs(theta[j]) : 0.5 * theta[j] * theta[j];
        return r;
    };
    auto prox = [&](std::vector<double> v, double t) {
        for (std::size_t j = 0; j < d; ++j) {
            if (penalty == Penalty::l1)
                v[j] = std::copysign(std::max(std::abs(v[j]) - t, 0.0), v[j]);
            else
                v[j] = v[j] / (1.0 + t);
        }
        return v;
    };

    std::vector<double> theta(p, 0.0), momentum(p, 0.0), grad(p, 0.0);
    double step = 1.0;
    double t_k = 1.0;
    double objective = smooth(theta, nullptr) + regulariser(theta);

    for (std::size_t iter = 0; iter < options.max_epochs; ++iter) {
        const double f_m = smooth(momentum, &grad);
        std::vector<double> next;
        while (true) {
            std::vector<double> trial(p);
            for (std::size_t j = 0; j < p; ++j)
                trial[j] = momentum[j] - step * grad[j];
            next = prox(std::move(trial), step);
            double quad = f_m;
            for (std::size_t j = 0; j < p; ++j) {
                const double diff = next[j] - momentum[j];
                quad += grad[j] * diff + diff * diff / (2.0 * step);
            }
            if (smooth(next, nullptr) <= quad + 1e-12 || step < 1e-14)
                break;
            step *= 0.5;
        }
        const double next_objective = smooth(next, nullptr) + regulariser(next);
        // Monotone restart keeps FISTA from oscillating near the optimum.
        if (next_objective > objective) {
            std::copy(theta.begin(), theta.end(), momentum.begin());
            t_k = 1.0;
            continue;
        }
        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t_k * t_k));
        for (std::size_t j = 0; j < p; ++j)
            momentum[j] = next[j] + ((t_k - 1.0) / t_next) * (next[j] - theta[j]);
        t_k = t_next;
        const double change = objective - next_objective;
        theta = std::move(next);
        objective = next_objective;
        if (change <= options.tolerance * std::max(std::abs(objective), 1e-12))
            break;
    }

    LinearModel model;
    model.weights.assign(theta.begin(), theta.begin() + static_cast<std::ptrdiff_t>(d));
    model.bias = theta[d];
    model.c = c;
    model.kind = LinearKind::logistic;
    model.penalty = penalty;
    return model;
}

} // namespace md3
