#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "helpers.hpp"

using namespace md3;
using md3::testing::blobs_1d;
using md3::testing::constant_vote_ensemble;
using md3::testing::linear;
using md3::testing::make_dataset;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    return ErrorKind::io;
}

/// 1/2 (|w|^2 + b^2) + C sum hinge: the objective the SVM trainer minimises.
double svm_primal(const Dataset& data, const std::vector<double>& w, double b, double c) {
    double obj = 0.5 * (std::inner_product(w.begin(), w.end(), w.begin(), 0.0) + b * b);
    for (const auto& x : data.instances()) {
        const double m = sign_of(*x.label) * (std::inner_product(w.begin(), w.end(), x.features.begin(), b));
        obj += c * std::max(0.0, 1.0 - m);
    }
    return obj;
}

/// Independent oracle: full-batch subgradient descent with a 1/t step and
/// best-iterate tracking.
double subgradient_svm_objective(const Dataset& data, double c, std::size_t iterations) {
    const std::size_t d = data.dimension();
    std::vector<double> w(d, 0.0);
    double b = 0.0;
    double best = svm_primal(data, w, b, c);
    for (std::size_t t = 1; t <= iterations; ++t) {
        std::vector<double> g(w);
        double gb = b;
        for (const auto& x : data.instances()) {
            const double y = sign_of(*x.label);
            if (y * std::inner_product(w.begin(), w.end(), x.features.begin(), b) < 1.0) {
                for (std::size_t j = 0; j < d; ++j)
                    g[j] -= c * y * x.features[j];
                gb -= c * y;
            }
        }
        const double step = 1.0 / (static_cast<double>(data.size()) * c + static_cast<double>(t));
        for (std::size_t j = 0; j < d; ++j)
            w[j] -= step * g[j];
        b -= step * gb;
        best = std::min(best, svm_primal(data, w, b, c));
    }
    return best;
}

/// Independent 1-D logistic fit by Newton's method on
/// C sum log(1 + exp(-y (w x + b))) + w^2 / 2.
std::pair<double, double> newton_logistic_1d(const Dataset& data, double c) {
    double w = 0.0, b = 0.0;
    for (int it = 0; it < 100; ++it) {
        double gw = w, gb = 0.0, hww = 1.0, hwb = 0.0, hbb = 1e-12;
        for (const auto& x : data.instances()) {
            const double y = sign_of(*x.label), v = x.features[0];
            const double p = 1.0 / (1.0 + std::exp(y * (w * v + b))); // sigma(-m)
            gw -= c * y * p * v;
            gb -= c * y * p;
            const double h = c * p * (1.0 - p);
            hww += h * v * v;
            hwb += h * v;
            hbb += h;
        }
        const double det = hww * hbb - hwb * hwb;
        const double dw = (hbb * gw - hwb * gb) / det;
        const double db = (hww * gb - hwb * gw) / det;
        w -= dw;
        b -= db;
        if (std::abs(dw) + std::abs(db) < 1e-13)
            break;
    }
    return {w, b};
}

} // namespace

TEST(LinearSvm, SeparatesOneDimensionalBlobsNearTheBayesSplit) {
    auto data = blobs_1d(0.1, 0.9, 0.02, 200, 1);
    auto model = train_linear_svm(data, 1.0, 7);
    EXPECT_GE(accuracy(Classifier(model), data), 0.99);
    const double threshold = -model.bias / model.weights[0];
    EXPECT_GT(threshold, 0.3);
    EXPECT_LT(threshold, 0.7);

    // Brute-force sweep: every threshold in the gap between the blobs is
    // perfect, and the SVM threshold lies inside that gap.
    double lowest_positive = 1.0, highest_negative = 0.0;
    for (const auto& x : data.instances()) {
        if (x.label == Label::positive)
            lowest_positive = std::min(lowest_positive, x.features[0]);
        else
            highest_negative = std::max(highest_negative, x.features[0]);
    }
    EXPECT_GT(threshold, highest_negative);
    EXPECT_LT(threshold, lowest_positive);
}

TEST(LinearSvm, ReachesTheSubgradientOracleObjective) {
    for (std::uint64_t seed : {1, 2, 3}) {
        auto data = generate_phase(parse_scenario("C0"), ScenarioPhase::before, 60, seed);
        for (double c : {0.1, 1.0, 10.0}) {
            auto model = train_linear_svm(data, c, seed);
            const double ours = svm_primal(data, model.weights, model.bias, c);
            const double oracle = subgradient_svm_objective(data, c, 20000);
            EXPECT_LE(ours, oracle * (1.0 + 1e-3) + 1e-9) << "seed " << seed << " C " << c;
        }
    }
}

TEST(LinearSvm, NearPerfectOnFreshHd20) {
    auto train_set = generate_phase({ScenarioKind::hd20, 0}, ScenarioPhase::before, 250, 1);
    auto test_set = generate_phase({ScenarioKind::hd20, 0}, ScenarioPhase::before, 500, 99);
    EXPECT_GE(accuracy(Classifier(train_linear_svm(train_set, 1.0, 1)), test_set), 0.99);
}

TEST(LinearSvm, DegenerateInputs) {
    EXPECT_EQ(kind_of([] { train_linear_svm(make_dataset({{0.5}, {0.5}, {0.5}}, {1, -1, 1}), 1.0, 1); }),
              ErrorKind::degenerate_training);
    EXPECT_EQ(kind_of([] { train_linear_svm(make_dataset({{0.1}, {0.5}}, {1, 1}), 1.0, 1); }),
              ErrorKind::degenerate_training);
    EXPECT_EQ(kind_of([] { train_linear_svm(make_dataset({{0.1}, {0.5}}, {1, -1}), 0.0, 1); }),
              ErrorKind::parameter);
}

TEST(LinearSvm, DoublingCKeepsTrainingAccuracy) {
    for (std::uint64_t seed : {1, 2, 3, 4}) {
        auto data = generate_phase(parse_scenario("A0"), ScenarioPhase::before, 100, seed);
        for (double c : {0.25, 0.5, 1.0, 2.0}) {
            const double a = accuracy(Classifier(train_linear_svm(data, c, seed)), data);
            const double b = accuracy(Classifier(train_linear_svm(data, 2 * c, seed)), data);
            EXPECT_GE(b, a - 0.01);
        }
    }
}

TEST(LinearModelScore, ArithmeticTieAndAntisymmetry) {
    auto m = linear({2, 0}, 0);
    const std::vector<double> x{0.4, 0.9};
    EXPECT_DOUBLE_EQ(m.score(x), 0.8);
    EXPECT_EQ(m.predict(x), Label::positive);
    EXPECT_EQ(linear({0, 0}, 0).predict(x), Label::positive);
    EXPECT_DOUBLE_EQ(linear({-2, 0}, -0.0).score(x), -0.8);
    auto a = linear({0.3, -1.7}, 0.2);
    auto b = linear({-0.3, 1.7}, -0.2);
    EXPECT_DOUBLE_EQ(a.score(x), -b.score(x));
    EXPECT_THROW(m.score(std::vector<double>{1.0}), Error);
}

TEST(Tree, PerfectAxisSplit) {
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    for (int i = 0; i < 50; ++i) {
        rows.push_back({0.1 + 0.006 * i});
        labels.push_back(-1);
        rows.push_back({0.6 + 0.006 * i});
        labels.push_back(1);
    }
    auto data = make_dataset(rows, labels);
    auto tree = train_tree(data);
    EXPECT_EQ(tree.depth(), 1u);
    EXPECT_GT(tree.nodes[0].threshold, 0.4);
    EXPECT_LT(tree.nodes[0].threshold, 0.6);
    EXPECT_EQ(accuracy(Classifier(tree), data), 1.0);
}

TEST(Tree, PureInputIsASingleLeaf) {
    auto tree = train_tree(make_dataset({{0.1}, {0.7}, {0.3}}, {-1, -1, -1}));
    ASSERT_EQ(tree.nodes.size(), 1u);
    EXPECT_EQ(tree.predict(std::vector<double>{0.9}), Label::negative);
}

TEST(Tree, XorClustersNeedDepthTwo) {
    // Four point clusters; no single cut gains anything, two cuts separate them.
    const double centres[4][2] = {{0.2, 0.2}, {0.8, 0.8}, {0.2, 0.8}, {0.8, 0.2}};
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    for (int i = 0; i < 10; ++i)
        for (int c = 0; c < 4; ++c) {
            rows.push_back({centres[c][0], centres[c][1]});
            labels.push_back(c < 2 ? 1 : -1);
        }
    auto data = make_dataset(rows, labels);
    std::size_t separable = 0;
    for (const auto& x : data.instances())
        separable += ((x.features[0] > 0.5) == (x.features[1] > 0.5)) == (x.label == Label::positive);
    ASSERT_EQ(separable, data.size());
    EXPECT_NEAR(rank_by_information_gain(data)[0].gain, 0.0, 1e-12);

    auto tree = train_tree(data);
    EXPECT_EQ(accuracy(Classifier(tree), data), 1.0);
    EXPECT_EQ(tree.depth(), 2u);
}

TEST(Tree, NoisyXorStillFitsTheTrainingSet) {
    Rng rng(4);
    std::normal_distribution<double> noise(0.0, 0.03);
    const double centres[4][2] = {{0.2, 0.2}, {0.8, 0.8}, {0.2, 0.8}, {0.8, 0.2}};
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    for (int i = 0; i < 60; ++i)
        for (int c = 0; c < 4; ++c) {
            rows.push_back({centres[c][0] + noise(rng), centres[c][1] + noise(rng)});
            labels.push_back(c < 2 ? 1 : -1);
        }
    auto data = make_dataset(rows, labels);
    auto tree = train_tree(data, {10, 1});
    EXPECT_EQ(accuracy(Classifier(tree), data), 1.0);
}

TEST(Tree, RespectsDepthAndLeafLimits) {
    auto data = generate_static16(400, 5);
    auto tree = train_tree(data, {3, 10});
    EXPECT_LE(tree.depth(), 3u);
    for (const auto& node : tree.nodes) {
        if (node.leaf())
            EXPECT_GE(node.positives + node.negatives, 10.0);
        else
            EXPECT_LT(static_cast<std::size_t>(node.feature), 16u);
    }
}

TEST(Ensemble, MembersSeeJDistinctFeatures) {
    auto data = generate_static16(300, 1);
    auto e = train_subspace_ensemble(data, 20, 8, {}, 3);
    ASSERT_EQ(e.members.size(), 20u);
    for (const auto& m : e.members) {
        std::set<std::size_t> distinct(m.features.begin(), m.features.end());
        EXPECT_EQ(distinct.size(), 8u);
        EXPECT_LT(*distinct.rbegin(), 16u);
    }
    EXPECT_EQ(kind_of([&] { train_subspace_ensemble(data, 20, 17, {}, 3); }), ErrorKind::parameter);
    EXPECT_EQ(kind_of([&] { train_subspace_ensemble(data, 1, 4, {}, 3); }), ErrorKind::parameter);
}

TEST(Ensemble, FullSubspaceIsAMajorityOfFullFeatureTrees) {
    auto data = generate_static16(300, 2);
    auto e = train_subspace_ensemble(data, 5, 16, {}, 3);
    // Oracle: retrain each member's tree on all rows with its column order.
    std::vector<TreeModel> trees;
    for (const auto& m : e.members) {
        ASSERT_EQ(std::set<std::size_t>(m.features.begin(), m.features.end()).size(), 16u);
        std::vector<std::vector<double>> rows;
        std::vector<int> labels;
        for (const auto& x : data.instances()) {
            std::vector<double> r;
            for (auto f : m.features)
                r.push_back(x.features[f]);
            rows.push_back(r);
            labels.push_back(sign_of(*x.label));
        }
        trees.push_back(train_tree(make_dataset(rows, labels)));
    }
    const auto probe = generate_static16(200, 3);
    for (const auto& x : probe.instances()) {
        int votes = 0;
        for (std::size_t k = 0; k < trees.size(); ++k) {
            std::vector<double> r;
            for (auto f : e.members[k].features)
                r.push_back(x.features[f]);
            votes += trees[k].predict(r) == Label::positive;
        }
        EXPECT_DOUBLE_EQ(e.confidence(x.features).first, votes / 5.0);
    }
}

TEST(Ensemble, OrthogonalPairOnTwoDimensions) {
    auto data = generate_phase(parse_scenario("A0"), ScenarioPhase::before, 200, 1);
    auto e = train_subspace_ensemble(data, {{0}, {1}}, {}, 1);
    ASSERT_EQ(e.members.size(), 2u);
    EXPECT_EQ(e.members[0].features, std::vector<std::size_t>{0});
    EXPECT_EQ(e.members[1].features, std::vector<std::size_t>{1});
    EXPECT_GE(accuracy(Classifier(e), data), 0.98);
}

TEST(Ensemble, ConfidenceCounting) {
    const std::vector<double> x{0.5};
    auto e12 = constant_vote_ensemble(20, 12);
    EXPECT_DOUBLE_EQ(e12.confidence(x).first, 0.6);
    EXPECT_DOUBLE_EQ(e12.confidence(x).second, 0.4);
    EXPECT_EQ(e12.predict(x), Label::positive);
    auto e10 = constant_vote_ensemble(20, 10);
    EXPECT_DOUBLE_EQ(e10.confidence(x).first, 0.5);
    EXPECT_EQ(e10.predict(x), Label::positive);
    auto e20 = constant_vote_ensemble(20, 20);
    EXPECT_DOUBLE_EQ(e20.confidence(x).first, 1.0);
    EXPECT_DOUBLE_EQ(e20.confidence(x).second, 0.0);
    EXPECT_THROW(e12.confidence(std::vector<double>{0.1, 0.2}), Error);
}

TEST(Ensemble, MajorityMatchesSignOfVoteDifference) {
    auto data = generate_static16(300, 4);
    auto e = train_subspace_ensemble(data, 20, 8, {}, 5);
    const auto probe = generate_static16(500, 6);
    for (const auto& x : probe.instances()) {
        auto [pp, pm] = e.confidence(x.features);
        const Label expected = pp - pm >= 0 ? Label::positive : Label::negative;
        EXPECT_EQ(e.predict(x.features), expected);
    }
}

TEST(Trainers, DeterministicUnderFixedSeed) {
    auto data = generate_static16(300, 7);
    auto probe = generate_static16(200, 8);
    for (auto config : {svm_config(3), random_subspace_config(3)}) {
        auto a = train(data, config), b = train(data, config);
        for (const auto& x : probe.instances())
            EXPECT_EQ(predict(a, x.features), predict(b, x.features));
    }
}

TEST(Logistic, MatchesNewtonOracleOnOneDimensionalBlobs) {
    auto data = blobs_1d(0.2, 0.8, 0.05, 200, 3);
    double lowest_positive = 1e9, highest_negative = -1e9;
    for (const auto& x : data.instances()) {
        if (x.label == Label::positive)
            lowest_positive = std::min(lowest_positive, x.features[0]);
        else
            highest_negative = std::max(highest_negative, x.features[0]);
    }
    ASSERT_LT(highest_negative, lowest_positive); // separable
    for (double c : {1.0, 10.0}) {
        auto model = train_logistic(data, Penalty::l2, c);
        auto [w, b] = newton_logistic_1d(data, c);
        EXPECT_NEAR(model.weights[0], w, 1e-4 * std::abs(w)) << c;
        EXPECT_NEAR(model.bias, b, 1e-4 * std::max(1.0, std::abs(b))) << c;
    }
    // At C = 1 the penalty holds p(+1|0.8) near 0.93; weaker shrinkage is
    // needed for a confident fit.
    EXPECT_GE(train_logistic(data, Penalty::l2, 10.0).probability_positive(std::vector<double>{0.8}), 0.95);
}

TEST(Logistic, ZeroModelIsOneHalf) {
    auto m = linear({0, 0}, 0, LinearKind::logistic);
    EXPECT_DOUBLE_EQ(m.probability_positive(std::vector<double>{0.3, 0.9}), 0.5);
}

TEST(Logistic, StrongL1ZeroesNoiseWeights) {
    Rng rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    for (int i = 0; i < 400; ++i) {
        std::vector<double> x(10);
        for (auto& v : x)
            v = u(rng);
        labels.push_back(x[0] > 0.5 ? 1 : -1);
        rows.push_back(x);
    }
    auto model = train_logistic(make_dataset(rows, labels), Penalty::l1, 0.05);
    int zeros = 0;
    for (std::size_t j = 1; j < 10; ++j)
        zeros += std::abs(model.weights[j]) < 1e-6;
    EXPECT_GE(zeros, 7);
    EXPECT_GT(model.weights[0], 0.0);
}
