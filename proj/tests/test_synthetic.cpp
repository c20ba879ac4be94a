#include <gtest/gtest.h>

#include "helpers.hpp"

using namespace md3;

namespace {

/// Per-class per-feature sample means.
std::pair<std::vector<double>, std::vector<double>> class_means(const Dataset& data) {
    std::vector<double> pos(data.dimension(), 0.0), neg(data.dimension(), 0.0);
    for (const auto& x : data.instances())
        for (std::size_t j = 0; j < x.features.size(); ++j)
            (x.label == Label::positive ? pos : neg)[j] += x.features[j];
    const double np = static_cast<double>(data.count(Label::positive));
    const double nn = static_cast<double>(data.count(Label::negative));
    for (auto& v : pos)
        v /= np;
    for (auto& v : neg)
        v /= nn;
    return {pos, neg};
}

} // namespace

TEST(Scenarios, ParseAndPrintRoundTrip) {
    for (const char* name : {"A0", "A1", "A2", "A3", "A4", "B0", "B1", "C0", "C1", "hd20:0", "hd20:15"})
        EXPECT_EQ(to_string(parse_scenario(name)), name);
    EXPECT_EQ(to_string(parse_scenario("c1")), "C1");
    EXPECT_THROW(parse_scenario("hd20:16"), Error);
    EXPECT_THROW(parse_scenario("hd20:-1"), Error);
    EXPECT_THROW(parse_scenario("D0"), Error);
}

TEST(Scenarios, OutOfRangeDriftCountIsParameterError) {
    try {
        scenario_distributions({ScenarioKind::hd20, 16});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::parameter);
    }
}

TEST(Scenarios, Hd20NoChangeClassMeans) {
    auto data = generate_phase({ScenarioKind::hd20, 0}, ScenarioPhase::before, 500, 1);
    auto [pos, neg] = class_means(data);
    for (std::size_t j = 5; j < 20; ++j) {
        EXPECT_NEAR(pos[j], 0.85, 0.02) << j;
        EXPECT_NEAR(neg[j], 0.15, 0.02) << j;
    }
}

TEST(Scenarios, Hd20DriftedClassMeans) {
    auto data = generate_phase({ScenarioKind::hd20, 8}, ScenarioPhase::after, 500, 2);
    auto [pos, neg] = class_means(data);
    for (std::size_t j = 0; j < 8; ++j)
        EXPECT_NEAR(neg[j], 0.75, 0.02) << j;
    for (std::size_t j = 8; j < 20; ++j)
        EXPECT_NEAR(neg[j], 0.15, 0.02) << j;
    for (std::size_t j = 5; j < 20; ++j)
        EXPECT_NEAR(pos[j], 0.85, 0.02) << j;
}

TEST(Scenarios, Hd20LeadingFeaturesAreIrrelevant) {
    auto data = generate_phase({ScenarioKind::hd20, 0}, ScenarioPhase::before, 3000, 3);
    auto [pos, neg] = class_means(data);
    for (std::size_t j = 0; j < 5; ++j)
        EXPECT_LT(std::abs(pos[j] - neg[j]), 0.02) << j;
}

TEST(Scenarios, StreamSplitsAtTheChangePoint) {
    auto stream = generate_scenario({ScenarioKind::hd20, 15}, 500, 4);
    ASSERT_EQ(stream.size(), 1000u);
    EXPECT_EQ(scenario_change_point(500), 500u);
    auto before = class_means(stream.slice(0, 500)).second;
    auto after = class_means(stream.slice(500, 1000)).second;
    EXPECT_NEAR(before[10], 0.15, 0.03);
    EXPECT_NEAR(after[10], 0.75, 0.03);
}

TEST(Scenarios, LinearModelOnA0BarelyErrsOnA2) {
    // Brute-force check: train on A0, test on the shifted-away A2 draw.
    auto before = generate_phase(parse_scenario("A2"), ScenarioPhase::before, 500, 5);
    auto after = generate_phase(parse_scenario("A2"), ScenarioPhase::after, 500, 5);
    auto model = train_linear_svm(before, 1.0, 1);
    EXPECT_LE(1.0 - accuracy(Classifier(model), after), 0.01);
}

TEST(Scenarios, BalancedDeterministicAndInRange) {
    for (const char* name : {"A0", "A1", "A2", "A3", "A4", "B0", "B1", "C0", "C1", "hd20:7"}) {
        auto a = generate_scenario(parse_scenario(name), 101, 6);
        auto b = generate_scenario(parse_scenario(name), 101, 6);
        EXPECT_LE(std::abs(static_cast<long>(a.count(Label::positive)) - static_cast<long>(a.count(Label::negative))),
                  1);
        ASSERT_EQ(a.size(), b.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            EXPECT_EQ(a[i].features, b[i].features);
            EXPECT_EQ(a[i].label, b[i].label);
            for (double v : a[i].features) {
                EXPECT_GE(v, 0.0);
                EXPECT_LE(v, 1.0);
            }
        }
    }
}

TEST(Scenarios, RejectsEmptyClasses) {
    EXPECT_THROW(generate_scenario(parse_scenario("A0"), 0, 1), Error);
    GaussianBlobSpec bad{{0.5}, {0.5}, 0.0, 0.1};
    Rng rng(1);
    EXPECT_THROW(sample_blobs(bad, 10, rng), Error);
}

TEST(Static16, ShapeBalanceAndIrrelevantTail) {
    auto data = generate_static16(4000, 7);
    EXPECT_EQ(data.size(), 4000u);
    EXPECT_EQ(data.dimension(), 16u);
    EXPECT_EQ(data.count(Label::positive), 2000u);
    auto [pos, neg] = class_means(data);
    for (std::size_t j = 12; j < 16; ++j)
        EXPECT_LT(std::abs(pos[j] - neg[j]), 0.02);
    for (std::size_t j = 0; j < 12; ++j)
        EXPECT_GT(std::abs(pos[j] - neg[j]), 0.07);
}
