#include <gtest/gtest.h>

#include "helpers.hpp"

using namespace md3;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    ADD_FAILURE() << "no md3::Error thrown";
    return ErrorKind::io;
}

} // namespace

TEST(Serialize, FixedSixDecimals) {
    EXPECT_EQ(fixed6(0.1234564), 0.123456);
    EXPECT_EQ(fixed6(0.1234566), 0.123457);
    EXPECT_EQ(fixed6(-2.0), -2.0);
}

TEST(Serialize, PlanRoundTrip) {
    InductionPlan plan{Label::negative, {7, 1, 5}, 0.5, InductionMode::bottom_fraction, 0.25};
    const auto back = plan_from_json(json::parse(to_json(plan).dump()));
    EXPECT_EQ(back.target_class, plan.target_class);
    EXPECT_EQ(back.feature_subset, plan.feature_subset);
    EXPECT_EQ(back.change_point, plan.change_point);
    EXPECT_EQ(back.mode, plan.mode);
    EXPECT_EQ(back.fraction, plan.fraction);
}

TEST(Serialize, MalformedPlansAreFormatErrors) {
    EXPECT_EQ(kind_of([] { plan_from_json(json::parse(R"({"target_class": 1})")); }), ErrorKind::format);
    EXPECT_EQ(kind_of([] {
                  plan_from_json(json::parse(
                      R"({"target_class": 0, "feature_subset": [1], "change_point": 0.5, "mode": "top", "fraction": 0.25})"));
              }),
              ErrorKind::format);
    EXPECT_EQ(kind_of([] {
                  plan_from_json(json::parse(
                      R"({"target_class": 1, "feature_subset": "x", "change_point": 0.5, "mode": "top", "fraction": 0.25})"));
              }),
              ErrorKind::format);
    EXPECT_EQ(kind_of([] { parse_induction_mode("middle"); }), ErrorKind::parameter);
}

TEST(Serialize, ReportFieldsInStableOrder) {
    RunReport r;
    r.dataset = "d";
    r.detector = "md3-rs";
    r.seed = 3;
    r.accuracy = 0.91234567;
    r.labeling_percent = 11.7647058;
    r.events.push_back({800, EventKind::suspected, 0.123456789, 0});
    const auto j = to_json(r);
    std::vector<std::string> keys;
    for (const auto& item : j.items())
        keys.push_back(item.key());
    const std::vector<std::string> expected{"dataset",  "detector",  "seed",       "stream_length",    "warmup",
                                            "accuracy", "drifts_confirmed", "false_alarms", "suspected",
                                            "unresolved", "labels_requested", "labeling_percent",
                                            "labeling_percent_inclusive", "events"};
    EXPECT_EQ(keys, expected);
    EXPECT_EQ(j["accuracy"], 0.912346);
    EXPECT_EQ(j["labeling_percent"], 11.764706);
    EXPECT_EQ(j["events"][0]["kind"], "suspected");
    EXPECT_EQ(j["events"][0]["metric"], 0.123457);
}

TEST(Serialize, ModelsAndDetectorState) {
    auto data = generate_static16(200, 1);
    const Classifier svm = train(data, svm_config(1));
    const auto j = to_json(svm);
    EXPECT_EQ(j["kind"], "svm");
    EXPECT_EQ(j["weights"].size(), 16u);

    TrainConfig rs = random_subspace_config(1);
    const auto e = to_json(train(data, rs));
    EXPECT_EQ(e["members"].size(), rs.members);

    auto state = make_md3_state({0.1, 0.02, 0.9, 0.01}, 100, 2.0);
    const auto s = to_json(state);
    EXPECT_EQ(s["n_train"], 100);
    EXPECT_EQ(s["lambda"], 0.99);
    EXPECT_EQ(s["currently_drifting"], false);
}

TEST(Serialize, IdenticalRunsSerializeIdentically) {
    auto data = induced_benchmark(2, InductionMode::top_fraction).data;
    const auto config = benchmark_config(DetectorKind::md3_svm, 2);
    EXPECT_EQ(to_json(run_stream(data, config)).dump(2), to_json(run_stream(data, config)).dump(2));
}
