#pragma once

#include <cmath>
#include <string>

#include <json.hpp>

#include "md3/harness.hpp"

namespace md3 {

using json = nlohmann::ordered_json;

/// Six decimals, so reports diff cleanly across runs.
inline double fixed6(double v) { return std::round(v * 1e6) / 1e6; }

inline json to_json(const ReferenceDistribution& r) {
    return {{"md_ref", fixed6(r.md_ref)},
            {"sigma_md", fixed6(r.sigma_md)},
            {"acc_ref", fixed6(r.acc_ref)},
            {"sigma_acc", fixed6(r.sigma_acc)}};
}

inline json to_json(const DriftEvent& e) {
    return {{"position", e.position},
            {"kind", to_string(e.kind)},
            {"metric", fixed6(e.metric)},
            {"labels_consumed", e.labels_consumed}};
}

inline json to_json(const Md3State& s) {
    return {{"md", fixed6(s.md)},
            {"lambda", s.lambda},
            {"theta", s.theta},
            {"reference", to_json(s.reference)},
            {"currently_drifting", s.currently_drifting},
            {"n_train", s.n_train},
            {"buffered", s.labeled_buffer.size()}};
}

inline json to_json(const HdddmDetector& h) {
    return {{"ready", h.ready()},
            {"bins", h.bins()},
            {"hd_ref", fixed6(h.hd_ref())},
            {"sigma_hd", fixed6(h.sigma_hd())},
            {"metric", fixed6(h.metric())},
            {"chunk_fill", h.chunk_fill()}};
}

inline json to_json(const LinearModel& m) {
    return {{"kind", m.kind == LinearKind::svm ? "svm" : "logistic"},
            {"penalty", m.penalty == Penalty::l2 ? "l2" : "l1"},
            {"c", m.c},
            {"weights", m.weights},
            {"bias", m.bias}};
}

inline json to_json(const TreeModel& t) {
    json nodes = json::array();
    for (const auto& n : t.nodes)
        nodes.push_back({{"feature", n.feature},
                         {"threshold", n.threshold},
                         {"left", n.left},
                         {"right", n.right},
                         {"negatives", n.negatives},
                         {"positives", n.positives},
                         {"label", to_int(n.label)}});
    return {{"dimension", t.dimension}, {"nodes", nodes}};
}

inline json to_json(const SubspaceEnsemble& e) {
    json members = json::array();
    for (const auto& m : e.members)
        members.push_back({{"features", m.features},
                           {"model", std::visit([](const auto& inner) { return to_json(inner); }, m.model)}});
    return {{"dimension", e.dimension}, {"members", members}};
}

inline json to_json(const Classifier& c) {
    return std::visit([](const auto& m) { return to_json(m); }, c);
}

inline json to_json(const RunReport& r) {
    json events = json::array();
    for (const auto& e : r.events)
        events.push_back(to_json(e));
    return {{"dataset", r.dataset},
            {"detector", r.detector},
            {"seed", r.seed},
            {"stream_length", r.stream_length},
            {"warmup", r.warmup},
            {"accuracy", fixed6(r.accuracy)},
            {"drifts_confirmed", r.drifts_confirmed},
            {"false_alarms", r.false_alarms},
            {"suspected", r.suspected},
            {"unresolved", r.unresolved},
            {"labels_requested", r.labels_requested},
            {"labeling_percent", fixed6(r.labeling_percent)},
            {"labeling_percent_inclusive", fixed6(r.labeling_percent_inclusive)},
            {"events", events}};
}

inline const char* to_string(InductionMode mode) { return mode == InductionMode::top_fraction ? "top" : "bottom"; }

inline InductionMode parse_induction_mode(std::string_view text) {
    if (text == "top")
        return InductionMode::top_fraction;
    if (text == "bottom")
        return InductionMode::bottom_fraction;
    throw Error(ErrorKind::parameter, fmt::format("mode must be 'top' or 'bottom', got '{}'", text));
}

inline json to_json(const InductionPlan& plan) {
    return {{"target_class", to_int(plan.target_class)},
            {"feature_subset", plan.feature_subset},
            {"change_point", plan.change_point},
            {"mode", to_string(plan.mode)},
            {"fraction", plan.fraction}};
}

inline InductionPlan plan_from_json(const json& j) {
    try {
        InductionPlan plan;
        const int target = j.at("target_class").get<int>();
        if (target != 1 && target != -1)
            throw Error(ErrorKind::format, fmt::format("target_class must be 1 or -1, got {}", target));
        plan.target_class = target == 1 ? Label::positive : Label::negative;
        plan.feature_subset = j.at("feature_subset").get<std::vector<std::size_t>>();
        plan.change_point = j.at("change_point").get<double>();
        plan.mode = parse_induction_mode(j.at("mode").get<std::string>());
        plan.fraction = j.at("fraction").get<double>();
        return plan;
    } catch (const json::exception& e) {
        throw Error(ErrorKind::format, fmt::format("malformed induction plan: {}", e.what()));
    }
}

inline json to_json(const FeatureRanking& ranking) {
    json out = json::array();
    for (const auto& r : ranking)
        out.push_back({{"feature", r.feature}, {"gain", fixed6(r.gain)}});
    return out;
}

} // namespace md3
