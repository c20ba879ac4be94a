#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "md3/detectors.hpp"
#include "md3/induction.hpp"
#include "md3/synthetic.hpp"

namespace md3 {

enum class DetectorKind { no_change, acc_tr, cusum, pht, md3_svm, md3_rs, hdddm, uncertainty };

inline constexpr std::array<DetectorKind, 8> all_detectors{
    DetectorKind::no_change, DetectorKind::acc_tr, DetectorKind::cusum,  DetectorKind::pht,
    DetectorKind::md3_svm,   DetectorKind::md3_rs, DetectorKind::hdddm, DetectorKind::uncertainty};

inline const char* to_string(DetectorKind kind) {
    switch (kind) {
    case DetectorKind::no_change: return "nochange";
    case DetectorKind::acc_tr: return "acctr";
    case DetectorKind::cusum: return "cusum";
    case DetectorKind::pht: return "pht";
    case DetectorKind::md3_svm: return "md3-svm";
    case DetectorKind::md3_rs: return "md3-rs";
    case DetectorKind::hdddm: return "hdddm";
    case DetectorKind::uncertainty: return "uncertainty";
    }
    return "?";
}

inline std::string detector_names() {
    std::string out;
    for (auto kind : all_detectors)
        out += (out.empty() ? "" : ", ") + std::string(to_string(kind));
    return out;
}

inline DetectorKind parse_detector(std::string_view name) {
    for (auto kind : all_detectors)
        if (name == to_string(kind))
            return kind;
    throw Error(ErrorKind::parameter, fmt::format("unknown detector '{}' (valid: {})", name, detector_names()));
}

/// Detectors that consume the label of every sample.
inline bool fully_labeled(DetectorKind kind) {
    return kind == DetectorKind::acc_tr || kind == DetectorKind::cusum || kind == DetectorKind::pht;
}

struct RunConfig {
    DetectorKind detector = DetectorKind::md3_rs;
    TrainConfig prediction = svm_config();
    /// Defaults to an SVM for md3-svm and a random subspace ensemble otherwise.
    std::optional<TrainConfig> detection;
    std::size_t chunk = 500;
    std::size_t n_train = 0; // 0 -> chunk
    double theta = 2.0;
    double theta_margin = 0.5;
    double initial_fraction = 0.15;
    std::uint64_t seed = 0;
    std::size_t folds = 5;
    double sigma_floor = default_sigma_floor;
    /// CUSUM / Page-Hinkley allowance and threshold on the centred error stream.
    double allowance = 0.005;
    double cumulative_threshold = 5.0;

    std::size_t resolved_n_train() const { return n_train == 0 ? chunk : n_train; }

    TrainConfig resolved_detection() const {
        if (detection)
            return *detection;
        return detector == DetectorKind::md3_svm ? svm_config() : random_subspace_config();
    }
};

inline void validate(const RunConfig& config) {
    if (config.chunk < 10)
        throw Error(ErrorKind::configuration, fmt::format("chunk size must be at least 10, got {}", config.chunk));
    if (!(config.initial_fraction > 0.0 && config.initial_fraction < 1.0))
        throw Error(ErrorKind::configuration,
                    fmt::format("initial fraction must lie in (0,1), got {}", config.initial_fraction));
    if (!(config.theta >= 0.0) || !std::isfinite(config.theta))
        throw Error(ErrorKind::configuration, fmt::format("theta must be >= 0, got {}", config.theta));
    if (config.folds < 2)
        throw Error(ErrorKind::configuration, "at least 2 folds are required");
    if (!(config.sigma_floor > 0.0))
        throw Error(ErrorKind::configuration, "sigma floor must be positive");
    validate(MarginSpec{MarginKind::ensemble_disagreement, config.theta_margin});
}

/// Hides a stream's labels: `reveal` is the charged channel (once per
/// instance), `evaluate` is the uncharged ground truth used only for scoring.
class Oracle {
public:
    explicit Oracle(const Dataset& data) : data_(&data), revealed_(data.size(), false) {
        require_labels(data, "oracle");
    }

    Label reveal(std::size_t index) {
        if (index >= data_->size())
            throw Error(ErrorKind::index, fmt::format("oracle index {} out of range", index));
        if (revealed_[index])
            throw Error(ErrorKind::state_machine, fmt::format("label {} requested twice", index));
        revealed_[index] = true;
        ++served_;
        return *(*data_)[index].label;
    }

    Label evaluate(std::size_t index) const { return *(*data_)[index].label; }
    bool revealed(std::size_t index) const { return revealed_.at(index); }
    std::size_t served() const noexcept { return served_; }

private:
    const Dataset* data_;
    std::vector<bool> revealed_;
    std::size_t served_ = 0;
};

struct TracePoint {
    std::size_t step = 0;
    double running_accuracy = 0.0;
    double metric = 0.0;
    std::string event;
};

struct RunReport {
    std::string dataset;
    std::string detector;
    std::uint64_t seed = 0;
    std::size_t stream_length = 0;
    std::size_t warmup = 0;
    double accuracy = 0.0;
    std::size_t drifts_confirmed = 0;
    std::size_t false_alarms = 0;
    std::size_t suspected = 0;
    std::size_t unresolved = 0;
    std::size_t labels_requested = 0;
    double labeling_percent = 0.0;
    double labeling_percent_inclusive = 0.0;
    std::vector<DriftEvent> events;
    std::vector<TracePoint> trace;
};

namespace detail {

/// Per-detector state for one run; only the members of the active kind are used.
struct Monitor {
    DetectorKind kind = DetectorKind::no_change;
    RunConfig config;
    TrainConfig detection_config;
    MarginSpec detection_spec;
    std::optional<Md3Detector> md3;
    std::optional<Classifier> detection_model;
    EwmaChart ewma;
    Cusum cusum;
    PageHinkley pht;
    double error_centre = 0.0;
    UncertaintyTracker uncertainty;
    std::optional<HdddmDetector> hdddm;
    std::vector<std::vector<double>> hdddm_window;

    double metric() const {
        switch (kind) {
        case DetectorKind::no_change: return 0.0;
        case DetectorKind::acc_tr: return ewma.value;
        case DetectorKind::cusum: return cusum.value;
        case DetectorKind::pht: return pht.value - pht.minimum;
        case DetectorKind::md3_svm:
        case DetectorKind::md3_rs: return md3->metric();
        case DetectorKind::hdddm: return hdddm->metric();
        case DetectorKind::uncertainty: return uncertainty.value;
        }
        return 0.0;
    }

    void start_error_trackers(const ReferenceDistribution& prediction_reference) {
        const double mu0 = 1.0 - prediction_reference.acc_ref;
        ewma = EwmaChart::start(mu0, prediction_reference.sigma_acc, forgetting_factor(config.chunk), config.theta);
        cusum = Cusum{config.allowance, config.cumulative_threshold};
        pht = PageHinkley{config.allowance, config.cumulative_threshold};
        error_centre = mu0;
    }

    void learn_detection(const Dataset& labeled) {
        if (kind == DetectorKind::uncertainty) {
            detection_model = train(labeled, detection_config);
            auto cv = cross_validate(labeled, detection_config, detection_spec, config.folds);
            uncertainty = uncertainty_from_cv(cv, config.chunk, config.theta, config.sigma_floor);
        }
    }

    /// Rebuilds the HDDDM reference once the window holds 3N samples.
    void grow_hdddm(std::span<const double> x) {
        hdddm_window.emplace_back(x.begin(), x.end());
        if (hdddm_window.size() >= 3 * config.chunk) {
            hdddm->fit_reference(hdddm_window);
            hdddm_window.clear();
        }
    }

    bool hdddm_warming() const { return kind == DetectorKind::hdddm && !hdddm_window.empty(); }
};

} // namespace detail

/// Prequential run: warm-up training on the initial fraction, then
/// predict -> score -> feed detector for every later sample. A suspicion
/// triggers the collection of the next N_train labels, which decide between
/// a confirmed drift (both models retrained on the collected labels) and a
/// false alarm. References are relearned from the collected labels after
/// every decision.
inline RunReport run_stream(const Dataset& data, const RunConfig& config, const std::string& dataset_name = "") {
    validate(config);
    require_labels(data, "run_stream");
    const std::size_t n = data.size();
    const auto warmup = static_cast<std::size_t>(std::floor(config.initial_fraction * static_cast<double>(n)));
    if (warmup < 2 * config.folds)
        throw Error(ErrorKind::configuration,
                    fmt::format("initial fraction gives {} samples; cross validation needs at least {}", warmup,
                                2 * config.folds));
    if (warmup >= n)
        throw Error(ErrorKind::configuration, "initial fraction leaves no stream to evaluate");

    const std::size_t d = data.dimension();
    const std::size_t n_train = config.resolved_n_train();
    const Dataset initial = data.slice(0, warmup);

    TrainConfig prediction_config = config.prediction;
    prediction_config.seed = derive_seed(config.seed, "prediction-model");
    const MarginSpec prediction_spec = default_margin_spec(prediction_config.learner, config.theta_margin);
    Classifier prediction_model = train(initial, prediction_config);
    ReferenceDistribution prediction_reference =
        reference_from_cv(initial, prediction_config, prediction_spec, config.folds, config.sigma_floor);

    detail::Monitor monitor;
    monitor.kind = config.detector;
    monitor.config = config;
    monitor.detection_config = config.resolved_detection();
    monitor.detection_config.seed = derive_seed(config.seed, "detection-model");
    monitor.detection_spec = default_margin_spec(monitor.detection_config.learner, config.theta_margin);
    monitor.start_error_trackers(prediction_reference);
    switch (config.detector) {
    case DetectorKind::md3_svm:
    case DetectorKind::md3_rs:
        monitor.md3 = Md3Detector::fit(initial, monitor.detection_config, monitor.detection_spec,
                                       {config.chunk, config.theta, n_train, config.folds, config.sigma_floor});
        break;
    case DetectorKind::uncertainty: monitor.learn_detection(initial); break;
    case DetectorKind::hdddm: {
        monitor.hdddm.emplace(d, HdddmParams{config.chunk, config.theta, config.sigma_floor});
        const auto& rows = initial.instances();
        const std::size_t from = rows.size() > 3 * config.chunk ? rows.size() - 3 * config.chunk : 0;
        for (std::size_t i = from; i < rows.size(); ++i)
            monitor.grow_hdddm(rows[i].features);
        break;
    }
    default: break;
    }

    Oracle oracle(data);
    RunReport report;
    report.dataset = dataset_name;
    report.detector = to_string(config.detector);
    report.seed = config.seed;
    report.stream_length = n;
    report.warmup = warmup;

    const double lambda = forgetting_factor(config.chunk);
    double running = prediction_reference.acc_ref;
    std::size_t correct_total = 0;
    bool collecting = false;
    bool frozen = false; // unresolved tail: no more detection
    std::vector<Instance> buffer;

    auto record = [&](std::size_t position, EventKind kind, double metric, std::string& trace_event) {
        report.events.push_back({position, kind, metric, oracle.served()});
        trace_event += (trace_event.empty() ? "" : "|") + std::string(to_string(kind));
    };

    for (std::size_t i = warmup; i < n; ++i) {
        const auto& x = data[i].features;
        const Label truth = oracle.evaluate(i);
        const bool correct = predict(prediction_model, x) == truth;
        correct_total += correct ? 1 : 0;
        running = ewma_update(running, correct ? 1.0 : 0.0, lambda);

        std::optional<Label> label;
        if (fully_labeled(config.detector) || collecting)
            label = oracle.reveal(i);

        std::string trace_event;
        if (collecting) {
            buffer.push_back({x, label});
            std::optional<EventKind> decided;
            if (monitor.md3) {
                if (auto decision = monitor.md3->feed_label(buffer.back())) {
                    decided = decision->kind;
                    if (decision->kind == EventKind::confirmed)
                        prediction_model = train(decision->buffer, prediction_config);
                    prediction_reference = reference_from_cv(decision->buffer, prediction_config, prediction_spec,
                                                             config.folds, config.sigma_floor);
                    buffer.clear();
                }
            } else if (buffer.size() >= n_train) {
                Dataset labeled(data.feature_names(), std::move(buffer));
                buffer.clear();
                decided = decide(prediction_reference, config.theta, accuracy(prediction_model, labeled));
                if (*decided == EventKind::confirmed)
                    prediction_model = train(labeled, prediction_config);
                prediction_reference = reference_from_cv(labeled, prediction_config, prediction_spec, config.folds,
                                                         config.sigma_floor);
                monitor.start_error_trackers(prediction_reference);
                monitor.learn_detection(labeled);
                if (config.detector == DetectorKind::hdddm) {
                    monitor.hdddm_window.clear();
                    for (const auto& row : labeled.instances())
                        monitor.hdddm_window.push_back(row.features);
                }
            }
            if (decided) {
                collecting = false;
                if (*decided == EventKind::confirmed)
                    ++report.drifts_confirmed;
                else
                    ++report.false_alarms;
                record(i, *decided, monitor.metric(), trace_event);
            }
        } else if (!frozen) {
            bool alarm = false;
            switch (config.detector) {
            case DetectorKind::no_change: break;
            case DetectorKind::acc_tr: alarm = monitor.ewma.step(correct ? 0.0 : 1.0); break;
            case DetectorKind::cusum: alarm = monitor.cusum.step((correct ? 0.0 : 1.0) - monitor.error_centre); break;
            case DetectorKind::pht: alarm = monitor.pht.step((correct ? 0.0 : 1.0) - monitor.error_centre); break;
            case DetectorKind::md3_svm:
            case DetectorKind::md3_rs: alarm = monitor.md3->observe(x); break;
            case DetectorKind::hdddm:
                if (monitor.hdddm_warming())
                    monitor.grow_hdddm(x);
                else
                    alarm = monitor.hdddm->step(x);
                break;
            case DetectorKind::uncertainty:
                alarm = monitor.uncertainty.step(confidence(*monitor.detection_model, x));
                break;
            }
            if (alarm) {
                ++report.suspected;
                record(i, EventKind::suspected, monitor.metric(), trace_event);
                if (n - 1 - i < n_train) {
                    ++report.unresolved;
                    frozen = true;
                    record(i, EventKind::unresolved, monitor.metric(), trace_event);
                } else {
                    collecting = true;
                }
            }
        }
        report.trace.push_back({i, running, monitor.metric(), std::move(trace_event)});
    }

    const double evaluated = static_cast<double>(n - warmup);
    report.accuracy = static_cast<double>(correct_total) / evaluated;
    report.labels_requested = oracle.served();
    report.labeling_percent = 100.0 * static_cast<double>(oracle.served()) / evaluated;
    report.labeling_percent_inclusive =
        100.0 * static_cast<double>(oracle.served() + warmup) / static_cast<double>(n);
    return report;
}

// ---------------------------------------------------------------------------
// Suites

struct NamedDataset {
    std::string name;
    Dataset data;
};

struct SuiteJob {
    std::size_t dataset = 0;
    RunConfig config;
};

/// Runs every job, up to `jobs` at a time. The result order follows
/// (dataset name, detector name, seed), whatever the thread interleaving.
inline std::vector<RunReport> run_suite(const std::vector<NamedDataset>& datasets, const std::vector<SuiteJob>& work,
                                        std::size_t jobs = 1) {
    for (const auto& job : work) {
        if (job.dataset >= datasets.size())
            throw Error(ErrorKind::index, "suite job refers to a missing dataset");
        validate(job.config);
    }
    std::vector<RunReport> reports(work.size());
    std::vector<std::exception_ptr> failures(work.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k = next++; k < work.size(); k = next++) {
            try {
                const auto& job = work[k];
                reports[k] = run_stream(datasets[job.dataset].data, job.config, datasets[job.dataset].name);
            } catch (...) {
                failures[k] = std::current_exception();
            }
        }
    };
    const std::size_t threads = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(1, work.size()));
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < threads; ++t)
        pool.emplace_back(worker);
    worker();
    for (auto& t : pool)
        t.join();
    for (auto& failure : failures)
        if (failure)
            std::rethrow_exception(failure);
    std::stable_sort(reports.begin(), reports.end(), [](const RunReport& a, const RunReport& b) {
        return std::tie(a.dataset, a.detector, a.seed) < std::tie(b.dataset, b.detector, b.seed);
    });
    return reports;
}

inline void write_summary_csv(std::ostream& out, const std::vector<RunReport>& reports) {
    out << "dataset,detector,seed,accuracy,drifts_confirmed,false_alarms,suspected,unresolved,labeling_percent,"
           "labeling_percent_inclusive\n";
    for (const auto& r : reports)
        out << fmt::format("{},{},{},{:.6f},{},{},{},{},{:.6f},{:.6f}\n", r.dataset, r.detector, r.seed, r.accuracy,
                           r.drifts_confirmed, r.false_alarms, r.suspected, r.unresolved, r.labeling_percent,
                           r.labeling_percent_inclusive);
}

inline void write_trace_csv(std::ostream& out, const RunReport& report) {
    out << "step,running_accuracy,metric_value,event\n";
    for (const auto& p : report.trace)
        out << fmt::format("{},{:.6f},{:.6f},{}\n", p.step, p.running_accuracy, p.metric, p.event);
}

// ---------------------------------------------------------------------------
// Metric deltas between a training sample and a drifted sample

struct MetricDeltas {
    double error = 0.0;       // post error - cross-validated error
    double margin = 0.0;      // post margin density - cross-validated margin density
    double uncertainty = 0.0; // post mean uncertainty - cross-validated mean uncertainty
    double hellinger = 0.0;   // HD(train, post) / sqrt(2)
};

/// Trains a model on `before` with `fit(train, fold)` (fold = folds for the
/// final model), takes the cross-validated metrics of `before` as the
/// baseline and reports how each metric moves on `after`.
template <class Fit>
MetricDeltas metric_deltas_with(const Dataset& before, const Dataset& after, const MarginSpec& spec,
                                std::size_t folds, Fit&& fit) {
    const auto cv = cross_validate_with(before, spec, folds, fit);
    const Classifier model = fit(before, folds);
    double uncertainty = 0.0;
    for (const auto& x : after.instances())
        uncertainty += 1.0 - confidence(model, x.features);
    uncertainty /= static_cast<double>(after.size());

    std::vector<std::vector<double>> a, b;
    for (const auto& x : before.instances())
        a.push_back(x.features);
    for (const auto& x : after.instances())
        b.push_back(x.features);
    const std::size_t bins = hellinger_bins(before.size());

    MetricDeltas deltas;
    deltas.error = (1.0 - accuracy(model, after)) - (1.0 - mean(cv.accuracy));
    deltas.margin = margin_density(model, spec, after) - mean(cv.margin_density);
    deltas.uncertainty = uncertainty - mean(cv.mean_uncertainty);
    deltas.hellinger = hellinger_distance(histogram_of(a, before.dimension(), bins),
                                          histogram_of(b, before.dimension(), bins)) /
                       std::sqrt(2.0);
    return deltas;
}

inline MetricDeltas metric_deltas(const Dataset& before, const Dataset& after, const TrainConfig& config,
                                  const MarginSpec& spec, std::size_t folds = 5) {
    return metric_deltas_with(before, after, spec, folds, [&](const Dataset& fit, std::size_t f) {
        TrainConfig c = config;
        if (f < folds)
            c.seed = derive_seed(config.seed, "cv-fold", f);
        return train(fit, c);
    });
}

/// Orthogonal feature subsets for the low-dimensional scenarios: one member
/// per informative axis, each also seeing the irrelevant axis when there is one.
inline std::vector<std::vector<std::size_t>> scenario_subspaces(std::size_t dimension) {
    if (dimension == 3)
        return {{0, 2}, {1, 2}};
    std::vector<std::vector<std::size_t>> subsets;
    for (std::size_t j = 0; j < dimension; ++j)
        subsets.push_back({j});
    return subsets;
}

enum class ScenarioModel { svm, ensemble };

inline const char* to_string(ScenarioModel model) { return model == ScenarioModel::svm ? "svm" : "ensemble"; }

/// Deltas for a before/after scenario pair, n_per_class samples per phase.
inline MetricDeltas scenario_deltas(const ScenarioId& id, ScenarioModel model, std::size_t n_per_class,
                                    std::uint64_t seed, TreeConfig tree = {}) {
    const auto before = generate_phase(id, ScenarioPhase::before, n_per_class, seed);
    const auto after = generate_phase(id, ScenarioPhase::after, n_per_class, seed);
    const std::uint64_t model_seed = derive_seed(seed, "scenario-model");
    if (model == ScenarioModel::svm)
        return metric_deltas(before, after, svm_config(model_seed), {MarginKind::svm_geometric, 0.5});

    const auto subsets = scenario_subspaces(before.dimension());
    const MemberConfig member{BaseLearner::tree, 1.0, tree};
    return metric_deltas_with(before, after, {MarginKind::ensemble_disagreement, 0.5}, 5,
                              [&](const Dataset& fit, std::size_t f) -> Classifier {
                                  return train_subspace_ensemble(fit, subsets, member,
                                                                 derive_seed(model_seed, "cv-fold", f));
                              });
}

// ---------------------------------------------------------------------------
// Drifted-feature sweep on the 20-dimensional scenario

struct SweepRow {
    int drifted = 0;
    MetricDeltas deltas;
};

struct FirstDetections {
    int error = -1;
    int margin = -1;
    int uncertainty = -1;
    int hellinger = -1;
};

inline constexpr double sweep_tolerance = 0.02;

/// For i = 0..15: train a random subspace ensemble (20 trees on 10 features)
/// on 500 pre-drift samples and measure the deltas on 500 samples with the
/// first i features of class -1 moved.
inline std::vector<SweepRow> table8_sweep(std::uint64_t seed, std::size_t n_per_phase = 500) {
    std::vector<SweepRow> rows;
    for (int i = 0; i <= 15; ++i) {
        const ScenarioId id{ScenarioKind::hd20, i};
        const std::uint64_t s = derive_seed(seed, "hd20", static_cast<std::uint64_t>(i));
        const auto before = generate_phase(id, ScenarioPhase::before, n_per_phase / 2, s);
        const auto after = generate_phase(id, ScenarioPhase::after, n_per_phase / 2, s);
        TrainConfig config = random_subspace_config(derive_seed(s, "sweep-model"));
        config.subspace_size = 10;
        rows.push_back({i, metric_deltas(before, after, config, {MarginKind::ensemble_disagreement, 0.5})});
    }
    return rows;
}

/// First i >= 1 whose |delta| exceeds the tolerance, -1 if none.
inline FirstDetections first_detections(const std::vector<SweepRow>& rows, double tolerance = sweep_tolerance) {
    FirstDetections first;
    auto note = [&](int& slot, double value, int i) {
        if (slot < 0 && std::abs(value) > tolerance)
            slot = i;
    };
    for (const auto& row : rows) {
        if (row.drifted < 1)
            continue;
        note(first.error, row.deltas.error, row.drifted);
        note(first.margin, row.deltas.margin, row.drifted);
        note(first.uncertainty, row.deltas.uncertainty, row.drifted);
        note(first.hellinger, row.deltas.hellinger, row.drifted);
    }
    return first;
}

inline void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
    out << "drifted_features,delta_error,delta_margin_density,delta_uncertainty,delta_hellinger\n";
    for (const auto& r : rows)
        out << fmt::format("{},{:.6f},{:.6f},{:.6f},{:.6f}\n", r.drifted, r.deltas.error, r.deltas.margin,
                           r.deltas.uncertainty, r.deltas.hellinger);
}

} // namespace md3
