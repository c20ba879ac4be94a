#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "md3/classifier.hpp"
#include "md3/margin.hpp"
#include "md3/random.hpp"
#include "md3/stats.hpp"

namespace md3 {

/// Floor applied to every learned standard deviation, so a perfect training
/// fit (zero fold variance) does not turn a single error into a drift.
inline constexpr double default_sigma_floor = 1e-3;

enum class EventKind { suspected, confirmed, false_alarm, unresolved };

inline const char* to_string(EventKind kind) {
    switch (kind) {
    case EventKind::suspected: return "suspected";
    case EventKind::confirmed: return "confirmed";
    case EventKind::false_alarm: return "false_alarm";
    case EventKind::unresolved: return "unresolved";
    }
    return "?";
}

struct DriftEvent {
    std::size_t position = 0;
    EventKind kind = EventKind::suspected;
    double metric = 0.0;
    std::size_t labels_consumed = 0;

    friend bool operator==(const DriftEvent&, const DriftEvent&) = default;
};

// ---------------------------------------------------------------------------
// Reference distribution

struct ReferenceDistribution {
    double md_ref = 0.0;
    double sigma_md = default_sigma_floor;
    double acc_ref = 1.0;
    double sigma_acc = default_sigma_floor;
};

/// Per-fold test metrics of a k-fold cross validation.
struct CvSummary {
    std::vector<double> margin_density;
    std::vector<double> accuracy;
    std::vector<double> mean_uncertainty;
};

namespace detail {

inline bool both_classes(const Dataset& data) {
    return data.count(Label::positive) > 0 && data.count(Label::negative) > 0;
}

/// Fold id per row: sequential bands (first n % k bands one row longer).
inline std::vector<std::size_t> band_folds(std::size_t n, std::size_t k) {
    std::vector<std::size_t> fold(n);
    std::size_t row = 0;
    for (std::size_t f = 0; f < k; ++f) {
        const std::size_t len = n / k + (f < n % k ? 1 : 0);
        for (std::size_t i = 0; i < len; ++i)
            fold[row++] = f;
    }
    return fold;
}

/// Class-wise round robin, used when a sequential band leaves a training
/// fold with a single class.
inline std::vector<std::size_t> stratified_folds(const Dataset& data, std::size_t k) {
    std::vector<std::size_t> fold(data.size());
    std::size_t counter = 0;
    for (Label y : {Label::positive, Label::negative})
        for (std::size_t i = 0; i < data.size(); ++i)
            if (data[i].label == y)
                fold[i] = counter++ % k;
    return fold;
}

inline std::pair<Dataset, Dataset> split_fold(const Dataset& data, const std::vector<std::size_t>& fold,
                                              std::size_t f) {
    std::vector<std::size_t> train_rows, test_rows;
    for (std::size_t i = 0; i < data.size(); ++i)
        (fold[i] == f ? test_rows : train_rows).push_back(i);
    return {data.select(train_rows), data.select(test_rows)};
}

} // namespace detail

/// k-fold cross validation over sequential bands: each band is the test set
/// once for a model trained on the other k-1 bands. `fit(train, fold)`
/// produces the fold model.
template <class Fit>
CvSummary cross_validate_with(const Dataset& train_data, const MarginSpec& spec, std::size_t k, Fit&& fit) {
    require_labels(train_data, "cross_validate");
    if (k < 2)
        throw Error(ErrorKind::parameter, "cross validation needs at least 2 folds");
    if (train_data.size() < k)
        throw Error(ErrorKind::parameter,
                    fmt::format("cross validation needs at least k={} samples, got {}", k, train_data.size()));

    auto folds = detail::band_folds(train_data.size(), k);
    auto all_folds_trainable = [&](const std::vector<std::size_t>& assignment) {
        for (std::size_t f = 0; f < k; ++f)
            if (!detail::both_classes(detail::split_fold(train_data, assignment, f).first))
                return false;
        return true;
    };
    if (!all_folds_trainable(folds)) {
        folds = detail::stratified_folds(train_data, k);
        if (!all_folds_trainable(folds))
            throw Error(ErrorKind::degenerate_data, "a cross-validation training fold has a single class");
    }

    CvSummary summary;
    for (std::size_t f = 0; f < k; ++f) {
        auto [train_fold, test] = detail::split_fold(train_data, folds, f);
        const Classifier model = fit(train_fold, f);
        summary.accuracy.push_back(accuracy(model, test));
        summary.margin_density.push_back(margin_density(model, spec, test));
        double uncertainty = 0.0;
        for (const auto& x : test.instances())
            uncertainty += 1.0 - confidence(model, x.features);
        summary.mean_uncertainty.push_back(uncertainty / static_cast<double>(test.size()));
    }
    return summary;
}

inline CvSummary cross_validate(const Dataset& train_data, const TrainConfig& config, const MarginSpec& spec,
                                std::size_t k = 5) {
    return cross_validate_with(train_data, spec, k, [&](const Dataset& fit, std::size_t f) {
        TrainConfig fold_config = config;
        fold_config.seed = derive_seed(config.seed, "cv-fold", f);
        return train(fit, fold_config);
    });
}

/// Fold means and population standard deviations, sigmas floored.
inline ReferenceDistribution summarize(const CvSummary& cv, double sigma_floor = default_sigma_floor) {
    return {mean(cv.margin_density), std::max(population_stddev(cv.margin_density), sigma_floor),
            mean(cv.accuracy), std::max(population_stddev(cv.accuracy), sigma_floor)};
}

inline ReferenceDistribution reference_from_cv(const Dataset& train_data, const TrainConfig& config,
                                               const MarginSpec& spec, std::size_t k = 5,
                                               double sigma_floor = default_sigma_floor) {
    return summarize(cross_validate(train_data, config, spec, k), sigma_floor);
}

// ---------------------------------------------------------------------------
// MD3 state machine

struct Md3State {
    double md = 0.0;
    double lambda = 0.998;
    double theta = 2.0;
    ReferenceDistribution reference;
    bool currently_drifting = false;
    std::size_t n_train = 500;
    std::vector<Instance> labeled_buffer;
};

inline Md3State make_md3_state(const ReferenceDistribution& reference, std::size_t chunk, double theta,
                               std::size_t n_train = 0) {
    if (chunk < 2)
        throw Error(ErrorKind::parameter, "chunk size must be at least 2");
    Md3State state;
    state.md = reference.md_ref;
    state.lambda = forgetting_factor(chunk);
    state.theta = theta;
    state.reference = reference;
    state.n_train = n_train == 0 ? chunk : n_train;
    return state;
}

/// Moving-average update; returns true when a drift becomes suspected. While
/// a collection is in progress the metric keeps moving but nothing fires.
inline bool md3_step(Md3State& state, int signal) {
    state.md = ewma_update(state.md, static_cast<double>(signal), state.lambda);
    if (state.currently_drifting)
        return false;
    if (std::abs(state.md - state.reference.md_ref) > state.theta * state.reference.sigma_md) {
        state.currently_drifting = true;
        return true;
    }
    return false;
}

/// Accuracy drop test on a filled label buffer.
inline EventKind decide(const ReferenceDistribution& reference, double theta, double buffer_accuracy) {
    return reference.acc_ref - buffer_accuracy > theta * reference.sigma_acc ? EventKind::confirmed
                                                                            : EventKind::false_alarm;
}

struct DriftDecision {
    EventKind kind = EventKind::false_alarm;
    double buffer_accuracy = 0.0;
    Dataset buffer;
};

struct Md3Params {
    std::size_t chunk = 500;
    double theta = 2.0;
    std::size_t n_train = 0; // 0 -> chunk
    std::size_t folds = 5;
    double sigma_floor = default_sigma_floor;
};

/// MD3 detector bound to its detection model: tracks margin density on
/// unlabeled samples, collects n_train labels after a suspicion, confirms or
/// dismisses the drift, retrains on confirmation and relearns the reference
/// from the collected labels after every decision.
class Md3Detector {
public:
    Md3Detector(Classifier model, TrainConfig config, MarginSpec spec, ReferenceDistribution reference,
                Md3Params params)
        : model_(std::move(model)), config_(std::move(config)), spec_(spec), params_(params),
          state_(make_md3_state(reference, params.chunk, params.theta, params.n_train)) {
        validate(spec_);
    }

    /// Trains the detection model and learns the reference on `train_data`.
    static Md3Detector fit(const Dataset& train_data, const TrainConfig& config, const MarginSpec& spec,
                           const Md3Params& params) {
        auto reference = reference_from_cv(train_data, config, spec, params.folds, params.sigma_floor);
        return Md3Detector(train(train_data, config), config, spec, reference, params);
    }

    int signal(std::span<const double> x) const { return margin_signal(model_, spec_, x); }

    bool step(int signal) { return md3_step(state_, signal); }
    bool observe(std::span<const double> x) { return step(signal(x)); }

    /// Adds a labeled sample to the confirmation buffer. Returns the decision
    /// once the buffer holds n_train samples.
    std::optional<DriftDecision> feed_label(const Instance& labeled) {
        if (!state_.currently_drifting)
            throw Error(ErrorKind::state_machine, "labels fed to MD3 while no drift is suspected");
        if (!labeled.label)
            throw Error(ErrorKind::missing_labels, "MD3 confirmation needs labeled samples");
        state_.labeled_buffer.push_back(labeled);
        if (state_.labeled_buffer.size() < state_.n_train)
            return std::nullopt;

        Dataset buffer(Dataset::default_names(labeled.features.size()), std::move(state_.labeled_buffer));
        state_.labeled_buffer.clear();
        DriftDecision decision;
        decision.buffer_accuracy = accuracy(model_, buffer);
        decision.kind = decide(state_.reference, state_.theta, decision.buffer_accuracy);
        if (decision.kind == EventKind::confirmed)
            model_ = train(buffer, config_);
        state_.reference = reference_from_cv(buffer, config_, spec_, params_.folds, params_.sigma_floor);
        state_.md = state_.reference.md_ref;
        state_.currently_drifting = false;
        decision.buffer = std::move(buffer);
        return decision;
    }

    const Md3State& state() const noexcept { return state_; }
    const Classifier& model() const noexcept { return model_; }
    const MarginSpec& spec() const noexcept { return spec_; }
    const TrainConfig& config() const noexcept { return config_; }
    double metric() const noexcept { return state_.md; }

private:
    Classifier model_;
    TrainConfig config_;
    MarginSpec spec_;
    Md3Params params_;
    Md3State state_;
};

// ---------------------------------------------------------------------------
// Univariate trackers

/// EWMA chart: M_0 = mu_0, M_t = lambda M_{t-1} + (1 - lambda) eps_t,
/// alarm when M_t - mu_0 > theta sigma_0.
struct EwmaChart {
    double mu0 = 0.0;
    double sigma0 = default_sigma_floor;
    double lambda = 0.99;
    double theta = 2.0;
    double value = 0.0;

    static EwmaChart start(double mu0, double sigma0, double lambda, double theta) {
        return {mu0, sigma0, lambda, theta, mu0};
    }

    bool step(double epsilon) {
        value = ewma_update(value, epsilon, lambda);
        return value - mu0 > theta * sigma0;
    }
};

/// CUSUM: M_t = max(0, M_{t-1} + eps_t - v); alarm and reset when M_t > threshold.
struct Cusum {
    double allowance = 0.005;
    double threshold = 5.0;
    double value = 0.0;

    bool step(double epsilon) {
        value = std::max(0.0, value + epsilon - allowance);
        if (value > threshold) {
            value = 0.0;
            return true;
        }
        return false;
    }
};

/// Page-Hinkley: M_t = M_{t-1} + (eps_t - v), M_ref = running minimum;
/// alarm and reset when M_t - M_ref > threshold.
struct PageHinkley {
    double allowance = 0.005;
    double threshold = 5.0;
    double value = 0.0;
    double minimum = 0.0;

    bool step(double epsilon) {
        value += epsilon - allowance;
        minimum = std::min(minimum, value);
        if (value - minimum > threshold) {
            value = 0.0;
            minimum = 0.0;
            return true;
        }
        return false;
    }
};

/// Moving average of per-sample uncertainty 1 - |p+ - p-|, alarm on a
/// deviation beyond theta sigma from the cross-validated mean uncertainty.
struct UncertaintyTracker {
    double reference_mean = 0.0;
    double reference_sigma = default_sigma_floor;
    double lambda = 0.99;
    double theta = 2.0;
    double value = 0.0;

    static UncertaintyTracker start(double mean_uncertainty, double sigma, double lambda, double theta) {
        return {mean_uncertainty, sigma, lambda, theta, mean_uncertainty};
    }

    bool step(double confidence) {
        value = ewma_update(value, 1.0 - confidence, lambda);
        return std::abs(value - reference_mean) > theta * reference_sigma;
    }
};

inline UncertaintyTracker uncertainty_from_cv(const CvSummary& cv, std::size_t chunk, double theta,
                                              double sigma_floor = default_sigma_floor) {
    return UncertaintyTracker::start(mean(cv.mean_uncertainty),
                                     std::max(population_stddev(cv.mean_uncertainty), sigma_floor),
                                     forgetting_factor(chunk), theta);
}

// ---------------------------------------------------------------------------
// Hellinger distance

/// Per-feature bin counts over fixed equal-width bins on [0,1].
struct Histograms {
    std::size_t bins = 0;
    std::vector<std::vector<double>> counts; // [feature][bin]

    Histograms() = default;
    Histograms(std::size_t dimension, std::size_t bin_count)
        : bins(bin_count), counts(dimension, std::vector<double>(bin_count, 0.0)) {}

    std::size_t dimension() const noexcept { return counts.size(); }

    std::size_t bin_of(double v) const {
        v = std::clamp(v, 0.0, 1.0);
        return std::min(static_cast<std::size_t>(v * static_cast<double>(bins)), bins - 1);
    }

    void add(std::span<const double> x, double weight = 1.0) {
        for (std::size_t k = 0; k < counts.size(); ++k)
            counts[k][bin_of(x[k])] += weight;
    }
};

inline std::size_t hellinger_bins(std::size_t chunk) {
    return static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(chunk))));
}

inline Histograms histogram_of(std::span<const std::vector<double>> rows, std::size_t dimension, std::size_t bins) {
    Histograms h(dimension, bins);
    for (const auto& x : rows)
        h.add(x);
    return h;
}

/// Feature-averaged Hellinger distance, in [0, sqrt(2)].
inline double hellinger_distance(const Histograms& p, const Histograms& q) {
    if (p.dimension() != q.dimension() || p.bins != q.bins)
        throw Error(ErrorKind::shape, fmt::format("histogram shapes differ: {}x{} vs {}x{}", p.dimension(), p.bins,
                                                  q.dimension(), q.bins));
    if (p.dimension() == 0)
        throw Error(ErrorKind::shape, "histograms have no features");
    double total = 0.0;
    for (std::size_t k = 0; k < p.dimension(); ++k) {
        const double sp = std::accumulate(p.counts[k].begin(), p.counts[k].end(), 0.0);
        const double sq = std::accumulate(q.counts[k].begin(), q.counts[k].end(), 0.0);
        if (!(sp > 0.0) || !(sq > 0.0))
            throw Error(ErrorKind::degenerate_histogram, fmt::format("feature {} histogram has zero mass", k));
        double sum = 0.0;
        for (std::size_t i = 0; i < p.bins; ++i) {
            const double diff = std::sqrt(p.counts[k][i] / sp) - std::sqrt(q.counts[k][i] / sq);
            sum += diff * diff;
        }
        total += std::sqrt(sum);
    }
    return total / static_cast<double>(p.dimension());
}

// ---------------------------------------------------------------------------
// HDDDM, incremental form

struct HdddmParams {
    std::size_t chunk = 500;
    double theta = 2.0;
    double sigma_floor = default_sigma_floor;
};

/// Hellinger-distance detector with a chunk that slides one sample at a time.
///
/// Reference: from a window of up to 3N samples, the reference chunk P is the
/// last N samples, and the expected distance and its deviation come from the
/// population of distances between non-overlapping pairs of N-sample chunks
/// taken at a slide of N/3 inside the window. Online, the current chunk Q is
/// the latest N samples (disjoint from P); an alarm fires when
/// HD(P, Q) - hd_ref > theta sigma_hd.
class HdddmDetector {
public:
    HdddmDetector(std::size_t dimension, HdddmParams params)
        : dimension_(dimension), params_(params), bins_(hellinger_bins(params.chunk)),
          current_(dimension, bins_) {
        if (params.chunk < 3)
            throw Error(ErrorKind::parameter, "HDDDM chunk size must be at least 3");
    }

    /// Needs at least 2N samples; only the last 3N are used.
    void fit_reference(std::span<const std::vector<double>> window) {
        const std::size_t n = params_.chunk;
        if (window.size() < 2 * n)
            throw Error(ErrorKind::parameter,
                        fmt::format("HDDDM reference window needs >= {} samples, got {}", 2 * n, window.size()));
        if (window.size() > 3 * n)
            window = window.subspan(window.size() - 3 * n);
        const std::size_t slide = std::max<std::size_t>(1, n / 3);
        std::vector<std::size_t> offsets;
        for (std::size_t off = 0; off + n <= window.size(); off += slide)
            offsets.push_back(off);
        std::vector<Histograms> chunks;
        for (auto off : offsets)
            chunks.push_back(histogram_of(window.subspan(off, n), dimension_, bins_));
        population_.clear();
        for (std::size_t a = 0; a < offsets.size(); ++a)
            for (std::size_t b = a + 1; b < offsets.size(); ++b)
                if (offsets[b] - offsets[a] >= n)
                    population_.push_back(hellinger_distance(chunks[a], chunks[b]));
        hd_ref_ = mean(population_);
        sigma_hd_ = std::max(population_stddev(population_), params_.sigma_floor);
        reference_ = histogram_of(window.subspan(window.size() - n), dimension_, bins_);
        current_ = Histograms(dimension_, bins_);
        chunk_.clear();
        metric_ = 0.0;
        ready_ = true;
    }

    bool ready() const noexcept { return ready_; }

    /// Slides the current chunk by one sample; alarms only once it is full.
    bool step(std::span<const double> x) {
        if (!ready_)
            throw Error(ErrorKind::state_machine, "HDDDM stepped before its reference was initialised");
        if (x.size() != dimension_)
            throw Error(ErrorKind::shape, fmt::format("HDDDM expects {} features, got {}", dimension_, x.size()));
        chunk_.emplace_back(x.begin(), x.end());
        current_.add(x);
        if (chunk_.size() > params_.chunk) {
            current_.add(chunk_.front(), -1.0);
            chunk_.pop_front();
        }
        if (chunk_.size() < params_.chunk)
            return false;
        metric_ = hellinger_distance(reference_, current_);
        return metric_ - hd_ref_ > params_.theta * sigma_hd_;
    }

    double metric() const noexcept { return metric_; }
    double hd_ref() const noexcept { return hd_ref_; }
    double sigma_hd() const noexcept { return sigma_hd_; }
    std::size_t bins() const noexcept { return bins_; }
    std::size_t chunk_fill() const noexcept { return chunk_.size(); }
    const std::vector<double>& population() const noexcept { return population_; }
    const Histograms& reference() const noexcept { return reference_; }

private:
    std::size_t dimension_;
    HdddmParams params_;
    std::size_t bins_;
    Histograms reference_;
    Histograms current_;
    std::deque<std::vector<double>> chunk_;
    std::vector<double> population_;
    double hd_ref_ = 0.0;
    double sigma_hd_ = default_sigma_floor;
    double metric_ = 0.0;
    bool ready_ = false;
};

} // namespace md3
