#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "md3/harness.hpp"

namespace md3 {

// Desk-scale benchmark: 1500 rows of the static 16-feature table, drift
// induced at the midpoint, chunk 150.

inline constexpr std::size_t benchmark_rows = 1500;
inline constexpr std::size_t benchmark_chunk = 150;

inline InductionResult induced_benchmark(std::uint64_t seed, InductionMode mode) {
    return induce(generate_static16(benchmark_rows, seed), mode);
}

inline RunConfig benchmark_config(DetectorKind detector, std::uint64_t seed) {
    RunConfig config;
    config.detector = detector;
    config.chunk = benchmark_chunk;
    config.seed = seed;
    return config;
}

/// Confirmed drifts whose triggering suspicion lies within `window` samples of
/// the change, on either side.
inline std::size_t confirmations_near(const RunReport& report, std::size_t change, std::size_t window) {
    std::size_t count = 0;
    std::optional<std::size_t> suspicion;
    for (const auto& e : report.events) {
        if (e.kind == EventKind::suspected)
            suspicion = e.position;
        else if (e.kind == EventKind::confirmed && suspicion && *suspicion + window >= change &&
                 *suspicion <= change + window)
            ++count;
    }
    return count;
}

/// A labeled warm-up of `warmup` rows followed by 20 chunks of the same
/// distribution.
struct StationarySetup {
    Dataset data;
    RunConfig config;
};

inline StationarySetup stationary_setup(DetectorKind detector, std::uint64_t seed,
                                        std::size_t chunk = benchmark_chunk, std::size_t warmup = 225) {
    const std::size_t n = warmup + 20 * chunk;
    RunConfig config;
    config.detector = detector;
    config.chunk = chunk;
    config.seed = seed;
    config.initial_fraction = (static_cast<double>(warmup) + 0.5) / static_cast<double>(n);
    return {generate_static16(n, seed), config};
}

// Parameter sweeps over one stream

struct ParameterRow {
    double value = 0.0;
    RunReport report;
};

enum class SweptParameter { theta_margin, theta };

inline std::vector<ParameterRow> parameter_sweep(const Dataset& data, const RunConfig& base, SweptParameter what,
                                                 const std::vector<double>& values, const std::string& name,
                                                 std::size_t jobs = 1) {
    std::vector<SuiteJob> work;
    for (double v : values) {
        RunConfig c = base;
        (what == SweptParameter::theta ? c.theta : c.theta_margin) = v;
        work.push_back({0, c});
    }
    // run_suite orders by (dataset, detector, seed); keep value order by
    // giving each run its own dataset name.
    std::vector<NamedDataset> datasets;
    for (std::size_t k = 0; k < values.size(); ++k)
        datasets.push_back({fmt::format("{}#{:04}", name, k), data});
    for (std::size_t k = 0; k < work.size(); ++k)
        work[k].dataset = k;
    auto reports = run_suite(datasets, work, jobs);
    std::vector<ParameterRow> rows;
    for (std::size_t k = 0; k < values.size(); ++k) {
        reports[k].dataset = name;
        rows.push_back({values[k], std::move(reports[k])});
    }
    return rows;
}

inline void write_parameter_csv(std::ostream& out, const std::vector<ParameterRow>& rows,
                                const std::string& parameter) {
    out << parameter
        << ",dataset,detector,seed,accuracy,drifts_confirmed,false_alarms,suspected,unresolved,labeling_percent\n";
    for (const auto& row : rows) {
        const auto& r = row.report;
        out << fmt::format("{:.6f},{},{},{},{:.6f},{},{},{},{},{:.6f}\n", row.value, r.dataset, r.detector, r.seed,
                           r.accuracy, r.drifts_confirmed, r.false_alarms, r.suspected, r.unresolved,
                           r.labeling_percent);
    }
}

} // namespace md3
