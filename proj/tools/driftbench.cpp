#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "md3/md3.hpp"

namespace fs = std::filesystem;
using namespace md3;

namespace {

enum ExitCode { exit_ok = 0, exit_usage = 2, exit_data = 3, exit_runtime = 4 };

int exit_code_for(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::parameter:
    case ErrorKind::configuration: return exit_usage;
    case ErrorKind::degenerate_training:
    case ErrorKind::state_machine: return exit_runtime;
    default: return exit_data;
    }
}

/// Refusing to clobber existing outputs is a usage error.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void check_writable(const fs::path& path, bool force) {
    if (fs::exists(path) && !force)
        throw UsageError(fmt::format("'{}' exists; pass --force to overwrite", path.string()));
}

void write_file(const fs::path& path, const std::string& text) {
    if (path.has_parent_path())
        fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error(ErrorKind::io, fmt::format("cannot write '{}'", path.string()));
    out << text;
    if (!out)
        throw Error(ErrorKind::io, fmt::format("failed writing '{}'", path.string()));
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

TrainConfig parse_model(const std::string& name) {
    if (name == "svm")
        return svm_config();
    if (name == "rs")
        return random_subspace_config();
    TrainConfig config;
    if (name == "lr-l2")
        config.learner = LearnerKind::logistic_l2;
    else if (name == "lr-l1")
        config.learner = LearnerKind::logistic_l1;
    else if (name == "tree")
        config.learner = LearnerKind::tree;
    else
        throw Error(ErrorKind::parameter,
                    fmt::format("unknown model '{}' (valid: svm, rs, lr-l2, lr-l1, tree)", name));
    return config;
}

std::vector<double> parse_values(const std::string& text) {
    std::vector<double> values;
    std::stringstream in(text);
    std::string cell;
    while (std::getline(in, cell, ',')) {
        auto v = md3::detail::parse_double(md3::detail::trim(cell));
        if (!v)
            throw Error(ErrorKind::parameter, fmt::format("bad value '{}' in --values", cell));
        values.push_back(*v);
    }
    if (values.empty())
        throw Error(ErrorKind::parameter, "--values is empty");
    return values;
}

struct InputOptions {
    std::string path;
    std::string label_column = "class";
    std::string positive_label = "1";

    void add_to(CLI::App* app, bool required) {
        auto* opt = app->add_option("--in", path, "Input CSV (header row required)");
        if (required)
            opt->required();
        app->add_option("--label-column", label_column, "Label column name or 0-based index")
            ->capture_default_str();
        app->add_option("--positive-label", positive_label, "Label value mapped to +1")->capture_default_str();
    }

    Dataset load() const {
        LabelColumn column = label_column;
        if (!label_column.empty() &&
            std::all_of(label_column.begin(), label_column.end(), [](unsigned char c) { return std::isdigit(c); }))
            column = static_cast<std::size_t>(std::stoul(label_column));
        return load_csv(path, column, positive_label);
    }
};

// synth ----------------------------------------------------------------------

struct SynthOptions {
    std::string scenario;
    std::size_t n = 500;
    std::string phase = "stream";
    std::string out;
};

void run_synth(const SynthOptions& o, std::uint64_t seed, bool force) {
    if (o.n < 1)
        throw Error(ErrorKind::parameter, "--n must be at least 1");
    Dataset data;
    std::string lower = o.scenario;
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    if (lower == "static16") {
        data = generate_static16(2 * o.n, seed);
    } else {
        const auto id = parse_scenario(o.scenario);
        if (o.phase == "stream")
            data = generate_scenario(id, o.n, seed);
        else
            data = generate_phase(id, o.phase == "before" ? ScenarioPhase::before : ScenarioPhase::after, o.n, seed);
    }
    check_writable(o.out, force);
    std::ostringstream text;
    write_csv(text, data);
    write_file(o.out, text.str());
    fmt::print("wrote {} rows x {} features to {}\n", data.size(), data.dimension(), o.out);
}

// induce ---------------------------------------------------------------------

struct InduceOptions {
    InputOptions input;
    std::string mode = "top";
    double fraction = 0.25;
    double change_point = 0.5;
    int target_class = -1;
    std::string out;
    std::string plan_out;
    std::string plan;
    bool no_shuffle = false;
    bool no_normalize = false;
    std::size_t bins = 10;
};

Dataset prepare(const Dataset& raw, bool normalize, bool shuffled, std::uint64_t seed) {
    Dataset data = normalize ? apply_normalizer(fit_normalizer(raw), raw) : raw;
    return shuffled ? shuffle(data, derive_seed(seed, "shuffle")) : data;
}

void run_induce(const InduceOptions& o, std::uint64_t seed, bool force) {
    const fs::path plan_path = o.plan_out.empty() ? fs::path(o.out + ".plan.json") : fs::path(o.plan_out);
    check_writable(o.out, force);
    const Dataset raw = o.input.load();

    Dataset induced;
    json sidecar;
    if (!o.plan.empty()) {
        std::ifstream in(o.plan);
        if (!in)
            throw Error(ErrorKind::io, fmt::format("cannot open plan '{}'", o.plan));
        json recorded;
        try {
            recorded = json::parse(in);
        } catch (const json::exception& e) {
            throw Error(ErrorKind::format, fmt::format("plan '{}' is not valid JSON: {}", o.plan, e.what()));
        }
        if (!recorded.is_object() || !recorded.contains("plan"))
            throw Error(ErrorKind::format, fmt::format("plan '{}' has no 'plan' object", o.plan));
        const auto plan = plan_from_json(recorded["plan"]);
        const auto replay_seed = recorded.value("seed", std::uint64_t{0});
        const Dataset data =
            prepare(raw, recorded.value("normalized", true), recorded.value("shuffled", true), replay_seed);
        induced = rotate_features(data, plan);
        fmt::print("replayed plan from {} ({} features rotated)\n", o.plan, plan.feature_subset.size());
    } else {
        if (!(o.fraction > 0.0 && o.fraction <= 1.0))
            throw Error(ErrorKind::parameter, fmt::format("--fraction must lie in (0,1], got {}", o.fraction));
        if (o.target_class != 1 && o.target_class != -1)
            throw Error(ErrorKind::parameter, fmt::format("--class must be 1 or -1, got {}", o.target_class));
        const Dataset data = prepare(raw, !o.no_normalize, !o.no_shuffle, seed);
        auto result = induce(data, parse_induction_mode(o.mode), o.fraction, o.change_point,
                             o.target_class == 1 ? Label::positive : Label::negative, o.bins);
        induced = std::move(result.data);
        sidecar["seed"] = seed;
        sidecar["normalized"] = !o.no_normalize;
        sidecar["shuffled"] = !o.no_shuffle;
        sidecar["bins"] = o.bins;
        sidecar["change_index"] = change_index(result.plan.change_point, induced.size());
        sidecar["plan"] = to_json(result.plan);
        sidecar["ranking"] = to_json(result.ranking);
        check_writable(plan_path, force);
        fmt::print("rotated features:");
        for (auto f : result.plan.feature_subset)
            fmt::print(" {}", induced.feature_names()[f]);
        fmt::print("\n");
    }

    std::ostringstream text;
    write_csv(text, induced);
    write_file(o.out, text.str());
    if (!sidecar.is_null()) {
        write_file(plan_path, dump(sidecar));
        fmt::print("wrote {} and {}\n", o.out, plan_path.string());
    } else {
        fmt::print("wrote {}\n", o.out);
    }
}

// run ------------------------------------------------------------------------

struct RunOptions {
    InputOptions input;
    std::string detector = "md3-rs";
    std::string model = "svm";
    std::string detection_model;
    std::size_t chunk = 0; // 0 -> about a tenth of the stream
    std::size_t n_train = 0;
    double theta = 2.0;
    double theta_margin = 0.5;
    double initial_fraction = 0.15;
    std::size_t folds = 5;
    double sigma_floor = default_sigma_floor;
    std::string out_dir;
    std::string suite;
    std::size_t jobs = 1;
    bool normalize = false;
};

void add_run_flags(CLI::App* app, RunOptions& o) {
    app->add_option("--model", o.model, "Prediction model: svm, rs, lr-l2, lr-l1, tree")->capture_default_str();
    app->add_option("--detection-model", o.detection_model,
                    "Detection model (default: svm for md3-svm, rs otherwise)");
    app->add_option("--chunk", o.chunk, "Chunk size N (0 = a tenth of the stream, at least 10)")
        ->capture_default_str();
    app->add_option("--n-train", o.n_train, "Labels collected per suspicion (0 = N)")->capture_default_str();
    app->add_option("--theta", o.theta, "Detection sensitivity")->capture_default_str();
    app->add_option("--theta-margin", o.theta_margin, "Margin width for ensemble/probabilistic signals")
        ->capture_default_str();
    app->add_option("--initial-fraction", o.initial_fraction, "Labeled warm-up fraction")->capture_default_str();
    app->add_option("--folds", o.folds, "Cross-validation folds")->capture_default_str();
    app->add_option("--sigma-floor", o.sigma_floor, "Lower bound on reference deviations")->capture_default_str();
    app->add_option("--jobs", o.jobs, "Parallel runs")->capture_default_str();
}

std::size_t default_chunk(std::size_t rows) {
    return std::max<std::size_t>(10, static_cast<std::size_t>(std::lround(static_cast<double>(rows) / 10.0)));
}

RunConfig run_config(const RunOptions& o, DetectorKind detector, std::uint64_t seed, std::size_t rows) {
    RunConfig config;
    config.detector = detector;
    config.prediction = parse_model(o.model);
    if (!o.detection_model.empty())
        config.detection = parse_model(o.detection_model);
    config.chunk = o.chunk == 0 ? default_chunk(rows) : o.chunk;
    config.n_train = o.n_train;
    config.theta = o.theta;
    config.theta_margin = o.theta_margin;
    config.initial_fraction = o.initial_fraction;
    config.folds = o.folds;
    config.sigma_floor = o.sigma_floor;
    config.seed = seed;
    validate(config);
    return config;
}

json config_json(const RunConfig& c) {
    return {{"detector", to_string(c.detector)},
            {"chunk", c.chunk},
            {"n_train", c.resolved_n_train()},
            {"theta", c.theta},
            {"theta_margin", c.theta_margin},
            {"initial_fraction", c.initial_fraction},
            {"folds", c.folds},
            {"sigma_floor", c.sigma_floor},
            {"seed", c.seed}};
}

void write_run(const fs::path& dir, const RunReport& report, const RunConfig& config) {
    std::ostringstream trace;
    write_trace_csv(trace, report);
    write_file(dir / "trace.csv", trace.str());
    json j = to_json(report);
    j["config"] = config_json(config);
    write_file(dir / "report.json", dump(j));
}

std::vector<DetectorKind> parse_suite(const std::string& text) {
    if (text == "all")
        return {all_detectors.begin(), all_detectors.end()};
    std::vector<DetectorKind> kinds;
    std::stringstream in(text);
    std::string name;
    while (std::getline(in, name, ','))
        kinds.push_back(parse_detector(md3::detail::trim(name)));
    if (kinds.empty())
        throw Error(ErrorKind::parameter, "--suite lists no detectors");
    return kinds;
}

Dataset load_for_run(const RunOptions& o) {
    Dataset data = o.input.load();
    if (o.normalize) {
        const auto warmup = static_cast<std::size_t>(o.initial_fraction * static_cast<double>(data.size()));
        data = apply_normalizer(fit_normalizer(data.slice(0, std::max<std::size_t>(warmup, 1))), data);
    }
    return data;
}

void run_run(const RunOptions& o, std::uint64_t seed, bool force) {
    const fs::path dir = o.out_dir;
    const std::string name = fs::path(o.input.path).stem().string();
    if (o.suite.empty()) {
        const auto detector = parse_detector(o.detector);
        check_writable(dir / "trace.csv", force);
        check_writable(dir / "report.json", force);
        const Dataset data = load_for_run(o);
        const auto config = run_config(o, detector, seed, data.size());
        const auto report = run_stream(data, config, name);
        write_run(dir, report, config);
        fmt::print("{}: accuracy {:.4f}, confirmed {}, false alarms {}, labeling {:.2f}%\n", report.detector,
                   report.accuracy, report.drifts_confirmed, report.false_alarms, report.labeling_percent);
        return;
    }
    const auto kinds = parse_suite(o.suite);
    check_writable(dir / "summary.csv", force);
    for (auto kind : kinds)
        check_writable(dir / to_string(kind), force);
    const Dataset data = load_for_run(o);
    std::vector<SuiteJob> work;
    for (auto kind : kinds)
        work.push_back({0, run_config(o, kind, seed, data.size())});
    const auto reports = run_suite({{name, data}}, work, o.jobs);
    for (const auto& report : reports) {
        const auto& job = *std::find_if(work.begin(), work.end(), [&](const SuiteJob& j) {
            return report.detector == to_string(j.config.detector);
        });
        write_run(dir / report.detector, report, job.config);
    }
    std::ostringstream summary;
    write_summary_csv(summary, reports);
    write_file(dir / "summary.csv", summary.str());
    std::cout << summary.str();
}

// sweep ----------------------------------------------------------------------

struct SweepOptions {
    std::string kind;
    std::string values;
    RunOptions run;
};

void run_sweep(SweepOptions& o, std::uint64_t seed, bool force) {
    const fs::path out = fs::path(o.run.out_dir) / "summary.csv";
    check_writable(out, force);
    std::ostringstream text;
    if (o.kind == "table8") {
        const auto rows = table8_sweep(seed);
        write_sweep_csv(text, rows);
        const auto first = first_detections(rows);
        fmt::print("first detection (features drifted): hellinger {}, uncertainty {}, margin {}, error {}\n",
                   first.hellinger, first.uncertainty, first.margin, first.error);
    } else if (o.kind == "margin-width" || o.kind == "sensitivity") {
        const bool margin = o.kind == "margin-width";
        const auto values = parse_values(o.values.empty() ? (margin ? "0.05,0.25,0.5,0.75" : "0,1,2,3") : o.values);
        Dataset data;
        std::string name;
        if (o.run.input.path.empty()) {
            data = induced_benchmark(seed, InductionMode::top_fraction).data;
            name = "static16-top25";
        } else {
            data = load_for_run(o.run);
            name = fs::path(o.run.input.path).stem().string();
        }
        const auto base = run_config(o.run, parse_detector(o.run.detector), seed, data.size());
        const auto rows = parameter_sweep(data, base, margin ? SweptParameter::theta_margin : SweptParameter::theta,
                                          values, name, o.run.jobs);
        write_parameter_csv(text, rows, margin ? "theta_margin" : "theta");
    } else {
        throw Error(ErrorKind::parameter,
                    fmt::format("unknown sweep kind '{}' (valid: table8, margin-width, sensitivity)", o.kind));
    }
    write_file(out, text.str());
    std::cout << text.str();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"driftbench: margin density drift detection benchmark"};
    app.require_subcommand(1);

    std::uint64_t seed = 0;
    bool force = false;
    auto common = [&](CLI::App* sub) {
        sub->add_option("--seed", seed, "Base seed (falls back to DRIFTBENCH_SEED)")
            ->envname("DRIFTBENCH_SEED")
            ->capture_default_str();
        sub->add_flag("--force", force, "Overwrite existing outputs");
    };

    SynthOptions synth;
    auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic dataset as CSV");
    synth_cmd->add_option("--scenario", synth.scenario, "A0..A4, B0, B1, C0, C1, hd20:<i> or static16")->required();
    synth_cmd->add_option("--n", synth.n, "Samples per class")->capture_default_str();
    synth_cmd->add_option("--phase", synth.phase, "stream (abrupt drift at the midpoint), before or after")
        ->check(CLI::IsMember({"stream", "before", "after"}))
        ->capture_default_str();
    synth_cmd->add_option("--out", synth.out, "Output CSV")->required();
    common(synth_cmd);

    InduceOptions induce_opts;
    auto* induce_cmd = app.add_subcommand("induce", "Induce a drift by rotating ranked features");
    induce_opts.input.add_to(induce_cmd, true);
    induce_cmd->add_option("--mode", induce_opts.mode, "top or bottom")->capture_default_str();
    induce_cmd->add_option("--fraction", induce_opts.fraction, "Fraction of features rotated")->capture_default_str();
    induce_cmd->add_option("--change-point", induce_opts.change_point, "Relative drift position in (0,1)")
        ->capture_default_str();
    induce_cmd->add_option("--class", induce_opts.target_class, "Affected class, 1 or -1")->capture_default_str();
    induce_cmd->add_option("--bins", induce_opts.bins, "Bins for the information gain ranking")
        ->capture_default_str();
    induce_cmd->add_option("--out", induce_opts.out, "Output CSV")->required();
    induce_cmd->add_option("--plan-out", induce_opts.plan_out, "Plan JSON (default: <out>.plan.json)");
    induce_cmd->add_option("--plan", induce_opts.plan, "Replay a recorded plan JSON");
    induce_cmd->add_flag("--no-shuffle", induce_opts.no_shuffle, "Keep the input row order");
    induce_cmd->add_flag("--no-normalize", induce_opts.no_normalize, "Skip min-max normalization");
    common(induce_cmd);

    RunOptions run_opts;
    auto* run_cmd = app.add_subcommand("run", "Run a detector over a labeled stream");
    run_opts.input.add_to(run_cmd, true);
    run_cmd->add_option("--detector", run_opts.detector, "Detector: " + detector_names())->capture_default_str();
    add_run_flags(run_cmd, run_opts);
    run_cmd->add_option("--suite", run_opts.suite, "Comma-separated detectors, or 'all'");
    run_cmd->add_flag("--normalize", run_opts.normalize, "Min-max normalize using the warm-up rows");
    run_cmd->add_option("--out-dir", run_opts.out_dir, "Output directory")->required();
    common(run_cmd);

    SweepOptions sweep_opts;
    sweep_opts.run.chunk = benchmark_chunk;
    auto* sweep_cmd = app.add_subcommand("sweep", "Parameter and feature-count sweeps");
    sweep_cmd->add_option("--kind", sweep_opts.kind, "table8, margin-width or sensitivity")->required();
    sweep_cmd->add_option("--values", sweep_opts.values, "Comma-separated parameter values");
    sweep_opts.run.input.add_to(sweep_cmd, false);
    sweep_cmd->add_option("--detector", sweep_opts.run.detector, "Detector for margin-width/sensitivity")
        ->capture_default_str();
    add_run_flags(sweep_cmd, sweep_opts.run);
    sweep_cmd->add_option("--out-dir", sweep_opts.run.out_dir, "Output directory")->required();
    common(sweep_cmd);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_usage;
    }

    try {
        if (*synth_cmd)
            run_synth(synth, seed, force);
        else if (*induce_cmd)
            run_induce(induce_opts, seed, force);
        else if (*run_cmd)
            run_run(run_opts, seed, force);
        else if (*sweep_cmd)
            run_sweep(sweep_opts, seed, force);
    } catch (const UsageError& e) {
        std::cerr << "driftbench: " << e.what() << '\n';
        return exit_usage;
    } catch (const Error& e) {
        std::cerr << "driftbench: " << e.what() << '\n';
        return exit_code_for(e.kind());
    } catch (const fs::filesystem_error& e) {
        std::cerr << "driftbench: " << e.what() << '\n';
        return exit_data;
    } catch (const std::exception& e) {
        std::cerr << "driftbench: " << e.what() << '\n';
        return exit_runtime;
    }
    return exit_ok;
}
