#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <fmt/format.h>

#include "md3/error.hpp"
#include "md3/random.hpp"

namespace md3 {

/// Binary class tag. Multi-class inputs are rejected at load time.
enum class Label : int { negative = -1, positive = 1 };

inline double sign_of(Label y) { return y == Label::positive ? 1.0 : -1.0; }
inline Label label_from_score(double score) { return score >= 0.0 ? Label::positive : Label::negative; }
inline int to_int(Label y) { return static_cast<int>(y); }

struct Instance {
    std::vector<double> features;
    std::optional<Label> label;
};

/// Ordered sequence of instances sharing one dimensionality. Order is the
/// stream order.
class Dataset {
public:
    Dataset() = default;

    Dataset(std::vector<std::string> feature_names, std::vector<Instance> instances)
        : feature_names_(std::move(feature_names)), instances_(std::move(instances)) {
        if (feature_names_.empty())
            throw Error(ErrorKind::shape, "dataset needs at least one feature");
        for (std::size_t i = 0; i < instances_.size(); ++i) {
            if (instances_[i].features.size() != feature_names_.size())
                throw Error(ErrorKind::shape,
                            fmt::format("instance {} has {} features, expected {}", i,
                                        instances_[i].features.size(), feature_names_.size()));
        }
    }

    /// Convenience: generic feature names f0..f{d-1}.
    static Dataset with_default_names(std::size_t dimension, std::vector<Instance> instances) {
        return Dataset(default_names(dimension), std::move(instances));
    }

    static std::vector<std::string> default_names(std::size_t dimension) {
        std::vector<std::string> names;
        names.reserve(dimension);
        for (std::size_t j = 0; j < dimension; ++j)
            names.push_back(fmt::format("f{}", j));
        return names;
    }

    std::size_t size() const noexcept { return instances_.size(); }
    bool empty() const noexcept { return instances_.empty(); }
    std::size_t dimension() const noexcept { return feature_names_.size(); }
    const std::vector<std::string>& feature_names() const noexcept { return feature_names_; }
    const std::vector<Instance>& instances() const noexcept { return instances_; }
    const Instance& operator[](std::size_t i) const { return instances_[i]; }

    bool fully_labeled() const {
        return std::all_of(instances_.begin(), instances_.end(),
                           [](const Instance& x) { return x.label.has_value(); });
    }

    Dataset slice(std::size_t begin, std::size_t end) const {
        end = std::min(end, instances_.size());
        begin = std::min(begin, end);
        return Dataset(feature_names_, {instances_.begin() + static_cast<std::ptrdiff_t>(begin),
                                        instances_.begin() + static_cast<std::ptrdiff_t>(end)});
    }

    Dataset select(std::span<const std::size_t> rows) const {
        std::vector<Instance> out;
        out.reserve(rows.size());
        for (auto r : rows)
            out.push_back(instances_.at(r));
        return Dataset(feature_names_, std::move(out));
    }

    std::size_t count(Label y) const {
        return static_cast<std::size_t>(std::count_if(
            instances_.begin(), instances_.end(), [y](const Instance& x) { return x.label == y; }));
    }

private:
    std::vector<std::string> feature_names_;
    std::vector<Instance> instances_;
};

inline void require_labels(const Dataset& data, std::string_view what) {
    if (!data.fully_labeled())
        throw Error(ErrorKind::missing_labels, fmt::format("{} requires a fully labeled dataset", what));
}

// ---------------------------------------------------------------------------
// CSV

/// Label column selector: header name or 0-based index.
using LabelColumn = std::variant<std::string, std::size_t>;

namespace detail {

inline std::string trim(std::string_view s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos)
        return {};
    auto e = s.find_last_not_of(" \t\r\n");
    std::string out(s.substr(b, e - b + 1));
    if (out.size() >= 2 && out.front() == '"' && out.back() == '"')
        out = out.substr(1, out.size() - 2);
    return out;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
        auto comma = line.find(',', start);
        cells.push_back(trim(std::string_view(line).substr(start, comma - start)));
        if (comma == std::string::npos)
            break;
        start = comma + 1;
    }
    return cells;
}

inline std::optional<double> parse_double(const std::string& cell) {
    if (cell.empty())
        return std::nullopt;
    char* end = nullptr;
    double v = std::strtod(cell.c_str(), &end);
    if (end != cell.c_str() + cell.size())
        return std::nullopt;
    return v;
}

} // namespace detail

/// Parses CSV text (header row required). Labels map to +1 for
/// `positive_label`, -1 for the single other value; more than two distinct
/// label values is a format error.
inline Dataset parse_csv(std::istream& in, std::optional<LabelColumn> label_column,
                         const std::string& positive_label) {
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        ++line_no;
        if (!detail::trim(line).empty()) {
            header = detail::split_csv_line(line);
            break;
        }
    }
    if (header.empty())
        throw Error(ErrorKind::empty_input, "CSV has no header row");

    std::optional<std::size_t> label_idx;
    if (label_column) {
        if (auto* name = std::get_if<std::string>(&*label_column)) {
            auto it = std::find(header.begin(), header.end(), *name);
            if (it == header.end())
                throw Error(ErrorKind::format, fmt::format("label column '{}' not found in header", *name));
            label_idx = static_cast<std::size_t>(it - header.begin());
        } else {
            label_idx = std::get<std::size_t>(*label_column);
            if (*label_idx >= header.size())
                throw Error(ErrorKind::format,
                            fmt::format("label column index {} out of range ({} columns)", *label_idx,
                                        header.size()));
        }
    }

    std::vector<std::string> names;
    for (std::size_t c = 0; c < header.size(); ++c)
        if (c != label_idx)
            names.push_back(header[c]);
    if (names.empty())
        throw Error(ErrorKind::format, "CSV has no feature columns");

    std::vector<Instance> rows;
    std::set<std::string> label_values;
    std::size_t row_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty())
            continue;
        ++row_no;
        auto cells = detail::split_csv_line(line);
        if (cells.size() != header.size())
            throw Error(ErrorKind::format, fmt::format("row {} (line {}) has {} cells, expected {}", row_no,
                                                       line_no, cells.size(), header.size()));
        Instance inst;
        inst.features.reserve(names.size());
        for (std::size_t c = 0; c < cells.size(); ++c) {
            if (c == label_idx) {
                label_values.insert(cells[c]);
                inst.label = cells[c] == positive_label ? Label::positive : Label::negative;
                continue;
            }
            auto v = detail::parse_double(cells[c]);
            if (!v)
                throw Error(ErrorKind::parse, fmt::format("row {} (line {}), column {} ('{}'): not a number: '{}'",
                                                          row_no, line_no, c, header[c], cells[c]));
            inst.features.push_back(*v);
        }
        rows.push_back(std::move(inst));
    }
    if (rows.empty())
        throw Error(ErrorKind::empty_input, "CSV has a header but no data rows");
    if (label_values.size() > 2)
        throw Error(ErrorKind::format,
                    fmt::format("label column has {} distinct values; reduce the data to a binary problem first",
                                label_values.size()));
    return Dataset(std::move(names), std::move(rows));
}

inline Dataset load_csv(const std::string& path, std::optional<LabelColumn> label_column,
                        const std::string& positive_label) {
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorKind::io, fmt::format("cannot open '{}'", path));
    return parse_csv(in, std::move(label_column), positive_label);
}

/// Writes features with 17 significant digits (exact double round trip) and
/// the label as 1 / -1 in a trailing column named `label_name`.
inline void write_csv(std::ostream& out, const Dataset& data, const std::string& label_name = "class") {
    bool labeled = data.fully_labeled() && !data.empty();
    for (std::size_t j = 0; j < data.dimension(); ++j)
        out << (j ? "," : "") << data.feature_names()[j];
    if (labeled)
        out << ',' << label_name;
    out << '\n';
    for (const auto& x : data.instances()) {
        for (std::size_t j = 0; j < x.features.size(); ++j)
            out << (j ? "," : "") << fmt::format("{:.17g}", x.features[j]);
        if (labeled)
            out << ',' << to_int(*x.label);
        out << '\n';
    }
}

// ---------------------------------------------------------------------------
// Preprocessing

struct NormalizationParams {
    std::vector<double> min;
    std::vector<double> max;
};

inline NormalizationParams fit_normalizer(const Dataset& data) {
    if (data.empty())
        throw Error(ErrorKind::empty_input, "cannot fit a normalizer on an empty dataset");
    NormalizationParams p{data[0].features, data[0].features};
    for (const auto& x : data.instances()) {
        for (std::size_t j = 0; j < x.features.size(); ++j) {
            p.min[j] = std::min(p.min[j], x.features[j]);
            p.max[j] = std::max(p.max[j], x.features[j]);
        }
    }
    return p;
}

/// Min-max map onto [0,1] with clamping; constant features map to 0.
inline Dataset apply_normalizer(const NormalizationParams& params, const Dataset& data) {
    if (params.min.size() != data.dimension() || params.max.size() != data.dimension())
        throw Error(ErrorKind::shape, fmt::format("normalizer fitted on {} features, data has {}",
                                                  params.min.size(), data.dimension()));
    std::vector<Instance> out = data.instances();
    for (auto& x : out) {
        for (std::size_t j = 0; j < x.features.size(); ++j) {
            double range = params.max[j] - params.min[j];
            double v = range > 0.0 ? (x.features[j] - params.min[j]) / range : 0.0;
            x.features[j] = std::clamp(v, 0.0, 1.0);
        }
    }
    return Dataset(data.feature_names(), std::move(out));
}

/// Deterministic permutation for a fixed seed.
inline Dataset shuffle(const Dataset& data, std::uint64_t seed) {
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    return data.select(order);
}

} // namespace md3
