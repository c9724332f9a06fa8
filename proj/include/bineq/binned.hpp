#pragma once

/// Binned frequency tables: validation, CSV ingestion, populated-bin views
/// and adjacent-bin merging.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace bineq {

/// Half-open income interval [lower, upper) with a (possibly fractional) count.
/// An absent upper bound marks the unbounded top bin.
struct Bin {
    double lower = 0.0;
    std::optional<double> upper;
    double count = 0.0;

    bool bounded() const { return upper.has_value(); }
    double midpoint() const { return 0.5 * (lower + *upper); }
    double width() const { return *upper - lower; }

    friend bool operator==(const Bin&, const Bin&) = default;
};

/// Rejection of malformed input. `line` is 0 when the problem is not tied to
/// a single source line (e.g. a gap between two bins).
class parse_error : public std::runtime_error {
public:
    parse_error(std::string dataset_id, std::size_t line, const std::string& what)
        : std::runtime_error(format(dataset_id, line, what)),
          dataset_id_(std::move(dataset_id)), line_(line) {}

    const std::string& dataset_id() const { return dataset_id_; }
    std::size_t line() const { return line_; }

private:
    static std::string format(const std::string& id, std::size_t line, const std::string& what) {
        std::string s = "dataset '" + id + "'";
        if (line > 0) s += ", line " + std::to_string(line);
        return s + ": " + what;
    }

    std::string dataset_id_;
    std::size_t line_;
};

/// An ordered, contiguous partition of [bins.front().lower, top) with counts.
/// Immutable once built; construct through `make`.
class BinnedDataset {
public:
    /// Validates and sorts `bins`. Throws std::invalid_argument on any
    /// invariant violation (gaps, overlaps, interior unbounded bin, negative
    /// or non-finite counts, n == 0).
    static BinnedDataset make(std::string id, std::vector<Bin> bins) {
        if (bins.empty()) throw std::invalid_argument("dataset has no bins");
        std::stable_sort(bins.begin(), bins.end(),
                         [](const Bin& a, const Bin& b) { return a.lower < b.lower; });
        double n = 0.0;
        for (std::size_t i = 0; i < bins.size(); ++i) {
            const Bin& b = bins[i];
            if (!std::isfinite(b.lower) || b.lower < 0.0)
                throw std::invalid_argument("bin lower bound must be finite and >= 0");
            if (b.upper && !(std::isfinite(*b.upper) && *b.upper > b.lower))
                throw std::invalid_argument("bin upper bound must exceed its lower bound");
            if (!std::isfinite(b.count) || b.count < 0.0)
                throw std::invalid_argument("bin count must be finite and >= 0");
            if (i + 1 < bins.size()) {
                if (!b.upper) throw std::invalid_argument("only the last bin may be unbounded");
                if (*b.upper != bins[i + 1].lower)
                    throw std::invalid_argument("bins are not contiguous at " +
                                                std::to_string(*b.upper));
            }
            n += b.count;
        }
        if (!(n > 0.0)) throw std::invalid_argument("dataset has zero total count");
        return BinnedDataset(std::move(id), std::move(bins), n);
    }

    const std::string& id() const { return id_; }
    const std::vector<Bin>& bins() const { return bins_; }
    double n() const { return n_; }
    /// Number of populated bins (count > 0).
    std::size_t populated_count() const { return populated_; }
    std::size_t size() const { return bins_.size(); }

    const Bin& top() const { return bins_.back(); }
    bool top_unbounded() const { return !bins_.back().upper.has_value(); }

    /// Same partition, counts multiplied by `factor`.
    BinnedDataset scaled_counts(double factor) const {
        std::vector<Bin> out = bins_;
        for (Bin& b : out) b.count *= factor;
        return make(id_, std::move(out));
    }

    /// Same counts, every bound multiplied by `factor` (> 0).
    BinnedDataset scaled_bounds(double factor) const {
        std::vector<Bin> out = bins_;
        for (Bin& b : out) {
            b.lower *= factor;
            if (b.upper) *b.upper *= factor;
        }
        return make(id_, std::move(out));
    }

private:
    BinnedDataset(std::string id, std::vector<Bin> bins, double n)
        : id_(std::move(id)), bins_(std::move(bins)), n_(n) {
        populated_ = static_cast<std::size_t>(
            std::count_if(bins_.begin(), bins_.end(), [](const Bin& b) { return b.count > 0.0; }));
    }

    std::string id_;
    std::vector<Bin> bins_;
    double n_ = 0.0;
    std::size_t populated_ = 0;
};

/// Bins with count > 0, in order.
inline std::vector<Bin> populated(const BinnedDataset& ds) {
    std::vector<Bin> out;
    out.reserve(ds.populated_count());
    for (const Bin& b : ds.bins())
        if (b.count > 0.0) out.push_back(b);
    return out;
}

/// Combines consecutive runs of `group` bins. A short final run is allowed.
inline BinnedDataset merge_adjacent(const BinnedDataset& ds, std::size_t group) {
    if (group < 2) throw std::invalid_argument("merge group must be >= 2");
    const auto& in = ds.bins();
    std::vector<Bin> out;
    for (std::size_t start = 0; start < in.size(); start += group) {
        const std::size_t stop = std::min(start + group, in.size());
        Bin merged{in[start].lower, in[stop - 1].upper, 0.0};
        for (std::size_t i = start; i < stop; ++i) merged.count += in[i].count;
        out.push_back(merged);
    }
    return BinnedDataset::make(ds.id(), std::move(out));
}

namespace detail {

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    for (;;) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

inline std::optional<double> parse_number(std::string_view s) {
    s = trim(s);
    if (s.empty()) return std::nullopt;
    std::string buf(s);
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(buf, &used);
    } catch (const std::exception&) {
        return std::nullopt;
    }
    if (used != buf.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

}  // namespace detail

/// Reads `dataset_id,bin_min,bin_max,count` CSV (header required). An empty
/// bin_min is read as 0 and an empty bin_max as the unbounded top bin. Counts
/// are divided by `scale`. Datasets are returned in order of first appearance.
inline std::vector<BinnedDataset> parse_datasets(std::istream& in, double scale = 1.0) {
    if (!(scale > 0.0) || !std::isfinite(scale))
        throw std::invalid_argument("scale must be a positive finite number");

    std::string line;
    std::size_t lineno = 0;
    bool have_header = false;
    while (!have_header && std::getline(in, line)) {
        ++lineno;
        if (detail::trim(line).empty()) continue;
        auto f = detail::split_csv_line(detail::trim(line));
        if (f.size() != 4 || detail::trim(f[0]) != "dataset_id" || detail::trim(f[1]) != "bin_min" ||
            detail::trim(f[2]) != "bin_max" || detail::trim(f[3]) != "count")
            throw parse_error("", lineno, "expected header 'dataset_id,bin_min,bin_max,count'");
        have_header = true;
    }
    if (!have_header) throw parse_error("", 0, "input is empty");

    struct Pending {
        std::vector<Bin> bins;
        std::vector<std::size_t> lines;
    };
    std::vector<std::string> order;
    std::map<std::string, Pending> pending;

    while (std::getline(in, line)) {
        ++lineno;
        const auto trimmed = detail::trim(line);
        if (trimmed.empty()) continue;
        const auto f = detail::split_csv_line(trimmed);
        const std::string id(f.empty() ? std::string_view{} : detail::trim(f[0]));
        if (f.size() != 4) throw parse_error(id, lineno, "expected 4 fields");
        if (id.empty()) throw parse_error(id, lineno, "empty dataset_id");

        Bin b;
        if (!detail::trim(f[1]).empty()) {
            auto lo = detail::parse_number(f[1]);
            if (!lo) throw parse_error(id, lineno, "bin_min is not a number");
            b.lower = *lo;
        }
        if (!detail::trim(f[2]).empty()) {
            auto hi = detail::parse_number(f[2]);
            if (!hi) throw parse_error(id, lineno, "bin_max is not a number");
            b.upper = *hi;
        }
        auto c = detail::parse_number(f[3]);
        if (!c) throw parse_error(id, lineno, "count is not a number");
        if (*c < 0.0) throw parse_error(id, lineno, "negative count");
        if (b.lower < 0.0) throw parse_error(id, lineno, "negative bin_min");
        if (b.upper && *b.upper <= b.lower)
            throw parse_error(id, lineno, "bin_max must exceed bin_min");
        b.count = *c / scale;

        auto [it, inserted] = pending.try_emplace(id);
        if (inserted) order.push_back(id);
        it->second.bins.push_back(b);
        it->second.lines.push_back(lineno);
    }

    std::vector<BinnedDataset> out;
    out.reserve(order.size());
    for (const auto& id : order) {
        Pending& p = pending.at(id);
        // Report structural problems against the offending source line.
        std::vector<std::size_t> idx(p.bins.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        std::stable_sort(idx.begin(), idx.end(),
                         [&](std::size_t a, std::size_t b) { return p.bins[a].lower < p.bins[b].lower; });
        for (std::size_t k = 0; k + 1 < idx.size(); ++k) {
            const Bin& cur = p.bins[idx[k]];
            const Bin& next = p.bins[idx[k + 1]];
            if (!cur.upper)
                throw parse_error(id, p.lines[idx[k]], "unbounded bin is not the last bin");
            if (*cur.upper > next.lower)
                throw parse_error(id, p.lines[idx[k + 1]], "bin overlaps its predecessor");
            if (*cur.upper < next.lower)
                throw parse_error(id, p.lines[idx[k + 1]], "gap before this bin");
        }
        try {
            out.push_back(BinnedDataset::make(id, std::move(p.bins)));
        } catch (const std::invalid_argument& e) {
            throw parse_error(id, 0, e.what());
        }
    }
    return out;
}

inline std::vector<BinnedDataset> parse_datasets(const std::string& text, double scale = 1.0) {
    std::istringstream in(text);
    return parse_datasets(in, scale);
}

/// Writes datasets in the same CSV layout `parse_datasets` reads, using
/// round-trip precision.
inline void write_datasets(std::ostream& out, const std::vector<BinnedDataset>& datasets) {
    const auto old_precision = out.precision(17);
    out << "dataset_id,bin_min,bin_max,count\n";
    for (const auto& ds : datasets) {
        for (const Bin& b : ds.bins()) {
            out << ds.id() << ',' << b.lower << ',';
            if (b.upper) out << *b.upper;
            out << ',' << b.count << '\n';
        }
    }
    out.precision(old_precision);
}

/// Lower bounds of the 16 household-income bins used by the American
/// Community Survey tables (top bin open-ended at $200,000).
inline const std::vector<double>& acs16_bounds() {
    static const std::vector<double> bounds{0,     10000, 15000, 20000,  25000,  30000,
                                            35000, 40000, 45000, 50000,  60000,  75000,
                                            100000, 125000, 150000, 200000};
    return bounds;
}

/// Builds a dataset from lower bounds (last bin unbounded) and counts.
inline BinnedDataset dataset_from_bounds(std::string id, const std::vector<double>& lowers,
                                         const std::vector<double>& counts) {
    if (lowers.size() != counts.size())
        throw std::invalid_argument("bounds and counts differ in length");
    std::vector<Bin> bins;
    bins.reserve(lowers.size());
    for (std::size_t i = 0; i < lowers.size(); ++i) {
        std::optional<double> upper;
        if (i + 1 < lowers.size()) upper = lowers[i + 1];
        bins.push_back(Bin{lowers[i], upper, counts[i]});
    }
    return BinnedDataset::make(std::move(id), std::move(bins));
}

}  // namespace bineq
