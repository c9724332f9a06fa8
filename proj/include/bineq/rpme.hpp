#pragma once

/// Robust Pareto midpoint estimator.
///
/// Every bounded populated bin contributes its count at the bin midpoint. A
/// populated open-ended top bin contributes its count at a Pareto location
/// statistic (arithmetic, geometric or harmonic mean, or median) whose shape
/// parameter is estimated from the top two bins and floored at `alpha_min`.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "binned.hpp"
#include "inequality.hpp"

namespace bineq {

enum class TopBinFlavor { arithmetic, geometric, median, harmonic };

inline std::string_view to_string(TopBinFlavor f) {
    switch (f) {
        case TopBinFlavor::arithmetic: return "arithmetic";
        case TopBinFlavor::geometric: return "geometric";
        case TopBinFlavor::median: return "median";
        case TopBinFlavor::harmonic: return "harmonic";
    }
    return "?";
}

inline TopBinFlavor parse_flavor(std::string_view s) {
    if (s == "arithmetic") return TopBinFlavor::arithmetic;
    if (s == "geometric") return TopBinFlavor::geometric;
    if (s == "median") return TopBinFlavor::median;
    if (s == "harmonic") return TopBinFlavor::harmonic;
    throw std::invalid_argument("unknown top-bin flavor '" + std::string(s) + "'");
}

/// Default floor on the Pareto shape: 2 for the arithmetic mean (which must
/// stay finite), 1 otherwise.
inline double default_alpha_min(TopBinFlavor f) {
    return f == TopBinFlavor::arithmetic ? 2.0 : 1.0;
}

struct RpmeConfig {
    TopBinFlavor flavor = TopBinFlavor::harmonic;
    double alpha_min = 1.0;

    static RpmeConfig with_defaults(TopBinFlavor f) { return {f, default_alpha_min(f)}; }

    void validate() const {
        if (!std::isfinite(alpha_min) || alpha_min < 0.0)
            throw std::invalid_argument("alpha_min must be finite and >= 0");
        if (flavor == TopBinFlavor::arithmetic && !(alpha_min > 1.0))
            throw std::invalid_argument("arithmetic flavor needs alpha_min > 1");
        if (flavor != TopBinFlavor::arithmetic && !(alpha_min > 0.0))
            throw std::invalid_argument("alpha_min must be > 0");
    }
};

class estimation_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bin-width diagnostics for the midpoint part of the estimate. The relative
/// variance bias (w/sd)^2/12 is reported, not corrected.
struct MidpointDiagnostics {
    double mean_width = 0.0;  ///< over bounded populated bins
    double max_width = 0.0;
    double max_width_over_sd = std::numeric_limits<double>::quiet_NaN();
    double variance_bias_mean_width = std::numeric_limits<double>::quiet_NaN();
    double variance_bias_max_width = std::numeric_limits<double>::quiet_NaN();
    /// All bounded populated widths below 1.6 sd.
    bool widths_ok = false;
};

struct RpmeResult {
    std::optional<double> alpha_hat;
    std::optional<double> alpha_tilde;
    std::optional<double> top_value;
    WeightedSample sample;
    StatsBundle stats;
    MidpointDiagnostics diagnostics;
};

/// Shape estimate from the two highest bins (by position):
/// ln((n_{B-1} + n_B) / n_B) / ln(l_B / l_{B-1}).
/// Returns nullopt when the top bin is bounded or empty.
inline std::optional<double> estimate_alpha(const BinnedDataset& ds) {
    const auto& bins = ds.bins();
    if (ds.top_unbounded() == false || !(bins.back().count > 0.0)) return std::nullopt;
    if (bins.size() < 2) throw estimation_error("Pareto shape needs at least two bins");
    const Bin& top = bins[bins.size() - 1];
    const Bin& below = bins[bins.size() - 2];
    if (!(below.lower > 0.0))
        throw estimation_error("Pareto shape undefined: second-highest bin starts at 0");
    return std::log((below.count + top.count) / top.count) / std::log(top.lower / below.lower);
}

inline double constrain_alpha(double alpha_hat, const RpmeConfig& cfg) {
    return std::max(cfg.alpha_min, alpha_hat);
}

/// Pareto location statistic above `lower` for shape `alpha`.
inline double top_bin_value(double lower, double alpha, TopBinFlavor flavor) {
    if (!(alpha > 0.0)) throw std::domain_error("Pareto shape must be positive");
    switch (flavor) {
        case TopBinFlavor::arithmetic:
            if (!(alpha > 1.0)) throw std::domain_error("Pareto mean is infinite for alpha <= 1");
            return lower * alpha / (alpha - 1.0);
        case TopBinFlavor::median: return lower * std::exp2(1.0 / alpha);
        case TopBinFlavor::geometric: return lower * std::exp(1.0 / alpha);
        case TopBinFlavor::harmonic: return lower * (1.0 + 1.0 / alpha);
    }
    throw std::logic_error("unhandled flavor");
}

namespace detail {

inline MidpointDiagnostics midpoint_diagnostics(const BinnedDataset& ds, double sd) {
    MidpointDiagnostics d;
    double sum = 0.0;
    std::size_t m = 0;
    for (const Bin& b : ds.bins()) {
        if (!(b.count > 0.0) || !b.bounded()) continue;
        sum += b.width();
        d.max_width = std::max(d.max_width, b.width());
        ++m;
    }
    if (m == 0) return d;
    d.mean_width = sum / static_cast<double>(m);
    if (std::isfinite(sd) && sd > 0.0) {
        d.max_width_over_sd = d.max_width / sd;
        d.variance_bias_mean_width = std::pow(d.mean_width / sd, 2) / 12.0;
        d.variance_bias_max_width = std::pow(d.max_width / sd, 2) / 12.0;
        d.widths_ok = d.max_width < 1.6 * sd;
    }
    return d;
}

}  // namespace detail

inline RpmeResult rpme_estimate(const BinnedDataset& ds, const RpmeConfig& cfg = {}) {
    cfg.validate();
    RpmeResult result;
    std::vector<WeightedPoint> pts;
    pts.reserve(ds.size());

    for (const Bin& b : ds.bins()) {
        if (!(b.count > 0.0)) continue;
        if (b.bounded()) {
            pts.push_back({b.midpoint(), b.count});
            continue;
        }
        if (ds.populated_count() == 1)
            throw estimation_error("only the open-ended top bin is populated");
        result.alpha_hat = estimate_alpha(ds);
        result.alpha_tilde = constrain_alpha(*result.alpha_hat, cfg);
        result.top_value = top_bin_value(b.lower, *result.alpha_tilde, cfg.flavor);
        pts.push_back({*result.top_value, b.count});
    }

    result.sample = WeightedSample(std::move(pts));
    result.stats = compute_all(result.sample);
    result.diagnostics = detail::midpoint_diagnostics(ds, result.stats.sd);
    return result;
}

}  // namespace bineq
