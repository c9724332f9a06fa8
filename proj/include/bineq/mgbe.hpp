#pragma once

/// Multimodel generalized beta estimator: fit every configured GB-family
/// model, drop non-convergent fits and fits with an undefined variance, then
/// select the best survivor by AIC/BIC or average the survivors' statistics
/// with information-criterion weights.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "binned_mle.hpp"
#include "distributions.hpp"
#include "inequality.hpp"
#include "parallel.hpp"

namespace bineq {

enum class Criterion { aic, bic };
enum class Combine { select, average };

inline std::string_view to_string(Criterion c) { return c == Criterion::aic ? "aic" : "bic"; }
inline std::string_view to_string(Combine c) { return c == Combine::select ? "select" : "average"; }

inline Criterion parse_criterion(std::string_view s) {
    if (s == "aic") return Criterion::aic;
    if (s == "bic") return Criterion::bic;
    throw std::invalid_argument("unknown criterion '" + std::string(s) + "'");
}

inline Combine parse_combine(std::string_view s) {
    if (s == "select") return Combine::select;
    if (s == "average") return Combine::average;
    throw std::invalid_argument("unknown combine mode '" + std::string(s) + "'");
}

/// Comma-separated kind names, or "all".
inline std::vector<DistributionKind> parse_models(std::string_view s) {
    if (s == "all") return {all_kinds.begin(), all_kinds.end()};
    std::vector<DistributionKind> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        const std::size_t comma = std::min(s.find(',', start), s.size());
        const auto name = s.substr(start, comma - start);
        if (name.empty()) throw std::invalid_argument("empty model name in list");
        const auto kind = parse_kind(name);
        if (std::find(out.begin(), out.end(), kind) == out.end()) out.push_back(kind);
        start = comma + 1;
    }
    return out;
}

struct MgbeConfig {
    std::vector<DistributionKind> models{all_kinds.begin(), all_kinds.end()};
    Criterion criterion = Criterion::aic;
    Combine combine = Combine::select;
    int quantiles = 1000;
    FitConfig fit;
    /// Threads used for the per-model fits of one dataset.
    std::size_t model_jobs = 1;

    void validate() const {
        if (models.empty()) throw std::invalid_argument("model set is empty");
        if (quantiles < 2) throw std::invalid_argument("quantile grid needs q >= 2");
        fit.validate();
    }
};

struct ModelOutcome {
    FittedDistribution fit;
    FitDiagnostics diagnostics;
    /// Absent when the model was screened out; see `screened_reason`.
    std::optional<StatsBundle> stats;
    std::string screened_reason;
    double weight = 0.0;

    bool survived() const { return stats.has_value(); }
};

struct MgbeResult {
    std::vector<ModelOutcome> per_model;
    /// Minimal-criterion survivor under Combine::select.
    std::optional<DistributionKind> selected;
    StatsBundle stats;
};

/// Quantiles at probabilities (2i - 1) / (2q), i = 1..q, with unit weights.
inline WeightedSample quantile_grid(DistributionKind kind, const ParamVector& params, int q) {
    if (q < 2) throw std::invalid_argument("quantile grid needs q >= 2");
    std::vector<WeightedPoint> pts;
    pts.reserve(static_cast<std::size_t>(q));
    for (int i = 1; i <= q; ++i) {
        const double p = (2.0 * i - 1.0) / (2.0 * q);
        pts.push_back({quantile(kind, params, p), 1.0});
    }
    return WeightedSample(std::move(pts));
}

/// Akaike-style weights exp(-delta/2) / sum exp(-delta/2), delta measured
/// from the minimum.
inline std::vector<double> ic_weights(const std::vector<double>& values) {
    if (values.empty()) throw std::invalid_argument("ic_weights needs at least one value");
    const double lo = *std::min_element(values.begin(), values.end());
    std::vector<double> w(values.size());
    double total = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        w[i] = std::exp(-0.5 * (values[i] - lo));
        total += w[i];
    }
    for (double& x : w) x /= total;
    return w;
}

inline double criterion_value(const FitDiagnostics& d, Criterion c) {
    return c == Criterion::aic ? d.aic : d.bic;
}

namespace detail {

inline ModelOutcome evaluate_model(const BinnedDataset& ds, DistributionKind kind, const MgbeConfig& cfg) {
    ModelOutcome out;
    try {
        out.fit = fit(ds, kind, cfg.fit);
    } catch (const std::exception& e) {
        out.fit.kind = kind;
        out.fit.k = parameter_count(kind);
        out.screened_reason = std::string("fit failed: ") + e.what();
        return out;
    }
    out.diagnostics = g2_test(ds, out.fit);
    if (!out.fit.converged) {
        out.screened_reason = "did not converge";
        return out;
    }
    if (!out.fit.variance_defined) {
        out.screened_reason = "undefined variance";
        return out;
    }
    try {
        out.stats = compute_all(quantile_grid(kind, out.fit.params, cfg.quantiles));
    } catch (const std::exception& e) {
        out.screened_reason = std::string("quantile grid failed: ") + e.what();
    }
    return out;
}

}  // namespace detail

inline MgbeResult mgbe_estimate(const BinnedDataset& ds, const MgbeConfig& cfg = {}) {
    cfg.validate();
    if (ds.populated_count() < 2)
        throw estimation_error("MGBE needs at least two populated bins");

    MgbeResult result;
    result.per_model = parallel_map(cfg.models.size(), cfg.model_jobs, [&](std::size_t i) {
        return detail::evaluate_model(ds, cfg.models[i], cfg);
    });

    std::vector<std::size_t> survivors;
    std::vector<double> crit;
    for (std::size_t i = 0; i < result.per_model.size(); ++i) {
        if (!result.per_model[i].survived()) continue;
        survivors.push_back(i);
        crit.push_back(criterion_value(result.per_model[i].diagnostics, cfg.criterion));
    }
    if (survivors.empty()) {
        std::string msg = "no model survived screening:";
        for (const auto& m : result.per_model)
            msg += " " + std::string(to_string(m.fit.kind)) + " (" + m.screened_reason + ");";
        throw estimation_error(msg);
    }

    const auto w = ic_weights(crit);
    for (std::size_t j = 0; j < survivors.size(); ++j) result.per_model[survivors[j]].weight = w[j];

    if (cfg.combine == Combine::select) {
        // Lowest criterion; ties go to fewer parameters, then canonical order.
        std::size_t best = survivors.front();
        for (std::size_t idx : survivors) {
            const auto& a = result.per_model[idx];
            const auto& b = result.per_model[best];
            const double ca = criterion_value(a.diagnostics, cfg.criterion);
            const double cb = criterion_value(b.diagnostics, cfg.criterion);
            if (ca < cb || (ca == cb && (a.fit.k < b.fit.k ||
                                         (a.fit.k == b.fit.k &&
                                          canonical_index(a.fit.kind) < canonical_index(b.fit.kind)))))
                best = idx;
        }
        result.selected = result.per_model[best].fit.kind;
        result.stats = *result.per_model[best].stats;
        return result;
    }

    StatsBundle avg{};
    avg.variance = avg.sd = avg.cv = 0.0;
    for (std::size_t idx : survivors) {
        const auto& m = result.per_model[idx];
        const StatsBundle& s = *m.stats;
        avg.mean += m.weight * s.mean;
        avg.median += m.weight * s.median;
        avg.variance += m.weight * s.variance;
        avg.sd += m.weight * s.sd;
        avg.cv += m.weight * s.cv;
        avg.gini += m.weight * s.gini;
        avg.theil += m.weight * s.theil;
        avg.mld += m.weight * s.mld;
    }
    result.stats = avg;
    return result;
}

}  // namespace bineq
