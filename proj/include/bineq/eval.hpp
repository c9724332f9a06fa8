#pragma once

/// Accuracy evaluation on synthetic ground truth: percent relative errors,
/// bias / RMSE / reliability aggregation, seeded synthetic datasets, and the
/// rebinning benchmark (evaluate at the native bins, then after successive
/// merges of adjacent bins).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "binned.hpp"
#include "distributions.hpp"
#include "inequality.hpp"
#include "mgbe.hpp"
#include "parallel.hpp"
#include "rpme.hpp"

namespace bineq {

struct RelativeErrors {
    std::vector<double> values;
    /// Pairs dropped because the truth was zero.
    std::size_t excluded = 0;
};

/// 100 (estimate - truth) / truth, elementwise.
inline RelativeErrors relative_errors(std::span<const double> estimates, std::span<const double> truths) {
    if (estimates.size() != truths.size())
        throw std::invalid_argument("estimates and truths differ in length");
    RelativeErrors out;
    out.values.reserve(estimates.size());
    for (std::size_t i = 0; i < estimates.size(); ++i) {
        if (truths[i] == 0.0) {
            ++out.excluded;
            continue;
        }
        out.values.push_back(100.0 * (estimates[i] - truths[i]) / truths[i]);
    }
    return out;
}

struct AccuracyRow {
    double percent_bias = 0.0;
    double percent_rmse = 0.0;
    std::optional<double> reliability;
    std::size_t n_datasets = 0;
    std::size_t n_failed = 0;
};

/// Squared Pearson correlation; nullopt for fewer than two points or zero
/// variance on either side.
inline std::optional<double> squared_correlation(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n) return std::nullopt;
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (!(sxx > 0.0) || !(syy > 0.0)) return std::nullopt;
    return std::min(1.0, sxy * sxy / (sxx * syy));
}

/// Bias and RMSE of the percent relative errors; reliability is the squared
/// correlation of estimates with truths.
inline AccuracyRow accuracy(std::span<const double> estimates, std::span<const double> truths) {
    const auto errors = relative_errors(estimates, truths);
    AccuracyRow row;
    row.n_datasets = errors.values.size();
    if (!errors.values.empty()) {
        double sum = 0.0, sq = 0.0;
        for (double e : errors.values) {
            sum += e;
            sq += e * e;
        }
        row.percent_bias = sum / static_cast<double>(errors.values.size());
        row.percent_rmse = std::sqrt(sq / static_cast<double>(errors.values.size()));
    }
    row.reliability = squared_correlation(estimates, truths);
    return row;
}

struct SyntheticSpec {
    DistributionKind kind = DistributionKind::LogNormal;
    ParamVector params;
    std::size_t n_draws = 1000;
    /// Lower bounds; the last bin is open-ended.
    std::vector<double> bin_scheme = acs16_bounds();
    std::uint64_t seed = 0;
    std::string id;

    void validate() const {
        check_params(kind, params);
        if (n_draws < 1) throw std::invalid_argument("n_draws must be >= 1");
        if (bin_scheme.empty() || bin_scheme.front() != 0.0)
            throw std::invalid_argument("bin scheme must start at 0");
        for (std::size_t i = 1; i < bin_scheme.size(); ++i)
            if (!(bin_scheme[i] > bin_scheme[i - 1]))
                throw std::invalid_argument("bin scheme must be strictly increasing");
    }
};

struct SyntheticDataset {
    BinnedDataset data;
    /// Statistics of the raw, unbinned draws.
    StatsBundle truth;
};

/// Uniform on the open interval (0, 1) from the top 52 bits; 1 - 2^-53 is the largest value.
inline double open_unit(std::uint64_t bits) { return (static_cast<double>(bits >> 12) + 0.5) * 0x1.0p-52; }

/// Inverse-CDF draws from `spec`, binned on its scheme.
inline SyntheticDataset synthesize(const SyntheticSpec& spec) {
    spec.validate();
    std::mt19937_64 rng(spec.seed);
    std::vector<double> draws(spec.n_draws);
    std::vector<double> counts(spec.bin_scheme.size(), 0.0);
    for (double& x : draws) {
        x = quantile(spec.kind, spec.params, open_unit(rng()));
        const auto it = std::upper_bound(spec.bin_scheme.begin(), spec.bin_scheme.end(), x);
        counts[static_cast<std::size_t>(it - spec.bin_scheme.begin()) - 1] += 1.0;
    }
    return {dataset_from_bounds(spec.id, spec.bin_scheme, counts),
            compute_all(WeightedSample::unweighted(draws))};
}

struct EstimatorConfig {
    std::string name;
    std::variant<RpmeConfig, MgbeConfig> config;
};

inline StatsBundle run_estimator(const EstimatorConfig& e, const BinnedDataset& ds) {
    if (const auto* r = std::get_if<RpmeConfig>(&e.config)) return rpme_estimate(ds, *r).stats;
    return mgbe_estimate(ds, std::get<MgbeConfig>(e.config)).stats;
}

enum class Estimand { mean, median, gini, theil, mld };
inline constexpr std::array<Estimand, 5> all_estimands{Estimand::mean, Estimand::median, Estimand::gini,
                                                       Estimand::theil, Estimand::mld};

inline std::string_view to_string(Estimand e) {
    switch (e) {
        case Estimand::mean: return "mean";
        case Estimand::median: return "median";
        case Estimand::gini: return "gini";
        case Estimand::theil: return "theil";
        case Estimand::mld: return "mld";
    }
    return "?";
}

inline double pick(const StatsBundle& s, Estimand e) {
    switch (e) {
        case Estimand::mean: return s.mean;
        case Estimand::median: return s.median;
        case Estimand::gini: return s.gini;
        case Estimand::theil: return s.theil;
        case Estimand::mld: return s.mld;
    }
    return 0.0;
}

struct BenchmarkSpec {
    std::vector<SyntheticSpec> datasets;
    std::vector<EstimatorConfig> estimators;
    /// Merge groups applied one after another, e.g. {2, 2} for 16 -> 8 -> 4.
    std::vector<std::size_t> rebin;
    std::size_t jobs = 1;
};

struct AccuracyReportRow {
    std::string estimator;
    std::size_t bins = 0;
    Estimand estimand = Estimand::gini;
    AccuracyRow accuracy;
};

struct AccuracyReport {
    std::vector<AccuracyReportRow> rows;

    const AccuracyReportRow* find(std::string_view estimator, std::size_t bins, Estimand e) const {
        for (const auto& r : rows)
            if (r.estimator == estimator && r.bins == bins && r.estimand == e) return &r;
        return nullptr;
    }
};

inline AccuracyReport run_benchmark(const BenchmarkSpec& spec) {
    if (spec.datasets.empty()) throw std::invalid_argument("benchmark has no datasets");
    const std::size_t n_schemes = spec.rebin.size() + 1;
    const std::size_t n_est = spec.estimators.size();

    struct DatasetOutcome {
        StatsBundle truth;
        std::vector<std::size_t> bins;  // per scheme
        // [scheme][estimator]; nullopt on estimator failure
        std::vector<std::vector<std::optional<StatsBundle>>> estimates;
    };

    const auto outcomes = parallel_map(spec.datasets.size(), spec.jobs, [&](std::size_t i) {
        const auto syn = synthesize(spec.datasets[i]);
        DatasetOutcome out;
        out.truth = syn.truth;
        BinnedDataset current = syn.data;
        for (std::size_t s = 0; s < n_schemes; ++s) {
            if (s > 0) current = merge_adjacent(current, spec.rebin[s - 1]);
            out.bins.push_back(current.size());
            auto& row = out.estimates.emplace_back(n_est);
            for (std::size_t e = 0; e < n_est; ++e) {
                try {
                    row[e] = run_estimator(spec.estimators[e], current);
                } catch (const std::exception&) {
                    row[e] = std::nullopt;
                }
            }
        }
        return out;
    });

    AccuracyReport report;
    for (std::size_t e = 0; e < n_est; ++e) {
        for (std::size_t s = 0; s < n_schemes; ++s) {
            for (Estimand which : all_estimands) {
                std::vector<double> est, truth;
                std::size_t failed = 0;
                for (const auto& o : outcomes) {
                    const auto& v = o.estimates[s][e];
                    if (!v || !std::isfinite(pick(*v, which))) {
                        ++failed;
                        continue;
                    }
                    est.push_back(pick(*v, which));
                    truth.push_back(pick(o.truth, which));
                }
                AccuracyReportRow row;
                row.estimator = spec.estimators[e].name;
                row.bins = outcomes.front().bins[s];
                row.estimand = which;
                row.accuracy = accuracy(est, truth);
                row.accuracy.n_failed = failed;
                report.rows.push_back(std::move(row));
            }
        }
    }
    return report;
}

inline void write_report_csv(std::ostream& out, const AccuracyReport& report) {
    out << "estimator,bins,estimand,percent_bias,percent_rmse,reliability,n_datasets,n_failed\n";
    char buf[64];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.6g", v);
        return std::string(buf);
    };
    for (const auto& r : report.rows) {
        out << r.estimator << ',' << r.bins << ',' << to_string(r.estimand) << ','
            << num(r.accuracy.percent_bias) << ',' << num(r.accuracy.percent_rmse) << ','
            << (r.accuracy.reliability ? num(*r.accuracy.reliability) : std::string()) << ','
            << r.accuracy.n_datasets << ',' << r.accuracy.n_failed << '\n';
    }
}

inline nlohmann::json report_to_json(const AccuracyReport& report) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : report.rows) {
        rows.push_back({{"estimator", r.estimator},
                        {"bins", r.bins},
                        {"estimand", std::string(to_string(r.estimand))},
                        {"percent_bias", r.accuracy.percent_bias},
                        {"percent_rmse", r.accuracy.percent_rmse},
                        {"reliability", r.accuracy.reliability ? nlohmann::json(*r.accuracy.reliability)
                                                               : nlohmann::json(nullptr)},
                        {"n_datasets", r.accuracy.n_datasets},
                        {"n_failed", r.accuracy.n_failed}});
    }
    return rows;
}

}  // namespace bineq
