#pragma once

/// Maximum-likelihood fitting of GB-family distributions to binned counts,
/// with likelihood-ratio (G^2) goodness of fit and information criteria.
///
/// The likelihood of a binned dataset is the multinomial cell likelihood
///
///   l = sum_b n_b ln(F(u_b) - F(l_b))
///
/// over populated bins, the open top bin contributing n_B ln(1 - F(l_B)).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "binned.hpp"
#include "distributions.hpp"
#include "nelder_mead.hpp"
#include "rpme.hpp"

namespace bineq {

struct FitConfig {
    double rel_tol = 1e-8;
    int max_iter = 2000;
    int restarts = 5;
    std::uint64_t seed = 0;

    void validate() const {
        if (!(rel_tol > 0.0)) throw std::invalid_argument("rel_tol must be > 0");
        if (max_iter < 1) throw std::invalid_argument("max_iter must be >= 1");
        if (restarts < 1) throw std::invalid_argument("restarts must be >= 1");
    }
};

struct FittedDistribution {
    DistributionKind kind = DistributionKind::LogNormal;
    ParamVector params;
    double loglik = -std::numeric_limits<double>::infinity();
    std::size_t k = 0;
    bool converged = false;
    bool mean_defined = false;
    bool variance_defined = false;
};

struct FitDiagnostics {
    double g2 = 0.0;
    int df = 0;
    std::optional<double> p_value;
    double aic = 0.0;
    double bic = 0.0;
};

inline constexpr double min_cell_probability = 1e-300;

namespace detail {

/// Cell log-likelihood with the CDF evaluated once per distinct boundary.
/// `bound_factor` divides every bound first (used to fit in normalized units).
inline double cell_loglik(const BinnedDataset& ds, DistributionKind kind, const ParamVector& p,
                          double bound_factor = 1.0) {
    const auto& bins = ds.bins();
    double ll = 0.0;
    Tails lo = tails(kind, p, bins.front().lower / bound_factor);
    for (const Bin& b : bins) {
        const double upper = b.upper ? *b.upper / bound_factor : std::numeric_limits<double>::infinity();
        const Tails hi = tails(kind, p, upper);
        if (b.count > 0.0) {
            double prob = lo.lower < 0.5 ? hi.lower - lo.lower : lo.upper - hi.upper;
            if (!(prob >= min_cell_probability)) prob = min_cell_probability;
            ll += b.count * std::log(prob);
        }
        lo = hi;
    }
    return ll;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Midpoint-estimator median, with the open top bin at twice its lower
/// bound. Used as the fitting scale reference and the starting scale.
inline double reference_scale(const BinnedDataset& ds) {
    std::vector<WeightedPoint> pts;
    for (const Bin& b : ds.bins()) {
        if (!(b.count > 0.0)) continue;
        const double v = b.bounded() ? b.midpoint() : 2.0 * b.lower;
        if (v > 0.0) pts.push_back({v, b.count});
    }
    if (pts.empty()) return 1.0;
    return weighted_median(WeightedSample(std::move(pts)));
}

}  // namespace detail

inline double binned_loglik(const BinnedDataset& ds, DistributionKind kind, const ParamVector& params) {
    check_params(kind, params);
    return detail::cell_loglik(ds, kind, params);
}

/// sum_b n_b ln(n_b / n) over populated bins: the largest attainable
/// binned log-likelihood.
inline double saturated_loglik(const BinnedDataset& ds) {
    double ll = 0.0;
    for (const Bin& b : ds.bins())
        if (b.count > 0.0) ll += b.count * std::log(b.count / ds.n());
    return ll;
}

inline FittedDistribution make_fitted(DistributionKind kind, const ParamVector& params, double loglik,
                                      bool converged) {
    FittedDistribution f;
    f.kind = kind;
    f.params = params;
    f.loglik = loglik;
    f.k = parameter_count(kind);
    f.converged = converged;
    f.mean_defined = moment_exists(kind, params, 1);
    f.variance_defined = moment_exists(kind, params, 2);
    return f;
}

/// Maximizes the binned likelihood with multi-start Nelder-Mead in log
/// parameter space. Deterministic for a given (dataset, kind, cfg).
inline FittedDistribution fit(const BinnedDataset& ds, DistributionKind kind, const FitConfig& cfg = {}) {
    cfg.validate();
    if (ds.populated_count() < 2)
        throw estimation_error("fit needs at least two populated bins (model unidentified)");

    // Work in units of the reference scale so every log-parameter starts at 0.
    const double ref = detail::reference_scale(ds);
    const std::size_t k = parameter_count(kind);
    constexpr double coord_limit = 30.0;

    auto objective = [&](const std::vector<double>& coords) {
        for (double c : coords)
            if (!(std::abs(c) <= coord_limit)) return std::numeric_limits<double>::infinity();
        try {
            return -detail::cell_loglik(ds, kind, from_unconstrained(kind, coords), ref);
        } catch (const std::exception&) {
            return std::numeric_limits<double>::infinity();
        }
    };

    std::mt19937_64 rng(detail::splitmix64(cfg.seed ^ (0x51ed2701ULL * (canonical_index(kind) + 1))));
    std::uniform_real_distribution<double> jitter(-0.5, 0.5);

    SimplexOptions opt;
    opt.rel_tol = cfg.rel_tol;
    opt.max_iter = cfg.max_iter;

    struct Outcome {
        std::vector<double> x;
        double value;
        bool converged;
    };
    std::vector<Outcome> outcomes;

    for (int r = 0; r < cfg.restarts; ++r) {
        std::vector<double> start(k, 0.0);
        if (r > 0)
            for (double& c : start) c += jitter(rng);

        opt.step = 0.5;
        const SimplexResult first = nelder_mead(objective, start, opt);
        // A second, smaller simplex from the optimum guards against premature
        // collapse; the restart counts as converged only if it stays put.
        opt.step = 0.1;
        const SimplexResult polish = nelder_mead(objective, first.x, opt);
        const SimplexResult& fin = polish.value <= first.value ? polish : first;
        const bool converged = std::isfinite(fin.value) && first.converged && polish.converged &&
                               (first.value - polish.value) <= cfg.rel_tol * (std::abs(polish.value) + 1.0);
        outcomes.push_back({fin.x, fin.value, converged});
    }

    const auto best = std::min_element(outcomes.begin(), outcomes.end(),
                                       [](const Outcome& a, const Outcome& b) { return a.value < b.value; });
    const double best_value = best->value;
    const std::vector<double>& best_x = best->x;
    bool best_converged = false;
    for (const auto& o : outcomes)
        if (o.converged && o.value - best_value <= cfg.rel_tol * (std::abs(best_value) + 1.0))
            best_converged = true;

    if (!std::isfinite(best_value))
        return make_fitted(kind, rescaled(kind, from_unconstrained(kind, std::vector<double>(k, 0.0)), ref),
                           -std::numeric_limits<double>::infinity(), false);

    const ParamVector params = rescaled(kind, from_unconstrained(kind, best_x), ref);
    if (!params_valid(kind, params))
        return make_fitted(kind, rescaled(kind, from_unconstrained(kind, std::vector<double>(k, 0.0)), ref),
                           -best_value, false);
    return make_fitted(kind, params, -best_value, best_converged);
}

/// df = min(B, B_all - 1) - k.
inline int g2_degrees_of_freedom(std::size_t populated, std::size_t total_bins, std::size_t k) {
    const auto m = std::min<long long>(static_cast<long long>(populated),
                                       static_cast<long long>(total_bins) - 1);
    return static_cast<int>(m - static_cast<long long>(k));
}

inline FitDiagnostics g2_test(const BinnedDataset& ds, const FittedDistribution& f) {
    FitDiagnostics d;
    const double g2 = -2.0 * (f.loglik - saturated_loglik(ds));
    d.g2 = std::isnan(g2) ? g2 : std::max(0.0, g2);
    d.df = g2_degrees_of_freedom(ds.populated_count(), ds.size(), f.k);
    if (d.df >= 1 && std::isfinite(d.g2))
        d.p_value = boost::math::gamma_q(0.5 * d.df, 0.5 * d.g2);
    const double kk = static_cast<double>(f.k);
    d.aic = -2.0 * f.loglik + 2.0 * kk;
    d.bic = -2.0 * f.loglik + kk * std::log(ds.n());
    return d;
}

}  // namespace bineq
