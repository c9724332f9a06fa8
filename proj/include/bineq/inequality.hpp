#pragma once

// Sample statistics on weighted positive values. Both estimators reduce to
// this: RPME through bin midpoints, MGBE through a quantile grid.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace bineq {

struct WeightedPoint {
    double value = 0.0;
    double weight = 0.0;
};

/// Points with value > 0 and weight >= 0, total weight > 0.
class WeightedSample {
public:
    WeightedSample() = default;

    explicit WeightedSample(std::vector<WeightedPoint> points) : points_(std::move(points)) {
        total_ = 0.0;
        for (const auto& p : points_) {
            if (!(p.value > 0.0) || !std::isfinite(p.value))
                throw std::domain_error("sample values must be positive and finite");
            if (!(p.weight >= 0.0) || !std::isfinite(p.weight))
                throw std::domain_error("sample weights must be nonnegative and finite");
            total_ += p.weight;
        }
        if (!(total_ > 0.0)) throw std::domain_error("sample has zero total weight");
    }

    /// Unit weights.
    static WeightedSample unweighted(std::span<const double> values) {
        std::vector<WeightedPoint> pts;
        pts.reserve(values.size());
        for (double v : values) pts.push_back({v, 1.0});
        return WeightedSample(std::move(pts));
    }

    const std::vector<WeightedPoint>& points() const { return points_; }
    double total_weight() const { return total_; }

private:
    std::vector<WeightedPoint> points_;
    double total_ = 0.0;
};

struct StatsBundle {
    double mean = 0.0;
    double median = 0.0;
    double variance = std::numeric_limits<double>::quiet_NaN();
    double sd = std::numeric_limits<double>::quiet_NaN();
    double cv = std::numeric_limits<double>::quiet_NaN();
    double gini = 0.0;
    double theil = 0.0;
    double mld = 0.0;
};

struct MeanVariance {
    double mean = 0.0;
    /// Absent when total weight <= 1 (n - 1 denominator).
    std::optional<double> variance;
};

inline MeanVariance weighted_mean_variance(const WeightedSample& s) {
    const double n = s.total_weight();
    double sum = 0.0;
    for (const auto& p : s.points()) sum += p.weight * p.value;
    MeanVariance out;
    out.mean = sum / n;
    if (n > 1.0) {
        double ss = 0.0;
        for (const auto& p : s.points()) {
            const double d = p.value - out.mean;
            ss += p.weight * d * d;
        }
        out.variance = ss / (n - 1.0);
    }
    return out;
}

namespace detail {

inline std::vector<WeightedPoint> sorted_points(const WeightedSample& s) {
    std::vector<WeightedPoint> pts = s.points();
    std::sort(pts.begin(), pts.end(),
              [](const WeightedPoint& a, const WeightedPoint& b) { return a.value < b.value; });
    return pts;
}

inline double median_of_sorted(const std::vector<WeightedPoint>& pts, double total) {
    const double half = 0.5 * total;
    double cum = 0.0;
    for (const auto& p : pts) {
        cum += p.weight;
        if (cum >= half) return p.value;
    }
    return pts.back().value;
}

inline double gini_of_sorted(const std::vector<WeightedPoint>& pts, double total, double mean) {
    // sum_{i<j} w_i w_j (x_j - x_i), accumulated with running weight/mass below j.
    double w_below = 0.0, s_below = 0.0, acc = 0.0;
    for (const auto& p : pts) {
        acc += p.weight * (p.value * w_below - s_below);
        w_below += p.weight;
        s_below += p.weight * p.value;
    }
    return acc / (total * total * mean);
}

}  // namespace detail

/// Smallest value whose cumulative weight reaches half the total.
inline double weighted_median(const WeightedSample& s) {
    return detail::median_of_sorted(detail::sorted_points(s), s.total_weight());
}

/// Half the weighted mean absolute difference over the mean, O(m log m).
inline double weighted_gini(const WeightedSample& s) {
    const double mean = weighted_mean_variance(s).mean;
    return detail::gini_of_sorted(detail::sorted_points(s), s.total_weight(), mean);
}

inline double weighted_theil(const WeightedSample& s) {
    const double mean = weighted_mean_variance(s).mean;
    double acc = 0.0;
    for (const auto& p : s.points()) {
        if (!(p.value > 0.0)) throw std::domain_error("Theil index needs positive values");
        const double r = p.value / mean;
        acc += p.weight * r * std::log(r);
    }
    return std::max(0.0, acc / s.total_weight());
}

inline double weighted_mld(const WeightedSample& s) {
    const double mean = weighted_mean_variance(s).mean;
    double acc = 0.0;
    for (const auto& p : s.points()) {
        if (!(p.value > 0.0)) throw std::domain_error("MLD needs positive values");
        acc += p.weight * std::log(mean / p.value);
    }
    return std::max(0.0, acc / s.total_weight());
}

inline StatsBundle compute_all(const WeightedSample& s) {
    const auto pts = detail::sorted_points(s);
    const double n = s.total_weight();
    const MeanVariance mv = weighted_mean_variance(s);

    StatsBundle out;
    out.mean = mv.mean;
    out.median = detail::median_of_sorted(pts, n);
    if (mv.variance) {
        out.variance = *mv.variance;
        out.sd = std::sqrt(out.variance);
        out.cv = out.sd / out.mean;
    }
    out.gini = detail::gini_of_sorted(pts, n, mv.mean);

    double theil = 0.0, mld = 0.0;
    for (const auto& p : pts) {
        const double r = p.value / mv.mean;
        theil += p.weight * r * std::log(r);
        mld -= p.weight * std::log(r);
    }
    // Rounding can leave -1e-17 for a constant sample.
    out.theil = std::max(0.0, theil / n);
    out.mld = std::max(0.0, mld / n);
    return out;
}

}  // namespace bineq
