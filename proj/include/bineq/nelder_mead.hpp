#pragma once

// Derivative-free minimization with the Nelder-Mead simplex (standard
// reflection/expansion/contraction/shrink coefficients 1, 2, 1/2, 1/2).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <vector>

namespace bineq {

struct SimplexOptions {
    /// Stop when (f_worst - f_best) <= rel_tol * (|f_best| + rel_tol).
    double rel_tol = 1e-8;
    int max_iter = 2000;
    /// Initial simplex edge along each coordinate.
    double step = 0.5;
};

struct SimplexResult {
    std::vector<double> x;
    double value = std::numeric_limits<double>::infinity();
    int iterations = 0;
    bool converged = false;
};

/// Minimizes `f` from `start`. Non-finite values of `f` are treated as +inf
/// so the simplex retreats from them.
template <class F>
SimplexResult nelder_mead(F&& f, const std::vector<double>& start, const SimplexOptions& opt = {}) {
    const std::size_t n = start.size();
    auto eval = [&](const std::vector<double>& x) {
        const double v = f(x);
        return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
    };

    std::vector<std::vector<double>> pts(n + 1, start);
    std::vector<double> vals(n + 1);
    for (std::size_t i = 0; i < n; ++i) pts[i + 1][i] += opt.step;
    for (std::size_t i = 0; i <= n; ++i) vals[i] = eval(pts[i]);

    std::vector<std::size_t> order(n + 1);
    std::vector<double> centroid(n), trial(n), trial2(n);
    SimplexResult res;

    for (int it = 0;; ++it) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
        const std::size_t best = order.front(), worst = order.back(), second = order[n - 1];

        const double spread = vals[worst] - vals[best];
        if (std::isfinite(vals[best]) && spread <= opt.rel_tol * (std::abs(vals[best]) + opt.rel_tol)) {
            res.converged = true;
            res.iterations = it;
            break;
        }
        if (it >= opt.max_iter) {
            res.iterations = it;
            break;
        }

        std::fill(centroid.begin(), centroid.end(), 0.0);
        for (std::size_t i = 0; i <= n; ++i) {
            if (i == worst) continue;
            for (std::size_t d = 0; d < n; ++d) centroid[d] += pts[i][d];
        }
        for (double& c : centroid) c /= static_cast<double>(n);

        auto along = [&](double t, std::vector<double>& out) {
            for (std::size_t d = 0; d < n; ++d) out[d] = centroid[d] + t * (pts[worst][d] - centroid[d]);
        };

        along(-1.0, trial);
        const double fr = eval(trial);
        if (fr < vals[best]) {
            along(-2.0, trial2);
            const double fe = eval(trial2);
            if (fe < fr) {
                pts[worst] = trial2;
                vals[worst] = fe;
            } else {
                pts[worst] = trial;
                vals[worst] = fr;
            }
            continue;
        }
        if (fr < vals[second]) {
            pts[worst] = trial;
            vals[worst] = fr;
            continue;
        }
        // Contract, outside if the reflection helped at all.
        const bool outside = fr < vals[worst];
        along(outside ? -0.5 : 0.5, trial2);
        const double fc = eval(trial2);
        if (fc < (outside ? fr : vals[worst])) {
            pts[worst] = trial2;
            vals[worst] = fc;
            continue;
        }
        for (std::size_t i = 0; i <= n; ++i) {
            if (i == best) continue;
            for (std::size_t d = 0; d < n; ++d) pts[i][d] = pts[best][d] + 0.5 * (pts[i][d] - pts[best][d]);
            vals[i] = eval(pts[i]);
        }
    }

    const std::size_t best =
        static_cast<std::size_t>(std::min_element(vals.begin(), vals.end()) - vals.begin());
    res.x = pts[best];
    res.value = vals[best];
    return res;
}

}  // namespace bineq
