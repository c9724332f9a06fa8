#pragma once

/// The ten members of the generalized beta (GB) family used for income
/// modelling, in the GB2(mu, sigma, nu, tau) parameterization:
///
///   F(x) = I_y(nu, tau),  y = z / (1 + z),  z = (x / mu)^sigma
///
/// Nested kinds fix parameters of the GB2 to 1; the four embedded kinds
/// (Weibull, gamma, generalized gamma, log-normal) use their textbook forms.
///
/// Parameter order per kind (scale first, then shapes):
///   Weibull          (scale, shape)
///   LogLogistic      (mu, sigma)             GB2 with nu = tau = 1
///   Pareto2          (mu, tau)               GB2 with sigma = nu = 1
///   Gamma            (scale, shape)
///   LogNormal        (median, sdlog)         median = exp(meanlog)
///   Dagum            (mu, sigma, nu)         GB2 with tau = 1
///   SinghMaddala     (mu, sigma, tau)        GB2 with nu = 1
///   Beta2            (mu, nu, tau)           GB2 with sigma = 1
///   GeneralizedGamma (scale, shape, power)   F = P(shape, (x/scale)^power)
///   GB2              (mu, sigma, nu, tau)

#include <array>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>

namespace bineq {

enum class DistributionKind {
    Weibull,
    LogLogistic,
    Pareto2,
    Gamma,
    LogNormal,
    Dagum,
    SinghMaddala,
    Beta2,
    GeneralizedGamma,
    GB2,
};

inline constexpr std::array<DistributionKind, 10> all_kinds{
    DistributionKind::Weibull,      DistributionKind::LogLogistic, DistributionKind::Pareto2,
    DistributionKind::Gamma,        DistributionKind::LogNormal,   DistributionKind::Dagum,
    DistributionKind::SinghMaddala, DistributionKind::Beta2,       DistributionKind::GeneralizedGamma,
    DistributionKind::GB2,
};

inline constexpr std::size_t parameter_count(DistributionKind k) {
    switch (k) {
        case DistributionKind::Weibull:
        case DistributionKind::LogLogistic:
        case DistributionKind::Pareto2:
        case DistributionKind::Gamma:
        case DistributionKind::LogNormal: return 2;
        case DistributionKind::Dagum:
        case DistributionKind::SinghMaddala:
        case DistributionKind::Beta2:
        case DistributionKind::GeneralizedGamma: return 3;
        case DistributionKind::GB2: return 4;
    }
    return 0;
}

/// Position in `all_kinds`; used for deterministic tie-breaking.
inline constexpr std::size_t canonical_index(DistributionKind k) { return static_cast<std::size_t>(k); }

inline std::string_view to_string(DistributionKind k) {
    switch (k) {
        case DistributionKind::Weibull: return "weibull";
        case DistributionKind::LogLogistic: return "loglogistic";
        case DistributionKind::Pareto2: return "pareto2";
        case DistributionKind::Gamma: return "gamma";
        case DistributionKind::LogNormal: return "lognormal";
        case DistributionKind::Dagum: return "dagum";
        case DistributionKind::SinghMaddala: return "singhmaddala";
        case DistributionKind::Beta2: return "beta2";
        case DistributionKind::GeneralizedGamma: return "gengamma";
        case DistributionKind::GB2: return "gb2";
    }
    return "?";
}

inline DistributionKind parse_kind(std::string_view s) {
    for (auto k : all_kinds)
        if (to_string(k) == s) return k;
    throw std::invalid_argument("unknown distribution '" + std::string(s) + "'");
}

/// Up to four strictly positive parameters in the canonical order above.
class ParamVector {
public:
    ParamVector() = default;
    ParamVector(std::initializer_list<double> values) {
        if (values.size() > values_.size()) throw std::invalid_argument("too many parameters");
        for (double v : values) values_[size_++] = v;
    }
    explicit ParamVector(std::span<const double> values) {
        if (values.size() > values_.size()) throw std::invalid_argument("too many parameters");
        for (double v : values) values_[size_++] = v;
    }

    std::size_t size() const { return size_; }
    double operator[](std::size_t i) const { return values_[i]; }
    double& operator[](std::size_t i) { return values_[i]; }
    std::span<const double> values() const { return {values_.data(), size_}; }
    const double* begin() const { return values_.data(); }
    const double* end() const { return values_.data() + size_; }

    friend bool operator==(const ParamVector& a, const ParamVector& b) {
        if (a.size_ != b.size_) return false;
        for (std::size_t i = 0; i < a.size_; ++i)
            if (a.values_[i] != b.values_[i]) return false;
        return true;
    }

private:
    std::array<double, 4> values_{};
    std::size_t size_ = 0;
};

inline bool params_valid(DistributionKind kind, const ParamVector& p) {
    if (p.size() != parameter_count(kind)) return false;
    for (double v : p)
        if (!(v > 0.0) || !std::isfinite(v)) return false;
    return true;
}

inline void check_params(DistributionKind kind, const ParamVector& p) {
    if (!params_valid(kind, p))
        throw std::domain_error("invalid parameters for " + std::string(to_string(kind)));
}

/// Log-normal from the usual (meanlog, sdlog) pair.
inline ParamVector lognormal_params(double meanlog, double sdlog) { return {std::exp(meanlog), sdlog}; }

/// Unconstrained coordinates for optimization: elementwise log.
inline std::array<double, 4> to_unconstrained(const ParamVector& p) {
    std::array<double, 4> out{};
    for (std::size_t i = 0; i < p.size(); ++i) out[i] = std::log(p[i]);
    return out;
}

inline ParamVector from_unconstrained(DistributionKind kind, std::span<const double> coords) {
    std::array<double, 4> tmp{};
    const std::size_t k = parameter_count(kind);
    for (std::size_t i = 0; i < k; ++i) tmp[i] = std::exp(coords[i]);
    return ParamVector(std::span<const double>(tmp.data(), k));
}

/// Multiplies the scale parameter (always the first) by `factor`.
inline ParamVector rescaled(DistributionKind, ParamVector p, double factor) {
    p[0] *= factor;
    return p;
}

namespace detail {

using boost_policy = boost::math::policies::policy<boost::math::policies::promote_double<false>>;

struct Gb2Shape {
    double mu, sigma, nu, tau;
};

inline bool is_gb2_like(DistributionKind k) {
    switch (k) {
        case DistributionKind::LogLogistic:
        case DistributionKind::Pareto2:
        case DistributionKind::Dagum:
        case DistributionKind::SinghMaddala:
        case DistributionKind::Beta2:
        case DistributionKind::GB2: return true;
        default: return false;
    }
}

inline Gb2Shape as_gb2(DistributionKind k, const ParamVector& p) {
    switch (k) {
        case DistributionKind::LogLogistic: return {p[0], p[1], 1.0, 1.0};
        case DistributionKind::Pareto2: return {p[0], 1.0, 1.0, p[1]};
        case DistributionKind::Dagum: return {p[0], p[1], p[2], 1.0};
        case DistributionKind::SinghMaddala: return {p[0], p[1], 1.0, p[2]};
        case DistributionKind::Beta2: return {p[0], 1.0, p[1], p[2]};
        case DistributionKind::GB2: return {p[0], p[1], p[2], p[3]};
        default: throw std::logic_error("not a GB2-nested kind");
    }
}

/// Lower and upper tail probabilities computed without cancellation.
struct Tails {
    double lower;
    double upper;
};

inline Tails gb2_tails(const Gb2Shape& g, double x) {
    if (x <= 0.0) return {0.0, 1.0};
    if (std::isinf(x)) return {1.0, 0.0};
    const double t = g.sigma * std::log(x / g.mu);  // log z
    // y = z/(1+z), 1-y = 1/(1+z)
    if (t <= 0.0) {
        const double y = 1.0 / (1.0 + std::exp(-t));
        return {boost::math::ibeta(g.nu, g.tau, y, boost_policy()),
                boost::math::ibetac(g.nu, g.tau, y, boost_policy())};
    }
    const double w = 1.0 / (1.0 + std::exp(t));
    return {boost::math::ibetac(g.tau, g.nu, w, boost_policy()),
            boost::math::ibeta(g.tau, g.nu, w, boost_policy())};
}

inline Tails tails(DistributionKind kind, const ParamVector& p, double x) {
    if (x <= 0.0) return {0.0, 1.0};
    if (std::isinf(x)) return {1.0, 0.0};
    switch (kind) {
        case DistributionKind::LogLogistic: {
            const double t = p[1] * std::log(x / p[0]);
            return {1.0 / (1.0 + std::exp(-t)), 1.0 / (1.0 + std::exp(t))};
        }
        case DistributionKind::Dagum: {
            // F = (1 + (x/mu)^-sigma)^-nu
            const double lf = -p[2] * std::log1p(std::exp(-p[1] * std::log(x / p[0])));
            return {std::exp(lf), -std::expm1(lf)};
        }
        case DistributionKind::SinghMaddala:
        case DistributionKind::Pareto2: {
            const double sigma = kind == DistributionKind::Pareto2 ? 1.0 : p[1];
            const double tau = kind == DistributionKind::Pareto2 ? p[1] : p[2];
            const double ls = -tau * std::log1p(std::exp(sigma * std::log(x / p[0])));
            return {-std::expm1(ls), std::exp(ls)};
        }
        case DistributionKind::Beta2:
        case DistributionKind::GB2: return gb2_tails(as_gb2(kind, p), x);
        case DistributionKind::Weibull: {
            const double t = std::pow(x / p[0], p[1]);
            return {-std::expm1(-t), std::exp(-t)};
        }
        case DistributionKind::Gamma: {
            const double t = x / p[0];
            return {boost::math::gamma_p(p[1], t, boost_policy()),
                    boost::math::gamma_q(p[1], t, boost_policy())};
        }
        case DistributionKind::GeneralizedGamma: {
            const double t = std::pow(x / p[0], p[2]);
            return {boost::math::gamma_p(p[1], t, boost_policy()),
                    boost::math::gamma_q(p[1], t, boost_policy())};
        }
        case DistributionKind::LogNormal: {
            const double u = std::log(x / p[0]) / (p[1] * std::sqrt(2.0));
            return {0.5 * boost::math::erfc(-u, boost_policy()),
                    0.5 * boost::math::erfc(u, boost_policy())};
        }
    }
    throw std::logic_error("unhandled distribution kind");
}

}  // namespace detail

inline double cdf(DistributionKind kind, const ParamVector& p, double x) {
    check_params(kind, p);
    if (x < 0.0 || std::isnan(x)) throw std::domain_error("cdf argument must be >= 0");
    return detail::tails(kind, p, x).lower;
}

/// Upper tail 1 - F(x), accurate far into the tail.
inline double survival(DistributionKind kind, const ParamVector& p, double x) {
    check_params(kind, p);
    if (x < 0.0 || std::isnan(x)) throw std::domain_error("survival argument must be >= 0");
    return detail::tails(kind, p, x).upper;
}

/// Probability of [lower, upper); `upper` may be +infinity. Uses whichever
/// tail keeps the subtraction well conditioned.
inline double interval_probability(DistributionKind kind, const ParamVector& p, double lower,
                                   double upper) {
    const auto lo = detail::tails(kind, p, lower);
    const auto hi = detail::tails(kind, p, upper);
    const double prob = lo.lower < 0.5 ? hi.lower - lo.lower : lo.upper - hi.upper;
    return std::max(prob, 0.0);
}

inline double log_pdf(DistributionKind kind, const ParamVector& p, double x) {
    check_params(kind, p);
    if (!(x > 0.0)) return -std::numeric_limits<double>::infinity();
    const double lx = std::log(x);
    switch (kind) {
        case DistributionKind::Weibull: {
            const double r = lx - std::log(p[0]);
            return std::log(p[1]) - std::log(p[0]) + (p[1] - 1.0) * r - std::exp(p[1] * r);
        }
        case DistributionKind::Gamma:
            return (p[1] - 1.0) * lx - x / p[0] - std::lgamma(p[1]) - p[1] * std::log(p[0]);
        case DistributionKind::GeneralizedGamma: {
            const double r = lx - std::log(p[0]);
            return std::log(p[2]) - std::log(p[0]) + (p[1] * p[2] - 1.0) * r - std::exp(p[2] * r) -
                   std::lgamma(p[1]);
        }
        case DistributionKind::LogNormal: {
            const double u = (lx - std::log(p[0])) / p[1];
            return -lx - std::log(p[1]) - 0.5 * std::log(2.0 * std::numbers::pi) - 0.5 * u * u;
        }
        default: {
            const auto g = detail::as_gb2(kind, p);
            const double t = g.sigma * (lx - std::log(g.mu));
            const double softplus = t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
            const double lbeta =
                std::lgamma(g.nu) + std::lgamma(g.tau) - std::lgamma(g.nu + g.tau);
            return std::log(g.sigma) - lx + g.nu * t - lbeta - (g.nu + g.tau) * softplus;
        }
    }
}

inline double pdf(DistributionKind kind, const ParamVector& p, double x) {
    return std::exp(log_pdf(kind, p, x));
}

/// Inverse CDF by bisection in log(x), bracketing from `guess` outward by
/// factors of 10. Needs only a monotone CDF.
inline double quantile_by_bisection(DistributionKind kind, const ParamVector& p, double prob,
                                    double guess = 1.0) {
    check_params(kind, p);
    if (!(prob > 0.0 && prob < 1.0)) throw std::domain_error("probability must lie in (0, 1)");
    if (!(guess > 0.0) || !std::isfinite(guess)) guess = p[0];
    // Compare on the smaller tail to keep resolution near 0 and near 1.
    const bool upper = prob > 0.5;
    const double target = upper ? 1.0 - prob : prob;
    auto below = [&](double x) {
        const auto t = detail::tails(kind, p, x);
        return upper ? t.upper > target : t.lower < target;
    };
    double lo = guess / 10.0, hi = guess * 10.0;
    for (int i = 0; i < 400 && !below(lo); ++i) lo /= 10.0;
    for (int i = 0; i < 400 && below(hi); ++i) hi *= 10.0;
    double llo = std::log(lo), lhi = std::log(hi);
    for (int i = 0; i < 200 && lhi - llo > 1e-15 * std::max(1.0, std::abs(llo)); ++i) {
        const double mid = 0.5 * (llo + lhi);
        if (below(std::exp(mid)))
            llo = mid;
        else
            lhi = mid;
    }
    return std::exp(0.5 * (llo + lhi));
}

/// Inverse CDF, closed form where one exists.
inline double quantile(DistributionKind kind, const ParamVector& p, double prob) {
    check_params(kind, p);
    if (!(prob > 0.0 && prob < 1.0)) throw std::domain_error("probability must lie in (0, 1)");
    const double q = 1.0 - prob;
    double x = std::numeric_limits<double>::quiet_NaN();
    switch (kind) {
        case DistributionKind::LogLogistic:
            x = p[0] * std::pow(prob / q, 1.0 / p[1]);
            break;
        case DistributionKind::Dagum:
            // (p^{-1/nu} - 1)^{-1/sigma}
            x = p[0] * std::pow(std::expm1(-std::log(prob) / p[2]), -1.0 / p[1]);
            break;
        case DistributionKind::SinghMaddala:
        case DistributionKind::Pareto2: {
            const double sigma = kind == DistributionKind::Pareto2 ? 1.0 : p[1];
            const double tau = kind == DistributionKind::Pareto2 ? p[1] : p[2];
            x = p[0] * std::pow(std::expm1(-std::log1p(-prob) / tau), 1.0 / sigma);
            break;
        }
        case DistributionKind::Beta2:
        case DistributionKind::GB2: {
            const auto g = detail::as_gb2(kind, p);
            double y_c = 0.0;
            const double y = boost::math::ibeta_inv(g.nu, g.tau, prob, &y_c, detail::boost_policy());
            x = g.mu * std::pow(y / y_c, 1.0 / g.sigma);
            break;
        }
        case DistributionKind::Weibull:
            x = p[0] * std::pow(-std::log1p(-prob), 1.0 / p[1]);
            break;
        case DistributionKind::Gamma:
            x = p[0] * boost::math::gamma_p_inv(p[1], prob, detail::boost_policy());
            break;
        case DistributionKind::GeneralizedGamma:
            x = p[0] * std::pow(boost::math::gamma_p_inv(p[1], prob, detail::boost_policy()), 1.0 / p[2]);
            break;
        case DistributionKind::LogNormal:
            x = p[0] * std::exp(-p[1] * std::sqrt(2.0) * boost::math::erfc_inv(2.0 * prob, detail::boost_policy()));
            break;
    }
    if (!(x > 0.0) || !std::isfinite(x)) return quantile_by_bisection(kind, p, prob, p[0]);
    return x;
}

/// Whether E[X^order] is finite. For the GB2 the moment exists iff
/// -nu < order/sigma < tau; the left inequality always holds for positive
/// parameters.
inline bool moment_exists(DistributionKind kind, const ParamVector& p, int order) {
    check_params(kind, p);
    const double h = order;
    switch (kind) {
        case DistributionKind::Weibull:
        case DistributionKind::Gamma:
        case DistributionKind::GeneralizedGamma:
        case DistributionKind::LogNormal: return true;
        default: {
            const auto g = detail::as_gb2(kind, p);
            return -g.nu < h / g.sigma && h / g.sigma < g.tau;
        }
    }
}

}  // namespace bineq
