#include <gtest/gtest.h>

#include <random>

#include <bineq/rpme.hpp>

#include "test_support.hpp"

namespace bineq {
namespace {

// Two-bin tail with l_{B-1} = 100, l_B = 200.
BinnedDataset tail_pair(double below, double top) {
    return dataset_from_bounds("t", {0, 100, 200}, {1, below, top});
}

TEST(EstimateAlpha, Nantucket) {
    const auto a = estimate_alpha(testing::nantucket());
    ASSERT_TRUE(a.has_value());
    EXPECT_NEAR(*a, 1.1293338259, 1e-9);
}

TEST(EstimateAlpha, EqualCountsAndDoubledBound) { EXPECT_DOUBLE_EQ(*estimate_alpha(tail_pair(5, 5)), 1.0); }

TEST(EstimateAlpha, EmptySecondHighestBinGivesZero) { EXPECT_EQ(*estimate_alpha(tail_pair(0, 5)), 0.0); }

TEST(EstimateAlpha, NotApplicableForBoundedOrEmptyTop) {
    EXPECT_FALSE(estimate_alpha(testing::maricao()).has_value());
    auto bounded = BinnedDataset::make("b", {{0, 10.0, 1}, {10, 20.0, 1}});
    EXPECT_FALSE(estimate_alpha(bounded).has_value());
}

TEST(EstimateAlpha, DegenerateGeometry) {
    auto ds = dataset_from_bounds("d", {0, 10}, {1, 1});
    EXPECT_THROW(estimate_alpha(ds), estimation_error);
    auto single = BinnedDataset::make("s", {{0, std::nullopt, 3}});
    EXPECT_THROW(estimate_alpha(single), estimation_error);
}

TEST(ConstrainAlpha, Examples) {
    EXPECT_EQ(constrain_alpha(0.4, {}), 1.0);
    EXPECT_EQ(constrain_alpha(2.5, {}), 2.5);
    EXPECT_EQ(constrain_alpha(1.1294, RpmeConfig::with_defaults(TopBinFlavor::arithmetic)), 2.0);
}

TEST(TopBinValue, AlphaTwo) {
    EXPECT_DOUBLE_EQ(top_bin_value(200000, 2, TopBinFlavor::arithmetic), 400000.0);
    EXPECT_DOUBLE_EQ(top_bin_value(200000, 2, TopBinFlavor::harmonic), 300000.0);
    EXPECT_NEAR(top_bin_value(200000, 2, TopBinFlavor::median), 282842.712, 1e-3);
    EXPECT_NEAR(top_bin_value(200000, 2, TopBinFlavor::geometric), 329744.254, 1e-3);
}

TEST(TopBinValue, InfiniteMeanRejected) {
    EXPECT_THROW(top_bin_value(1, 1.0, TopBinFlavor::arithmetic), std::domain_error);
    EXPECT_THROW(top_bin_value(1, 0.5, TopBinFlavor::arithmetic), std::domain_error);
    EXPECT_NO_THROW(top_bin_value(1, 0.5, TopBinFlavor::harmonic));
}

TEST(TopBinValue, LargeAlphaLimit) {
    for (auto f : {TopBinFlavor::arithmetic, TopBinFlavor::geometric, TopBinFlavor::median, TopBinFlavor::harmonic})
        EXPECT_NEAR(top_bin_value(200000, 1e6, f) / 200000, 1.0, 1e-4) << to_string(f);
}

TEST(TopBinValue, FlavorOrdering) {
    for (double a = 1.01; a <= 10.0; a += 0.01) {
        const double h = top_bin_value(1, a, TopBinFlavor::harmonic);
        const double m = top_bin_value(1, a, TopBinFlavor::median);
        const double g = top_bin_value(1, a, TopBinFlavor::geometric);
        const double u = top_bin_value(1, a, TopBinFlavor::arithmetic);
        // 2^u <= 1 + u on [0, 1], so the median sits below the harmonic mean.
        EXPECT_LE(m, h);
        EXPECT_LE(h, g);
        EXPECT_LE(g, u);
    }
}

TEST(RpmeConfig, Validation) {
    EXPECT_NO_THROW(RpmeConfig{}.validate());
    EXPECT_THROW((RpmeConfig{TopBinFlavor::arithmetic, 1.0}.validate()), std::invalid_argument);
    EXPECT_THROW((RpmeConfig{TopBinFlavor::harmonic, 0.0}.validate()), std::invalid_argument);
    EXPECT_THROW((RpmeConfig{TopBinFlavor::harmonic, -1.0}.validate()), std::invalid_argument);
    EXPECT_EQ(RpmeConfig::with_defaults(TopBinFlavor::arithmetic).alpha_min, 2.0);
    EXPECT_EQ(RpmeConfig::with_defaults(TopBinFlavor::median).alpha_min, 1.0);
    EXPECT_EQ(parse_flavor("geometric"), TopBinFlavor::geometric);
    EXPECT_THROW(parse_flavor("mode"), std::invalid_argument);
}

TEST(RpmeEstimate, MaricaoIsPureMidpoint) {
    const auto r = rpme_estimate(testing::maricao());
    EXPECT_FALSE(r.alpha_hat.has_value());
    EXPECT_FALSE(r.top_value.has_value());
    EXPECT_NEAR(r.stats.mean, 15781.82, 0.01);
    EXPECT_NEAR(r.stats.sd, 14307.0, 0.01 * 14307.0);
    EXPECT_NEAR(r.diagnostics.mean_width, 75000.0 / 11.0, 1e-9);
    EXPECT_DOUBLE_EQ(r.diagnostics.max_width, 15000.0);
    const double s = r.stats.sd;
    EXPECT_NEAR(r.diagnostics.variance_bias_mean_width, std::pow(75000.0 / 11.0 / s, 2) / 12.0, 1e-12);
    EXPECT_TRUE(r.diagnostics.widths_ok);
}

TEST(RpmeEstimate, NantucketHarmonicMatchesIndependentScript) {
    const auto r = rpme_estimate(testing::nantucket());
    ASSERT_TRUE(r.top_value.has_value());
    EXPECT_NEAR(*r.top_value, 200000.0 * (1.0 + 1.0 / *r.alpha_hat), 1e-6);
    EXPECT_NEAR(*r.top_value, 377095.554, 1e-3);
    EXPECT_NEAR(r.stats.mean, 121506.15066, 1e-4);
    EXPECT_NEAR(r.stats.variance, 12871843294.4191, 1e-2);
    EXPECT_NEAR(r.stats.gini, 0.46374418811, 1e-10);
    EXPECT_NEAR(r.stats.theil, 0.37322696619, 1e-10);
    EXPECT_NEAR(r.stats.mld, 0.44950629009, 1e-10);
    EXPECT_EQ(r.sample.points().size(), 16u);
}

TEST(RpmeEstimate, SingleBoundedBin) {
    auto ds = BinnedDataset::make("one", {{0, 10.0, 5}});
    const auto r = rpme_estimate(ds);
    EXPECT_EQ(r.stats.mean, 5.0);
    EXPECT_EQ(r.stats.median, 5.0);
    EXPECT_EQ(r.stats.gini, 0.0);
    EXPECT_EQ(r.stats.theil, 0.0);
    EXPECT_EQ(r.stats.mld, 0.0);
}

TEST(RpmeEstimate, OnlyOpenTopPopulatedIsRejected) {
    auto ds = dataset_from_bounds("top", {0, 10, 20}, {0, 0, 4});
    EXPECT_THROW(rpme_estimate(ds), estimation_error);
}

TEST(RpmeEstimate, ClampingFloorAndMonotoneMean) {
    const auto ds = dataset_from_bounds("t", {0, 100, 200}, {10, 1, 5});
    double prev_mean = std::numeric_limits<double>::infinity();
    for (double amin : {0.5, 1.0, 1.5, 2.0, 3.0, 5.0}) {
        const auto r = rpme_estimate(ds, {TopBinFlavor::harmonic, amin});
        EXPECT_EQ(*r.alpha_tilde, std::max(amin, *r.alpha_hat));
        EXPECT_LE(*r.top_value, 200.0 * (1.0 + 1.0 / amin) + 1e-9);
        EXPECT_GT(*r.top_value, 200.0);
        EXPECT_LE(r.stats.mean, prev_mean);
        prev_mean = r.stats.mean;
    }
}

TEST(RpmeEstimate, BoundedTopIgnoresFlavorAndFloor) {
    const auto base = rpme_estimate(testing::maricao());
    for (auto f : {TopBinFlavor::arithmetic, TopBinFlavor::geometric, TopBinFlavor::median})
        for (double amin : {1.5, 2.0, 4.0}) {
            const auto r = rpme_estimate(testing::maricao(), {f, amin});
            EXPECT_EQ(r.stats.mean, base.stats.mean);
            EXPECT_EQ(r.stats.gini, base.stats.gini);
            EXPECT_EQ(r.stats.mld, base.stats.mld);
        }
}

BinnedDataset random_acs(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> count(0.0, 500.0);
    std::bernoulli_distribution empty(0.15);
    std::vector<double> c(16);
    for (double& x : c) x = empty(rng) ? 0.0 : count(rng);
    c[0] += 1.0;
    c[14] += 1.0;
    c[15] += 1.0;
    return dataset_from_bounds("r", acs16_bounds(), c);
}

TEST(RpmeProperties, CurrencyScaleEquivariance) {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> factor(1e-3, 1e3);
    const std::array flavors{TopBinFlavor::arithmetic, TopBinFlavor::geometric, TopBinFlavor::median,
                             TopBinFlavor::harmonic};
    for (int t = 0; t < 200; ++t) {
        const auto ds = random_acs(rng);
        const double c = factor(rng);
        const auto cfg = RpmeConfig::with_defaults(flavors[t % 4]);
        const auto a = rpme_estimate(ds, cfg);
        const auto b = rpme_estimate(ds.scaled_bounds(c), cfg);
        EXPECT_NEAR(*b.alpha_hat, *a.alpha_hat, 1e-12 * std::max(1.0, *a.alpha_hat));
        EXPECT_NEAR(b.stats.mean / (c * a.stats.mean), 1.0, 1e-12);
        EXPECT_NEAR(b.stats.median / (c * a.stats.median), 1.0, 1e-12);
        EXPECT_NEAR(b.stats.sd / (c * a.stats.sd), 1.0, 1e-12);
        EXPECT_NEAR(b.stats.cv / a.stats.cv, 1.0, 1e-12);
        EXPECT_NEAR(b.stats.gini / a.stats.gini, 1.0, 1e-12);
        EXPECT_NEAR(b.stats.theil, a.stats.theil, 1e-11);
        EXPECT_NEAR(b.stats.mld, a.stats.mld, 1e-11);
    }
}

TEST(RpmeProperties, CountScaleInvariance) {
    std::mt19937_64 rng(22);
    std::uniform_real_distribution<double> factor(0.05, 20.0);
    for (int t = 0; t < 150; ++t) {
        const auto ds = random_acs(rng);
        const double c = factor(rng);
        const auto a = rpme_estimate(ds);
        const auto b = rpme_estimate(ds.scaled_counts(c));
        EXPECT_NEAR(*b.alpha_hat, *a.alpha_hat, 1e-12 * std::max(1.0, *a.alpha_hat));
        EXPECT_NEAR(b.stats.mean / a.stats.mean, 1.0, 1e-12);
        EXPECT_NEAR(b.stats.gini, a.stats.gini, 1e-12);
        EXPECT_NEAR(b.stats.theil, a.stats.theil, 1e-12);
    }
}

}  // namespace
}  // namespace bineq
