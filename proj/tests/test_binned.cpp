#include <gtest/gtest.h>

#include <fstream>
#include <random>
#include <sstream>

#include <bineq/binned.hpp>

#include "test_support.hpp"

namespace bineq {
namespace {

std::vector<BinnedDataset> load_table1(double scale) {
    std::ifstream in(testing::table1_path());
    EXPECT_TRUE(in.good());
    return parse_datasets(in, scale);
}

const BinnedDataset& by_id(const std::vector<BinnedDataset>& all, const std::string& id) {
    for (const auto& d : all)
        if (d.id() == id) return d;
    throw std::runtime_error("missing " + id);
}

TEST(ParseDatasets, MaricaoScaledToSampleCounts) {
    const auto all = load_table1(8.0);
    const auto& m = by_id(all, "maricao");
    EXPECT_EQ(m.size(), 16u);
    EXPECT_EQ(m.populated_count(), 11u);
    EXPECT_DOUBLE_EQ(m.n(), 206.25);
}

TEST(ParseDatasets, NantucketPopulationCounts) {
    const auto all = load_table1(1.0);
    const auto& n = by_id(all, "nantucket");
    EXPECT_DOUBLE_EQ(n.n(), 3623.0);
    EXPECT_EQ(n.populated_count(), 16u);
    EXPECT_FALSE(n.top().upper.has_value());
    EXPECT_DOUBLE_EQ(n.top().lower, 200000.0);
}

TEST(ParseDatasets, SingleUnboundedBin) {
    const auto all = parse_datasets("dataset_id,bin_min,bin_max,count\nd,0,,5\n", 1.0);
    ASSERT_EQ(all.size(), 1u);
    EXPECT_EQ(all[0].size(), 1u);
    EXPECT_EQ(all[0].populated_count(), 1u);
    EXPECT_DOUBLE_EQ(all[0].n(), 5.0);
}

TEST(ParseDatasets, RowsSortedAndInterleavedIdsSeparated) {
    const auto all = parse_datasets(
        "dataset_id,bin_min,bin_max,count\n"
        "b,10,,1\n"
        "a,0,5,2\n"
        "b,0,10,3\n"
        "a,5,,4\n");
    ASSERT_EQ(all.size(), 2u);
    EXPECT_EQ(all[0].id(), "b");
    EXPECT_DOUBLE_EQ(all[0].bins()[0].lower, 0.0);
    EXPECT_DOUBLE_EQ(all[0].bins()[0].count, 3.0);
    EXPECT_EQ(all[1].id(), "a");
    EXPECT_DOUBLE_EQ(all[1].n(), 6.0);
}

TEST(ParseDatasets, EmptyLowerBoundReadAsZero) {
    const auto all = parse_datasets("dataset_id,bin_min,bin_max,count\nd,,10,1\nd,10,,1\n");
    EXPECT_DOUBLE_EQ(all[0].bins()[0].lower, 0.0);
}

void expect_rejected(const std::string& body, const std::string& id, std::size_t line) {
    try {
        parse_datasets("dataset_id,bin_min,bin_max,count\n" + body);
        FAIL() << "expected rejection";
    } catch (const parse_error& e) {
        EXPECT_EQ(e.dataset_id(), id);
        EXPECT_EQ(e.line(), line) << e.what();
    }
}

TEST(ParseDatasets, RejectsMalformedRows) {
    expect_rejected("d,0,10,abc\n", "d", 2);
    expect_rejected("d,0,10,1\nd,10,,-1\n", "d", 3);
    expect_rejected("d,0,10,1\nd,5,,1\n", "d", 3);       // overlap
    expect_rejected("d,0,10,1\nd,12,,1\n", "d", 3);      // gap
    expect_rejected("d,0,,1\nd,10,20,1\n", "d", 2);      // interior unbounded
    expect_rejected("d,0,10\n", "d", 2);
    expect_rejected("d,10,5,1\n", "d", 2);
}

TEST(ParseDatasets, RejectsZeroTotalAndBadHeader) {
    EXPECT_THROW(parse_datasets("dataset_id,bin_min,bin_max,count\nd,0,10,0\nd,10,,0\n"), parse_error);
    EXPECT_THROW(parse_datasets("id,lo,hi,n\nd,0,,1\n"), parse_error);
    EXPECT_THROW(parse_datasets(""), parse_error);
    EXPECT_THROW(parse_datasets("dataset_id,bin_min,bin_max,count\nd,0,,1\n", 0.0), std::invalid_argument);
}

TEST(Populated, DropsEmptyBins) {
    EXPECT_EQ(populated(testing::maricao()).size(), 11u);
    EXPECT_EQ(populated(testing::nantucket()).size(), 16u);
    auto ds = dataset_from_bounds("z", {0, 10}, {0, 1});
    EXPECT_EQ(populated(ds).size(), 1u);
}

TEST(Populated, ZeroTotalIsRejected) {
    EXPECT_THROW(testing::maricao().scaled_counts(0.0), std::invalid_argument);
    EXPECT_THROW(dataset_from_bounds("z", {0, 10}, {0, 0}), std::invalid_argument);
}

TEST(MergeAdjacent, SixteenToEightToFour) {
    const auto ds = testing::nantucket();
    const auto eight = merge_adjacent(ds, 2);
    ASSERT_EQ(eight.size(), 8u);
    const auto four = merge_adjacent(eight, 2);
    ASSERT_EQ(four.size(), 4u);
    EXPECT_DOUBLE_EQ(four.n(), ds.n());
    EXPECT_DOUBLE_EQ(four.bins().front().lower, 0.0);
    EXPECT_FALSE(four.top().upper.has_value());
    EXPECT_DOUBLE_EQ(four.top().lower, 100000.0);
}

TEST(MergeAdjacent, CountAdditivity) {
    const auto m = merge_adjacent(testing::maricao(), 2);
    EXPECT_EQ(m.bins()[0], (Bin{0, 15000.0, 1026}));
    const auto n = merge_adjacent(testing::nantucket(), 2);
    EXPECT_EQ(n.bins().back(), (Bin{150000, std::nullopt, 721}));
}

TEST(MergeAdjacent, ShortFinalGroupAndInvalidGroup) {
    const auto ds = dataset_from_bounds("d", {0, 1, 2, 3, 4}, {1, 1, 1, 1, 1});
    const auto m = merge_adjacent(ds, 2);
    ASSERT_EQ(m.size(), 3u);
    EXPECT_EQ(m.bins().back(), (Bin{4, std::nullopt, 1}));
    EXPECT_THROW(merge_adjacent(ds, 1), std::invalid_argument);
}

// Random partitions: CSV round trip, merge conservation, B consistency.
TEST(BinnedProperties, RandomPartitions) {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<int> nbins(1, 20), group(2, 5);
    std::uniform_real_distribution<double> width(1.0, 5000.0), count(0.0, 300.0);
    std::bernoulli_distribution empty(0.3), open_top(0.7);
    for (int trial = 0; trial < 150; ++trial) {
        std::vector<Bin> bins;
        double lo = 0.0;
        const int m = nbins(rng);
        for (int i = 0; i < m; ++i) {
            Bin b{lo, lo + width(rng), empty(rng) ? 0.0 : count(rng)};
            lo = *b.upper;
            bins.push_back(b);
        }
        if (open_top(rng)) bins.back().upper.reset();
        bins.back().count += 1.0;
        const auto ds = BinnedDataset::make("r" + std::to_string(trial), bins);

        std::ostringstream out;
        write_datasets(out, {ds});
        const auto back = parse_datasets(out.str());
        ASSERT_EQ(back.size(), 1u);
        EXPECT_EQ(back[0].bins(), ds.bins());

        EXPECT_EQ(populated(ds).size(), ds.populated_count());

        if (ds.size() >= 2) {
            const auto merged = merge_adjacent(ds, static_cast<std::size_t>(group(rng)));
            EXPECT_NEAR(merged.n(), ds.n(), 1e-9 * ds.n());
            EXPECT_EQ(merged.bins().front().lower, ds.bins().front().lower);
            EXPECT_EQ(merged.top().upper, ds.top().upper);
        }
    }
}

}  // namespace
}  // namespace bineq
