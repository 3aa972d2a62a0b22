#include "lcgnn/analysis.hpp"
#include "lcgnn/diagnostics.hpp"
#include "lcgnn/report.hpp"

#include <gtest/gtest.h>

#include <atomic>
#include <cmath>

using namespace lcgnn;

TEST(SeedAggregate, SampleStandardDeviation) {
    const std::vector<double> v{0.7, 0.9};
    const SeedAggregate a = aggregate_seeds(v);
    EXPECT_NEAR(a.mean, 0.8, 1e-15);
    EXPECT_NEAR(a.stddev, 0.1414214, 1e-7);
    const std::vector<double> one{0.5};
    EXPECT_EQ(aggregate_seeds(one).stddev, 0.0);
    const std::vector<double> shuffled{0.9, 0.7};
    EXPECT_EQ(aggregate_seeds(shuffled).mean, a.mean);
}

TEST(LabelConsistency, FractionOfAgreeingNeighbours) {
    // path 0-1-2-3 plus isolated node 4
    const CsrMatrix g = adjacency_from_edges(5, {{0, 1}, {1, 2}, {2, 3}});
    const std::vector<Label> y{0, 0, 1, 1, 0};
    const auto c = node_label_consistency(g, y);
    EXPECT_EQ(*c[0], 1.0);
    EXPECT_EQ(*c[1], 0.5);
    EXPECT_EQ(*c[2], 0.5);
    EXPECT_EQ(*c[3], 1.0);
    EXPECT_FALSE(c[4].has_value());
}

TEST(ConsistencyCurve, BucketEdges) {
    EXPECT_EQ(consistency_bucket(0.0, 10), 0u);
    EXPECT_EQ(consistency_bucket(0.1, 10), 1u);
    EXPECT_EQ(consistency_bucket(0.99, 10), 9u);
    EXPECT_EQ(consistency_bucket(1.0, 10), 9u);
    EXPECT_EQ(consistency_bucket(0.5, 2), 1u);
}

TEST(ConsistencyCurve, RefiningBucketsSplitsCountsExactly) {
    Dataset d = random_dataset(200, 3, 3, 0.03, 8);
    d.split.test.clear();
    for (std::size_t i = 0; i < 200; ++i) d.split.test.push_back(i);
    d.split.train = {0};
    d.split.val.clear();
    std::vector<Label> pred(200);
    for (std::size_t i = 0; i < 200; ++i) pred[i] = i % 3;
    const ConsistencyCurve coarse = consistency_accuracy_curve(d, pred, 5);
    for (std::size_t factor : {2u, 4u}) {
        const ConsistencyCurve fine = consistency_accuracy_curve(d, pred, 5 * factor);
        for (std::size_t b = 0; b < 5; ++b) {
            std::size_t count = 0, correct = 0;
            for (std::size_t s = 0; s < factor; ++s) {
                count += fine.counts[b * factor + s];
                correct += fine.correct[b * factor + s];
            }
            EXPECT_EQ(count, coarse.counts[b]);
            EXPECT_EQ(correct, coarse.correct[b]);
        }
    }
    std::size_t total = 0;
    for (auto c : coarse.counts) total += c;
    const auto consistency = node_label_consistency(d.graph, d.labels);
    std::size_t connected = 0;
    for (const auto& c : consistency) connected += c.has_value();
    EXPECT_EQ(total, connected);
}

TEST(Spearman, KnownValues) {
    const std::vector<double> x{1, 2, 3, 4, 5};
    const std::vector<double> up{2, 4, 5, 9, 10};
    const std::vector<double> down{5, 4, 3, 2, 1};
    EXPECT_NEAR(spearman_rank_correlation(x, up), 1.0, 1e-15);
    EXPECT_NEAR(spearman_rank_correlation(x, down), -1.0, 1e-15);
    // ranks of y with a tie: 1, 2.5, 2.5, 4, 5 -> Pearson of ranks
    const std::vector<double> tied{1, 3, 3, 4, 5};
    EXPECT_NEAR(spearman_rank_correlation(x, tied), 9.5 / std::sqrt(10.0 * 9.5), 1e-14);
    const std::vector<double> flat{2, 2, 2, 2, 2};
    EXPECT_EQ(spearman_rank_correlation(x, flat), 0.0);
}

TEST(CurveTrend, UsesPopulatedBucketsOnly) {
    ConsistencyCurve c;
    c.edges = {0, 0.25, 0.5, 0.75, 1.0};
    c.counts = {4, 0, 5, 6};
    c.correct = {1, 0, 3, 6};
    c.accuracy = {0.25, std::nullopt, 0.6, 1.0};
    EXPECT_NEAR(curve_trend(c), 1.0, 1e-15);
}

TEST(RunParallel, RunsEveryJobAndPropagatesErrors) {
    std::atomic<int> sum{0};
    run_parallel(50, 4, [&](std::size_t i) { sum += static_cast<int>(i); });
    EXPECT_EQ(sum.load(), 49 * 50 / 2);
    EXPECT_THROW(run_parallel(10, 3,
                              [](std::size_t i) {
                                  if (i == 7) throw std::runtime_error("job 7");
                              }),
                 std::runtime_error);
}

TEST(Ablation, TableIsIndependentOfThreadCount) {
    const Dataset d = random_dataset(30, 6, 3, 0.15, 12);
    TrainConfig c;
    c.epochs = 15;
    c.pretrain_epochs = 10;
    c.hidden = 4;
    const std::vector<std::uint64_t> seeds{1, 2};
    const ExperimentTable one = run_ablation(d, c, seeds, 1);
    const ExperimentTable many = run_ablation(d, c, seeds, 4);
    ASSERT_EQ(one.rows.size(), 4u);
    EXPECT_EQ(table_json(one, c).dump(), table_json(many, c).dump());
    EXPECT_EQ(one.runs.size(), 8u);
    for (const auto& r : one.runs) {
        TrainConfig single = c;
        single.seed = r.seed;
        single.variant = r.variant;
        single.lambda = c.lambda;
        EXPECT_EQ(train_variant(d, single).test_acc, r.test_acc) << to_string(r.variant) << " " << r.seed;
    }
    const std::string text = format_table(one);
    EXPECT_NE(text.find("GCN*"), std::string::npos);
    EXPECT_NE(text.find("LC-GCN (w/o RL)"), std::string::npos);
}

TEST(SparseExperiment, DrawsOneSplitPerSeed) {
    const Dataset d = random_dataset(120, 6, 3, 0.05, 14);
    TrainConfig c;
    c.epochs = 10;
    c.pretrain_epochs = 5;
    c.hidden = 4;
    const std::vector<std::uint64_t> seeds{3, 4};
    const std::vector<Variant> variants{Variant::base_only, Variant::full};
    const ExperimentTable t = run_sparse_experiment(d, 2, c, seeds, variants, 2, 30, 60);
    ASSERT_EQ(t.rows.size(), 2u);
    EXPECT_EQ(t.column, "2 labels");
    EXPECT_EQ(t.row(Variant::full).test.values.size(), 2u);

    Dataset sparse = d;
    sparse.split = make_sparse_split(d, 2, 4, 30, 60);
    TrainConfig single = c;
    single.seed = 4;
    single.variant = Variant::full;
    EXPECT_EQ(train_variant(sparse, single).test_acc, t.row(Variant::full).test.values[1]);
    EXPECT_THROW(run_sparse_experiment(d, 2, c, seeds, variants, 2), std::invalid_argument);
}
