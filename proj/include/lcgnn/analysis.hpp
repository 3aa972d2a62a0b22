#pragma once

#include "lcgnn/graph_data.hpp"
#include "lcgnn/trainer.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace lcgnn {

/// Mean and sample standard deviation (n-1 denominator) of per-seed results.
struct SeedAggregate {
    std::vector<double> values;
    double mean = 0.0;
    double stddev = 0.0;
};

SeedAggregate aggregate_seeds(std::span<const double> values);

/// Fraction of each node's neighbours that share its label; nullopt for isolated nodes.
std::vector<std::optional<double>> node_label_consistency(const CsrMatrix& graph,
                                                          std::span<const Label> labels);

/// Accuracy of test nodes bucketed by label consistency. Bucket b covers
/// [b/B, (b+1)/B), the last bucket also holds 1.0. Isolated nodes are skipped.
struct ConsistencyCurve {
    std::vector<double> edges;  // B+1 values from 0 to 1
    std::vector<std::size_t> counts;
    std::vector<std::size_t> correct;
    std::vector<std::optional<double>> accuracy;

    std::size_t buckets() const noexcept { return counts.size(); }
    double midpoint(std::size_t b) const noexcept { return 0.5 * (edges[b] + edges[b + 1]); }
};

std::size_t consistency_bucket(double consistency, std::size_t buckets) noexcept;

ConsistencyCurve consistency_accuracy_curve(const Dataset& dataset, std::span<const Label> predictions,
                                            std::size_t buckets);

/// Spearman correlation with average ranks for ties. Returns 0 when either
/// side is constant.
double spearman_rank_correlation(std::span<const double> x, std::span<const double> y);

/// Rank correlation between bucket midpoint and accuracy over populated buckets.
double curve_trend(const ConsistencyCurve& curve);

struct RunRecord {
    Variant variant = Variant::full;
    std::uint64_t seed = 0;
    double test_acc = 0.0;
    double best_val_acc = 0.0;
    std::size_t best_epoch = 0;
};

struct VariantSummary {
    Variant variant = Variant::full;
    SeedAggregate test;
};

struct ExperimentTable {
    std::string title;
    std::string dataset;
    std::string column;  // column header, e.g. "Cora" or "5 labels"
    std::vector<VariantSummary> rows;
    std::vector<RunRecord> runs;  // ordered by (variant, seed)

    const VariantSummary& row(Variant v) const;
};

/// Runs `jobs` tasks on up to `threads` workers. The first exception thrown by a task is rethrown.
void run_parallel(std::size_t jobs, std::size_t threads, const std::function<void(std::size_t)>& task);

/// Worker count from LC_GNN_THREADS, else the hardware concurrency.
std::size_t worker_threads();

/// Trains base_only, no_lc_no_rl, no_rl and full for every seed on the dataset's own split.
/// The three LC variants of a seed share one pretrained base model.
ExperimentTable run_ablation(const Dataset& dataset, const TrainConfig& base,
                             std::span<const std::uint64_t> seeds, std::size_t threads);

/// Draws a fresh sparse split per seed (see make_sparse_split) and trains each variant on it.
ExperimentTable run_sparse_experiment(const Dataset& dataset, std::size_t labels_per_class,
                                      const TrainConfig& base, std::span<const std::uint64_t> seeds,
                                      std::span<const Variant> variants, std::size_t threads,
                                      std::size_t val_size = 500, std::size_t test_size = 1000);

/// Table label of a variant, e.g. "GCN*" or "LC-GCN (w/o RL)".
std::string display_name(Variant v);

/// Plain-text table, one row per variant, "mean ± std" in percent.
std::string format_table(const ExperimentTable& table);

/// consistency_lo, consistency_hi, count, accuracy (empty when undefined).
std::string curve_tsv(const ConsistencyCurve& curve);

}  // namespace lcgnn
