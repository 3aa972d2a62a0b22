#pragma once

#include "lcgnn/graph_data.hpp"
#include "lcgnn/trainer.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace lcgnn {

struct CheckResult {
    std::string name;
    bool passed = false;
    double worst = 0.0;
    double threshold = 0.0;
    std::string detail;
};

/// Random row-stochastic n x m matrix with strictly positive entries.
DenseMatrix random_row_stochastic(std::size_t n, std::size_t m, std::uint64_t seed);

/// Erdős–Rényi graph with dense random features, uniform labels and a split
/// that puts every node in train, except that the last quarter alternates
/// between val and test. Every class appears in train.
Dataset random_dataset(std::size_t n, std::size_t p, std::size_t m, double edge_probability,
                       std::uint64_t seed);

/// Max |fast - naive| over random row-stochastic Z with n in [2, 50], m in [2, 7].
CheckResult check_aggregation_identity(std::size_t trials, std::uint64_t seed, double tolerance = 1e-10);

/// Central-difference check of every parameter gradient of the end-to-end loss
/// (LC head, dropout off) on 8-node random graphs, one per seed, for each λ.
CheckResult check_end_to_end_gradients(std::span<const std::uint64_t> seeds,
                                       std::span<const double> lambdas, double step = 1e-5,
                                       double tolerance = 1e-4);

/// Relative error used by the gradient checks: |a - b| / max(|a|, |b|, 1e-6).
double gradient_relative_error(double analytic, double numeric) noexcept;

std::vector<CheckResult> run_selftest();

}  // namespace lcgnn
