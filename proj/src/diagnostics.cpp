#include "lcgnn/diagnostics.hpp"

#include "lcgnn/lc_head.hpp"
#include "lcgnn/rng.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace lcgnn {

DenseMatrix random_row_stochastic(std::size_t n, std::size_t m, std::uint64_t seed) {
    Rng rng(seed, 17);
    DenseMatrix logits(n, m);
    for (double& v : logits.data()) v = 4.0 * rng.uniform() - 2.0;
    return softmax_rows(logits);
}

Dataset random_dataset(std::size_t n, std::size_t p, std::size_t m, double edge_probability,
                       std::uint64_t seed) {
    Rng rng(seed, 29);
    Dataset d;
    d.name = "random";
    d.num_classes = m;
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    for (std::size_t u = 0; u < n; ++u) {
        for (std::size_t v = u + 1; v < n; ++v) {
            if (rng.uniform() < edge_probability) edges.emplace_back(u, v);
        }
    }
    d.graph = adjacency_from_edges(n, edges);
    d.features = DenseMatrix(n, p);
    for (double& v : d.features.data()) v = rng.uniform() + 0.05;
    d.labels.resize(n);
    for (std::size_t i = 0; i < n; ++i) d.labels[i] = i < m ? i : static_cast<Label>(rng.below(m));
    const std::size_t held_out = n / 4;
    for (std::size_t i = 0; i < n; ++i) {
        if (i + held_out < n) {
            d.split.train.push_back(i);
        } else if ((i % 2) == 0) {
            d.split.val.push_back(i);
        } else {
            d.split.test.push_back(i);
        }
    }
    d.validate();
    return d;
}

double gradient_relative_error(double analytic, double numeric) noexcept {
    const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
    return std::abs(analytic - numeric) / scale;
}

CheckResult check_aggregation_identity(std::size_t trials, std::uint64_t seed, double tolerance) {
    CheckResult r{"aggregation identity RowNormalize(ZZᵀ)Z == RowNormalize(Z(ZᵀZ))", true, 0.0,
                  tolerance, ""};
    Rng rng(seed, 41);
    for (std::size_t t = 0; t < trials; ++t) {
        const std::size_t n = 2 + rng.below(49);
        const std::size_t m = 2 + rng.below(6);
        const DenseMatrix z = random_row_stochastic(n, m, derive_seed(seed, t));
        const double diff = max_abs_diff(lc_aggregate(z).z_hat, lc_aggregate_naive(z));
        r.worst = std::max(r.worst, diff);
    }
    r.passed = r.worst <= tolerance;
    r.detail = std::to_string(trials) + " trials";
    return r;
}

CheckResult check_end_to_end_gradients(std::span<const std::uint64_t> seeds,
                                       std::span<const double> lambdas, double step, double tolerance) {
    CheckResult r{"end-to-end gradient vs central differences", true, 0.0, tolerance, ""};
    std::size_t checked = 0;
    for (std::uint64_t seed : seeds) {
        const Dataset d = random_dataset(8, 5, 3, 0.4, seed);
        const GcnInput input = make_gcn_input(d);
        for (double lambda : lambdas) {
            TrainConfig config;
            config.hidden = 4;
            config.dropout = 0.0;
            config.lambda = lambda;
            config.reduction = LossReduction::sum;
            const Variant variant = lambda > 0.0 ? Variant::full : Variant::no_rl;
            GcnParams params = init_gcn_params(5, 4, 3, seed + 1000);
            const ObjectiveValue analytic = training_objective(d, input, config, variant, params, 0);

            const auto loss_at = [&](const GcnParams& p) {
                return training_objective(d, input, config, variant, p, 0).loss;
            };
            for (int which = 0; which < 2; ++which) {
                DenseMatrix& w = which == 0 ? params.w0 : params.w1;
                const DenseMatrix& g = which == 0 ? analytic.grads.w0 : analytic.grads.w1;
                for (std::size_t k = 0; k < w.size(); ++k) {
                    const double saved = w.data()[k];
                    w.data()[k] = saved + step;
                    const double up = loss_at(params);
                    w.data()[k] = saved - step;
                    const double down = loss_at(params);
                    w.data()[k] = saved;
                    const double numeric = (up - down) / (2.0 * step);
                    r.worst = std::max(r.worst, gradient_relative_error(g.data()[k], numeric));
                    ++checked;
                }
            }
        }
    }
    r.passed = r.worst <= tolerance;
    r.detail = std::to_string(checked) + " parameter entries";
    return r;
}

std::vector<CheckResult> run_selftest() {
    const std::uint64_t seeds[] = {1, 2, 3, 4, 5};
    const double lambdas[] = {0.0, 1.0, 2.0};
    return {check_aggregation_identity(100, 7), check_end_to_end_gradients(seeds, lambdas)};
}

}  // namespace lcgnn
