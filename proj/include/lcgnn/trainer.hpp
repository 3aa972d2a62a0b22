#pragma once

#include "lcgnn/gcn_model.hpp"
#include "lcgnn/graph_data.hpp"
#include "lcgnn/lc_head.hpp"

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace lcgnn {

/// Model variants of the ablation grid.
enum class Variant {
    full,         // LC aggregation + regularization
    no_rl,        // LC aggregation, λ = 0
    no_lc_no_rl,  // Ẑ = Â Z, λ = 0
    base_only,    // plain GCN, loss on Z
};

std::string_view to_string(Variant v) noexcept;
std::optional<Variant> parse_variant(std::string_view s) noexcept;

/// How the summed losses are scaled before optimization.
enum class LossReduction {
    mean,  // L_C / |train| + λ L_R / |train|²
    sum,   // L_C + λ L_R
};

std::string_view to_string(LossReduction r) noexcept;
std::optional<LossReduction> parse_reduction(std::string_view s) noexcept;

/// Which head turns Z into the distribution that is scored.
enum class Head { none, label_consistency, adjacency };

Head head_for(Variant v) noexcept;

struct TrainConfig {
    double lr = 0.01;
    double weight_decay = 5e-4;
    double lambda = 1.0;
    std::size_t epochs = 1000;
    std::size_t pretrain_epochs = 200;
    std::size_t hidden = 16;
    double dropout = 0.5;
    std::uint64_t seed = 0;
    Variant variant = Variant::full;
    LossReduction reduction = LossReduction::mean;

    void validate() const;
};

/// 2.0 for Cora, 1.0 otherwise.
double default_lambda(std::string_view dataset_name) noexcept;

struct AdamHyper {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct AdamState {
    DenseMatrix m_w0, v_w0, m_w1, v_w1;
    std::uint64_t step = 0;

    static AdamState zeros_like(const GcnParams& params);
};

/// One Adam update of a single tensor at (1-based) step `step`. Weight decay is
/// coupled: decay·param is added to the gradient before the moment updates.
void adam_update(DenseMatrix& param, const DenseMatrix& grad, DenseMatrix& m, DenseMatrix& v,
                 std::uint64_t step, double lr, double weight_decay, const AdamHyper& hyper = {});

/// Advances `state.step` and updates both weight matrices.
/// Throws std::domain_error on non-finite gradients.
void adam_step(GcnParams& params, const GcnParams& grads, AdamState& state, double lr,
               double weight_decay, const AdamHyper& hyper = {});

struct EpochRecord {
    std::size_t epoch = 0;  // 1-based
    double train_loss = 0.0;
    double val_acc = 0.0;
};

struct RunResult {
    GcnParams best_params;
    std::size_t best_epoch = 0;
    double best_val_acc = 0.0;
    double test_acc = 0.0;
    std::vector<EpochRecord> history;
};

struct Accuracy {
    double train = 0.0;
    double val = 0.0;
    double test = 0.0;
};

/// Rows sum to one within this tolerance on every forward pass of training and evaluation.
inline constexpr double kRowSumTolerance = 1e-9;

/// Z (Head::none), Ẑ = RowNormalize(Z ZᵀZ) or Ẑ = Â Z, dropout off.
DenseMatrix predict_distribution(const GcnInput& input, const GcnParams& params, Head head);

/// Row-wise argmax; ties go to the lowest class index.
std::vector<Label> argmax_rows(const DenseMatrix& scores);

/// Fraction of `nodes` whose prediction matches the label; 0 for an empty set.
double accuracy(std::span<const Label> predictions, std::span<const Label> labels,
                std::span<const std::size_t> nodes);

Accuracy evaluate(const GcnParams& params, const Dataset& dataset, Head head);
Accuracy evaluate(const GcnParams& params, const GcnInput& input, const Dataset& dataset, Head head);

struct ObjectiveValue {
    double loss = 0.0;
    GcnParams grads;
};

/// Loss of `variant` (as configured, with `config.reduction`) and its gradient
/// with respect to both weight matrices, for one forward pass in training mode.
ObjectiveValue training_objective(const Dataset& dataset, const GcnInput& input,
                                  const TrainConfig& config, Variant variant, const GcnParams& params,
                                  std::uint64_t dropout_seed);

/// Plain GCN trained for `pretrain_epochs` from a Glorot init; returns the
/// parameters with the best validation accuracy.
GcnParams pretrain_base(const Dataset& dataset, const TrainConfig& config);

/// Trains `config.variant` for `config.epochs` starting from `init`.
RunResult train_lc(const Dataset& dataset, const TrainConfig& config, const GcnParams& init);

/// Pretrains (skipped for base_only, which starts from a fresh init) and then
/// runs train_lc.
RunResult train_variant(const Dataset& dataset, const TrainConfig& config);

}  // namespace lcgnn
