#include "lcgnn/trainer.hpp"

#include "lcgnn/rng.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>
#include <string>

namespace lcgnn {

namespace {

// Dropout stream families: one for the base model, one for the LC stage.
constexpr std::uint64_t kBaseStage = 0;
constexpr std::uint64_t kHeadStage = 1;

std::uint64_t dropout_seed(std::uint64_t seed, std::uint64_t stage, std::size_t epoch) {
    return derive_seed(splitmix64(seed) + stage, epoch);
}

class Objective {
public:
    Objective(const Dataset& dataset, const GcnInput& input, const TrainConfig& config, Variant variant)
        : dataset_(dataset), input_(input), config_(config), head_(head_for(variant)),
          lambda_(variant == Variant::full ? config.lambda : 0.0) {
        const double k = static_cast<double>(dataset.split.train.size());
        if (config.reduction == LossReduction::mean) {
            scale_c_ = 1.0 / k;
            scale_r_ = 1.0 / (k * k);
        }
        if (lambda_ > 0.0) mask_ = build_consistency_mask(dataset.labels, dataset.split.train);
    }

    ObjectiveValue step(const GcnParams& params, std::uint64_t seed) const {
        const ForwardTrace trace = gcn_forward(input_, params, config_.dropout, seed, true);
        require_row_stochastic(trace.z, kRowSumTolerance, "Z");
        const auto& train = dataset_.split.train;

        DenseMatrix upstream;
        double loss = 0.0;
        switch (head_) {
            case Head::none: {
                LossValue lc = classification_loss(trace.z, dataset_.labels, train);
                scale(lc.grad, scale_c_);
                loss = scale_c_ * lc.value;
                upstream = std::move(lc.grad);
                break;
            }
            case Head::adjacency: {
                const DenseMatrix z_hat = spmm(input_.a_hat, trace.z);
                LossValue lc = classification_loss(z_hat, dataset_.labels, train);
                scale(lc.grad, scale_c_);
                loss = scale_c_ * lc.value;
                upstream = spmm_transposed(input_.a_hat, lc.grad);
                break;
            }
            case Head::label_consistency: {
                const LcOutput agg = lc_aggregate(trace.z);
                require_row_stochastic(agg.z_hat, kRowSumTolerance, "Z_hat");
                LossValue lc = classification_loss(agg.z_hat, dataset_.labels, train);
                scale(lc.grad, scale_c_);
                double reg = 0.0;
                if (lambda_ > 0.0) reg = regularization_loss(trace.z, mask_).value;
                loss = total_loss(scale_c_ * lc.value, scale_r_ * reg, lambda_);
                upstream = lc_backward(trace.z, agg, lc.grad, mask_, lambda_ * scale_r_);
                break;
            }
        }
        GcnGradients g = gcn_backward(input_, params, trace, upstream);
        return {loss, GcnParams{std::move(g.w0), std::move(g.w1)}};
    }

private:
    static void scale(DenseMatrix& m, double s) {
        if (s == 1.0) return;
        for (double& v : m.data()) v *= s;
    }

    const Dataset& dataset_;
    const GcnInput& input_;
    const TrainConfig& config_;
    Head head_;
    double lambda_;
    double scale_c_ = 1.0;
    double scale_r_ = 1.0;
    ConsistencyMask mask_;
};

RunResult train_loop(const Dataset& dataset, const GcnInput& input, const TrainConfig& config,
                     Variant variant, const GcnParams& init, std::size_t epochs, std::uint64_t stage) {
    if (init.num_features() != dataset.num_features() || init.num_classes() != dataset.num_classes ||
        init.w0.cols() != init.w1.rows()) {
        throw std::invalid_argument("train: initial parameters do not match the dataset");
    }
    const Objective objective(dataset, input, config, variant);
    const Head head = head_for(variant);

    RunResult result;
    result.best_params = init;
    result.best_val_acc = -1.0;
    result.history.reserve(epochs);

    GcnParams params = init;
    AdamState state = AdamState::zeros_like(params);
    for (std::size_t epoch = 1; epoch <= epochs; ++epoch) {
        const ObjectiveValue out = objective.step(params, dropout_seed(config.seed, stage, epoch));
        adam_step(params, out.grads, state, config.lr, config.weight_decay);

        const auto predictions = argmax_rows(predict_distribution(input, params, head));
        const double val_acc = accuracy(predictions, dataset.labels, dataset.split.val);
        result.history.push_back({epoch, out.loss, val_acc});
        if (val_acc > result.best_val_acc) {
            result.best_val_acc = val_acc;
            result.best_epoch = epoch;
            result.best_params = params;
        }
    }
    result.test_acc = evaluate(result.best_params, input, dataset, head).test;
    return result;
}

}  // namespace

std::string_view to_string(Variant v) noexcept {
    switch (v) {
        case Variant::full: return "full";
        case Variant::no_rl: return "no_rl";
        case Variant::no_lc_no_rl: return "no_lc_no_rl";
        case Variant::base_only: return "base_only";
    }
    return "unknown";
}

std::optional<Variant> parse_variant(std::string_view s) noexcept {
    for (Variant v : {Variant::full, Variant::no_rl, Variant::no_lc_no_rl, Variant::base_only}) {
        if (s == to_string(v)) return v;
    }
    return std::nullopt;
}

std::string_view to_string(LossReduction r) noexcept {
    return r == LossReduction::mean ? "mean" : "sum";
}

std::optional<LossReduction> parse_reduction(std::string_view s) noexcept {
    if (s == "mean") return LossReduction::mean;
    if (s == "sum") return LossReduction::sum;
    return std::nullopt;
}

Head head_for(Variant v) noexcept {
    switch (v) {
        case Variant::full:
        case Variant::no_rl: return Head::label_consistency;
        case Variant::no_lc_no_rl: return Head::adjacency;
        case Variant::base_only: return Head::none;
    }
    return Head::none;
}

void TrainConfig::validate() const {
    if (!(lr > 0.0)) throw std::invalid_argument("config: lr must be > 0");
    if (!(weight_decay >= 0.0)) throw std::invalid_argument("config: weight decay must be >= 0");
    if (!(lambda >= 0.0)) throw std::invalid_argument("config: lambda must be >= 0");
    if (epochs < 1) throw std::invalid_argument("config: epochs must be >= 1");
    if (pretrain_epochs < 1) throw std::invalid_argument("config: pretrain epochs must be >= 1");
    if (hidden < 1) throw std::invalid_argument("config: hidden size must be >= 1");
    if (!(dropout >= 0.0 && dropout < 1.0)) throw std::invalid_argument("config: dropout must lie in [0, 1)");
}

double default_lambda(std::string_view dataset_name) noexcept {
    std::string lower(dataset_name);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return lower == "cora" ? 2.0 : 1.0;
}

AdamState AdamState::zeros_like(const GcnParams& p) {
    return AdamState{DenseMatrix(p.w0.rows(), p.w0.cols()), DenseMatrix(p.w0.rows(), p.w0.cols()),
                     DenseMatrix(p.w1.rows(), p.w1.cols()), DenseMatrix(p.w1.rows(), p.w1.cols()), 0};
}

void adam_update(DenseMatrix& param, const DenseMatrix& grad, DenseMatrix& m, DenseMatrix& v,
                 std::uint64_t step, double lr, double weight_decay, const AdamHyper& h) {
    if (!param.same_shape(grad) || !param.same_shape(m) || !param.same_shape(v)) {
        throw std::invalid_argument("adam_update: parameter, gradient and moments differ in shape");
    }
    if (step == 0) throw std::invalid_argument("adam_update: step is 1-based");
    require_finite(grad, "adam gradient");
    const double correction1 = 1.0 - std::pow(h.beta1, static_cast<double>(step));
    const double correction2 = 1.0 - std::pow(h.beta2, static_cast<double>(step));
    auto p = param.data();
    const auto g = grad.data();
    auto mm = m.data();
    auto vv = v.data();
    for (std::size_t k = 0; k < p.size(); ++k) {
        const double gk = g[k] + weight_decay * p[k];
        mm[k] = h.beta1 * mm[k] + (1.0 - h.beta1) * gk;
        vv[k] = h.beta2 * vv[k] + (1.0 - h.beta2) * gk * gk;
        const double m_hat = mm[k] / correction1;
        const double v_hat = vv[k] / correction2;
        p[k] -= lr * m_hat / (std::sqrt(v_hat) + h.eps);
    }
}

void adam_step(GcnParams& params, const GcnParams& grads, AdamState& state, double lr,
               double weight_decay, const AdamHyper& hyper) {
    ++state.step;
    adam_update(params.w0, grads.w0, state.m_w0, state.v_w0, state.step, lr, weight_decay, hyper);
    adam_update(params.w1, grads.w1, state.m_w1, state.v_w1, state.step, lr, weight_decay, hyper);
}

DenseMatrix predict_distribution(const GcnInput& input, const GcnParams& params, Head head) {
    const ForwardTrace trace = gcn_forward(input, params, 0.0, 0, false);
    require_row_stochastic(trace.z, kRowSumTolerance, "Z");
    switch (head) {
        case Head::none: return trace.z;
        case Head::adjacency: return spmm(input.a_hat, trace.z);
        case Head::label_consistency: {
            LcOutput agg = lc_aggregate(trace.z);
            require_row_stochastic(agg.z_hat, kRowSumTolerance, "Z_hat");
            return std::move(agg.z_hat);
        }
    }
    return trace.z;
}

std::vector<Label> argmax_rows(const DenseMatrix& scores) {
    std::vector<Label> out(scores.rows(), 0);
    for (std::size_t i = 0; i < scores.rows(); ++i) {
        const auto row = scores.row(i);
        Label best = 0;
        for (std::size_t c = 1; c < row.size(); ++c) {
            if (row[c] > row[best]) best = c;
        }
        out[i] = best;
    }
    return out;
}

double accuracy(std::span<const Label> predictions, std::span<const Label> labels,
                std::span<const std::size_t> nodes) {
    if (nodes.empty()) return 0.0;
    std::size_t correct = 0;
    for (std::size_t i : nodes) {
        if (i >= predictions.size() || i >= labels.size()) {
            throw std::out_of_range("accuracy: node " + std::to_string(i) + " out of range");
        }
        if (predictions[i] == labels[i]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(nodes.size());
}

Accuracy evaluate(const GcnParams& params, const GcnInput& input, const Dataset& dataset, Head head) {
    const auto predictions = argmax_rows(predict_distribution(input, params, head));
    return Accuracy{accuracy(predictions, dataset.labels, dataset.split.train),
                    accuracy(predictions, dataset.labels, dataset.split.val),
                    accuracy(predictions, dataset.labels, dataset.split.test)};
}

Accuracy evaluate(const GcnParams& params, const Dataset& dataset, Head head) {
    return evaluate(params, make_gcn_input(dataset), dataset, head);
}

ObjectiveValue training_objective(const Dataset& dataset, const GcnInput& input,
                                  const TrainConfig& config, Variant variant, const GcnParams& params,
                                  std::uint64_t dropout_seed) {
    return Objective(dataset, input, config, variant).step(params, dropout_seed);
}

GcnParams pretrain_base(const Dataset& dataset, const TrainConfig& config) {
    config.validate();
    const GcnInput input = make_gcn_input(dataset);
    const GcnParams init =
        init_gcn_params(dataset.num_features(), config.hidden, dataset.num_classes, config.seed);
    return train_loop(dataset, input, config, Variant::base_only, init, config.pretrain_epochs, kBaseStage)
        .best_params;
}

RunResult train_lc(const Dataset& dataset, const TrainConfig& config, const GcnParams& init) {
    config.validate();
    const GcnInput input = make_gcn_input(dataset);
    const std::uint64_t stage = config.variant == Variant::base_only ? kBaseStage : kHeadStage;
    return train_loop(dataset, input, config, config.variant, init, config.epochs, stage);
}

RunResult train_variant(const Dataset& dataset, const TrainConfig& config) {
    config.validate();
    const GcnParams init =
        config.variant == Variant::base_only
            ? init_gcn_params(dataset.num_features(), config.hidden, dataset.num_classes, config.seed)
            : pretrain_base(dataset, config);
    return train_lc(dataset, config, init);
}

}  // namespace lcgnn
