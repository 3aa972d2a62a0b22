#pragma once

#include "lcgnn/graph_data.hpp"
#include "lcgnn/tensor.hpp"

#include <cstdint>
#include <filesystem>
#include <string>

namespace lcgnn {

/// Weights of the two-layer GCN, no bias terms.
struct GcnParams {
    DenseMatrix w0;  // features x hidden
    DenseMatrix w1;  // hidden x classes

    std::size_t num_features() const noexcept { return w0.rows(); }
    std::size_t hidden() const noexcept { return w0.cols(); }
    std::size_t num_classes() const noexcept { return w1.cols(); }

    friend bool operator==(const GcnParams&, const GcnParams&) = default;
};

/// Propagation operator and features as consumed by the model.
struct GcnInput {
    CsrMatrix a_hat;
    RowSparseMatrix features;

    std::size_t num_nodes() const noexcept { return a_hat.n(); }
};

/// Normalized adjacency plus row-normalized features.
GcnInput make_gcn_input(const Dataset& dataset);
/// Uses `a_hat` and `features` as given.
GcnInput make_gcn_input(CsrMatrix a_hat, const DenseMatrix& features);

/// Intermediates of one forward pass.
struct ForwardTrace {
    std::vector<double> input_values;  // dropped feature nonzeros, parallel to GcnInput::features
    DenseMatrix pre_activation;        // Â·drop(X)·W0
    DenseMatrix hidden_scale;          // dropout multiplier per hidden unit: 0 or 1/(1-rate)
    DenseMatrix hidden;                // drop(ReLU(pre_activation))
    DenseMatrix propagated_hidden;     // Â·hidden
    DenseMatrix logits;                // Â·hidden·W1
    DenseMatrix z;                     // softmax(logits)
};

struct GcnGradients {
    DenseMatrix w0;
    DenseMatrix w1;
    DenseMatrix logits;
};

/// Uniform on [-a, a] with a = sqrt(6 / (rows + cols)).
DenseMatrix glorot_init(std::size_t rows, std::size_t cols, std::uint64_t seed,
                        std::uint64_t stream = 0);

GcnParams init_gcn_params(std::size_t num_features, std::size_t hidden, std::size_t num_classes,
                          std::uint64_t seed);

/// Z = softmax(Â·drop(ReLU(Â·drop(X)·W0))·W1).
///
/// Dropout is inverted (survivors scaled by 1/(1-rate)) and only active when
/// `training` is set. Masks come from Rng(rng_seed, Stream::dropout): one
/// uniform draw per stored feature entry in row-major order, then one per
/// hidden unit in row-major order; a unit survives when its draw is >= rate.
ForwardTrace gcn_forward(const GcnInput& input, const GcnParams& params, double dropout,
                         std::uint64_t rng_seed, bool training);

/// Gradients of a scalar loss with respect to W0, W1 and the logits, given the
/// loss gradient with respect to Z. Reuses the dropout masks stored in `trace`.
GcnGradients gcn_backward(const GcnInput& input, const GcnParams& params, const ForwardTrace& trace,
                          const DenseMatrix& upstream);

/// JSON checkpoint with shapes; doubles round-trip exactly.
void save_checkpoint(const GcnParams& params, const std::filesystem::path& path,
                     const std::string& variant = "");
GcnParams load_checkpoint(const std::filesystem::path& path, std::string* variant = nullptr);

}  // namespace lcgnn
