#pragma once

#include "lcgnn/graph_data.hpp"
#include "lcgnn/tensor.hpp"

#include <span>
#include <vector>

namespace lcgnn {

// Label-consistency head.
//
// Given a row-stochastic label distribution Z (n x m), the aggregation matrix
// P = RowNormalize(Z Zᵀ) links every pair of nodes by the similarity of their
// predicted labels, and the head outputs Ẑ = P Z. Because each row of Z sums to
// one, the row sums of Z Zᵀ and of Z (ZᵀZ) coincide, so
//
//     RowNormalize(Z Zᵀ) Z == RowNormalize(Z (ZᵀZ))
//
// and the production path only ever forms the m x m Gram matrix ZᵀZ.

/// Floor (and 1 - ceiling) applied to every log argument.
inline constexpr double kLogClamp = 1e-7;

/// Same-label indicator over the labeled nodes, self-pairs included.
struct ConsistencyMask {
    NodeList nodes;
    DenseMatrix same_label;  // |nodes| x |nodes|, 1 where labels agree
};

struct LcOutput {
    DenseMatrix z_hat;
    DenseMatrix gram;              // ZᵀZ, m x m
    std::vector<double> row_sums;  // row sums of Z (ZᵀZ) before normalization
};

struct LossValue {
    double value = 0.0;
    DenseMatrix grad;
};

/// Ẑ = RowNormalize(Z (ZᵀZ)). Throws std::domain_error reporting the worst
/// row when Z is not row-stochastic within `tolerance`.
LcOutput lc_aggregate(const DenseMatrix& z, double tolerance = 1e-8);

/// Same formula without the row-stochastic precondition. Used when Z is a free
/// variable, e.g. under finite-difference perturbation.
LcOutput lc_aggregate_unchecked(const DenseMatrix& z);

/// Forms P = RowNormalize(Z Zᵀ) explicitly and returns P Z. O(n²) memory; for tests.
DenseMatrix lc_aggregate_naive(const DenseMatrix& z, double tolerance = 1e-8);

ConsistencyMask build_consistency_mask(std::span<const Label> labels, std::span<const std::size_t> train);

/// L_C = -Σ_{i∈train} ln ẑ[i, y_i], with ẑ clamped below at kLogClamp.
/// Gradient rows outside `train` are zero.
LossValue classification_loss(const DenseMatrix& z_hat, std::span<const Label> labels,
                              std::span<const std::size_t> train);

/// L_R = -Σ_{a,b} M_ab ln N_ab + (1 - M_ab) ln(1 - N_ab) over labeled pairs,
/// N = Z Zᵀ restricted to mask.nodes and clamped to [kLogClamp, 1 - kLogClamp].
LossValue regularization_loss(const DenseMatrix& z, const ConsistencyMask& mask);

double total_loss(double l_c, double l_r, double lambda);

/// dL/dZ through Ẑ = RowNormalize(Z (ZᵀZ)), normalizer included.
DenseMatrix lc_aggregate_backward(const DenseMatrix& z, const LcOutput& aggregated,
                                  const DenseMatrix& upstream_zhat);

/// dL/dZ for L = L_C(Ẑ) + λ L_R(Z), where `upstream_zhat` is dL_C/dẐ.
DenseMatrix lc_backward(const DenseMatrix& z, const LcOutput& aggregated,
                        const DenseMatrix& upstream_zhat, const ConsistencyMask& mask, double lambda);

}  // namespace lcgnn
