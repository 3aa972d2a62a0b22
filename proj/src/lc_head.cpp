#include "lcgnn/lc_head.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace lcgnn {

namespace {

std::string shape(const DenseMatrix& m) {
    return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void require_aggregable(const DenseMatrix& z, double tolerance, const char* who) {
    if (z.rows() == 0 || z.cols() == 0) {
        throw std::invalid_argument(std::string(who) + ": empty label distribution");
    }
    require_row_stochastic(z, tolerance, who);
}

DenseMatrix gather_rows(const DenseMatrix& z, std::span<const std::size_t> nodes) {
    DenseMatrix out(nodes.size(), z.cols());
    for (std::size_t a = 0; a < nodes.size(); ++a) {
        if (nodes[a] >= z.rows()) {
            throw std::out_of_range("node index " + std::to_string(nodes[a]) + " out of range");
        }
        std::copy_n(z.row(nodes[a]).begin(), z.cols(), out.row(a).begin());
    }
    return out;
}

}  // namespace

LcOutput lc_aggregate_unchecked(const DenseMatrix& z) {
    LcOutput out;
    out.gram = matmul_tn(z, z);
    out.z_hat = matmul(z, out.gram);
    out.row_sums.resize(z.rows());
    for (std::size_t i = 0; i < z.rows(); ++i) {
        auto row = out.z_hat.row(i);
        double sum = 0.0;
        for (double v : row) sum += v;
        if (!(sum > 0.0)) {
            throw std::domain_error("lc_aggregate: non-positive consistency mass at row " +
                                    std::to_string(i));
        }
        out.row_sums[i] = sum;
        for (double& v : row) v /= sum;
    }
    return out;
}

LcOutput lc_aggregate(const DenseMatrix& z, double tolerance) {
    require_aggregable(z, tolerance, "lc_aggregate");
    return lc_aggregate_unchecked(z);
}

DenseMatrix lc_aggregate_naive(const DenseMatrix& z, double tolerance) {
    require_aggregable(z, tolerance, "lc_aggregate_naive");
    const DenseMatrix p = row_normalize(matmul_nt(z, z));
    return matmul(p, z);
}

ConsistencyMask build_consistency_mask(std::span<const Label> labels, std::span<const std::size_t> train) {
    if (train.empty()) throw std::invalid_argument("build_consistency_mask: no labeled nodes");
    ConsistencyMask mask;
    mask.nodes.assign(train.begin(), train.end());
    const std::size_t k = train.size();
    mask.same_label = DenseMatrix(k, k);
    for (std::size_t a = 0; a < k; ++a) {
        if (train[a] >= labels.size()) {
            throw std::out_of_range("build_consistency_mask: node " + std::to_string(train[a]) +
                                    " has no label");
        }
    }
    for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = 0; b < k; ++b) {
            mask.same_label(a, b) = labels[train[a]] == labels[train[b]] ? 1.0 : 0.0;
        }
    }
    return mask;
}

LossValue classification_loss(const DenseMatrix& z_hat, std::span<const Label> labels,
                              std::span<const std::size_t> train) {
    if (train.empty()) throw std::invalid_argument("classification_loss: no labeled nodes");
    LossValue out{0.0, DenseMatrix(z_hat.rows(), z_hat.cols())};
    for (std::size_t i : train) {
        if (i >= z_hat.rows() || i >= labels.size()) {
            throw std::out_of_range("classification_loss: node " + std::to_string(i) + " out of range");
        }
        const Label y = labels[i];
        if (y >= z_hat.cols()) {
            throw std::out_of_range("classification_loss: label " + std::to_string(y) + " of node " +
                                    std::to_string(i) + " out of range");
        }
        const double p = z_hat(i, y);
        if (p > kLogClamp) {
            out.value -= std::log(p);
            out.grad(i, y) -= 1.0 / p;
        } else {
            out.value -= std::log(kLogClamp);
        }
    }
    return out;
}

LossValue regularization_loss(const DenseMatrix& z, const ConsistencyMask& mask) {
    const std::size_t k = mask.nodes.size();
    if (!(mask.same_label.rows() == k && mask.same_label.cols() == k)) {
        throw std::invalid_argument("regularization_loss: mask is " + shape(mask.same_label) +
                                    " for " + std::to_string(k) + " nodes");
    }
    const DenseMatrix zl = gather_rows(z, mask.nodes);
    const DenseMatrix n = matmul_nt(zl, zl);

    // dL/dN, zero where the clamp is active.
    DenseMatrix dn(k, k);
    double value = 0.0;
    for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = 0; b < k; ++b) {
            const double raw = n(a, b);
            const double c = std::clamp(raw, kLogClamp, 1.0 - kLogClamp);
            const bool interior = raw > kLogClamp && raw < 1.0 - kLogClamp;
            if (mask.same_label(a, b) != 0.0) {
                value -= std::log(c);
                if (interior) dn(a, b) = -1.0 / c;
            } else {
                value -= std::log(1.0 - c);
                if (interior) dn(a, b) = 1.0 / (1.0 - c);
            }
        }
    }

    // N = Z_L Z_Lᵀ  =>  dZ_L = (dN + dNᵀ) Z_L
    DenseMatrix sym(k, k);
    for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = 0; b < k; ++b) sym(a, b) = dn(a, b) + dn(b, a);
    }
    const DenseMatrix dzl = matmul(sym, zl);

    LossValue out{value, DenseMatrix(z.rows(), z.cols())};
    for (std::size_t a = 0; a < k; ++a) {
        auto dst = out.grad.row(mask.nodes[a]);
        const auto src = dzl.row(a);
        for (std::size_t c = 0; c < z.cols(); ++c) dst[c] += src[c];
    }
    return out;
}

double total_loss(double l_c, double l_r, double lambda) {
    if (!(lambda >= 0.0)) throw std::invalid_argument("total_loss: lambda must be non-negative");
    return l_c + lambda * l_r;
}

DenseMatrix lc_aggregate_backward(const DenseMatrix& z, const LcOutput& agg,
                                  const DenseMatrix& upstream) {
    if (!upstream.same_shape(z) || !agg.z_hat.same_shape(z) || agg.row_sums.size() != z.rows()) {
        throw std::invalid_argument("lc_aggregate_backward: shape mismatch, Z is " + shape(z) +
                                    ", upstream is " + shape(upstream));
    }
    const std::size_t n = z.rows();
    const std::size_t m = z.cols();

    // Ẑ_i = S_i / d_i with S = Z G, d_i = Σ_k S_ik:
    // dS_ik = (U_ik - Σ_l U_il Ẑ_il) / d_i
    DenseMatrix ds(n, m);
    for (std::size_t i = 0; i < n; ++i) {
        const auto u = upstream.row(i);
        const auto zh = agg.z_hat.row(i);
        double dot = 0.0;
        for (std::size_t c = 0; c < m; ++c) dot += u[c] * zh[c];
        auto dst = ds.row(i);
        for (std::size_t c = 0; c < m; ++c) dst[c] = (u[c] - dot) / agg.row_sums[i];
    }

    // S = Z G with G = ZᵀZ symmetric: dZ = dS G + Z (Zᵀ dS + dSᵀ Z)
    DenseMatrix grad = matmul(ds, agg.gram);
    const DenseMatrix zt_ds = matmul_tn(z, ds);
    DenseMatrix dg(m, m);
    for (std::size_t a = 0; a < m; ++a) {
        for (std::size_t b = 0; b < m; ++b) dg(a, b) = zt_ds(a, b) + zt_ds(b, a);
    }
    const DenseMatrix through_gram = matmul(z, dg);
    auto g = grad.data();
    const auto t = through_gram.data();
    for (std::size_t k = 0; k < g.size(); ++k) g[k] += t[k];
    return grad;
}

DenseMatrix lc_backward(const DenseMatrix& z, const LcOutput& aggregated,
                        const DenseMatrix& upstream_zhat, const ConsistencyMask& mask, double lambda) {
    if (!(lambda >= 0.0)) throw std::invalid_argument("lc_backward: lambda must be non-negative");
    DenseMatrix grad = lc_aggregate_backward(z, aggregated, upstream_zhat);
    if (lambda > 0.0) {
        const LossValue reg = regularization_loss(z, mask);
        auto g = grad.data();
        const auto r = reg.grad.data();
        for (std::size_t k = 0; k < g.size(); ++k) g[k] += lambda * r[k];
    }
    return grad;
}

}  // namespace lcgnn
