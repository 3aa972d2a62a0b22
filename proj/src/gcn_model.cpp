#include "lcgnn/gcn_model.hpp"

#include "lcgnn/io.hpp"
#include "lcgnn/rng.hpp"

#include <json.hpp>

#include <cmath>
#include <stdexcept>

namespace lcgnn {

namespace {

std::string shape(const DenseMatrix& m) {
    return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void check_shapes(const GcnInput& input, const GcnParams& params) {
    if (input.features.rows != input.a_hat.n()) {
        throw std::invalid_argument("gcn: feature rows " + std::to_string(input.features.rows) +
                                    " differ from node count " + std::to_string(input.a_hat.n()));
    }
    if (params.w0.rows() != input.features.cols) {
        throw std::invalid_argument("gcn: W0 is " + shape(params.w0) + " but features have " +
                                    std::to_string(input.features.cols) + " columns");
    }
    if (params.w1.rows() != params.w0.cols()) {
        throw std::invalid_argument("gcn: W0 is " + shape(params.w0) + " but W1 is " + shape(params.w1));
    }
}

nlohmann::json matrix_json(const DenseMatrix& m) {
    return {{"rows", m.rows()}, {"cols", m.cols()},
            {"data", std::vector<double>(m.data().begin(), m.data().end())}};
}

DenseMatrix matrix_from_json(const nlohmann::json& j, const char* name) {
    try {
        const auto rows = j.at("rows").get<std::size_t>();
        const auto cols = j.at("cols").get<std::size_t>();
        auto data = j.at("data").get<std::vector<double>>();
        return DenseMatrix(rows, cols, std::move(data));
    } catch (const std::exception& e) {
        throw std::runtime_error(std::string("checkpoint: bad matrix '") + name + "': " + e.what());
    }
}

}  // namespace

GcnInput make_gcn_input(const Dataset& dataset) {
    return make_gcn_input(normalize_adjacency(dataset.graph),
                          row_normalize_features(dataset.features));
}

GcnInput make_gcn_input(CsrMatrix a_hat, const DenseMatrix& features) {
    if (features.rows() != a_hat.n()) {
        throw std::invalid_argument("make_gcn_input: features have " + std::to_string(features.rows()) +
                                    " rows for " + std::to_string(a_hat.n()) + " nodes");
    }
    return GcnInput{std::move(a_hat), RowSparseMatrix::from_dense(features)};
}

DenseMatrix glorot_init(std::size_t rows, std::size_t cols, std::uint64_t seed, std::uint64_t stream) {
    if (rows == 0 || cols == 0) throw std::invalid_argument("glorot_init: dimensions must be positive");
    const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
    Rng rng(seed, stream);
    DenseMatrix m(rows, cols);
    for (double& v : m.data()) v = bound * (2.0 * rng.uniform() - 1.0);
    return m;
}

GcnParams init_gcn_params(std::size_t num_features, std::size_t hidden, std::size_t num_classes,
                          std::uint64_t seed) {
    return GcnParams{
        glorot_init(num_features, hidden, seed, static_cast<std::uint64_t>(Stream::glorot_w0)),
        glorot_init(hidden, num_classes, seed, static_cast<std::uint64_t>(Stream::glorot_w1))};
}

ForwardTrace gcn_forward(const GcnInput& input, const GcnParams& params, double dropout,
                         std::uint64_t rng_seed, bool training) {
    check_shapes(input, params);
    if (!(dropout >= 0.0 && dropout < 1.0)) {
        throw std::invalid_argument("gcn_forward: dropout must lie in [0, 1)");
    }
    const bool drop = training;
    const double keep_scale = 1.0 / (1.0 - dropout);
    Rng rng(rng_seed, Stream::dropout);

    const RowSparseMatrix& x = input.features;
    const std::size_t n = x.rows;
    const std::size_t d = params.hidden();

    ForwardTrace t;
    t.input_values = x.values;
    DenseMatrix xw(n, d);
    for (std::size_t i = 0; i < n; ++i) {
        auto dst = xw.row(i);
        for (std::size_t k = x.row_ptr[i]; k < x.row_ptr[i + 1]; ++k) {
            double v = x.values[k];
            if (drop) v = rng.uniform() >= dropout ? v * keep_scale : 0.0;
            t.input_values[k] = v;
            if (v == 0.0) continue;
            const auto w = params.w0.row(x.col_idx[k]);
            for (std::size_t c = 0; c < d; ++c) dst[c] += v * w[c];
        }
    }
    t.pre_activation = spmm(input.a_hat, xw);

    t.hidden_scale = DenseMatrix(n, d, 1.0);
    t.hidden = relu(t.pre_activation);
    if (drop) {
        auto scale = t.hidden_scale.data();
        auto h = t.hidden.data();
        for (std::size_t k = 0; k < h.size(); ++k) {
            scale[k] = rng.uniform() >= dropout ? keep_scale : 0.0;
            h[k] *= scale[k];
        }
    }
    t.propagated_hidden = spmm(input.a_hat, t.hidden);
    t.logits = matmul(t.propagated_hidden, params.w1);
    t.z = softmax_rows(t.logits);
    return t;
}

GcnGradients gcn_backward(const GcnInput& input, const GcnParams& params, const ForwardTrace& trace,
                          const DenseMatrix& upstream) {
    check_shapes(input, params);
    if (!upstream.same_shape(trace.z)) {
        throw std::invalid_argument("gcn_backward: upstream is " + shape(upstream) + " but Z is " +
                                    shape(trace.z));
    }
    require_finite(upstream, "gcn_backward upstream");

    GcnGradients g;
    const std::size_t n = trace.z.rows();
    const std::size_t m = trace.z.cols();
    g.logits = DenseMatrix(n, m);
    for (std::size_t i = 0; i < n; ++i) {
        const auto z = trace.z.row(i);
        const auto u = upstream.row(i);
        double dot = 0.0;
        for (std::size_t c = 0; c < m; ++c) dot += u[c] * z[c];
        auto dst = g.logits.row(i);
        for (std::size_t c = 0; c < m; ++c) dst[c] = z[c] * (u[c] - dot);
    }
    g.w1 = matmul_tn(trace.propagated_hidden, g.logits);

    DenseMatrix d_hidden = spmm_transposed(input.a_hat, matmul_nt(g.logits, params.w1));
    {
        auto dh = d_hidden.data();
        const auto pre = trace.pre_activation.data();
        const auto scale = trace.hidden_scale.data();
        for (std::size_t k = 0; k < dh.size(); ++k) dh[k] = pre[k] > 0.0 ? dh[k] * scale[k] : 0.0;
    }
    const DenseMatrix d_xw = spmm_transposed(input.a_hat, d_hidden);

    const RowSparseMatrix& x = input.features;
    const std::size_t d = params.hidden();
    g.w0 = DenseMatrix(params.w0.rows(), d);
    for (std::size_t i = 0; i < x.rows; ++i) {
        const auto src = d_xw.row(i);
        for (std::size_t k = x.row_ptr[i]; k < x.row_ptr[i + 1]; ++k) {
            const double v = trace.input_values[k];
            if (v == 0.0) continue;
            auto dst = g.w0.row(x.col_idx[k]);
            for (std::size_t c = 0; c < d; ++c) dst[c] += v * src[c];
        }
    }
    return g;
}

void save_checkpoint(const GcnParams& params, const std::filesystem::path& path,
                     const std::string& variant) {
    nlohmann::json j = {{"format", "lcgnn-checkpoint-v1"},
                        {"w0", matrix_json(params.w0)},
                        {"w1", matrix_json(params.w1)}};
    if (!variant.empty()) j["variant"] = variant;
    write_file_atomic(path, j.dump() + "\n");
}

GcnParams load_checkpoint(const std::filesystem::path& path, std::string* variant) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("checkpoint " + path.string() + ": " + e.what());
    }
    if (j.value("format", "") != "lcgnn-checkpoint-v1") {
        throw std::runtime_error("checkpoint " + path.string() + ": unknown format");
    }
    GcnParams p{matrix_from_json(j.at("w0"), "w0"), matrix_from_json(j.at("w1"), "w1")};
    if (p.w0.cols() != p.w1.rows()) throw std::runtime_error("checkpoint: inconsistent hidden size");
    require_finite(p.w0, "checkpoint w0");
    require_finite(p.w1, "checkpoint w1");
    if (variant) *variant = j.value("variant", "");
    return p;
}

}  // namespace lcgnn
