#include "lcgnn/graph_data.hpp"

#include "lcgnn/io.hpp"
#include "lcgnn/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string_view>
#include <unordered_set>

namespace lcgnn {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class LineReader {
public:
    explicit LineReader(const fs::path& path) : path_(path), in_(path) {
        if (!in_) throw std::runtime_error("cannot open " + path.string());
    }

    bool next(std::vector<std::string_view>& fields) {
        while (std::getline(in_, line_)) {
            ++line_no_;
            if (!line_.empty() && line_.back() == '\r') line_.pop_back();
            if (line_.empty()) continue;
            fields.clear();
            std::string_view rest = line_;
            while (true) {
                const auto tab = rest.find('\t');
                fields.push_back(rest.substr(0, tab));
                if (tab == std::string_view::npos) break;
                rest.remove_prefix(tab + 1);
            }
            return true;
        }
        return false;
    }

    [[noreturn]] void fail(const std::string& what) const {
        throw std::runtime_error(path_.filename().string() + ":" + std::to_string(line_no_) + ": " +
                                 what);
    }

    std::size_t index(std::string_view field, std::size_t bound, const char* name) const {
        std::size_t v = 0;
        const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
        if (ec != std::errc{} || ptr != field.data() + field.size()) {
            fail(std::string("malformed ") + name + " '" + std::string(field) + "'");
        }
        if (v >= bound) {
            fail(std::string(name) + " " + std::to_string(v) + " out of range (limit " +
                 std::to_string(bound) + ")");
        }
        return v;
    }

    double real(std::string_view field) const {
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
        if (ec != std::errc{} || ptr != field.data() + field.size() || !std::isfinite(v)) {
            fail("malformed value '" + std::string(field) + "'");
        }
        return v;
    }

private:
    fs::path path_;
    std::ifstream in_;
    std::string line_;
    std::size_t line_no_ = 0;
};

fs::path require_file(const fs::path& dir, const char* name) {
    fs::path p = dir / name;
    if (!fs::is_regular_file(p)) {
        throw std::runtime_error("dataset " + dir.string() + " is missing " + name);
    }
    return p;
}

json read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw std::runtime_error(path.filename().string() + ": " + e.what());
    }
}

NodeList node_list(const json& j, const char* key, const fs::path& path) {
    if (!j.contains(key) || !j.at(key).is_array()) {
        throw std::runtime_error(path.filename().string() + ": missing array '" + key + "'");
    }
    NodeList out;
    for (const auto& v : j.at(key)) {
        if (!v.is_number_integer() || v.get<long long>() < 0) {
            throw std::runtime_error(path.filename().string() + ": non-index entry in '" + key + "'");
        }
        out.push_back(v.get<std::size_t>());
    }
    return out;
}

std::string format_real(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

}  // namespace

void Split::validate(std::size_t num_nodes) const {
    if (train.empty()) throw std::invalid_argument("split: train set is empty");
    std::vector<char> seen(num_nodes, 0);
    const auto check = [&](const NodeList& nodes, const char* name) {
        for (std::size_t v : nodes) {
            if (v >= num_nodes) {
                throw std::invalid_argument(std::string("split: ") + name + " index " +
                                            std::to_string(v) + " out of range");
            }
            if (seen[v]) {
                throw std::invalid_argument(std::string("split: node ") + std::to_string(v) +
                                            " appears twice (" + name + ")");
            }
            seen[v] = 1;
        }
    };
    check(train, "train");
    check(val, "val");
    check(test, "test");
}

void Dataset::validate() const {
    const std::size_t n = graph.n();
    if (n == 0 || features.cols() == 0 || num_classes == 0) {
        throw std::invalid_argument("dataset: n, p and m must be positive");
    }
    if (features.rows() != n) throw std::invalid_argument("dataset: feature rows differ from n");
    if (labels.size() != n) throw std::invalid_argument("dataset: label count differs from n");
    for (std::size_t i = 0; i < n; ++i) {
        if (labels[i] >= num_classes) {
            throw std::invalid_argument("dataset: label of node " + std::to_string(i) +
                                        " out of range");
        }
        for (std::size_t j : graph.row_cols(i)) {
            if (j == i) throw std::invalid_argument("dataset: self-loop at node " + std::to_string(i));
            if (graph.at(j, i) == 0.0) {
                throw std::invalid_argument("dataset: adjacency not symmetric at (" +
                                            std::to_string(i) + "," + std::to_string(j) + ")");
            }
        }
    }
    split.validate(n);
}

CsrMatrix adjacency_from_edges(std::size_t n,
                               const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
    std::set<std::pair<std::size_t, std::size_t>> unique;
    for (auto [u, v] : edges) {
        if (u >= n || v >= n) {
            throw std::invalid_argument("edge (" + std::to_string(u) + "," + std::to_string(v) +
                                        ") out of range");
        }
        if (u == v) throw std::invalid_argument("self-loop at node " + std::to_string(u));
        unique.emplace(std::min(u, v), std::max(u, v));
    }
    std::vector<CsrMatrix::Entry> entries;
    entries.reserve(2 * unique.size());
    for (auto [u, v] : unique) {
        entries.push_back({u, v, 1.0});
        entries.push_back({v, u, 1.0});
    }
    return CsrMatrix::from_entries(n, std::move(entries));
}

Dataset load_dataset(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw std::runtime_error("dataset directory not found: " + dir.string());
    const fs::path meta_path = require_file(dir, "meta.json");
    const fs::path edges_path = require_file(dir, "edges.tsv");
    const fs::path features_path = require_file(dir, "features.tsv");
    const fs::path labels_path = require_file(dir, "labels.tsv");
    const fs::path splits_path = require_file(dir, "splits.json");

    Dataset d;
    std::size_t n = 0;
    std::size_t p = 0;
    {
        const json meta = read_json(meta_path);
        try {
            d.name = meta.value("name", dir.filename().string());
            n = meta.at("num_nodes").get<std::size_t>();
            p = meta.at("num_features").get<std::size_t>();
            d.num_classes = meta.at("num_classes").get<std::size_t>();
        } catch (const json::exception& e) {
            throw std::runtime_error("meta.json: " + std::string(e.what()));
        }
        if (n == 0 || p == 0 || d.num_classes == 0) {
            throw std::runtime_error("meta.json: num_nodes, num_features and num_classes must be positive");
        }
    }

    std::vector<std::string_view> fields;
    {
        LineReader r(edges_path);
        std::vector<std::pair<std::size_t, std::size_t>> edges;
        while (r.next(fields)) {
            if (fields.size() != 2) r.fail("expected 'src<TAB>dst'");
            const std::size_t u = r.index(fields[0], n, "node");
            const std::size_t v = r.index(fields[1], n, "node");
            if (u == v) r.fail("self-loop at node " + std::to_string(u));
            edges.emplace_back(u, v);
        }
        d.graph = adjacency_from_edges(n, edges);
    }
    {
        LineReader r(features_path);
        d.features = DenseMatrix(n, p);
        while (r.next(fields)) {
            if (fields.size() != 3) r.fail("expected 'node<TAB>feature<TAB>value'");
            const std::size_t i = r.index(fields[0], n, "node");
            const std::size_t j = r.index(fields[1], p, "feature");
            const double v = r.real(fields[2]);
            if (d.features(i, j) != 0.0) r.fail("duplicate feature entry");
            d.features(i, j) = v;
        }
    }
    {
        LineReader r(labels_path);
        d.labels.assign(n, 0);
        std::vector<char> seen(n, 0);
        while (r.next(fields)) {
            if (fields.size() != 2) r.fail("expected 'node<TAB>label'");
            const std::size_t i = r.index(fields[0], n, "node");
            const std::size_t y = r.index(fields[1], d.num_classes, "label");
            if (seen[i]) r.fail("duplicate label for node " + std::to_string(i));
            seen[i] = 1;
            d.labels[i] = y;
        }
        const auto missing = std::find(seen.begin(), seen.end(), 0);
        if (missing != seen.end()) {
            throw std::runtime_error("labels.tsv: no label for node " +
                                     std::to_string(missing - seen.begin()));
        }
    }
    {
        const json splits = read_json(splits_path);
        d.split.train = node_list(splits, "train", splits_path);
        d.split.val = node_list(splits, "val", splits_path);
        d.split.test = node_list(splits, "test", splits_path);
        try {
            d.split.validate(n);
        } catch (const std::invalid_argument& e) {
            throw std::runtime_error("splits.json: " + std::string(e.what()));
        }
    }
    d.validate();
    return d;
}

void write_dataset(const Dataset& d, const fs::path& dir) {
    d.validate();
    fs::create_directories(dir);
    const json meta = {{"name", d.name},
                       {"num_nodes", d.num_nodes()},
                       {"num_features", d.num_features()},
                       {"num_classes", d.num_classes},
                       {"num_edges", d.num_edges()}};
    write_file_atomic(dir / "meta.json", meta.dump(2) + "\n");

    std::ostringstream edges;
    for (std::size_t i = 0; i < d.num_nodes(); ++i) {
        for (std::size_t j : d.graph.row_cols(i)) {
            if (i < j) edges << i << '\t' << j << '\n';
        }
    }
    write_file_atomic(dir / "edges.tsv", edges.str());

    std::ostringstream features;
    for (std::size_t i = 0; i < d.num_nodes(); ++i) {
        const auto row = d.features.row(i);
        for (std::size_t j = 0; j < row.size(); ++j) {
            if (row[j] != 0.0) features << i << '\t' << j << '\t' << format_real(row[j]) << '\n';
        }
    }
    write_file_atomic(dir / "features.tsv", features.str());

    std::ostringstream labels;
    for (std::size_t i = 0; i < d.num_nodes(); ++i) labels << i << '\t' << d.labels[i] << '\n';
    write_file_atomic(dir / "labels.tsv", labels.str());

    const json splits = {{"train", d.split.train}, {"val", d.split.val}, {"test", d.split.test}};
    write_file_atomic(dir / "splits.json", splits.dump() + "\n");
}

CsrMatrix normalize_adjacency(const CsrMatrix& a) {
    const std::size_t n = a.n();
    std::vector<double> inv_sqrt_degree(n);
    for (std::size_t i = 0; i < n; ++i) {
        double degree = 1.0;
        for (double w : a.row_values(i)) degree += w;
        inv_sqrt_degree[i] = 1.0 / std::sqrt(degree);
    }
    std::vector<std::size_t> row_ptr(n + 1, 0);
    std::vector<std::size_t> col_idx;
    std::vector<double> values;
    col_idx.reserve(a.nnz() + n);
    values.reserve(a.nnz() + n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto cols = a.row_cols(i);
        const auto vals = a.row_values(i);
        bool diagonal_done = false;
        const auto push = [&](std::size_t j, double w) {
            col_idx.push_back(j);
            // Same operand order for (i,j) and (j,i) keeps the result bit-symmetric.
            const double lo = inv_sqrt_degree[std::min(i, j)];
            const double hi = inv_sqrt_degree[std::max(i, j)];
            values.push_back(w * lo * hi);
        };
        for (std::size_t k = 0; k < cols.size(); ++k) {
            if (cols[k] == i) {
                throw std::invalid_argument("normalize_adjacency: diagonal entry at row " +
                                            std::to_string(i));
            }
            if (!diagonal_done && cols[k] > i) {
                push(i, 1.0);
                diagonal_done = true;
            }
            push(cols[k], vals[k]);
        }
        if (!diagonal_done) push(i, 1.0);
        row_ptr[i + 1] = col_idx.size();
    }
    return CsrMatrix(n, std::move(row_ptr), std::move(col_idx), std::move(values));
}

DenseMatrix row_normalize_features(const DenseMatrix& x) {
    DenseMatrix out = x;
    for (std::size_t i = 0; i < out.rows(); ++i) {
        auto row = out.row(i);
        double sum = 0.0;
        for (double v : row) sum += v;
        if (sum == 0.0) continue;
        for (double& v : row) v /= sum;
    }
    return out;
}

Split make_sparse_split(const Dataset& d, std::size_t labels_per_class, std::uint64_t seed,
                        std::size_t val_size, std::size_t test_size) {
    const std::size_t n = d.num_nodes();
    if (labels_per_class == 0) throw std::invalid_argument("make_sparse_split: labels_per_class must be > 0");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(seed, Stream::split);
    for (std::size_t i = n; i > 1; --i) {
        std::swap(order[i - 1], order[rng.below(i)]);
    }

    std::vector<std::size_t> taken(d.num_classes, 0);
    std::vector<char> in_train(n, 0);
    Split s;
    for (std::size_t v : order) {
        const Label y = d.labels[v];
        if (taken[y] < labels_per_class) {
            ++taken[y];
            in_train[v] = 1;
            s.train.push_back(v);
        }
    }
    for (std::size_t c = 0; c < d.num_classes; ++c) {
        if (taken[c] < labels_per_class) {
            throw std::invalid_argument("make_sparse_split: class " + std::to_string(c) + " has only " +
                                        std::to_string(taken[c]) + " nodes, need " +
                                        std::to_string(labels_per_class));
        }
    }
    if (n - s.train.size() < val_size + test_size) {
        throw std::invalid_argument("make_sparse_split: not enough nodes left for " +
                                    std::to_string(val_size) + " validation and " +
                                    std::to_string(test_size) + " test nodes");
    }
    for (std::size_t v : order) {
        if (in_train[v]) continue;
        if (s.val.size() < val_size) {
            s.val.push_back(v);
        } else if (s.test.size() < test_size) {
            s.test.push_back(v);
        } else {
            break;
        }
    }
    std::sort(s.train.begin(), s.train.end());
    std::sort(s.val.begin(), s.val.end());
    std::sort(s.test.begin(), s.test.end());
    return s;
}

}  // namespace lcgnn
