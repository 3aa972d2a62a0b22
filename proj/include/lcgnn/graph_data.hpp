#pragma once

#include "lcgnn/tensor.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace lcgnn {

using Label = std::size_t;
using NodeList = std::vector<std::size_t>;

/// Train/validation/test node partition.
struct Split {
    NodeList train;
    NodeList val;
    NodeList test;

    /// Throws when indices are out of range, repeated, shared between sets, or train is empty.
    void validate(std::size_t num_nodes) const;
    friend bool operator==(const Split&, const Split&) = default;
};

/// Citation graph with bag-of-words features, one label per node and a split.
/// `graph` is the unweighted symmetric adjacency with no self-loops.
/// `features` are kept as stored on disk; scaling happens when model inputs are built.
struct Dataset {
    std::string name;
    CsrMatrix graph;
    DenseMatrix features;
    std::vector<Label> labels;
    std::size_t num_classes = 0;
    Split split;

    std::size_t num_nodes() const noexcept { return graph.n(); }
    std::size_t num_features() const noexcept { return features.cols(); }
    /// Undirected edge count.
    std::size_t num_edges() const noexcept { return graph.nnz() / 2; }

    void validate() const;
    friend bool operator==(const Dataset&, const Dataset&) = default;
};

/// Reads meta.json, edges.tsv, features.tsv, labels.tsv and splits.json from `dir`.
Dataset load_dataset(const std::filesystem::path& dir);

/// Writes the canonical directory layout read by load_dataset.
void write_dataset(const Dataset& dataset, const std::filesystem::path& dir);

/// Builds the symmetric 0/1 adjacency from an undirected edge list.
/// Either orientation and repeated edges are accepted; self-loops are rejected.
CsrMatrix adjacency_from_edges(std::size_t n,
                               const std::vector<std::pair<std::size_t, std::size_t>>& edges);

/// D̃^{-1/2}(A+I)D̃^{-1/2} with D̃ the degree matrix of A+I.
CsrMatrix normalize_adjacency(const CsrMatrix& a);

/// Divides every nonzero row by its sum; all-zero rows stay zero.
DenseMatrix row_normalize_features(const DenseMatrix& x);

/// Random split with `labels_per_class` training nodes per class, 500 validation
/// nodes and 1000 test nodes. Train nodes are the first nodes of each class in
/// a seeded shuffle; validation and test come from the remaining nodes in that
/// same shuffled order.
Split make_sparse_split(const Dataset& dataset, std::size_t labels_per_class, std::uint64_t seed,
                        std::size_t val_size = 500, std::size_t test_size = 1000);

}  // namespace lcgnn
