#pragma once

// Domain types shared by every module: undirected weighted graphs,
// blockmodels (membership C plus image M), hard partitions and cannot-link
// constraint matrices.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "altblock/errors.hpp"

namespace altblock {

using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Symmetric non-negative weight matrix of an undirected graph plus the
/// mapping between opaque node ids and row indices.
class AdjacencyMatrix {
public:
    /// Labels default to "0", "1", ... when `labels` is empty.
    explicit AdjacencyMatrix(Matrix weights, std::vector<std::string> labels = {})
        : weights_(std::move(weights)), labels_(std::move(labels)) {
        const Index n = weights_.rows();
        if (weights_.cols() != n) throw DimensionMismatch("adjacency matrix must be square");
        if (n < 2) throw ConfigError("graph needs at least 2 nodes");
        for (Index i = 0; i < n; ++i) {
            for (Index j = 0; j < n; ++j) {
                const double w = weights_(i, j);
                if (!std::isfinite(w) || w < 0.0)
                    throw ConfigError("adjacency weights must be finite and non-negative");
                if (w != weights_(j, i)) throw NotSymmetric("adjacency matrix must be symmetric");
            }
        }
        if (labels_.empty()) {
            labels_.reserve(static_cast<std::size_t>(n));
            for (Index i = 0; i < n; ++i) labels_.push_back(std::to_string(i));
        }
        if (static_cast<Index>(labels_.size()) != n)
            throw DimensionMismatch("label count differs from node count");
        for (std::size_t i = 0; i < labels_.size(); ++i) {
            if (!index_.emplace(labels_[i], static_cast<Index>(i)).second)
                throw ConfigError("duplicate node label '" + labels_[i] + "'");
        }
    }

    Index size() const noexcept { return weights_.rows(); }
    const Matrix& weights() const noexcept { return weights_; }
    double operator()(Index i, Index j) const { return weights_(i, j); }

    const std::vector<std::string>& labels() const noexcept { return labels_; }
    const std::string& label(Index i) const { return labels_.at(static_cast<std::size_t>(i)); }

    /// Index of a node id, or -1 when the id is unknown.
    Index index_of(const std::string& id) const {
        auto it = index_.find(id);
        return it == index_.end() ? -1 : it->second;
    }

    /// Weighted degree of every node.
    Eigen::VectorXd degrees() const { return weights_.rowwise().sum(); }

private:
    Matrix weights_;
    std::vector<std::string> labels_;
    std::unordered_map<std::string, Index> index_;
};

/// Membership C (n x k) and image M (k x k).
struct Blockmodel {
    Matrix membership;
    Matrix image;
    double objective_value = 0.0;

    Index k() const noexcept { return image.rows(); }
    Index n() const noexcept { return membership.rows(); }

    /// Throws DimensionMismatch when membership columns and image size disagree.
    void validate() const {
        if (image.rows() != image.cols()) throw DimensionMismatch("image matrix must be square");
        if (membership.cols() != image.rows())
            throw DimensionMismatch("membership columns must equal image dimension");
    }
};

/// One position index per node. `k` is the declared number of positions,
/// which may exceed the number actually used.
struct HardPartition {
    std::vector<int> assignment;
    int k = 0;

    std::size_t size() const noexcept { return assignment.size(); }

    int effective_k() const {
        std::vector<char> used(static_cast<std::size_t>(k), 0);
        for (int p : assignment) used[static_cast<std::size_t>(p)] = 1;
        return static_cast<int>(std::count(used.begin(), used.end(), 1));
    }

    /// Builds a partition from raw labels; k becomes max label + 1.
    static HardPartition from_labels(std::vector<int> labels) {
        HardPartition p;
        for (int l : labels) {
            if (l < 0) throw ConfigError("position labels must be non-negative");
            p.k = std::max(p.k, l + 1);
        }
        p.assignment = std::move(labels);
        return p;
    }

    /// Labels relabelled by order of first appearance. Two partitions are equal
    /// up to label permutation exactly when their canonical forms match.
    std::vector<int> canonical() const {
        std::vector<int> map(static_cast<std::size_t>(k), -1);
        std::vector<int> out;
        out.reserve(assignment.size());
        int next = 0;
        for (int p : assignment) {
            int& m = map[static_cast<std::size_t>(p)];
            if (m < 0) m = next++;
            out.push_back(m);
        }
        return out;
    }

    friend bool operator==(const HardPartition&, const HardPartition&) = default;
};

/// Symmetric, zero-diagonal, non-negative cannot-link penalty weights.
class ConstraintMatrix {
public:
    explicit ConstraintMatrix(Index n) : entries_(Matrix::Zero(n, n)) {}

    explicit ConstraintMatrix(Matrix entries) : entries_(std::move(entries)) {
        const Index n = entries_.rows();
        if (entries_.cols() != n) throw DimensionMismatch("constraint matrix must be square");
        for (Index i = 0; i < n; ++i) {
            if (entries_(i, i) != 0.0) throw ConfigError("constraint matrix diagonal must be zero");
            for (Index j = 0; j < n; ++j) {
                if (!(entries_(i, j) >= 0.0) || !std::isfinite(entries_(i, j)))
                    throw ConfigError("constraint weights must be finite and non-negative");
                if (entries_(i, j) != entries_(j, i))
                    throw NotSymmetric("constraint matrix must be symmetric");
            }
        }
    }

    /// Sets the pair (i, j) and its mirror. Self pairs are rejected.
    void set(Index i, Index j, double theta) {
        if (i == j) throw ConfigError("a node cannot be constrained against itself");
        if (!(theta >= 0.0) || !std::isfinite(theta))
            throw ConfigError("constraint weight must be finite and non-negative");
        entries_(i, j) = theta;
        entries_(j, i) = theta;
    }

    Index size() const noexcept { return entries_.rows(); }
    const Matrix& entries() const noexcept { return entries_; }

    /// Constrained pairs (i < j).
    std::vector<std::pair<Index, Index>> pairs() const {
        std::vector<std::pair<Index, Index>> out;
        for (Index i = 0; i < size(); ++i)
            for (Index j = i + 1; j < size(); ++j)
                if (entries_(i, j) > 0.0) out.emplace_back(i, j);
        return out;
    }

private:
    Matrix entries_;
};

/// Row-wise argmax of C; ties go to the lowest column.
inline HardPartition harden(const Matrix& membership) {
    HardPartition p;
    p.k = static_cast<int>(membership.cols());
    p.assignment.resize(static_cast<std::size_t>(membership.rows()));
    for (Index i = 0; i < membership.rows(); ++i) {
        Index best = 0;
        for (Index j = 1; j < membership.cols(); ++j)
            if (membership(i, j) > membership(i, best)) best = j;
        p.assignment[static_cast<std::size_t>(i)] = static_cast<int>(best);
    }
    return p;
}

inline HardPartition harden(const Blockmodel& bm) { return harden(bm.membership); }

/// 0/1 membership matrix of a hard partition.
inline Matrix indicator(const HardPartition& p) {
    Matrix c = Matrix::Zero(static_cast<Index>(p.size()), p.k);
    for (std::size_t i = 0; i < p.size(); ++i) c(static_cast<Index>(i), p.assignment[i]) = 1.0;
    return c;
}

/// C M C^T.
inline Matrix reconstruct(const Matrix& membership, const Matrix& image) {
    return membership * image * membership.transpose();
}

inline Matrix reconstruct(const Blockmodel& bm) { return reconstruct(bm.membership, bm.image); }

/// Least-squares image for a hard partition: the mean weight of each block.
/// Blocks touching an empty position get 0.
inline Matrix block_mean_image(const Matrix& weights, const HardPartition& p) {
    Matrix sums = Matrix::Zero(p.k, p.k);
    std::vector<double> sizes(static_cast<std::size_t>(p.k), 0.0);
    for (std::size_t i = 0; i < p.size(); ++i) {
        sizes[static_cast<std::size_t>(p.assignment[i])] += 1.0;
        for (std::size_t j = 0; j < p.size(); ++j)
            sums(p.assignment[i], p.assignment[j]) += weights(static_cast<Index>(i), static_cast<Index>(j));
    }
    for (Index r = 0; r < p.k; ++r)
        for (Index c = 0; c < p.k; ++c) {
            const double cells = sizes[static_cast<std::size_t>(r)] * sizes[static_cast<std::size_t>(c)];
            sums(r, c) = cells > 0.0 ? sums(r, c) / cells : 0.0;
        }
    return sums;
}

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

}  // namespace altblock
