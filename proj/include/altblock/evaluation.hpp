#pragma once

// Blockmodel scoring: MDL encoding cost (lower is better), edge
// reconstruction generalised-KL distance (higher is more dissimilar) and NMI
// between hard partitions.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "altblock/core_model.hpp"

namespace altblock {

inline constexpr double kReconstructionSmoothing = 1e-10;

namespace detail {

inline double binary_entropy(double p) {
    if (p <= 0.0 || p >= 1.0) return 0.0;
    return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

inline double entropy_of_counts(const std::vector<double>& counts, double total) {
    double h = 0.0;
    for (double c : counts)
        if (c > 0.0) h -= (c / total) * std::log(c / total);
    return h;
}

}  // namespace detail

/// Individual snapshot encoding cost in bits:
///   log2(n)                       number of vertices
/// + n log2(k)                     position of every vertex, k declared
/// + sum_{r,c} s_rc H(rho_rc)      every block as a Bernoulli field
/// where s_rc counts all ordered cells of block (r, c), diagonal included,
/// and rho_rc is the fraction of those cells with weight > 0.
inline double encoding_cost(const AdjacencyMatrix& graph, const HardPartition& part) {
    const Index n = graph.size();
    if (static_cast<Index>(part.size()) != n)
        throw PartitionSizeMismatch("partition does not cover the graph");
    const auto k = static_cast<std::size_t>(part.k);
    std::vector<double> sizes(k, 0.0);
    Matrix nonzero = Matrix::Zero(part.k, part.k);
    for (Index i = 0; i < n; ++i) {
        const int r = part.assignment[static_cast<std::size_t>(i)];
        sizes[static_cast<std::size_t>(r)] += 1.0;
        for (Index j = 0; j < n; ++j)
            if (graph(i, j) > 0.0) nonzero(r, part.assignment[static_cast<std::size_t>(j)]) += 1.0;
    }

    double bits = std::log2(static_cast<double>(n)) + static_cast<double>(n) * std::log2(static_cast<double>(part.k));
    for (std::size_t r = 0; r < k; ++r)
        for (std::size_t c = 0; c < k; ++c) {
            const double cells = sizes[r] * sizes[c];
            if (cells > 0.0)
                bits += cells * detail::binary_entropy(nonzero(static_cast<Index>(r), static_cast<Index>(c)) / cells);
        }
    return bits;
}

/// sum_ij x log(x / y) - x + y over smoothed entries. Asymmetric.
inline double generalized_kl(const Matrix& from, const Matrix& to) {
    if (from.rows() != to.rows() || from.cols() != to.cols())
        throw DimensionMismatch("reconstructions differ in shape");
    double total = 0.0;
    for (Index j = 0; j < from.cols(); ++j)
        for (Index i = 0; i < from.rows(); ++i) {
            const double x = from(i, j) + kReconstructionSmoothing;
            const double y = to(i, j) + kReconstructionSmoothing;
            total += x * std::log(x / y) - x + y;
        }
    return total;
}

/// Edge reconstruction KL distance from b0 to b1.
inline double d_rkl(const Blockmodel& b0, const Blockmodel& b1) {
    if (b0.n() != b1.n()) throw DimensionMismatch("blockmodels cover different node counts");
    return generalized_kl(reconstruct(b0), reconstruct(b1));
}

/// Mutual information over the arithmetic mean of the two label entropies.
/// Both partitions trivial gives 1; exactly one trivial gives 0.
inline double nmi(const HardPartition& p, const HardPartition& q) {
    if (p.size() != q.size()) throw PartitionSizeMismatch("partitions differ in size");
    const auto total = static_cast<double>(p.size());
    std::map<std::pair<int, int>, double> joint;
    std::vector<double> pc(static_cast<std::size_t>(p.k), 0.0);
    std::vector<double> qc(static_cast<std::size_t>(q.k), 0.0);
    for (std::size_t i = 0; i < p.size(); ++i) {
        joint[{p.assignment[i], q.assignment[i]}] += 1.0;
        pc[static_cast<std::size_t>(p.assignment[i])] += 1.0;
        qc[static_cast<std::size_t>(q.assignment[i])] += 1.0;
    }
    const double hp = detail::entropy_of_counts(pc, total);
    const double hq = detail::entropy_of_counts(qc, total);
    if (hp == 0.0 && hq == 0.0) return 1.0;
    if (hp == 0.0 || hq == 0.0) return 0.0;

    double mi = 0.0;
    for (const auto& [cell, count] : joint) {
        const double pij = count / total;
        const double pi = pc[static_cast<std::size_t>(cell.first)] / total;
        const double pj = qc[static_cast<std::size_t>(cell.second)] / total;
        mi += pij * std::log(pij / (pi * pj));
    }
    return std::clamp(mi / (0.5 * (hp + hq)), 0.0, 1.0);
}

struct EvaluationReport {
    double c_ind = 0.0;
    std::optional<double> d_rkl_to_reference;
    std::optional<double> nmi_to_target;
    int effective_k = 0;
    double objective = 0.0;
};

inline EvaluationReport evaluate(const AdjacencyMatrix& graph, const Blockmodel& bm,
                                 const Blockmodel* reference = nullptr,
                                 const HardPartition* target = nullptr) {
    const HardPartition part = harden(bm);
    EvaluationReport report;
    report.c_ind = encoding_cost(graph, part);
    if (reference) report.d_rkl_to_reference = d_rkl(*reference, bm);
    if (target) report.nmi_to_target = nmi(part, *target);
    report.effective_k = part.effective_k();
    report.objective = bm.objective_value;
    return report;
}

}  // namespace altblock
