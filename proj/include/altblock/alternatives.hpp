#pragma once

// Alternative-seeking objectives layered on the base factorisation:
//  - cannot-link penalty  ||A - CMC^T||^2 + beta tr(C^T Theta C)
//  - image dissimilarity  ||A - CMC^T||^2 - sum_p beta_p ||M_p - M||^2
// plus construction of cannot-link sets from reference partitions.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "altblock/core_model.hpp"
#include "altblock/factorization.hpp"

namespace altblock {

struct ReferenceImage {
    Matrix image;
    double weight = 1.0;
};

/// The blockmodel(s) an alternative must move away from.
struct ReferenceSet {
    std::vector<ReferenceImage> reference_images;
    std::optional<ConstraintMatrix> constraint_matrix;
    std::optional<HardPartition> reference_partition;
    /// Known target, only for controlled experiments.
    std::optional<HardPartition> target_partition;

    /// Checks the set against the solver's rank, graph size and approach.
    void validate(const SolverConfig& config, Index n) const {
        for (const auto& r : reference_images) {
            if (r.image.rows() != config.k || r.image.cols() != config.k)
                throw DimensionMismatch("reference image is " + std::to_string(r.image.rows()) + "x" +
                                        std::to_string(r.image.cols()) + " but k = " +
                                        std::to_string(config.k));
            if (!(r.weight >= 0.0)) throw ConfigError("reference weights must be non-negative");
            if (!r.image.allFinite() || (r.image.array() < 0.0).any())
                throw ConfigError("reference image must be finite and non-negative");
        }
        if (constraint_matrix && constraint_matrix->size() != n)
            throw DimensionMismatch("constraint matrix size differs from graph size");
        for (const auto* p : {&reference_partition, &target_partition})
            if (*p && static_cast<Index>((*p)->size()) != n)
                throw PartitionSizeMismatch("partition size differs from graph size");

        switch (config.approach) {
            case Approach::Base: break;
            case Approach::CannotLink:
                if (!constraint_matrix) throw ConfigError("cannot-link approach needs a constraint matrix");
                break;
            case Approach::ImageDissimilarity:
                if (reference_images.size() != 1)
                    throw ConfigError("image-dissimilarity approach needs exactly one reference image");
                break;
            case Approach::GeneralizedImageDissimilarity:
                if (reference_images.empty())
                    throw ConfigError("image-dissimilarity approach needs at least one reference image");
                break;
        }
    }
};

/// tr(C^T Theta C)
inline double penalty_cannot_link(const Matrix& c, const ConstraintMatrix& theta) {
    return (c.transpose() * theta.entries() * c).trace();
}

inline double objective_approach1(const Matrix& a, const Matrix& c, const Matrix& m,
                                  const ConstraintMatrix& theta, double beta) {
    return base_objective(a, c, m) + beta * penalty_cannot_link(c, theta);
}

/// grad+ extra term beta * Theta * C.
inline Matrix cannot_link_extra(const Matrix& c, const ConstraintMatrix& theta, double beta) {
    return beta * (theta.entries() * c);
}

inline Matrix update_C_approach1(const Matrix& a, const Matrix& c, const Matrix& m,
                                 const ConstraintMatrix& theta, double beta, double epsilon) {
    const Matrix extra = cannot_link_extra(c, theta, beta);
    return update_C_lagrangian(a, c, m, &extra, epsilon);
}

/// d/dC of beta tr(C^T Theta C) for symmetric Theta.
inline Matrix gradient_C_cannot_link(const Matrix& c, const ConstraintMatrix& theta, double beta) {
    return 2.0 * beta * (theta.entries() * c);
}

/// sum_p beta_p ||M_p - M||_F^2
inline double image_dissimilarity(const Matrix& m, std::span<const ReferenceImage> refs) {
    double total = 0.0;
    for (const auto& r : refs) total += r.weight * (r.image - m).squaredNorm();
    return total;
}

/// ||A - CMC^T||^2 - sum_p beta_p ||M_p - M||^2. May be negative.
inline double objective_approach2(const Matrix& a, const Matrix& c, const Matrix& m,
                                  std::span<const ReferenceImage> refs) {
    return base_objective(a, c, m) - image_dissimilarity(m, refs);
}

/// d/dM of -sum_p beta_p ||M_p - M||^2.
inline Matrix gradient_M_image_dissimilarity(const Matrix& m, std::span<const ReferenceImage> refs) {
    Matrix g = Matrix::Zero(m.rows(), m.cols());
    for (const auto& r : refs) g += 2.0 * r.weight * (r.image - m);
    return g;
}

/// M <- M .* (C^T A C + M sum_p beta_p) ./ (C^T C M C^T C + sum_p beta_p M_p + eps)
inline Matrix update_M_approach2(const Matrix& a, const Matrix& c, const Matrix& m,
                                 std::span<const ReferenceImage> refs, double epsilon) {
    const Matrix ctc = c.transpose() * c;
    double beta_sum = 0.0;
    Matrix weighted = Matrix::Zero(m.rows(), m.cols());
    for (const auto& r : refs) {
        beta_sum += r.weight;
        weighted += r.weight * r.image;
    }
    const Matrix num = c.transpose() * a * c + beta_sum * m;
    const Matrix den = (ctc * m * ctc + weighted).array() + epsilon;
    return m.cwiseProduct(num.cwiseQuotient(den));
}

/// Every same-position pair of the reference becomes a cannot-link.
/// This can be infeasible (e.g. three nodes of one position with k = 2).
inline ConstraintMatrix constraints_from_reference(const HardPartition& ref, double theta) {
    if (!(theta > 0.0)) throw ConfigError("constraint weight must be positive");
    const auto n = static_cast<Index>(ref.size());
    ConstraintMatrix out(n);
    for (Index i = 0; i < n; ++i)
        for (Index j = i + 1; j < n; ++j)
            if (ref.assignment[static_cast<std::size_t>(i)] == ref.assignment[static_cast<std::size_t>(j)])
                out.set(i, j, theta);
    return out;
}

/// Pairs that share a position in `ref` but not in `target`.
inline std::vector<std::pair<Index, Index>> perfect_pairs(const HardPartition& ref,
                                                          const HardPartition& target) {
    if (ref.size() != target.size())
        throw PartitionSizeMismatch("reference and target partitions differ in size");
    std::vector<std::pair<Index, Index>> out;
    for (std::size_t i = 0; i < ref.size(); ++i)
        for (std::size_t j = i + 1; j < ref.size(); ++j)
            if (ref.assignment[i] == ref.assignment[j] && target.assignment[i] != target.assignment[j])
                out.emplace_back(static_cast<Index>(i), static_cast<Index>(j));
    return out;
}

/// A seeded random subset of the perfect pair set. The kept count is
/// fraction * |pairs| rounded half-up.
inline ConstraintMatrix constraints_perfect(const HardPartition& ref, const HardPartition& target,
                                            double theta, double fraction, std::uint64_t seed) {
    if (!(theta > 0.0)) throw ConfigError("constraint weight must be positive");
    if (!(fraction >= 0.0 && fraction <= 1.0)) throw ConfigError("constraint fraction must be in [0, 1]");
    auto pairs = perfect_pairs(ref, target);
    const auto keep = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(pairs.size()) + 0.5));
    std::mt19937_64 rng(seed);
    std::shuffle(pairs.begin(), pairs.end(), rng);
    ConstraintMatrix out(static_cast<Index>(ref.size()));
    for (std::size_t p = 0; p < keep; ++p) out.set(pairs[p].first, pairs[p].second, theta);
    return out;
}

}  // namespace altblock
