#pragma once

// Planted-blockmodel graph generator: Bernoulli edge presence per block
// density, lognormal edge weights.

#include <cmath>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "altblock/core_model.hpp"

namespace altblock {

struct PlantedSpec {
    HardPartition partition;
    Matrix block_density;  ///< k x k, symmetric, entries in [0, 1]
    double weight_log_mean = 5.0;
    double weight_log_sd = 0.5;
    std::uint64_t seed = 0;
    bool self_loops = false;

    Index n() const noexcept { return static_cast<Index>(partition.size()); }

    void validate() const {
        if (partition.size() < 2) throw ConfigError("planted graph needs at least 2 nodes");
        if (block_density.rows() != partition.k || block_density.cols() != partition.k)
            throw DimensionMismatch("block density must be k x k for the partition's k");
        for (Index r = 0; r < block_density.rows(); ++r)
            for (Index c = 0; c < block_density.cols(); ++c) {
                const double d = block_density(r, c);
                if (!(d >= 0.0 && d <= 1.0)) throw ConfigError("block densities must lie in [0, 1]");
                if (d != block_density(c, r)) throw NotSymmetric("block density matrix must be symmetric");
            }
        if (!(weight_log_sd >= 0.0) || !std::isfinite(weight_log_mean))
            throw ConfigError("lognormal parameters must be finite with sd >= 0");
    }
};

/// Contiguous positions of the given sizes.
inline HardPartition contiguous_partition(const std::vector<int>& sizes) {
    HardPartition p;
    p.k = static_cast<int>(sizes.size());
    for (int pos = 0; pos < p.k; ++pos)
        p.assignment.insert(p.assignment.end(), static_cast<std::size_t>(sizes[static_cast<std::size_t>(pos)]), pos);
    return p;
}

/// Three communities of 17/17/16 nodes, within-density 0.8, between 0.1.
inline PlantedSpec default_planted_spec(std::uint64_t seed = 0) {
    PlantedSpec spec;
    spec.partition = contiguous_partition({17, 17, 16});
    spec.block_density = Matrix::Constant(3, 3, 0.1);
    spec.block_density.diagonal().setConstant(0.8);
    spec.seed = seed;
    return spec;
}

/// Pairs are visited in row-major upper-triangle order; one uniform draw per
/// pair decides presence, a lognormal draw follows for present edges.
inline AdjacencyMatrix generate(const PlantedSpec& spec) {
    spec.validate();
    const Index n = spec.n();
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix w = Matrix::Zero(n, n);
    for (Index i = 0; i < n; ++i)
        for (Index j = spec.self_loops ? i : i + 1; j < n; ++j) {
            const double p = spec.block_density(spec.partition.assignment[static_cast<std::size_t>(i)],
                                                spec.partition.assignment[static_cast<std::size_t>(j)]);
            if (unit(rng) >= p) continue;
            double weight = std::exp(spec.weight_log_mean);
            if (spec.weight_log_sd > 0.0) weight = std::exp(spec.weight_log_mean + spec.weight_log_sd * normal(rng));
            w(i, j) = w(j, i) = weight;
        }
    return AdjacencyMatrix(std::move(w));
}

/// A graph carrying two planted structures over the same nodes: a community
/// partition and an independent core-periphery partition.
struct PlantedPair {
    PlantedSpec spec;  ///< over the cross-product cells of both partitions
    HardPartition community;
    HardPartition core_periphery;
    AdjacencyMatrix graph;
};

/// Builds the combined spec: node i sits in community c(i) and tier t(i);
/// the density between two nodes is mix * community + (1 - mix) * tier
/// density. Tiers cycle through each community as core, semi-periphery,
/// periphery so that the two partitions are close to independent.
inline PlantedPair make_planted_pair(std::uint64_t seed, const Matrix& community_density,
                                     const Matrix& tier_density, double mix,
                                     const std::vector<int>& community_sizes = {17, 17, 16},
                                     const std::vector<int>& tier_pattern = {0, 1, 2, 2, 1, 2}) {
    if (!(mix >= 0.0 && mix <= 1.0)) throw ConfigError("mix must lie in [0, 1]");
    const HardPartition community = contiguous_partition(community_sizes);
    const auto kc = static_cast<Index>(community_sizes.size());
    const Index kt = tier_density.rows();
    if (community_density.rows() != kc || community_density.cols() != kc || tier_density.cols() != kt)
        throw DimensionMismatch("density matrices do not match the partitions");

    HardPartition tiers;
    tiers.k = static_cast<int>(kt);
    for (int size : community_sizes) {
        for (int m = 0; m < size; ++m) tiers.assignment.push_back(tier_pattern[static_cast<std::size_t>(m) % tier_pattern.size()]);
    }
    for (int t : tiers.assignment)
        if (t < 0 || t >= tiers.k) throw ConfigError("tier pattern refers to a missing tier");

    PlantedSpec spec;
    spec.partition.k = static_cast<int>(kc * kt);
    for (std::size_t i = 0; i < community.size(); ++i)
        spec.partition.assignment.push_back(community.assignment[i] * static_cast<int>(kt) + tiers.assignment[i]);
    spec.block_density.resize(kc * kt, kc * kt);
    for (Index a = 0; a < kc * kt; ++a)
        for (Index b = 0; b < kc * kt; ++b)
            spec.block_density(a, b) = mix * community_density(a / kt, b / kt) + (1.0 - mix) * tier_density(a % kt, b % kt);
    spec.seed = seed;

    AdjacencyMatrix graph = generate(spec);
    return PlantedPair{std::move(spec), community, std::move(tiers), std::move(graph)};
}

/// The pair used for the constraint experiments: 3 communities (0.8 / 0.1)
/// mixed evenly with a 3-tier core-periphery structure.
inline PlantedPair default_planted_pair(std::uint64_t seed = 0) {
    Matrix comm = Matrix::Constant(3, 3, 0.1);
    comm.diagonal().setConstant(0.8);
    Matrix tier(3, 3);
    tier << 0.95, 0.8, 0.6,
            0.8,  0.3, 0.15,
            0.6,  0.15, 0.02;
    return make_planted_pair(seed, comm, tier, 0.5);
}

}  // namespace altblock
