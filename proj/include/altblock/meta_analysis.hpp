#pragma once

// Multi-restart orchestration, modal solution selection and VAT/iVAT
// reordering of the dissimilarity matrix between restarts.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "altblock/core_model.hpp"
#include "altblock/evaluation.hpp"
#include "altblock/solver.hpp"

namespace altblock {

struct RunRecord {
    std::uint64_t seed = 0;
    Blockmodel blockmodel;
    SolverTrace trace;
    EvaluationReport report;
};

struct RunFailure {
    std::uint64_t seed = 0;
    std::string message;
};

struct RestartBatch {
    SolverConfig config;
    int restarts = 0;
    std::vector<RunRecord> runs;  ///< successful runs, ordered by seed
    std::vector<RunFailure> failures;
};

struct SolutionGroup {
    HardPartition canonical_partition;
    std::vector<std::size_t> members;  ///< indices into RestartBatch::runs
    std::size_t representative = 0;
    int occurrences = 0;
};

/// Blockmodel that defines "the reference" for d_RKL: the reference
/// partition as an indicator membership, with the first reference image when
/// its size fits, and the block-mean image of the graph otherwise.
inline std::optional<Blockmodel> reference_blockmodel(const AdjacencyMatrix& graph, const ReferenceSet& refs) {
    if (!refs.reference_partition) return std::nullopt;
    const HardPartition& p = *refs.reference_partition;
    if (static_cast<Index>(p.size()) != graph.size())
        throw PartitionSizeMismatch("reference partition does not cover the graph");
    Blockmodel bm;
    bm.membership = indicator(p);
    if (!refs.reference_images.empty() && refs.reference_images.front().image.rows() == p.k)
        bm.image = refs.reference_images.front().image;
    else
        bm.image = block_mean_image(graph.weights(), p);
    return bm;
}

/// Worker count: ALTBLOCK_THREADS when set and positive, else the hardware count.
inline unsigned default_thread_count() {
    unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("ALTBLOCK_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0) return std::min<unsigned>(hw, static_cast<unsigned>(v));
    }
    return hw;
}

/// Solves with seeds base_seed .. base_seed + restarts - 1. Runs that hit a
/// non-finite value are recorded as failures. Output order depends only on
/// the seeds, never on thread scheduling.
inline RestartBatch run_batch(const AdjacencyMatrix& graph, const SolverConfig& config, const ReferenceSet& refs,
                              int restarts, std::uint64_t base_seed, unsigned threads = 0) {
    if (restarts < 1) throw ConfigError("restarts must be at least 1");
    config.validate();
    refs.validate(config, graph.size());
    const std::optional<Blockmodel> reference = reference_blockmodel(graph, refs);
    const HardPartition* target = refs.target_partition ? &*refs.target_partition : nullptr;

    struct Slot {
        std::optional<RunRecord> run;
        std::optional<RunFailure> failure;
    };
    std::vector<Slot> slots(static_cast<std::size_t>(restarts));
    std::atomic<int> next{0};
    auto work = [&] {
        for (int i = next++; i < restarts; i = next++) {
            SolverConfig cfg = config;
            cfg.seed = base_seed + static_cast<std::uint64_t>(i);
            Slot& slot = slots[static_cast<std::size_t>(i)];
            try {
                SolveResult r = solve(graph, cfg, refs);
                RunRecord rec{cfg.seed, std::move(r.blockmodel), std::move(r.trace), {}};
                rec.report = evaluate(graph, rec.blockmodel, reference ? &*reference : nullptr, target);
                slot.run = std::move(rec);
            } catch (const NonFiniteValue& e) {
                slot.failure = RunFailure{cfg.seed, e.what()};
            }
        }
    };

    if (threads == 0) threads = default_thread_count();
    threads = std::min<unsigned>(threads, static_cast<unsigned>(restarts));
    if (threads <= 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work);
    }

    RestartBatch batch;
    batch.config = config;
    batch.restarts = restarts;
    for (auto& s : slots) {
        if (s.run) batch.runs.push_back(std::move(*s.run));
        if (s.failure) batch.failures.push_back(std::move(*s.failure));
    }
    if (batch.runs.empty())
        throw AllRunsFailed("all " + std::to_string(restarts) + " runs produced non-finite values");
    return batch;
}

/// Groups runs whose hardened partitions agree up to relabelling. Sorted by
/// occurrences (descending), then representative objective, then seed.
inline std::vector<SolutionGroup> group_solutions(const RestartBatch& batch) {
    std::map<std::vector<int>, std::size_t> index;
    std::vector<SolutionGroup> groups;
    for (std::size_t r = 0; r < batch.runs.size(); ++r) {
        const HardPartition part = harden(batch.runs[r].blockmodel);
        auto canon = part.canonical();
        auto [it, fresh] = index.emplace(canon, groups.size());
        if (fresh) {
            SolutionGroup g;
            g.canonical_partition.assignment = std::move(canon);
            g.canonical_partition.k = part.k;
            g.representative = r;
            groups.push_back(std::move(g));
        }
        SolutionGroup& g = groups[it->second];
        g.members.push_back(r);
        ++g.occurrences;
        const RunRecord& cur = batch.runs[g.representative];
        const RunRecord& cand = batch.runs[r];
        if (cand.blockmodel.objective_value < cur.blockmodel.objective_value ||
            (cand.blockmodel.objective_value == cur.blockmodel.objective_value && cand.seed < cur.seed))
            g.representative = r;
    }
    std::stable_sort(groups.begin(), groups.end(), [&](const SolutionGroup& a, const SolutionGroup& b) {
        if (a.occurrences != b.occurrences) return a.occurrences > b.occurrences;
        const RunRecord& ra = batch.runs[a.representative];
        const RunRecord& rb = batch.runs[b.representative];
        if (ra.blockmodel.objective_value != rb.blockmodel.objective_value)
            return ra.blockmodel.objective_value < rb.blockmodel.objective_value;
        return ra.seed < rb.seed;
    });
    return groups;
}

enum class MetaMetric { SymmetrizedDRkl, OneMinusNmi };

/// Pairwise dissimilarity between the successful runs of a batch.
inline Matrix meta_dissimilarity(const RestartBatch& batch, MetaMetric metric = MetaMetric::SymmetrizedDRkl) {
    const auto m = static_cast<Index>(batch.runs.size());
    Matrix d = Matrix::Zero(m, m);
    std::vector<Matrix> recon;
    std::vector<HardPartition> parts;
    for (const auto& r : batch.runs) {
        if (metric == MetaMetric::SymmetrizedDRkl)
            recon.push_back(reconstruct(r.blockmodel));
        else
            parts.push_back(harden(r.blockmodel));
    }
    for (Index i = 0; i < m; ++i)
        for (Index j = i + 1; j < m; ++j) {
            double v = 0.0;
            if (metric == MetaMetric::SymmetrizedDRkl) {
                const auto ui = static_cast<std::size_t>(i), uj = static_cast<std::size_t>(j);
                v = 0.5 * (generalized_kl(recon[ui], recon[uj]) + generalized_kl(recon[uj], recon[ui]));
            } else {
                v = 1.0 - nmi(parts[static_cast<std::size_t>(i)], parts[static_cast<std::size_t>(j)]);
            }
            d(i, j) = d(j, i) = v;
        }
    return d;
}

struct IvatResult {
    std::vector<Index> permutation;  ///< permutation[r] = original index shown at row r
    Matrix reordered;                ///< VAT: D conjugated by the permutation
    Matrix ivat;                     ///< minimax path distances in VAT order
};

/// VAT ordering (Prim's order starting from an endpoint of the largest
/// dissimilarity) followed by the iVAT minimax-path transform.
inline IvatResult ivat_reorder(const Matrix& d) {
    const Index n = d.rows();
    if (d.cols() != n) throw NotSymmetric("dissimilarity matrix must be square");
    const double scale = std::max(1.0, d.cwiseAbs().maxCoeff());
    for (Index i = 0; i < n; ++i)
        for (Index j = i + 1; j < n; ++j)
            if (std::abs(d(i, j) - d(j, i)) > 1e-12 * scale)
                throw NotSymmetric("dissimilarity matrix must be symmetric");

    IvatResult out;
    if (n == 0) return out;

    Index start = 0;
    double largest = -std::numeric_limits<double>::infinity();
    for (Index i = 0; i < n; ++i)
        for (Index j = i + 1; j < n; ++j)
            if (d(i, j) > largest) {
                largest = d(i, j);
                start = i;
            }

    std::vector<char> visited(static_cast<std::size_t>(n), 0);
    std::vector<double> reach(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
    out.permutation.push_back(start);
    visited[static_cast<std::size_t>(start)] = 1;
    for (Index j = 0; j < n; ++j) reach[static_cast<std::size_t>(j)] = d(start, j);
    while (static_cast<Index>(out.permutation.size()) < n) {
        Index best = -1;
        for (Index j = 0; j < n; ++j)
            if (!visited[static_cast<std::size_t>(j)] &&
                (best < 0 || reach[static_cast<std::size_t>(j)] < reach[static_cast<std::size_t>(best)]))
                best = j;
        out.permutation.push_back(best);
        visited[static_cast<std::size_t>(best)] = 1;
        for (Index j = 0; j < n; ++j)
            reach[static_cast<std::size_t>(j)] = std::min(reach[static_cast<std::size_t>(j)], d(best, j));
    }

    out.reordered.resize(n, n);
    for (Index r = 0; r < n; ++r)
        for (Index c = 0; c < n; ++c)
            out.reordered(r, c) = d(out.permutation[static_cast<std::size_t>(r)],
                                    out.permutation[static_cast<std::size_t>(c)]);

    const Matrix& rd = out.reordered;
    Matrix& iv = out.ivat;
    iv = Matrix::Zero(n, n);
    for (Index r = 1; r < n; ++r) {
        Index parent = 0;
        for (Index c = 1; c < r; ++c)
            if (rd(r, c) < rd(r, parent)) parent = c;
        iv(r, parent) = rd(r, parent);
        for (Index c = 0; c < r; ++c)
            if (c != parent) iv(r, c) = std::max(rd(r, parent), iv(parent, c));
        for (Index c = 0; c < r; ++c) iv(c, r) = iv(r, c);
    }
    return out;
}

}  // namespace altblock
