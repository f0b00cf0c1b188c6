#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include "altblock/alternatives.hpp"
#include "altblock/core_model.hpp"
#include "altblock/factorization.hpp"

namespace altblock {

struct SolveResult {
    Blockmodel blockmodel;
    SolverTrace trace;
};

namespace detail {

/// Reference images with weights multiplied by config.beta.
inline std::vector<ReferenceImage> scaled_references(const SolverConfig& config, const ReferenceSet& refs) {
    std::vector<ReferenceImage> out;
    out.reserve(refs.reference_images.size());
    for (const auto& r : refs.reference_images) out.push_back({r.image, r.weight * config.beta});
    return out;
}

inline bool image_approach(Approach a) {
    return a == Approach::ImageDissimilarity || a == Approach::GeneralizedImageDissimilarity;
}

inline void check_finite(const Matrix& m, int iteration, const char* name) {
    if (!m.allFinite()) throw NonFiniteValue(static_cast<std::size_t>(iteration), name);
}

}  // namespace detail

/// Objective minimised by `config.approach` at (C, M).
inline double total_objective(const Matrix& a, const Matrix& c, const Matrix& m,
                              const SolverConfig& config, const ReferenceSet& refs) {
    switch (config.approach) {
        case Approach::Base: return base_objective(a, c, m);
        case Approach::CannotLink: return objective_approach1(a, c, m, *refs.constraint_matrix, config.beta);
        case Approach::ImageDissimilarity:
        case Approach::GeneralizedImageDissimilarity: {
            const auto scaled = detail::scaled_references(config, refs);
            return objective_approach2(a, c, m, scaled);
        }
    }
    return base_objective(a, c, m);
}

/// Observer invoked after every iteration with (iteration, C, M).
using IterateObserver = std::function<void(int, const Matrix&, const Matrix&)>;

/// Random start, then M update followed by C update until the relative
/// objective change |f_t - f_{t-1}| / max(|f_{t-1}|, 1e-12) drops below
/// the tolerance while the rows of C sum to 1 within the stochasticity
/// tolerance, or the iteration cap is hit.
///
/// For the image-dissimilarity approaches the effective weight of reference p
/// is config.beta * weight_p.
inline SolveResult solve(const AdjacencyMatrix& graph, const SolverConfig& config, const ReferenceSet& refs,
                         const IterateObserver& observer = {}) {
    config.validate();
    const Index n = graph.size();
    refs.validate(config, n);
    const Matrix& a = graph.weights();

    auto [c, m] = initialize(config, n);
    const auto scaled = detail::scaled_references(config, refs);

    SolveResult result;
    SolverTrace& trace = result.trace;
    trace.objective_per_iteration.reserve(static_cast<std::size_t>(config.max_iterations));
    double previous = total_objective(a, c, m, config, refs);
    trace.initial_objective = previous;

    for (int it = 1; it <= config.max_iterations; ++it) {
        if (detail::image_approach(config.approach))
            m = update_M_approach2(a, c, m, scaled, config.epsilon);
        else
            m = update_M_base(a, c, m, config.epsilon);
        detail::check_finite(m, it, "M");

        if (config.approach == Approach::CannotLink)
            c = update_C_approach1(a, c, m, *refs.constraint_matrix, config.beta, config.epsilon);
        else
            c = update_C_lagrangian(a, c, m, nullptr, config.epsilon);
        detail::check_finite(c, it, "C");

        const double current = total_objective(a, c, m, config, refs);
        if (!std::isfinite(current)) throw NonFiniteValue(static_cast<std::size_t>(it), "objective");
        trace.objective_per_iteration.push_back(current);
        trace.iterations_run = it;
        if (observer) observer(it, c, m);

        const double change = std::abs(current - previous) / std::max(std::abs(previous), 1e-12);
        previous = current;
        if (change < config.tolerance && row_sum_error(c) < config.stochasticity_tolerance) {
            trace.converged = true;
            break;
        }
    }

    trace.final_row_sum_error = row_sum_error(c);
    result.blockmodel.membership = std::move(c);
    result.blockmodel.image = std::move(m);
    result.blockmodel.objective_value = previous;
    return result;
}

}  // namespace altblock
