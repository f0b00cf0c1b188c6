#pragma once

// Symmetric non-negative matrix tri-factorisation A ~ C M C^T with a
// row-stochastic relaxation on C, solved by multiplicative updates.

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "altblock/core_model.hpp"

namespace altblock {

enum class Approach { Base, CannotLink, ImageDissimilarity, GeneralizedImageDissimilarity };

inline std::string_view to_string(Approach a) {
    switch (a) {
        case Approach::Base: return "base";
        case Approach::CannotLink: return "cannot-link";
        case Approach::ImageDissimilarity: return "image-dissim";
        case Approach::GeneralizedImageDissimilarity: return "image-dissim-multi";
    }
    return "unknown";
}

struct SolverConfig {
    int k = 2;
    double beta = 0.0;
    double epsilon = 1e-9;
    double tolerance = 1e-5;
    /// Convergence also requires max |row-sum(C) - 1| below this.
    double stochasticity_tolerance = 1e-4;
    int max_iterations = 500;
    std::uint64_t seed = 0;
    Approach approach = Approach::Base;

    void validate() const {
        if (k < 2) throw ConfigError("k must be at least 2");
        if (!(beta >= 0.0)) throw ConfigError("beta must be non-negative");
        if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
        if (!(tolerance > 0.0)) throw ConfigError("tolerance must be positive");
        if (!(stochasticity_tolerance > 0.0)) throw ConfigError("stochasticity tolerance must be positive");
        if (max_iterations < 1) throw ConfigError("max_iterations must be at least 1");
    }
};

struct SolverTrace {
    double initial_objective = 0.0;
    /// Objective after each completed iteration (M update then C update).
    std::vector<double> objective_per_iteration;
    int iterations_run = 0;
    bool converged = false;
    double final_row_sum_error = 0.0;
};

/// Seeded uniform(0,1) start. C is filled row by row and each row is scaled
/// to sum to 1; then the upper triangle of M is drawn and mirrored.
inline std::pair<Matrix, Matrix> initialize(const SolverConfig& config, Index n) {
    if (n < 2) throw ConfigError("graph needs at least 2 nodes");
    std::mt19937_64 rng(config.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto draw = [&] {
        double v = 0.0;
        while (v == 0.0) v = unit(rng);
        return v;
    };
    Matrix c(n, config.k);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < config.k; ++j) c(i, j) = draw();
    c.array().colwise() /= c.rowwise().sum().array();
    Matrix m(config.k, config.k);
    for (Index i = 0; i < config.k; ++i)
        for (Index j = i; j < config.k; ++j) m(i, j) = m(j, i) = draw();
    return {std::move(c), std::move(m)};
}

/// ||A - C M C^T||_F^2
inline double base_objective(const Matrix& a, const Matrix& c, const Matrix& m) {
    return (a - reconstruct(c, m)).squaredNorm();
}

inline double base_objective(const AdjacencyMatrix& a, const Blockmodel& bm) {
    return base_objective(a.weights(), bm.membership, bm.image);
}

/// Analytic d/dC of ||A - C M C^T||_F^2 (multiplier terms dropped).
inline Matrix gradient_C(const Matrix& a, const Matrix& c, const Matrix& m) {
    const Matrix ctc = c.transpose() * c;
    const Matrix pos = c * m.transpose() * ctc * m + c * m * ctc * m.transpose();
    const Matrix neg = a.transpose() * c * m + a * c * m.transpose();
    return 2.0 * (pos - neg);
}

/// Analytic d/dM of ||A - C M C^T||_F^2 (multiplier terms dropped).
inline Matrix gradient_M(const Matrix& a, const Matrix& c, const Matrix& m) {
    const Matrix ctc = c.transpose() * c;
    return 2.0 * (ctc * m * ctc - c.transpose() * a * c);
}

/// M <- M .* (C^T A C) ./ (C^T C M C^T C + eps)
inline Matrix update_M_base(const Matrix& a, const Matrix& c, const Matrix& m, double epsilon) {
    const Matrix ctc = c.transpose() * c;
    const Matrix num = c.transpose() * a * c;
    const Matrix den = (ctc * m * ctc).array() + epsilon;
    return m.cwiseProduct(num.cwiseQuotient(den));
}

/// Iterative-Lagrangian update of C for the row-stochastic relaxation.
///
/// With grad+ = C M^T C^T C M + C M C^T C M^T (+ extra_pos) and
/// grad- = A^T C M + A C M^T, each row i gets the scalars
///   G_i = sum_b C_ib / grad+_ib,   H_i = sum_b C_ib grad-_ib / grad+_ib
/// and C_ij <- C_ij (grad-_ij G_i + 1) / (grad+_ij G_i + H_i).
/// epsilon is added to grad+ before forming G and H and to the final
/// denominator, so an all-zero row stays zero.
inline Matrix update_C_lagrangian(const Matrix& a, const Matrix& c, const Matrix& m,
                                  const Matrix* extra_pos, double epsilon) {
    const Matrix ctc = c.transpose() * c;
    Matrix pos = c * m.transpose() * ctc * m + c * m * ctc * m.transpose();
    if (extra_pos) pos += *extra_pos;
    pos.array() += epsilon;
    const Matrix neg = a.transpose() * c * m + a * c * m.transpose();

    const Eigen::VectorXd g = c.cwiseQuotient(pos).rowwise().sum();
    const Eigen::VectorXd h = c.cwiseProduct(neg).cwiseQuotient(pos).rowwise().sum();

    Matrix out(c.rows(), c.cols());
    for (Index i = 0; i < c.rows(); ++i)
        for (Index j = 0; j < c.cols(); ++j)
            out(i, j) = c(i, j) * (neg(i, j) * g(i) + 1.0) / (pos(i, j) * g(i) + h(i) + epsilon);
    return out;
}

/// max_i |sum_j C_ij - 1|
inline double row_sum_error(const Matrix& c) {
    return (c.rowwise().sum().array() - 1.0).abs().maxCoeff();
}

}  // namespace altblock
