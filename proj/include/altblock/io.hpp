#pragma once

// Text formats: edge lists, headerless CSV matrices, partition files,
// cannot-link pair lists, planted-graph configs and 8-bit PGM heatmaps.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "altblock/core_model.hpp"
#include "altblock/synth.hpp"

namespace altblock::io {

namespace detail {

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

inline bool skippable(const std::string& line) {
    const std::string t = trim(line);
    return t.empty() || t.front() == '#';
}

inline double parse_number(const std::string& token, std::size_t line) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(token, &used);
    } catch (const std::exception&) {
        throw ParseError("expected a number, got '" + token + "'", line);
    }
    if (used != token.size()) throw ParseError("expected a number, got '" + token + "'", line);
    return v;
}

inline std::vector<std::string> split_ws(const std::string& line) {
    std::istringstream in(line);
    std::vector<std::string> out;
    for (std::string tok; in >> tok;) out.push_back(tok);
    return out;
}

inline std::ifstream open(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "'");
    return in;
}

}  // namespace detail

/// `%.17g`, which round-trips every double.
inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Edge list: `u v [w]` per line, '#' comments, weight 1 by default.
/// Ids are opaque strings indexed in first-seen order; duplicate edges add up.
inline AdjacencyMatrix read_edge_list(std::istream& in) {
    struct Edge {
        std::size_t u, v;
        double w;
    };
    std::vector<std::string> labels;
    std::unordered_map<std::string, std::size_t> index;
    auto id = [&](const std::string& s) {
        auto [it, fresh] = index.emplace(s, labels.size());
        if (fresh) labels.push_back(s);
        return it->second;
    };
    std::vector<Edge> edges;
    std::string line;
    for (std::size_t no = 1; std::getline(in, line); ++no) {
        if (detail::skippable(line)) continue;
        const auto tok = detail::split_ws(line);
        if (tok.size() < 2 || tok.size() > 3) throw ParseError("expected 'u v [w]'", no);
        const double w = tok.size() == 3 ? detail::parse_number(tok[2], no) : 1.0;
        if (!std::isfinite(w) || w < 0.0) throw ParseError("edge weight must be finite and non-negative", no);
        const std::size_t u = id(tok[0]);
        const std::size_t v = id(tok[1]);
        edges.push_back({u, v, w});
    }
    const auto n = static_cast<Index>(labels.size());
    if (n < 2) throw ParseError("edge list must mention at least 2 nodes");
    Matrix a = Matrix::Zero(n, n);
    for (const auto& e : edges) {
        const auto u = static_cast<Index>(e.u), v = static_cast<Index>(e.v);
        a(u, v) += e.w;
        if (u != v) a(v, u) += e.w;
    }
    return AdjacencyMatrix(std::move(a), std::move(labels));
}

inline AdjacencyMatrix read_edge_list_file(const std::string& path) {
    auto in = detail::open(path);
    return read_edge_list(in);
}

/// Upper triangle (diagonal included) of the non-zero weights as `u v w`.
inline std::string write_edge_list(const AdjacencyMatrix& g) {
    std::string out;
    for (Index i = 0; i < g.size(); ++i)
        for (Index j = i; j < g.size(); ++j)
            if (g(i, j) != 0.0) out += g.label(i) + " " + g.label(j) + " " + format_double(g(i, j)) + "\n";
    return out;
}

inline std::string write_matrix_csv(const Matrix& m) {
    std::string out;
    for (Index i = 0; i < m.rows(); ++i) {
        for (Index j = 0; j < m.cols(); ++j) {
            if (j) out += ',';
            out += format_double(m(i, j));
        }
        out += '\n';
    }
    return out;
}

/// Dense, headerless, comma separated; every row must have the same width.
inline Matrix read_matrix_csv(std::istream& in) {
    std::vector<std::vector<double>> rows;
    std::string line;
    for (std::size_t no = 1; std::getline(in, line); ++no) {
        if (detail::skippable(line)) continue;
        std::vector<double> row;
        std::stringstream cells(line);
        for (std::string cell; std::getline(cells, cell, ',');) row.push_back(detail::parse_number(detail::trim(cell), no));
        if (!rows.empty() && row.size() != rows.front().size()) throw ParseError("ragged CSV row", no);
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ParseError("empty matrix file");
    Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j) m(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
    return m;
}

inline Matrix read_matrix_csv_file(const std::string& path) {
    auto in = detail::open(path);
    return read_matrix_csv(in);
}

/// `node_id<TAB>position` per node, in graph order.
inline std::string write_partition(const AdjacencyMatrix& g, const HardPartition& p) {
    std::string out;
    for (std::size_t i = 0; i < p.size(); ++i)
        out += g.label(static_cast<Index>(i)) + "\t" + std::to_string(p.assignment[i]) + "\n";
    return out;
}

/// `node_id position` lines; every node of the graph must appear exactly once.
inline HardPartition read_partition(std::istream& in, const AdjacencyMatrix& g) {
    std::vector<int> labels(static_cast<std::size_t>(g.size()), -1);
    std::string line;
    for (std::size_t no = 1; std::getline(in, line); ++no) {
        if (detail::skippable(line)) continue;
        const auto tok = detail::split_ws(line);
        if (tok.size() != 2) throw ParseError("expected 'node position'", no);
        const Index i = g.index_of(tok[0]);
        if (i < 0) throw ParseError("unknown node '" + tok[0] + "'", no);
        const double pos = detail::parse_number(tok[1], no);
        if (pos < 0 || pos != std::floor(pos)) throw ParseError("position must be a non-negative integer", no);
        auto& slot = labels[static_cast<std::size_t>(i)];
        if (slot >= 0) throw ParseError("node '" + tok[0] + "' listed twice", no);
        slot = static_cast<int>(pos);
    }
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] < 0) throw ParseError("node '" + g.label(static_cast<Index>(i)) + "' has no position");
    return HardPartition::from_labels(std::move(labels));
}

inline HardPartition read_partition_file(const std::string& path, const AdjacencyMatrix& g) {
    auto in = detail::open(path);
    return read_partition(in, g);
}

/// `i j [theta]` per line, node ids as in the graph; theta defaults to
/// `default_theta`.
inline ConstraintMatrix read_constraint_pairs(std::istream& in, const AdjacencyMatrix& g, double default_theta) {
    ConstraintMatrix theta(g.size());
    std::string line;
    for (std::size_t no = 1; std::getline(in, line); ++no) {
        if (detail::skippable(line)) continue;
        const auto tok = detail::split_ws(line);
        if (tok.size() < 2 || tok.size() > 3) throw ParseError("expected 'i j [theta]'", no);
        const Index i = g.index_of(tok[0]);
        const Index j = g.index_of(tok[1]);
        if (i < 0 || j < 0) throw ParseError("unknown node in constraint pair", no);
        if (i == j) throw ParseError("a node cannot be constrained against itself", no);
        const double w = tok.size() == 3 ? detail::parse_number(tok[2], no) : default_theta;
        if (!(w > 0.0) || !std::isfinite(w)) throw ParseError("constraint weight must be positive", no);
        theta.set(i, j, w);
    }
    return theta;
}

inline ConstraintMatrix read_constraint_pairs_file(const std::string& path, const AdjacencyMatrix& g,
                                                   double default_theta) {
    auto in = detail::open(path);
    return read_constraint_pairs(in, g, default_theta);
}

inline std::string write_constraint_pairs(const AdjacencyMatrix& g, const ConstraintMatrix& theta) {
    std::string out;
    for (auto [i, j] : theta.pairs()) out += g.label(i) + " " + g.label(j) + " " + format_double(theta.entries()(i, j)) + "\n";
    return out;
}

/// Binary 8-bit PGM, min-max normalised so the smallest value is black.
inline std::string write_pgm(const Matrix& m) {
    std::string out = "P5\n" + std::to_string(m.cols()) + " " + std::to_string(m.rows()) + "\n255\n";
    const double lo = m.size() ? m.minCoeff() : 0.0;
    const double hi = m.size() ? m.maxCoeff() : 0.0;
    const double span = hi - lo;
    for (Index i = 0; i < m.rows(); ++i)
        for (Index j = 0; j < m.cols(); ++j) {
            const double t = span > 0.0 ? (m(i, j) - lo) / span : 0.0;
            out += static_cast<char>(static_cast<unsigned char>(std::lround(255.0 * t)));
        }
    return out;
}

/// Planted-graph config, `key = value` lines:
///   sizes = 17 17 16            contiguous positions
///   density = 0.8 0.1; 0.1 0.8  rows separated by ';'
///   weight_log_mean, weight_log_sd, seed, self_loops (true/false)
inline PlantedSpec read_planted_spec(std::istream& in) {
    PlantedSpec spec = default_planted_spec();
    std::string line;
    for (std::size_t no = 1; std::getline(in, line); ++no) {
        if (detail::skippable(line)) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ParseError("expected 'key = value'", no);
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        if (key == "sizes") {
            std::vector<int> sizes;
            for (const auto& t : detail::split_ws(value)) {
                const double s = detail::parse_number(t, no);
                if (s < 1 || s != std::floor(s)) throw ParseError("sizes must be positive integers", no);
                sizes.push_back(static_cast<int>(s));
            }
            spec.partition = contiguous_partition(sizes);
        } else if (key == "density") {
            std::vector<std::vector<double>> rows;
            std::stringstream parts(value);
            for (std::string row; std::getline(parts, row, ';');) {
                std::vector<double> r;
                for (const auto& t : detail::split_ws(row)) r.push_back(detail::parse_number(t, no));
                if (!rows.empty() && r.size() != rows.front().size()) throw ParseError("ragged density matrix", no);
                rows.push_back(std::move(r));
            }
            if (rows.empty() || rows.size() != rows.front().size()) throw ParseError("density must be square", no);
            spec.block_density.resize(static_cast<Index>(rows.size()), static_cast<Index>(rows.size()));
            for (std::size_t i = 0; i < rows.size(); ++i)
                for (std::size_t j = 0; j < rows.size(); ++j)
                    spec.block_density(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
        } else if (key == "weight_log_mean") {
            spec.weight_log_mean = detail::parse_number(value, no);
        } else if (key == "weight_log_sd") {
            spec.weight_log_sd = detail::parse_number(value, no);
        } else if (key == "seed") {
            const double s = detail::parse_number(value, no);
            if (s < 0 || s != std::floor(s)) throw ParseError("seed must be a non-negative integer", no);
            spec.seed = static_cast<std::uint64_t>(s);
        } else if (key == "self_loops") {
            if (value != "true" && value != "false") throw ParseError("self_loops must be true or false", no);
            spec.self_loops = value == "true";
        } else {
            throw ParseError("unknown key '" + key + "'", no);
        }
    }
    if (spec.block_density.rows() != spec.partition.k)
        throw ParseError("sizes and density disagree on the number of positions");
    return spec;
}

inline PlantedSpec read_planted_spec_file(const std::string& path) {
    auto in = detail::open(path);
    return read_planted_spec(in);
}

}  // namespace altblock::io
