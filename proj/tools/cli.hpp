#pragma once

// `altblock` command line: factorize, alternative, sweep and generate.
// Exit codes: 0 ok, 2 config error, 3 parse error, 4 all runs failed.

#include <openssl/evp.h>

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "altblock/altblock.hpp"

namespace altblock::cli {

enum ExitCode : int { kOk = 0, kInternal = 1, kConfig = 2, kParse = 3, kAllRunsFailed = 4 };

inline std::string sha256_hex(const std::string& data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr);
    std::ostringstream out;
    for (unsigned int i = 0; i < len; ++i) out << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
    return out.str();
}

/// Stages every file of one output directory in memory and writes them on
/// commit, manifest last. On failure the staged files go to `failed/`.
class OutputWriter {
public:
    explicit OutputWriter(std::filesystem::path dir) : dir_(std::move(dir)) {}

    void add(const std::string& relative, std::string content) { files_[relative] = std::move(content); }

    /// Writes all files and `manifest.json`, which lists each with its checksum.
    void commit(nlohmann::json manifest) const {
        write_all(dir_);
        nlohmann::json inventory = nlohmann::json::array();
        for (const auto& [name, content] : files_)
            inventory.push_back({{"path", name}, {"bytes", content.size()}, {"sha256", sha256_hex(content)}});
        manifest["files"] = std::move(inventory);
        manifest["output_dir"] = dir_.string();
        manifest["created"] = timestamp();
        write_file(dir_ / "manifest.json", manifest.dump(2) + "\n");
    }

    void fail(const std::string& message) const {
        const auto failed = dir_ / "failed";
        write_all(failed);
        write_file(failed / "error.txt", message + "\n");
    }

private:
    static std::string timestamp() {
        const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
        std::tm tm{};
        gmtime_r(&now, &tm);
        std::ostringstream out;
        out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
        return out.str();
    }

    static void write_file(const std::filesystem::path& path, const std::string& content) {
        std::filesystem::create_directories(path.parent_path());
        std::ofstream out(path, std::ios::binary);
        out << content;
        if (!out) throw Error("cannot write '" + path.string() + "'");
    }

    void write_all(const std::filesystem::path& root) const {
        for (const auto& [name, content] : files_) write_file(root / name, content);
    }

    std::filesystem::path dir_;
    std::map<std::string, std::string> files_;
};

struct Options {
    std::string graph;
    std::string approach = "base";
    int k = 2;
    std::vector<double> betas;
    int restarts = 100;
    std::uint64_t seed = 0;
    double tolerance = 1e-5;
    int max_iters = 500;
    std::vector<std::string> reference_images;
    std::string reference_partition;
    std::string constraint_pairs;
    std::vector<double> constraint_fractions;
    std::string target_partition;
    double theta = 1.0;
    std::string metric = "d_rkl";
    std::string out;
};

inline const char* kReportHeader = "run_id,seed,beta,approach,objective,c_ind,d_rkl,nmi,effective_k\n";

inline std::string optional_cell(const std::optional<double>& v) { return v ? io::format_double(*v) : ""; }

inline std::string report_row(std::size_t run_id, std::uint64_t seed, double beta, Approach approach,
                              const EvaluationReport& r) {
    return std::to_string(run_id) + "," + std::to_string(seed) + "," + io::format_double(beta) + "," +
           std::string(to_string(approach)) + "," + io::format_double(r.objective) + "," +
           io::format_double(r.c_ind) + "," + optional_cell(r.d_rkl_to_reference) + "," +
           optional_cell(r.nmi_to_target) + "," + std::to_string(r.effective_k) + "\n";
}

/// Everything a batch needs, resolved from the flags.
struct Problem {
    AdjacencyMatrix graph;
    SolverConfig config;
    ReferenceSet refs;
    /// beta reported in CSVs (the single trade-off, or 1 for multi-reference).
    double beta = 0.0;
};

inline Approach parse_approach(const Options& o) {
    if (o.approach == "base") return Approach::Base;
    if (o.approach == "cannot-link") return Approach::CannotLink;
    if (o.approach == "image-dissim")
        return o.reference_images.size() > 1 ? Approach::GeneralizedImageDissimilarity : Approach::ImageDissimilarity;
    throw ConfigError("unknown approach '" + o.approach + "'");
}

/// Loads the graph and references. `fraction`, when set, selects the share
/// of the perfect cannot-link set (needs reference and target partitions).
inline Problem load_problem(const Options& o, std::optional<double> fraction = std::nullopt) {
    if (o.restarts < 1) throw ConfigError("--restarts must be at least 1");
    Problem p{io::read_edge_list_file(o.graph), {}, {}, 0.0};
    SolverConfig& cfg = p.config;
    cfg.k = o.k;
    cfg.tolerance = o.tolerance;
    cfg.max_iterations = o.max_iters;
    cfg.seed = o.seed;
    cfg.approach = parse_approach(o);

    if (!o.reference_partition.empty()) p.refs.reference_partition = io::read_partition_file(o.reference_partition, p.graph);
    if (!o.target_partition.empty()) p.refs.target_partition = io::read_partition_file(o.target_partition, p.graph);

    switch (cfg.approach) {
        case Approach::Base:
            cfg.beta = 0.0;
            break;
        case Approach::CannotLink: {
            cfg.beta = o.betas.empty() ? 1.0 : o.betas.front();
            if (!o.constraint_pairs.empty()) {
                p.refs.constraint_matrix = io::read_constraint_pairs_file(o.constraint_pairs, p.graph, o.theta);
            } else if (p.refs.reference_partition && fraction) {
                if (!p.refs.target_partition)
                    throw ConfigError("--constraint-fraction needs --target-partition");
                p.refs.constraint_matrix = constraints_perfect(*p.refs.reference_partition, *p.refs.target_partition,
                                                               o.theta, *fraction, o.seed);
            } else if (p.refs.reference_partition) {
                p.refs.constraint_matrix = constraints_from_reference(*p.refs.reference_partition, o.theta);
            } else {
                throw ConfigError("cannot-link needs --constraint-pairs or --reference-partition");
            }
            break;
        }
        case Approach::ImageDissimilarity:
        case Approach::GeneralizedImageDissimilarity: {
            if (o.reference_images.empty()) throw ConfigError("image-dissim needs --reference-image");
            const bool multi = o.reference_images.size() > 1;
            if (multi && o.betas.size() != o.reference_images.size())
                throw ConfigError("give one --beta per --reference-image");
            for (std::size_t i = 0; i < o.reference_images.size(); ++i)
                p.refs.reference_images.push_back(
                    {io::read_matrix_csv_file(o.reference_images[i]), multi ? o.betas[i] : 1.0});
            cfg.beta = multi ? 1.0 : (o.betas.empty() ? 1.0 : o.betas.front());
            break;
        }
    }
    p.beta = cfg.beta;
    cfg.validate();
    p.refs.validate(cfg, p.graph.size());
    return p;
}

/// Node order grouping the positions of a partition, stable within a position.
inline std::vector<Index> position_order(const HardPartition& part) {
    std::vector<Index> order(part.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<Index>(i);
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
        return part.assignment[static_cast<std::size_t>(a)] < part.assignment[static_cast<std::size_t>(b)];
    });
    return order;
}

inline Matrix permuted(const Matrix& m, const std::vector<Index>& order) {
    const auto n = static_cast<Index>(order.size());
    Matrix out(n, n);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) out(i, j) = m(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
    return out;
}

inline std::string trace_csv(const SolverTrace& t) {
    std::string out = "iteration,objective\n0," + io::format_double(t.initial_objective) + "\n";
    for (std::size_t i = 0; i < t.objective_per_iteration.size(); ++i)
        out += std::to_string(i + 1) + "," + io::format_double(t.objective_per_iteration[i]) + "\n";
    return out;
}

inline MetaMetric parse_metric(const std::string& m) {
    if (m == "d_rkl") return MetaMetric::SymmetrizedDRkl;
    if (m == "nmi") return MetaMetric::OneMinusNmi;
    throw ConfigError("unknown --metric '" + m + "' (d_rkl or nmi)");
}

inline void stage_blockmodel(OutputWriter& w, const std::string& prefix, const AdjacencyMatrix& g, const RunRecord& run) {
    w.add(prefix + "C.csv", io::write_matrix_csv(run.blockmodel.membership));
    w.add(prefix + "M.csv", io::write_matrix_csv(run.blockmodel.image));
    w.add(prefix + "partition.txt", io::write_partition(g, harden(run.blockmodel)));
}

inline void stage_ivat(OutputWriter& w, const std::string& prefix, const RestartBatch& batch, MetaMetric metric) {
    if (batch.runs.size() < 2) return;
    const IvatResult iv = ivat_reorder(meta_dissimilarity(batch, metric));
    w.add(prefix + "ivat.csv", io::write_matrix_csv(iv.ivat));
    w.add(prefix + "ivat.pgm", io::write_pgm(iv.ivat));
    std::string order;
    for (Index r : iv.permutation) order += std::to_string(static_cast<std::size_t>(r)) + "\n";
    w.add(prefix + "ivat_order.txt", order);
}

/// Runs the batch and stages the outputs shared by factorize and alternative.
/// Returns the batch and its groups.
inline std::pair<RestartBatch, std::vector<SolutionGroup>> run_and_stage(const Options& o, const Problem& p,
                                                                          OutputWriter& w) {
    RestartBatch batch = run_batch(p.graph, p.config, p.refs, o.restarts, o.seed);
    auto groups = group_solutions(batch);
    const RunRecord& modal = batch.runs[groups.front().representative];

    stage_blockmodel(w, "", p.graph, modal);
    std::string report = kReportHeader;
    for (std::size_t r = 0; r < batch.runs.size(); ++r)
        report += report_row(r, batch.runs[r].seed, p.beta, p.config.approach, batch.runs[r].report);
    w.add("report.csv", report);
    w.add("modal.csv", std::string(kReportHeader) +
                           report_row(groups.front().representative, modal.seed, p.beta, p.config.approach, modal.report));
    w.add("trace.csv", trace_csv(modal.trace));

    std::string gcsv = "rank,occurrences,representative_run,representative_seed,objective,c_ind,d_rkl,nmi,effective_k\n";
    for (std::size_t i = 0; i < groups.size(); ++i) {
        const RunRecord& rep = batch.runs[groups[i].representative];
        gcsv += std::to_string(i) + "," + std::to_string(groups[i].occurrences) + "," +
                std::to_string(groups[i].representative) + "," + std::to_string(rep.seed) + "," +
                io::format_double(rep.report.objective) + "," + io::format_double(rep.report.c_ind) + "," +
                optional_cell(rep.report.d_rkl_to_reference) + "," + optional_cell(rep.report.nmi_to_target) + "," +
                std::to_string(rep.report.effective_k) + "\n";
    }
    w.add("groups.csv", gcsv);

    if (!batch.failures.empty()) {
        std::string f = "seed,message\n";
        for (const auto& fail : batch.failures) f += std::to_string(fail.seed) + ",\"" + fail.message + "\"\n";
        w.add("failures.csv", f);
    }

    stage_ivat(w, "", batch, parse_metric(o.metric));
    const auto order = position_order(harden(modal.blockmodel));
    w.add("adjacency.pgm", io::write_pgm(permuted(p.graph.weights(), order)));
    w.add("reconstruction.pgm", io::write_pgm(permuted(reconstruct(modal.blockmodel), order)));
    return {std::move(batch), std::move(groups)};
}

inline nlohmann::json base_manifest(const std::string& command, const Options& o) {
    std::vector<std::uint64_t> seeds;
    for (int i = 0; i < o.restarts; ++i) seeds.push_back(o.seed + static_cast<std::uint64_t>(i));
    nlohmann::json refs = nlohmann::json::object();
    if (!o.reference_images.empty()) refs["images"] = o.reference_images;
    if (!o.reference_partition.empty()) refs["partition"] = o.reference_partition;
    if (!o.constraint_pairs.empty()) refs["constraint_pairs"] = o.constraint_pairs;
    if (!o.target_partition.empty()) refs["target"] = o.target_partition;
    return {{"command", command}, {"input", o.graph},     {"approach", o.approach},
            {"k", o.k},           {"betas", o.betas},     {"restarts", o.restarts},
            {"seeds", seeds},     {"references", refs},   {"tolerance", o.tolerance},
            {"max_iterations", o.max_iters}};
}

inline void cmd_factorize(const Options& o, OutputWriter& w) {
    const Problem p = load_problem(o, o.constraint_fractions.empty() ? std::nullopt
                                                                      : std::optional<double>(o.constraint_fractions.front()));
    run_and_stage(o, p, w);
    w.commit(base_manifest("factorize", o));
}

inline void cmd_alternative(const Options& o, OutputWriter& w) {
    const Problem p = load_problem(o, o.constraint_fractions.empty() ? std::nullopt
                                                                      : std::optional<double>(o.constraint_fractions.front()));
    if (p.config.approach == Approach::Base) throw ConfigError("alternative needs --approach cannot-link or image-dissim");
    auto [batch, groups] = run_and_stage(o, p, w);
    for (std::size_t i = 0; i < groups.size(); ++i) {
        char prefix[32];
        std::snprintf(prefix, sizeof prefix, "groups/g%03zu/", i);
        stage_blockmodel(w, prefix, p.graph, batch.runs[groups[i].representative]);
    }
    w.commit(base_manifest("alternative", o));
}

inline void cmd_sweep(const Options& o, OutputWriter& w) {
    std::vector<double> betas = o.betas.empty() ? std::vector<double>{1.0} : o.betas;
    std::vector<std::optional<double>> fractions;
    for (double f : o.constraint_fractions) fractions.emplace_back(f);
    if (fractions.empty()) fractions.emplace_back(std::nullopt);

    std::string csv = "cell,approach,beta,fraction,restarts,successful,groups,occurrences,objective,c_ind,d_rkl,nmi,effective_k\n";
    int cell = 0, successful_cells = 0;
    for (const auto& fraction : fractions)
        for (double beta : betas) {
            Options cell_opts = o;
            if (o.reference_images.size() <= 1) cell_opts.betas = {beta};
            Problem p = load_problem(cell_opts, fraction);
            if (o.reference_images.size() > 1) p.config.beta = beta;
            p.beta = p.config.beta;

            const std::string lead = std::to_string(cell) + "," + std::string(to_string(p.config.approach)) + "," +
                                     io::format_double(p.beta) + "," + optional_cell(fraction) + "," +
                                     std::to_string(o.restarts) + ",";
            RestartBatch batch;
            try {
                batch = run_batch(p.graph, p.config, p.refs, o.restarts, o.seed);
            } catch (const AllRunsFailed&) {
                // Recorded as an empty cell so the rest of the grid still runs.
                csv += lead + "0,0,0,,,,,\n";
                ++cell;
                continue;
            }
            ++successful_cells;
            const auto groups = group_solutions(batch);
            const RunRecord& modal = batch.runs[groups.front().representative];
            csv += lead + std::to_string(batch.runs.size()) + "," + std::to_string(groups.size()) + "," +
                   std::to_string(groups.front().occurrences) + "," + io::format_double(modal.report.objective) +
                   "," + io::format_double(modal.report.c_ind) + "," + optional_cell(modal.report.d_rkl_to_reference) +
                   "," + optional_cell(modal.report.nmi_to_target) + "," + std::to_string(modal.report.effective_k) +
                   "\n";
            char prefix[32];
            std::snprintf(prefix, sizeof prefix, "cells/cell_%03d_", cell);
            stage_ivat(w, prefix, batch, parse_metric(o.metric));
            ++cell;
        }
    w.add("sweep.csv", csv);
    if (successful_cells == 0) throw AllRunsFailed("every sweep cell produced only non-finite runs");
    nlohmann::json manifest = base_manifest("sweep", o);
    manifest["constraint_fractions"] = o.constraint_fractions;
    w.commit(manifest);
}

inline void cmd_generate(const std::string& config_path, OutputWriter& w) {
    const PlantedSpec spec = io::read_planted_spec_file(config_path);
    const AdjacencyMatrix g = generate(spec);
    w.add("graph.edgelist", io::write_edge_list(g));
    w.add("partition.txt", io::write_partition(g, spec.partition));
    w.commit({{"command", "generate"}, {"input", config_path}, {"seed", spec.seed}});
}

inline void add_solver_flags(CLI::App& app, Options& o, bool graph_positional = true) {
    if (graph_positional) app.add_option("graph", o.graph, "edge-list file (u v [w])")->required();
    app.add_option("--approach", o.approach, "base | cannot-link | image-dissim");
    app.add_option("--k", o.k, "number of positions");
    app.add_option("--beta", o.betas, "trade-off; repeat to pair with several --reference-image");
    app.add_option("--restarts", o.restarts, "seeded restarts per batch");
    app.add_option("--seed", o.seed, "first seed; restarts use seed, seed+1, ...");
    app.add_option("--tolerance", o.tolerance, "relative objective change stop threshold");
    app.add_option("--max-iters", o.max_iters, "iteration cap per restart");
    app.add_option("--reference-image", o.reference_images, "reference image matrix CSV (k x k)");
    app.add_option("--reference-partition", o.reference_partition, "reference partition (node position)");
    app.add_option("--constraint-pairs", o.constraint_pairs, "cannot-link pair list (i j [theta])");
    app.add_option("--constraint-fraction", o.constraint_fractions,
                   "share of the perfect cannot-link set; repeat in sweeps");
    app.add_option("--target-partition", o.target_partition, "known target partition for NMI");
    app.add_option("--theta", o.theta, "default cannot-link weight");
    app.add_option("--metric", o.metric, "iVAT dissimilarity: d_rkl | nmi");
    app.add_option("--out", o.out, "output directory")->required();
}

/// Entry point shared by the binary and the tests.
inline int run(int argc, const char* const* argv, std::ostream& err = std::cerr) {
    CLI::App app{"Alternative blockmodel discovery by symmetric non-negative matrix tri-factorisation"};
    app.require_subcommand(1);
    Options o;
    std::string generate_config;
    auto* factorize = app.add_subcommand("factorize", "factorise a graph and report the modal blockmodel");
    add_solver_flags(*factorize, o);
    auto* alternative = app.add_subcommand("alternative", "find alternatives to reference blockmodels");
    add_solver_flags(*alternative, o);
    auto* sweep = app.add_subcommand("sweep", "grid over beta and constraint fractions");
    add_solver_flags(*sweep, o);
    auto* gen = app.add_subcommand("generate", "sample a planted-blockmodel graph");
    gen->add_option("config", generate_config, "key = value planted spec")->required();
    gen->add_option("--out", o.out, "output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        err << e.what() << "\n";
        return kConfig;
    }

    OutputWriter writer(o.out);
    auto failed = [&](const std::exception& e, int code) {
        err << "error: " << e.what() << "\n";
        try {
            writer.fail(e.what());
        } catch (const std::exception& inner) {
            err << "error: " << inner.what() << "\n";
        }
        return code;
    };
    try {
        if (*factorize) cmd_factorize(o, writer);
        else if (*alternative) cmd_alternative(o, writer);
        else if (*sweep) cmd_sweep(o, writer);
        else cmd_generate(generate_config, writer);
    } catch (const ParseError& e) {
        return failed(e, kParse);
    } catch (const ConfigError& e) {
        return failed(e, kConfig);
    } catch (const AllRunsFailed& e) {
        return failed(e, kAllRunsFailed);
    } catch (const std::exception& e) {
        return failed(e, kInternal);
    }
    return kOk;
}

}  // namespace altblock::cli
