// Command-line driver for the spgemm1d shared library. Talks to the engine
// exclusively through the C API in spgemm1d.h.

#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "spgemm1d.h"

namespace {

struct CommonFlags {
    int64_t procs = 1;
    int64_t blocks = 2048;
    std::string strategy = "identity";
    std::string semiring = "real";
    int workers = 0;
    bool naive = false;
    bool oracle = false;
    bool symmetrize = false;
    bool timings = false;
    std::string out;
    std::string report;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool with_semiring = true) {
    cmd->add_option("-p,--procs", f.procs, "logical process count")->check(CLI::PositiveNumber);
    cmd->add_option("-k,--blocks", f.blocks, "block count K for the fetch planner")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--strategy", f.strategy,
                    "column layout strategy: identity | random:<seed> | partition:<file>");
    if (with_semiring)
        cmd->add_option("--semiring", f.semiring, "real | integer | boolean")
            ->check(CLI::IsMember({"real", "integer", "boolean"}));
    cmd->add_option("--workers", f.workers, "worker threads executing the logical processes");
    cmd->add_flag("--naive", f.naive, "run the fetch-everything baseline");
    cmd->add_flag("--oracle", f.oracle, "also run the serial reference and diff");
    cmd->add_flag("--symmetrize", f.symmetrize,
                  "allow the partition strategy on pattern-asymmetric input");
    cmd->add_flag("--timings", f.timings, "include wall-clock phase times in the report");
    cmd->add_option("-o,--out", f.out, "write the result to this path");
    cmd->add_option("--report", f.report, "write the JSON run report to this path");
}

class Fail {
public:
    explicit Fail(int code) : code_(code) {}
    int code() const { return code_; }

private:
    int code_;
};

[[noreturn]] void die(int code, const std::string& msg) {
    std::cerr << "spgemm1d: " << msg << "\n";
    throw Fail(code);
}

void check(sp1d_status st) {
    if (st != SP1D_OK) die(1, sp1d_last_error());
}

struct ConfigPtr {
    sp1d_config* p;
    ConfigPtr() : p(sp1d_config_new()) {}
    ConfigPtr(const ConfigPtr&) = delete;
    ConfigPtr& operator=(const ConfigPtr&) = delete;
    ~ConfigPtr() { sp1d_config_free(p); }
};

struct MatrixPtr {
    sp1d_matrix* p = nullptr;
    MatrixPtr() = default;
    MatrixPtr(MatrixPtr&& o) noexcept : p(o.p) { o.p = nullptr; }
    MatrixPtr& operator=(MatrixPtr&& o) noexcept {
        if (this != &o) {
            sp1d_matrix_free(p);
            p = o.p;
            o.p = nullptr;
        }
        return *this;
    }
    MatrixPtr(const MatrixPtr&) = delete;
    MatrixPtr& operator=(const MatrixPtr&) = delete;
    ~MatrixPtr() { sp1d_matrix_free(p); }
};

struct ReportPtr {
    sp1d_report* p = nullptr;
    ReportPtr() = default;
    ReportPtr(ReportPtr&& o) noexcept : p(o.p) { o.p = nullptr; }
    ReportPtr& operator=(ReportPtr&& o) noexcept {
        if (this != &o) {
            sp1d_report_free(p);
            p = o.p;
            o.p = nullptr;
        }
        return *this;
    }
    ReportPtr(const ReportPtr&) = delete;
    ReportPtr& operator=(const ReportPtr&) = delete;
    ~ReportPtr() { sp1d_report_free(p); }
};

void apply_strategy(sp1d_config* cfg, const std::string& s) {
    if (s == "identity") {
        check(sp1d_config_set_strategy_identity(cfg));
        return;
    }
    if (s.rfind("random:", 0) == 0) {
        uint64_t seed = 0;
        try {
            seed = std::stoull(s.substr(7));
        } catch (...) {
            die(2, "bad seed in --strategy " + s);
        }
        check(sp1d_config_set_strategy_random(cfg, seed));
        return;
    }
    if (s.rfind("partition:", 0) == 0) {
        check(sp1d_config_set_strategy_partition_file(cfg, s.substr(10).c_str()));
        return;
    }
    die(2, "unknown strategy '" + s + "' (expected identity | random:<seed> | partition:<file>)");
}

sp1d_semiring parse_semiring(const std::string& s) {
    if (s == "integer") return SP1D_SEMIRING_INT_PLUS_TIMES;
    if (s == "boolean") return SP1D_SEMIRING_BOOL_OR_AND;
    return SP1D_SEMIRING_REAL_PLUS_TIMES;
}

void build_config(sp1d_config* cfg, const CommonFlags& f) {
    check(sp1d_config_set_procs(cfg, f.procs));
    check(sp1d_config_set_blocks(cfg, f.blocks));
    check(sp1d_config_set_workers(cfg, f.workers));
    check(sp1d_config_set_semiring(cfg, parse_semiring(f.semiring)));
    check(sp1d_config_set_symmetrize(cfg, f.symmetrize ? 1 : 0));
    apply_strategy(cfg, f.strategy);
    check(sp1d_config_set_naive(cfg, f.naive ? 1 : 0));
    check(sp1d_config_set_oracle(cfg, f.oracle ? 1 : 0));
    check(sp1d_config_set_timings(cfg, f.timings ? 1 : 0));
}

MatrixPtr load(const std::string& path) {
    MatrixPtr m;
    check(sp1d_matrix_read_mm(path.c_str(), &m.p));
    return m;
}

void write_report_file(const ReportPtr& rep, const std::string& path) {
    if (path.empty() || !rep.p) return;
    char* json = nullptr;
    check(sp1d_report_json(rep.p, &json));
    std::ofstream out(path);
    if (!out) {
        sp1d_string_free(json);
        die(1, "cannot open '" + path + "' for writing");
    }
    out << json;
    sp1d_string_free(json);
    if (!out) die(1, "write to '" + path + "' failed");
}

void print_summary(const MatrixPtr& c, const ReportPtr& rep) {
    if (c.p) {
        int64_t m = 0, n = 0, nnz = 0;
        check(sp1d_matrix_dims(c.p, &m, &n, &nnz));
        std::printf("result: %" PRId64 " x %" PRId64 ", %" PRId64 " nonzeros\n", m, n, nnz);
    }
    if (rep.p) {
        char* json = nullptr;
        check(sp1d_report_json(rep.p, &json));
        std::fputs(json, stdout);
        sp1d_string_free(json);
    }
}

int run_cli(int argc, char** argv) {
    CLI::App app{"sparsity-aware 1D SpGEMM engine"};
    app.require_subcommand(1);

    CommonFlags mul_f, sq_f, gal_f, bc_f, an_f;
    std::string mul_a, mul_b, sq_a, gal_a, gal_r, gal_mode = "onedim", gal_write_r;
    std::string bc_a, an_a, an_b, part_a, part_out, part_report;
    int64_t bc_sources = 0, bc_batch = 4096, part_procs = 2;
    uint64_t bc_seed = 0;
    double an_threshold = 0.30;

    auto* mul = app.add_subcommand("multiply", "C = A * B through the 1D runtime");
    mul->add_option("A", mul_a, "left operand (Matrix Market)")->required();
    mul->add_option("B", mul_b, "right operand (Matrix Market)")->required();
    add_common(mul, mul_f);

    auto* sq = app.add_subcommand("square", "C = A * A");
    sq->add_option("A", sq_a, "square matrix (Matrix Market)")->required();
    add_common(sq, sq_f);

    auto* gal = app.add_subcommand("galerkin", "C = R^T A R");
    gal->add_option("A", gal_a, "square matrix (Matrix Market)")->required();
    gal->add_option("--restriction", gal_r,
                    "restriction operator R; generated via MIS-2 aggregation when omitted");
    gal->add_option("--mode", gal_mode, "right-multiply engine")
        ->check(CLI::IsMember({"onedim", "outer"}));
    gal->add_option("--write-restriction", gal_write_r, "write the applied R to this path");
    add_common(gal, gal_f);

    auto* bc = app.add_subcommand("bc", "batched approximate betweenness centrality");
    bc->add_option("A", bc_a, "graph adjacency (Matrix Market)")->required();
    bc->add_option("--sources", bc_sources, "number of sampled source vertices")->required();
    bc->add_option("--batch-size", bc_batch, "sources per batch")->check(CLI::PositiveNumber);
    bc->add_option("--seed", bc_seed, "source sampling seed");
    add_common(bc, bc_f, /*with_semiring=*/false);

    auto* an = app.add_subcommand("analyze", "planning-only communication-volume analysis");
    an->add_option("A", an_a, "matrix whose columns are fetched")->required();
    an->add_option("B", an_b, "stationary operand; defaults to A");
    an->add_option("--threshold", an_threshold, "advisory threshold on CV/memA")
        ->check(CLI::Range(1e-9, 1.0));
    add_common(an, an_f, /*with_semiring=*/false);

    auto* part = app.add_subcommand("partition", "built-in greedy partitioner");
    part->add_option("A", part_a, "square matrix (Matrix Market)")->required();
    part->add_option("-p,--procs", part_procs, "number of parts")->check(CLI::PositiveNumber);
    part->add_option("-o,--out", part_out, "partition-vector output file")->required();
    part->add_option("--report", part_report, "write the JSON run report to this path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*mul) {
            ConfigPtr cfg;
            build_config(cfg.p, mul_f);
            MatrixPtr a = load(mul_a), b = load(mul_b), c;
            ReportPtr rep;
            check(sp1d_multiply(a.p, b.p, cfg.p, &c.p, &rep.p));
            if (!mul_f.out.empty()) check(sp1d_matrix_write_mm(c.p, mul_f.out.c_str()));
            write_report_file(rep, mul_f.report);
            print_summary(c, rep);
        } else if (*sq) {
            ConfigPtr cfg;
            build_config(cfg.p, sq_f);
            MatrixPtr a = load(sq_a), c;
            ReportPtr rep;
            check(sp1d_square(a.p, cfg.p, &c.p, &rep.p));
            if (!sq_f.out.empty()) check(sp1d_matrix_write_mm(c.p, sq_f.out.c_str()));
            write_report_file(rep, sq_f.report);
            print_summary(c, rep);
        } else if (*gal) {
            ConfigPtr cfg;
            build_config(cfg.p, gal_f);
            MatrixPtr a = load(gal_a), r, c, r_used;
            if (!gal_r.empty()) r = load(gal_r);
            ReportPtr rep;
            const sp1d_galerkin_mode mode =
                gal_mode == "outer" ? SP1D_GALERKIN_OUTER_PRODUCT_RIGHT : SP1D_GALERKIN_ONEDIM;
            check(sp1d_galerkin(a.p, r.p, mode, cfg.p, &c.p, &r_used.p, &rep.p));
            if (!gal_f.out.empty()) check(sp1d_matrix_write_mm(c.p, gal_f.out.c_str()));
            if (!gal_write_r.empty()) check(sp1d_matrix_write_mm(r_used.p, gal_write_r.c_str()));
            write_report_file(rep, gal_f.report);
            print_summary(c, rep);
        } else if (*bc) {
            ConfigPtr cfg;
            build_config(cfg.p, bc_f);
            MatrixPtr g = load(bc_a);
            int64_t n = 0;
            check(sp1d_matrix_dims(g.p, &n, nullptr, nullptr));
            std::vector<double> scores(static_cast<size_t>(n), 0.0);
            ReportPtr rep;
            check(sp1d_bc(g.p, bc_sources, bc_batch, bc_seed, cfg.p, scores.data(), &rep.p));
            if (!bc_f.out.empty()) {
                std::ofstream out(bc_f.out);
                if (!out) die(1, "cannot open '" + bc_f.out + "' for writing");
                char buf[64];
                for (double s : scores) {
                    std::snprintf(buf, sizeof buf, "%.17g", s);
                    out << buf << '\n';
                }
                if (!out) die(1, "write to '" + bc_f.out + "' failed");
            }
            write_report_file(rep, bc_f.report);
            print_summary(MatrixPtr{}, rep);
        } else if (*an) {
            ConfigPtr cfg;
            build_config(cfg.p, an_f);
            check(sp1d_config_set_threshold(cfg.p, an_threshold));
            MatrixPtr a = load(an_a), b;
            if (!an_b.empty()) b = load(an_b);
            int advisory = 0;
            double ratio = 0.0;
            ReportPtr rep;
            check(sp1d_analyze(a.p, b.p, cfg.p, &advisory, &ratio, &rep.p));
            write_report_file(rep, an_f.report);
            print_summary(MatrixPtr{}, rep);
            if (advisory)
                std::printf("advisory: cv/memA %.4f exceeds threshold %.4f; "
                            "consider graph partitioning before the multiply\n",
                            ratio, an_threshold);
            else
                std::printf("cv/memA %.4f within threshold %.4f\n", ratio, an_threshold);
        } else if (*part) {
            MatrixPtr a = load(part_a);
            int64_t n = 0;
            check(sp1d_matrix_dims(a.p, nullptr, &n, nullptr));
            std::vector<int64_t> ids(static_cast<size_t>(n), 0);
            ReportPtr rep;
            check(sp1d_partition(a.p, part_procs, ids.data(), &rep.p));
            std::ofstream out(part_out);
            if (!out) die(1, "cannot open '" + part_out + "' for writing");
            for (int64_t id : ids) out << id << '\n';
            if (!out) die(1, "write to '" + part_out + "' failed");
            write_report_file(rep, part_report);
            print_summary(MatrixPtr{}, rep);
        }
    } catch (const Fail& f) {
        return f.code();
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) { return run_cli(argc, argv); }
