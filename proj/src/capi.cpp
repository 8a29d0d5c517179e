#include "spgemm1d.h"

#include <cmath>
#include <cstring>
#include <string>

#include "spgemm1d/apps.hpp"
#include "spgemm1d/matrix_market.hpp"
#include "spgemm1d/report.hpp"

using namespace spgemm1d;

struct sp1d_matrix {
    SparseMatrix<double> m;
};

struct sp1d_config {
    EngineConfig engine;
    SemiringId semiring = SemiringId::RealPlusTimes;
    double threshold = kDefaultCvThreshold;
    bool timings = false;
    std::string partition_path;
};

struct sp1d_report {
    std::string json;
};

namespace {

thread_local std::string g_last_error;

sp1d_status fail(sp1d_status st, const char* what) {
    g_last_error = what ? what : "unknown error";
    return st;
}

template <class Fn>
sp1d_status guarded(Fn&& fn) {
    try {
        fn();
        return SP1D_OK;
    } catch (const IndexError& e) {
        return fail(SP1D_ERR_INDEX, e.what());
    } catch (const ShapeError& e) {
        return fail(SP1D_ERR_SHAPE, e.what());
    } catch (const ParseError& e) {
        return fail(SP1D_ERR_PARSE, e.what());
    } catch (const ConfigError& e) {
        return fail(SP1D_ERR_CONFIG, e.what());
    } catch (const IoError& e) {
        return fail(SP1D_ERR_IO, e.what());
    } catch (const std::bad_alloc& e) {
        return fail(SP1D_ERR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return fail(SP1D_ERR_INTERNAL, e.what());
    }
}

template <class SR>
SparseMatrix<typename SR::value_type> to_semiring_values(const SparseMatrix<double>& a);

template <>
SparseMatrix<double> to_semiring_values<RealPlusTimes>(const SparseMatrix<double>& a) {
    return a;
}

template <>
SparseMatrix<std::int64_t> to_semiring_values<IntPlusTimes>(const SparseMatrix<double>& a) {
    return map_values<std::int64_t>(a, [](double v) {
        if (v != std::floor(v) || std::abs(v) > 9.0e15)
            throw ConfigError("integer semiring requires integral matrix values");
        return static_cast<std::int64_t>(v);
    });
}

template <>
SparseMatrix<std::uint8_t> to_semiring_values<BoolOrAnd>(const SparseMatrix<double>& a) {
    return map_values<std::uint8_t>(a, [](double v) { return static_cast<std::uint8_t>(v != 0.0); });
}

template <class T>
SparseMatrix<double> to_double_values(const SparseMatrix<T>& a) {
    return map_values<double>(a, [](T v) { return static_cast<double>(v); });
}

const char* semiring_name(SemiringId id) {
    switch (id) {
        case SemiringId::RealPlusTimes: return "real-plus-times";
        case SemiringId::IntPlusTimes: return "int-plus-times";
        default: return "bool-or-and";
    }
}

std::string strategy_name(const sp1d_config& c) {
    switch (c.engine.strategy.kind) {
        case Strategy::Kind::Identity: return "identity";
        case Strategy::Kind::Random: return "random:" + std::to_string(c.engine.strategy.seed);
        default: return "partition:" + c.partition_path;
    }
}

// The worker count is deliberately absent: it is an execution knob that must
// not influence any result, and reports are required to be identical across
// worker counts.
ReportFields base_config_fields(const sp1d_config& c, bool with_semiring = true) {
    ReportFields f;
    f.emplace_back("procs", static_cast<std::int64_t>(c.engine.procs));
    f.emplace_back("blocks", static_cast<std::int64_t>(c.engine.blocks));
    f.emplace_back("strategy", strategy_name(c));
    if (with_semiring) f.emplace_back("semiring", std::string(semiring_name(c.semiring)));
    f.emplace_back("naive", c.engine.naive);
    f.emplace_back("oracle", c.engine.oracle);
    return f;
}

void attach_report(sp1d_report** out, const ReportInfo& info) {
    if (!out) return;
    *out = new sp1d_report{render_report(info)};
}

void set_result_dims(ReportInfo& info, const SparseMatrix<double>& m) {
    info.has_result = true;
    info.result_rows = m.nrows();
    info.result_cols = m.ncols();
    info.result_nnz = m.nnz();
}

template <class Fn>
void with_semiring(SemiringId id, Fn&& fn) {
    switch (id) {
        case SemiringId::RealPlusTimes: fn(RealPlusTimes{}); break;
        case SemiringId::IntPlusTimes: fn(IntPlusTimes{}); break;
        default: fn(BoolOrAnd{}); break;
    }
}

const sp1d_config& cfg_or_default(const sp1d_config* c) {
    static const sp1d_config def{};
    return c ? *c : def;
}

}  // namespace

extern "C" {

const char* sp1d_last_error(void) { return g_last_error.c_str(); }

/* ---- matrices ---------------------------------------------------------- */

sp1d_status sp1d_matrix_read_mm(const char* path, sp1d_matrix** out) {
    if (!path || !out) return fail(SP1D_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] { *out = new sp1d_matrix{read_matrix_market(path)}; });
}

sp1d_status sp1d_matrix_write_mm(const sp1d_matrix* m, const char* path) {
    if (!m || !path) return fail(SP1D_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] { write_matrix_market(m->m, path); });
}

sp1d_status sp1d_matrix_from_triplets(int64_t nrows, int64_t ncols, int64_t nnz,
                                      const int64_t* rows, const int64_t* cols, const double* vals,
                                      sp1d_matrix** out) {
    if (!out || (nnz > 0 && (!rows || !cols || !vals)))
        return fail(SP1D_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        std::vector<Triplet<double>> ts;
        ts.reserve(static_cast<std::size_t>(nnz));
        for (int64_t i = 0; i < nnz; ++i) ts.push_back({rows[i], cols[i], vals[i]});
        *out = new sp1d_matrix{from_triplets<double>(nrows, ncols, std::move(ts), Storage::DCSC)};
    });
}

sp1d_status sp1d_matrix_dims(const sp1d_matrix* m, int64_t* nrows, int64_t* ncols, int64_t* nnz) {
    if (!m) return fail(SP1D_ERR_INVALID_ARGUMENT, "null matrix");
    if (nrows) *nrows = m->m.nrows();
    if (ncols) *ncols = m->m.ncols();
    if (nnz) *nnz = m->m.nnz();
    return SP1D_OK;
}

sp1d_status sp1d_matrix_triplets(const sp1d_matrix* m, int64_t* rows, int64_t* cols, double* vals) {
    if (!m) return fail(SP1D_ERR_INVALID_ARGUMENT, "null matrix");
    return guarded([&] {
        const auto ts = m->m.triplets();
        for (std::size_t i = 0; i < ts.size(); ++i) {
            if (rows) rows[i] = ts[i].row;
            if (cols) cols[i] = ts[i].col;
            if (vals) vals[i] = ts[i].val;
        }
    });
}

void sp1d_matrix_free(sp1d_matrix* m) { delete m; }

/* ---- config ------------------------------------------------------------ */

sp1d_config* sp1d_config_new(void) { return new (std::nothrow) sp1d_config{}; }

void sp1d_config_free(sp1d_config* c) { delete c; }

sp1d_status sp1d_config_set_procs(sp1d_config* c, int64_t procs) {
    if (!c) return fail(SP1D_ERR_INVALID_ARGUMENT, "null config");
    if (procs < 1) return fail(SP1D_ERR_CONFIG, "procs must be >= 1");
    c->engine.procs = procs;
    return SP1D_OK;
}

sp1d_status sp1d_config_set_blocks(sp1d_config* c, int64_t blocks) {
    if (!c) return fail(SP1D_ERR_INVALID_ARGUMENT, "null config");
    if (blocks < 1) return fail(SP1D_ERR_CONFIG, "blocks must be >= 1");
    c->engine.blocks = blocks;
    return SP1D_OK;
}

sp1d_status sp1d_config_set_workers(sp1d_config* c, int workers) {
    if (!c) return fail(SP1D_ERR_INVALID_ARGUMENT, "null config");
    c->engine.workers = workers;
    return SP1D_OK;
}

sp1d_status sp1d_config_set_semiring(sp1d_config* c, sp1d_semiring sr) {
    if (!c) return fail(SP1D_ERR_INVALID_ARGUMENT, "null config");
    switch (sr) {
        case SP1D_SEMIRING_REAL_PLUS_TIMES: c->semiring = SemiringId::RealPlusTimes; break;
        case SP1D_SEMIRING_INT_PLUS_TIMES: c->semiring = SemiringId::IntPlusTimes; break;
        case SP1D_SEMIRING_BOOL_OR_AND: c->semiring = SemiringId::BoolOrAnd; break;
        default: return fail(SP1D_ERR_CONFIG, "unknown semiring");
    }
    return SP1D_OK;
}

sp1d_status sp1d_config_set_strategy_identity(sp1d_config* c) {
    if (!c) return fail(SP1D_ERR_INVALID_ARGUMENT, "null config");
    c->engine.strategy = Strategy::identity();
    c->partition_path.clear();
    return SP1D_OK;
}

sp1d_status sp1d_config_set_strategy_random(sp1d_config* c, uint64_t seed) {
    if (!c) return fail(SP1D_ERR_INVALID_ARGUMENT, "null config");
    c->engine.strategy = Strategy::random(seed);
    c->partition_path.clear();
    return SP1D_OK;
}

sp1d_status sp1d_config_set_strategy_partition_file(sp1d_config* c, const char* path) {
    if (!c || !path) return fail(SP1D_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        const bool allow = c->engine.strategy.allow_symmetrize;
        c->engine.strategy = Strategy::from_partition(read_partition_vector(path), allow);
        c->partition_path = path;
    });
}

sp1d_status sp1d_config_set_symmetrize(sp1d_config* c, int enable) {
    if (!c) return fail(SP1D_ERR_INVALID_ARGUMENT, "null config");
    c->engine.strategy.allow_symmetrize = enable != 0;
    return SP1D_OK;
}

sp1d_status sp1d_config_set_oracle(sp1d_config* c, int enable) {
    if (!c) return fail(SP1D_ERR_INVALID_ARGUMENT, "null config");
    c->engine.oracle = enable != 0;
    return SP1D_OK;
}

sp1d_status sp1d_config_set_naive(sp1d_config* c, int enable) {
    if (!c) return fail(SP1D_ERR_INVALID_ARGUMENT, "null config");
    c->engine.naive = enable != 0;
    return SP1D_OK;
}

sp1d_status sp1d_config_set_threshold(sp1d_config* c, double threshold) {
    if (!c) return fail(SP1D_ERR_INVALID_ARGUMENT, "null config");
    if (!(threshold > 0.0) || threshold > 1.0) return fail(SP1D_ERR_CONFIG, "threshold must lie in (0, 1]");
    c->threshold = threshold;
    return SP1D_OK;
}

sp1d_status sp1d_config_set_timings(sp1d_config* c, int enable) {
    if (!c) return fail(SP1D_ERR_INVALID_ARGUMENT, "null config");
    c->timings = enable != 0;
    return SP1D_OK;
}

/* ---- runs --------------------------------------------------------------- */

sp1d_status sp1d_multiply(const sp1d_matrix* a, const sp1d_matrix* b, const sp1d_config* c,
                          sp1d_matrix** out, sp1d_report** report) {
    if (!a || !b || !out) return fail(SP1D_ERR_INVALID_ARGUMENT, "null argument");
    const sp1d_config& cfg = cfg_or_default(c);
    return guarded([&] {
        SparseMatrix<double> result;
        RunMetrics metrics;
        OracleCheck oracle;
        with_semiring(cfg.semiring, [&](auto sr) {
            using SR = decltype(sr);
            auto run = multiply(to_semiring_values<SR>(a->m), to_semiring_values<SR>(b->m),
                                cfg.engine, sr);
            result = to_double_values(run.c);
            metrics = std::move(run.metrics);
            oracle = run.oracle;
        });
        ReportInfo info;
        info.command = "multiply";
        info.config = base_config_fields(cfg);
        info.metrics = &metrics;
        info.oracle = &oracle;
        info.include_timings = cfg.timings;
        set_result_dims(info, result);
        attach_report(report, info);
        *out = new sp1d_matrix{std::move(result)};
    });
}

sp1d_status sp1d_square(const sp1d_matrix* a, const sp1d_config* c, sp1d_matrix** out,
                        sp1d_report** report) {
    if (!a || !out) return fail(SP1D_ERR_INVALID_ARGUMENT, "null argument");
    const sp1d_config& cfg = cfg_or_default(c);
    return guarded([&] {
        SparseMatrix<double> result;
        RunMetrics metrics;
        OracleCheck oracle;
        with_semiring(cfg.semiring, [&](auto sr) {
            using SR = decltype(sr);
            auto run = square(to_semiring_values<SR>(a->m), cfg.engine, sr);
            result = to_double_values(run.c);
            metrics = std::move(run.metrics);
            oracle = run.oracle;
        });
        ReportInfo info;
        info.command = "square";
        info.config = base_config_fields(cfg);
        info.metrics = &metrics;
        info.oracle = &oracle;
        info.include_timings = cfg.timings;
        set_result_dims(info, result);
        attach_report(report, info);
        *out = new sp1d_matrix{std::move(result)};
    });
}

sp1d_status sp1d_mis2(const sp1d_matrix* a, sp1d_matrix** restriction) {
    if (!a || !restriction) return fail(SP1D_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        const auto mis = mis2_aggregate(a->m);
        *restriction = new sp1d_matrix{restriction_matrix<double>(mis, 1.0)};
    });
}

sp1d_status sp1d_galerkin(const sp1d_matrix* a, const sp1d_matrix* r, sp1d_galerkin_mode mode,
                          const sp1d_config* c, sp1d_matrix** out, sp1d_matrix** r_used,
                          sp1d_report** report) {
    if (!a || !out) return fail(SP1D_ERR_INVALID_ARGUMENT, "null argument");
    const sp1d_config& cfg = cfg_or_default(c);
    return guarded([&] {
        const GalerkinMode gm =
            mode == SP1D_GALERKIN_ONEDIM ? GalerkinMode::OneDim : GalerkinMode::OuterProductRight;
        SparseMatrix<double> restriction = r ? r->m : restriction_matrix<double>(mis2_aggregate(a->m), 1.0);

        SparseMatrix<double> result;
        RunMetrics metrics, metrics_left, metrics_right;
        OracleCheck oracle;
        with_semiring(cfg.semiring, [&](auto sr) {
            using SR = decltype(sr);
            auto run = galerkin(to_semiring_values<SR>(a->m), to_semiring_values<SR>(restriction),
                                gm, cfg.engine, sr);
            result = to_double_values(run.c);
            metrics = std::move(run.metrics);
            metrics_left = std::move(run.metrics_left);
            metrics_right = std::move(run.metrics_right);
            oracle = run.oracle;
        });
        ReportInfo info;
        info.command = "galerkin";
        info.config = base_config_fields(cfg);
        info.config.emplace_back("mode", std::string(gm == GalerkinMode::OneDim
                                                         ? "onedim"
                                                         : "outer_product_right"));
        info.config.emplace_back("restriction_generated", r == nullptr);
        info.metrics = &metrics;
        info.metrics_left = &metrics_left;
        info.metrics_right = &metrics_right;
        info.oracle = &oracle;
        info.include_timings = cfg.timings;
        set_result_dims(info, result);
        info.extra.emplace_back("restriction_rows", static_cast<std::int64_t>(restriction.nrows()));
        info.extra.emplace_back("restriction_cols", static_cast<std::int64_t>(restriction.ncols()));
        info.extra.emplace_back("restriction_nnz", static_cast<std::int64_t>(restriction.nnz()));
        attach_report(report, info);
        if (r_used) *r_used = new sp1d_matrix{std::move(restriction)};
        *out = new sp1d_matrix{std::move(result)};
    });
}

sp1d_status sp1d_bc(const sp1d_matrix* g, int64_t num_sources, int64_t batch_size, uint64_t seed,
                    const sp1d_config* c, double* scores, sp1d_report** report) {
    if (!g || !scores) return fail(SP1D_ERR_INVALID_ARGUMENT, "null argument");
    const sp1d_config& cfg = cfg_or_default(c);
    return guarded([&] {
        auto res = bc_approx(g->m, num_sources, batch_size, seed, cfg.engine);
        OracleCheck oracle;
        if (cfg.engine.oracle) {
            // serial reference: the same pipeline on one process and one worker
            EngineConfig serial = cfg.engine;
            serial.procs = 1;
            serial.workers = 1;
            serial.oracle = false;
            auto ref = bc_approx(g->m, num_sources, batch_size, seed, serial);
            oracle.checked = true;
            for (std::size_t i = 0; i < ref.scores.size(); ++i) {
                const double d = std::abs(ref.scores[i] - res.scores[i]);
                const double s = std::max(std::abs(ref.scores[i]), std::abs(res.scores[i]));
                oracle.max_rel_err = std::max(oracle.max_rel_err, s > 0 ? d / s : d);
            }
            oracle.pass = oracle.max_rel_err <= 1e-8;
        }
        std::copy(res.scores.begin(), res.scores.end(), scores);
        ReportInfo info;
        info.command = "bc";
        info.config = base_config_fields(cfg, /*with_semiring=*/false);
        info.config.emplace_back("num_sources", static_cast<std::int64_t>(num_sources));
        info.config.emplace_back("batch_size", static_cast<std::int64_t>(batch_size));
        info.config.emplace_back("seed", static_cast<std::int64_t>(seed));
        info.metrics = &res.metrics;
        info.oracle = &oracle;
        info.include_timings = cfg.timings;
        attach_report(report, info);
    });
}

sp1d_status sp1d_analyze(const sp1d_matrix* a, const sp1d_matrix* b, const sp1d_config* c,
                         int* advisory, double* ratio, sp1d_report** report) {
    if (!a) return fail(SP1D_ERR_INVALID_ARGUMENT, "null argument");
    const sp1d_config& cfg = cfg_or_default(c);
    return guarded([&] {
        const SparseMatrix<double>& bm = b ? b->m : a->m;
        CvAnalysis an;
        if (cfg.engine.strategy.kind == Strategy::Kind::Identity) {
            const Distribution1D dk = distribute_even(a->m.ncols(), cfg.engine.procs);
            const Distribution1D dn = distribute_even(bm.ncols(), cfg.engine.procs);
            an = analyze_cv(a->m, bm, dk, dn, cfg.engine.blocks, cfg.threshold, cfg.engine.workers);
        } else {
            if (a->m.nrows() != a->m.ncols() || bm.nrows() != bm.ncols() || a->m.ncols() != bm.ncols())
                throw ShapeError("random/partition strategies need square operands of equal size");
            auto [perm, dist] = strategy_to_permutation(a->m, cfg.engine.strategy, cfg.engine.procs);
            const auto ap = permute_symmetric(a->m, perm);
            const auto bp = permute_symmetric(bm, perm);
            an = analyze_cv(ap, bp, dist, dist, cfg.engine.blocks, cfg.threshold, cfg.engine.workers);
        }
        if (advisory) *advisory = an.advisory ? 1 : 0;
        if (ratio) *ratio = an.ratio;
        ReportInfo info;
        info.command = "analyze";
        info.config = base_config_fields(cfg, /*with_semiring=*/false);
        info.config.emplace_back("threshold", cfg.threshold);
        info.metrics = &an.metrics;
        info.include_timings = cfg.timings;
        info.has_advisory = true;
        info.ratio = an.ratio;
        info.threshold = an.threshold;
        info.advisory = an.advisory;
        attach_report(report, info);
    });
}

sp1d_status sp1d_partition(const sp1d_matrix* a, int64_t parts, int64_t* part_ids,
                           sp1d_report** report) {
    if (!a || !part_ids) return fail(SP1D_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        const auto res = greedy_partition(a->m, parts);
        std::copy(res.parts.begin(), res.parts.end(), part_ids);
        ReportInfo info;
        info.command = "partition";
        info.config.emplace_back("parts", static_cast<std::int64_t>(parts));
        info.extra.emplace_back("imbalance", res.imbalance);
        info.extra.emplace_back("balanced", res.balanced);
        info.extra.emplace_back("cut_edges", static_cast<std::int64_t>(res.cut_edges));
        attach_report(report, info);
    });
}

/* ---- reports ------------------------------------------------------------- */

sp1d_status sp1d_report_json(const sp1d_report* r, char** json_out) {
    if (!r || !json_out) return fail(SP1D_ERR_INVALID_ARGUMENT, "null argument");
    char* buf = static_cast<char*>(std::malloc(r->json.size() + 1));
    if (!buf) return fail(SP1D_ERR_INTERNAL, "out of memory");
    std::memcpy(buf, r->json.c_str(), r->json.size() + 1);
    *json_out = buf;
    return SP1D_OK;
}

void sp1d_report_free(sp1d_report* r) { delete r; }

void sp1d_string_free(char* s) { std::free(s); }

}  // extern "C"
