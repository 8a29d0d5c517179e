#ifndef SPGEMM1D_APPS_HPP
#define SPGEMM1D_APPS_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "spgemm1d/runtime.hpp"

namespace spgemm1d {

// ---------------------------------------------------------------------------
// Engine configuration shared by the workloads and the CLI.

struct EngineConfig {
    Index procs = 1;
    Index blocks = kDefaultBlocks;
    Strategy strategy;
    int workers = 0;
    bool naive = false;
    bool oracle = false;
};

inline constexpr double kOracleTolerance = 1e-10;

struct OracleCheck {
    bool checked = false;
    bool pattern_equal = true;
    double max_rel_err = 0.0;
    bool pass = true;
};

struct DiffStats {
    bool pattern_equal = true;
    double max_rel_err = 0.0;
};

template <class T>
DiffStats compare_matrices(const SparseMatrix<T>& x, const SparseMatrix<T>& y) {
    DiffStats d;
    if (x.nrows() != y.nrows() || x.ncols() != y.ncols() || x.nnz() != y.nnz()) {
        d.pattern_equal = false;
        d.max_rel_err = std::numeric_limits<double>::infinity();
        return d;
    }
    auto tx = x.triplets(), ty = y.triplets();
    for (std::size_t i = 0; i < tx.size(); ++i) {
        if (tx[i].row != ty[i].row || tx[i].col != ty[i].col) {
            d.pattern_equal = false;
            d.max_rel_err = std::numeric_limits<double>::infinity();
            return d;
        }
        const double a = static_cast<double>(tx[i].val), b = static_cast<double>(ty[i].val);
        if (a == b) continue;
        const double scale = std::max(std::abs(a), std::abs(b));
        d.max_rel_err = std::max(d.max_rel_err, scale > 0 ? std::abs(a - b) / scale : 0.0);
    }
    return d;
}

template <class V>
struct EngineResult {
    SparseMatrix<V> c;
    RunMetrics metrics;
    OracleCheck oracle;
};

namespace detail {

template <class T>
SparseMatrix<T> permute_rows(const SparseMatrix<T>& a, const Permutation& perm) {
    auto ts = a.triplets();
    for (auto& t : ts) t.row = perm(t.row);
    return from_triplets<T>(a.nrows(), a.ncols(), std::move(ts), a.mode());
}

template <class SR>
OracleCheck run_oracle(const SparseMatrix<typename SR::value_type>& reference,
                       const SparseMatrix<typename SR::value_type>& got) {
    OracleCheck oc;
    oc.checked = true;
    const DiffStats d = compare_matrices(reference, got);
    oc.pattern_equal = d.pattern_equal;
    oc.max_rel_err = d.max_rel_err;
    oc.pass = d.pattern_equal && d.max_rel_err <= kOracleTolerance;
    return oc;
}

}  // namespace detail

// General multiply under a layout strategy. Identity runs any conforming
// pair with even distributions; random and partition relabel the (square)
// operand space symmetrically, multiply, and relabel the result back, so the
// output matches the unpermuted product.
template <class SR = RealPlusTimes>
EngineResult<typename SR::value_type> multiply(const SparseMatrix<typename SR::value_type>& a,
                                               const SparseMatrix<typename SR::value_type>& b,
                                               const EngineConfig& cfg, SR sr = {}) {
    using V = typename SR::value_type;
    if (a.ncols() != b.nrows())
        throw ShapeError("multiply: inner dimensions differ (" + std::to_string(a.ncols()) + " vs " +
                         std::to_string(b.nrows()) + ")");
    RuntimeOptions opt{cfg.workers, cfg.naive, true};
    EngineResult<V> out;

    if (cfg.strategy.kind == Strategy::Kind::Identity) {
        const Distribution1D dist_k = distribute_even(a.ncols(), cfg.procs);
        const Distribution1D dist_n = distribute_even(b.ncols(), cfg.procs);
        auto run = spgemm_1d(a, b, dist_k, dist_n, cfg.blocks, sr, opt);
        out.c = std::move(run.c);
        out.metrics = std::move(run.metrics);
    } else {
        if (a.nrows() != a.ncols() || b.nrows() != b.ncols() || a.ncols() != b.ncols())
            throw ShapeError("random/partition strategies need square operands of equal size");
        auto [perm, dist] = strategy_to_permutation(a, cfg.strategy, cfg.procs);
        const SparseMatrix<V> ap = permute_symmetric(a, perm);
        const SparseMatrix<V> bp = permute_symmetric(b, perm);
        auto run = spgemm_1d(ap, bp, dist, dist, cfg.blocks, sr, opt);
        out.c = permute_symmetric(run.c, perm.inverse());
        out.metrics = std::move(run.metrics);
    }
    if (cfg.oracle)
        out.oracle = detail::run_oracle<SR>(spgemm_local(a, b, sr), out.c);
    return out;
}

template <class SR = RealPlusTimes>
EngineResult<typename SR::value_type> square(const SparseMatrix<typename SR::value_type>& a,
                                             const EngineConfig& cfg, SR sr = {}) {
    if (a.nrows() != a.ncols()) throw ShapeError("square: matrix is not square");
    return multiply(a, a, cfg, sr);
}

// ---------------------------------------------------------------------------
// Distance-2 maximal independent set and the restriction operator.

struct Mis2Result {
    std::vector<Index> roots;         // ascending vertex ids
    std::vector<Index> aggregate_of;  // per vertex, index into roots
    Index aggregates = 0;
};

namespace detail {

inline Mis2Result mis2_core(Index n, const std::vector<Index>& ptr, const std::vector<Index>& ids) {
    Mis2Result res;
    res.aggregate_of.assign(n, -1);

    std::vector<Index> order(n);
    for (Index i = 0; i < n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](Index x, Index y) { return ptr[x + 1] - ptr[x] < ptr[y + 1] - ptr[y]; });

    // greedy selection by ascending degree then id; selecting a root blocks
    // everything within distance 2
    std::vector<char> blocked(n, 0);
    for (const Index v : order) {
        if (blocked[v]) continue;
        res.roots.push_back(v);
        blocked[v] = 1;
        for (Index e = ptr[v]; e < ptr[v + 1]; ++e) {
            const Index u = ids[e];
            blocked[u] = 1;
            for (Index f = ptr[u]; f < ptr[u + 1]; ++f) blocked[ids[f]] = 1;
        }
    }
    std::sort(res.roots.begin(), res.roots.end());
    res.aggregates = static_cast<Index>(res.roots.size());

    std::vector<Index> root_index(n, -1);
    for (Index i = 0; i < res.aggregates; ++i) root_index[res.roots[i]] = i;
    for (const Index r : res.roots) res.aggregate_of[r] = root_index[r];

    // distance-1: lowest-id adjacent root
    std::vector<Index> adj_root(n, -1);
    for (Index v = 0; v < n; ++v) {
        for (Index e = ptr[v]; e < ptr[v + 1]; ++e) {
            const Index u = ids[e];
            if (root_index[u] >= 0 && (adj_root[v] < 0 || u < adj_root[v])) adj_root[v] = u;
        }
    }
    for (Index v = 0; v < n; ++v)
        if (res.aggregate_of[v] < 0 && adj_root[v] >= 0) res.aggregate_of[v] = root_index[adj_root[v]];

    // distance-2: lowest root id reachable through any neighbour
    for (Index v = 0; v < n; ++v) {
        if (res.aggregate_of[v] >= 0) continue;
        Index best = -1;
        for (Index e = ptr[v]; e < ptr[v + 1]; ++e) {
            const Index r = adj_root[ids[e]];
            if (r >= 0 && (best < 0 || r < best)) best = r;
        }
        if (best < 0) throw InternalError("vertex beyond distance 2 of every root");
        res.aggregate_of[v] = root_index[best];
    }
    return res;
}

}  // namespace detail

// Roots form a maximal set with pairwise distance >= 3 (no edge, no common
// neighbour); every vertex joins its nearest root's aggregate with ties
// broken by the lowest root id. Selection is deterministic.
template <class T>
Mis2Result mis2_aggregate(const SparseMatrix<T>& a) {
    if (a.nrows() != a.ncols()) throw ShapeError("mis2_aggregate: matrix is not square");
    if (!pattern_symmetric(a)) throw ShapeError("mis2_aggregate: pattern is not symmetric");
    std::vector<Index> ptr, ids;
    detail::symmetric_adjacency(a, ptr, ids);
    return detail::mis2_core(a.ncols(), ptr, ids);
}

// Tall-skinny aggregation matrix: one entry per row, value one.
template <class T>
SparseMatrix<T> restriction_matrix(const Mis2Result& mis, T one) {
    std::vector<Triplet<T>> ts;
    const Index n = static_cast<Index>(mis.aggregate_of.size());
    ts.reserve(n);
    for (Index v = 0; v < n; ++v) ts.push_back({v, mis.aggregate_of[v], one});
    return from_triplets<T>(n, mis.aggregates, std::move(ts), Storage::DCSC);
}

// ---------------------------------------------------------------------------
// Outer-product 1D SpGEMM: B is redistributed into row blocks aligned with
// A's column blocks, each process multiplies its slice pair into a partial
// result spanning all output columns, and the partials are redistributed to
// the output owners and merged by semiring add.

template <class SR = RealPlusTimes>
RunResult<typename SR::value_type> outer_product_1d(const SparseMatrix<typename SR::value_type>& a,
                                                    const SparseMatrix<typename SR::value_type>& b,
                                                    const Distribution1D& dist_k,
                                                    const Distribution1D& dist_n, SR sr = {},
                                                    int workers = 0) {
    using V = typename SR::value_type;
    if (a.ncols() != b.nrows())
        throw ShapeError("outer_product_1d: inner dimensions differ (" + std::to_string(a.ncols()) +
                         " vs " + std::to_string(b.nrows()) + ")");
    if (dist_k.n() != a.ncols()) throw ConfigError("k distribution does not match A's columns");
    if (dist_n.n() != b.ncols()) throw ConfigError("n distribution does not match B's columns");
    if (dist_k.procs != dist_n.procs) throw ConfigError("mismatched distributions");

    const Index procs = dist_k.procs;
    RunMetrics metrics;
    metrics.procs = procs;
    metrics.blocks = 0;
    metrics.mem_a_bytes = kBytesPerEntry * a.nnz();
    metrics.replication_bytes = (procs - 1) * metrics.mem_a_bytes;
    metrics.per_process.resize(procs);
    for (Index i = 0; i < procs; ++i) metrics.per_process[i].rank = i;

    const auto b_triplets = b.triplets();

    // row blocks of B aligned with A's column blocks; entries arriving from
    // another column owner are counted as received traffic
    std::vector<SparseMatrix<V>> a_slices(procs), b_rows(procs);
    run_parallel(procs, workers, [&](Index i) {
        a_slices[i] = slice_local(a, dist_k, i);
        std::vector<Triplet<V>> mine;
        std::vector<char> from(procs, 0);
        for (const auto& t : b_triplets) {
            if (t.row < dist_k.begin(i) || t.row >= dist_k.end(i)) continue;
            mine.push_back({t.row - dist_k.begin(i), t.col, t.val});
            const Index src = dist_n.owner(t.col);
            if (src != i) {
                metrics.per_process[i].bytes_fetched += kBytesPerEntry;
                from[src] = 1;
            }
        }
        for (Index s = 0; s < procs; ++s) metrics.per_process[i].messages += from[s];
        b_rows[i] = from_triplets<V>(dist_k.width(i), b.ncols(), std::move(mine), Storage::DCSC,
                                     [&sr](V x, V y) { return sr.add(x, y); });
    });

    std::vector<SparseMatrix<V>> partials(procs);
    run_parallel(procs, workers, [&](Index i) {
        const auto t0 = std::chrono::steady_clock::now();
        Index flops = 0;
        partials[i] = spgemm_local(a_slices[i], b_rows[i], sr, Accumulator::Hybrid, &flops);
        metrics.per_process[i].flops = flops;
        metrics.per_process[i].seconds_comp += detail::seconds_since(t0);
    });

    // redistribute the partial results to the output owners and merge
    std::vector<std::vector<Triplet<V>>> buckets(procs);
    for (Index i = 0; i < procs; ++i) {
        std::vector<char> to(procs, 0);
        for (const auto& t : partials[i].triplets()) {
            const Index dst = dist_n.owner(t.col);
            buckets[dst].push_back(t);
            if (dst != i) {
                metrics.per_process[dst].bytes_fetched += kBytesPerEntry;
                to[dst] = 1;
            }
        }
        for (Index d = 0; d < procs; ++d)
            if (d != i && to[d]) ++metrics.per_process[d].messages;
    }

    std::vector<SparseMatrix<V>> c_slices(procs);
    run_parallel(procs, workers, [&](Index j) {
        auto& bucket = buckets[j];
        for (auto& t : bucket) t.col -= dist_n.begin(j);
        c_slices[j] = from_triplets<V>(a.nrows(), dist_n.width(j), std::move(bucket), Storage::DCSC,
                                       [&sr](V x, V y) { return sr.add(x, y); });
    });

    return {detail::concat_column_slices(a.nrows(), dist_n, c_slices), std::move(metrics)};
}

// ---------------------------------------------------------------------------
// Galerkin triple product R^T A R.

enum class GalerkinMode { OneDim, OuterProductRight };

template <class V>
struct GalerkinResult {
    SparseMatrix<V> c;
    RunMetrics metrics;        // both multiplies combined
    RunMetrics metrics_left;   // R^T A
    RunMetrics metrics_right;  // (R^T A) R
    OracleCheck oracle;
};

// The left multiply R^T A always runs through the sparsity-aware 1D engine;
// the mode selects the engine for the right multiply. A's vertices are
// relabeled per the strategy with R's rows co-permuted, which leaves the
// coarse result unchanged, so no un-permutation is needed.
template <class SR = RealPlusTimes>
GalerkinResult<typename SR::value_type> galerkin(const SparseMatrix<typename SR::value_type>& a,
                                                 const SparseMatrix<typename SR::value_type>& r,
                                                 GalerkinMode mode, const EngineConfig& cfg,
                                                 SR sr = {}) {
    using V = typename SR::value_type;
    if (a.nrows() != a.ncols()) throw ShapeError("galerkin: A is not square");
    if (r.nrows() != a.ncols())
        throw ShapeError("galerkin: R has " + std::to_string(r.nrows()) + " rows, expected " +
                         std::to_string(a.ncols()));

    auto [perm, dist] = strategy_to_permutation(a, cfg.strategy, cfg.procs);
    const SparseMatrix<V> ap = perm.is_identity() ? a : permute_symmetric(a, perm);
    const SparseMatrix<V> rp = perm.is_identity() ? r : detail::permute_rows(r, perm);
    const SparseMatrix<V> rt = transpose(rp);
    const Distribution1D dist_c = distribute_even(r.ncols(), cfg.procs);
    RuntimeOptions opt{cfg.workers, cfg.naive, true};

    GalerkinResult<V> out;
    auto left = spgemm_1d(rt, ap, dist, dist, cfg.blocks, sr, opt);
    out.metrics_left = std::move(left.metrics);

    RunResult<V> right = mode == GalerkinMode::OneDim
                             ? spgemm_1d(left.c, rp, dist, dist_c, cfg.blocks, sr, opt)
                             : outer_product_1d(left.c, rp, dist, dist_c, sr, cfg.workers);
    out.c = std::move(right.c);
    out.metrics_right = std::move(right.metrics);
    out.metrics = out.metrics_left;
    merge_metrics(out.metrics, out.metrics_right);

    if (cfg.oracle) {
        const auto reference = spgemm_local(spgemm_local(transpose(r), a, sr), r, sr);
        out.oracle = detail::run_oracle<SR>(reference, out.c);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Batched betweenness centrality (Brandes over algebraic multi-source BFS).

struct BcResult {
    std::vector<double> scores;
    RunMetrics metrics;
};

// Optional instrumentation: per-level, per-source frontier sizes of the
// forward search, plus a sigma-positivity flag.
struct BcTrace {
    std::vector<std::vector<Index>> frontier_sizes;  // [level][source]
    bool sigma_positive = true;
};

namespace detail {

template <class T>
struct BcContext {
    Index n = 0;
    SparseMatrix<std::int64_t> gi;  // symmetrized pattern, integer ones
    SparseMatrix<double> gd;        // same pattern, real ones
    Permutation perm = Permutation::identity(0);
    Distribution1D dist;
};

template <class T>
BcContext<T> bc_prepare(const SparseMatrix<T>& g, const EngineConfig& cfg) {
    if (g.nrows() != g.ncols()) throw ShapeError("bc: graph matrix is not square");
    BcContext<T> ctx;
    ctx.n = g.ncols();
    // symmetrize the pattern and drop self-loops; the graph is unweighted
    std::vector<Triplet<std::int64_t>> ts;
    for (Index s = 0; s < g.stored_column_count(); ++s) {
        const Index j = g.stored_column_id(s);
        for (const Index i : g.stored_column_rows(s)) {
            if (i == j) continue;
            ts.push_back({i, j, 1});
            ts.push_back({j, i, 1});
        }
    }
    auto pattern = from_triplets<std::int64_t>(ctx.n, ctx.n, std::move(ts), Storage::DCSC,
                                               [](std::int64_t, std::int64_t) { return std::int64_t{1}; });
    auto [perm, dist] = strategy_to_permutation(pattern, cfg.strategy, cfg.procs);
    ctx.perm = std::move(perm);
    ctx.dist = std::move(dist);
    if (!ctx.perm.is_identity()) pattern = permute_symmetric(pattern, ctx.perm);
    ctx.gd = map_values<double>(pattern, [](std::int64_t) { return 1.0; });
    ctx.gi = std::move(pattern);
    return ctx;
}

template <class T>
void bc_batch_prepared(const BcContext<T>& ctx, const std::vector<Index>& sources,
                       const EngineConfig& cfg, std::vector<double>& scores, RunMetrics& metrics,
                       BcTrace* trace) {
    const Index n = ctx.n;
    const Index batch = static_cast<Index>(sources.size());
    if (batch == 0) return;
    std::vector<char> seen(n, 0);
    for (const Index s : sources) {
        if (s < 0 || s >= n) throw IndexError("source vertex out of range: " + std::to_string(s));
        if (seen[s]) throw ConfigError("duplicate source vertex: " + std::to_string(s));
        seen[s] = 1;
    }

    const Distribution1D dist_b = distribute_even(batch, cfg.procs);
    RuntimeOptions opt{cfg.workers, false, true};

    std::vector<std::int32_t> level(static_cast<std::size_t>(n) * batch, -1);
    std::vector<std::int64_t> sigma(static_cast<std::size_t>(n) * batch, 0);
    auto at = [batch](Index v, Index s) { return static_cast<std::size_t>(v) * batch + s; };

    std::vector<Triplet<std::int64_t>> seed_ts;
    for (Index s = 0; s < batch; ++s) {
        const Index v = ctx.perm(sources[s]);
        seed_ts.push_back({v, s, 1});
        level[at(v, s)] = 0;
        sigma[at(v, s)] = 1;
    }
    std::vector<SparseMatrix<std::int64_t>> frontiers;
    frontiers.push_back(from_triplets<std::int64_t>(n, batch, std::move(seed_ts), Storage::DCSC));

    if (trace) {
        trace->frontier_sizes.emplace_back(batch, 0);
        for (const auto& t : frontiers.back().triplets()) ++trace->frontier_sizes.back()[t.col];
    }

    // forward search: frontier expansion over integer plus-times, masked to
    // the unvisited (vertex, source) pairs; values are path counts
    std::int32_t depth = 0;
    while (true) {
        const auto& f = frontiers.back();
        auto unvisited = [&](Index row, Index col) { return level[at(row, col)] < 0; };
        auto next = spgemm_1d(ctx.gi, f, ctx.dist, dist_b, cfg.blocks, IntPlusTimes{}, opt, unvisited);
        merge_metrics(metrics, next.metrics);
        if (next.c.nnz() == 0) break;
        ++depth;
        for (const auto& t : next.c.triplets()) {
            level[at(t.row, t.col)] = depth;
            sigma[at(t.row, t.col)] = t.val;
            if (trace && t.val <= 0) trace->sigma_positive = false;
        }
        if (trace) {
            trace->frontier_sizes.emplace_back(batch, 0);
            for (const auto& t : next.c.triplets()) ++trace->frontier_sizes.back()[t.col];
        }
        frontiers.push_back(std::move(next.c));
    }

    // backward sweep: dependencies flow from the deepest level toward the
    // sources, delta(v) = sigma(v) * sum_w (1 + delta(w)) / sigma(w)
    std::vector<double> delta(static_cast<std::size_t>(n) * batch, 0.0);
    for (std::int32_t t = depth - 1; t >= 0; --t) {
        std::vector<Triplet<double>> wts;
        for (const auto& e : frontiers[t + 1].triplets())
            wts.push_back({e.row, e.col, (1.0 + delta[at(e.row, e.col)]) / static_cast<double>(e.val)});
        auto w = from_triplets<double>(n, batch, std::move(wts), Storage::DCSC);
        auto at_level = [&](Index row, Index col) { return level[at(row, col)] == t; };
        auto u = spgemm_1d(ctx.gd, w, ctx.dist, dist_b, cfg.blocks, RealPlusTimes{}, opt, at_level);
        merge_metrics(metrics, u.metrics);
        for (const auto& e : u.c.triplets())
            delta[at(e.row, e.col)] = static_cast<double>(sigma[at(e.row, e.col)]) * e.val;
    }

    for (Index s = 0; s < batch; ++s) {
        const Index src = ctx.perm(sources[s]);
        for (Index v = 0; v < n; ++v)
            if (v != src) scores[v] += delta[at(v, s)];
    }
}

}  // namespace detail

// Scores contributed by one batch of distinct source vertices.
template <class T>
BcResult bc_batch(const SparseMatrix<T>& g, const std::vector<Index>& sources,
                  const EngineConfig& cfg, BcTrace* trace = nullptr) {
    const auto ctx = detail::bc_prepare(g, cfg);
    BcResult res;
    res.scores.assign(ctx.n, 0.0);
    std::vector<double> permuted(ctx.n, 0.0);
    detail::bc_batch_prepared(ctx, sources, cfg, permuted, res.metrics, trace);
    for (Index v = 0; v < ctx.n; ++v) res.scores[v] = permuted[ctx.perm(v)];
    return res;
}

// Approximate scores from `num_sources` seeded uniformly sampled distinct
// sources, processed in batches of `batch_size`.
template <class T>
BcResult bc_approx(const SparseMatrix<T>& g, Index num_sources, Index batch_size, std::uint64_t seed,
                   const EngineConfig& cfg) {
    const auto ctx = detail::bc_prepare(g, cfg);
    if (num_sources < 0 || num_sources > ctx.n)
        throw ConfigError("num_sources must lie in 0..n");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");

    // deterministic partial Fisher-Yates draw of distinct sources
    std::vector<Index> ids(ctx.n);
    for (Index i = 0; i < ctx.n; ++i) ids[i] = i;
    std::mt19937_64 rng(seed);
    for (Index i = 0; i < num_sources; ++i) {
        const Index j = i + static_cast<Index>(rng() % static_cast<std::uint64_t>(ctx.n - i));
        std::swap(ids[i], ids[j]);
    }

    BcResult res;
    res.scores.assign(ctx.n, 0.0);
    std::vector<double> permuted(ctx.n, 0.0);
    for (Index off = 0; off < num_sources; off += batch_size) {
        const Index hi = std::min(num_sources, off + batch_size);
        std::vector<Index> batch(ids.begin() + off, ids.begin() + hi);
        detail::bc_batch_prepared(ctx, batch, cfg, permuted, res.metrics, nullptr);
    }
    for (Index v = 0; v < ctx.n; ++v) res.scores[v] = permuted[ctx.perm(v)];
    return res;
}

}  // namespace spgemm1d

#endif
