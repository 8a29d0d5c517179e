#ifndef SPGEMM1D_RUNTIME_HPP
#define SPGEMM1D_RUNTIME_HPP

#include <atomic>
#include <chrono>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <span>
#include <thread>
#include <vector>

#include "spgemm1d/layout.hpp"
#include "spgemm1d/local_mult.hpp"
#include "spgemm1d/metrics.hpp"
#include "spgemm1d/semiring.hpp"
#include "spgemm1d/sparse.hpp"

namespace spgemm1d {

// ---------------------------------------------------------------------------
// Logical-process scheduler. P independent tasks run on a bounded worker
// pool; every phase boundary is a barrier. Results must not depend on the
// worker count, which holds because tasks share only immutable state and
// write exclusively to their own slot.

inline int resolve_workers(Index procs, int workers) {
    if (workers <= 0) {
        const unsigned hw = std::thread::hardware_concurrency();
        workers = static_cast<int>(hw == 0 ? 1 : hw);
    }
    return static_cast<int>(std::min<Index>(procs, workers));
}

inline void run_parallel(Index procs, int workers, const std::function<void(Index)>& fn) {
    const int w = resolve_workers(procs, workers);
    if (w <= 1) {
        for (Index i = 0; i < procs; ++i) fn(i);
        return;
    }
    std::atomic<Index> next{0};
    std::mutex err_mutex;
    std::exception_ptr err;
    auto body = [&]() {
        while (true) {
            const Index i = next.fetch_add(1);
            if (i >= procs) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (!err) err = std::current_exception();
            }
        }
    };
    std::vector<std::thread> threads;
    threads.reserve(w);
    for (int t = 0; t < w; ++t) threads.emplace_back(body);
    for (auto& t : threads) t.join();
    if (err) std::rethrow_exception(err);
}

// ---------------------------------------------------------------------------
// Window exposure and the replicated column directory.

// Read-only exposure of one process's A slice: the slice's row ids and values
// as two flat arrays (concatenated stored columns, in column order). Remote
// reads are only legal while the exposure epoch is open.
template <class V>
struct WindowPair {
    std::vector<Index> rows;
    std::vector<V> vals;
    bool exposed = false;
};

// Replicated metadata about A's non-empty columns: global ids, per-column
// counts and prefix offsets into the owner's windows. Identical on every
// logical process by construction.
struct ColumnDirectory {
    struct OwnerCols {
        std::vector<Index> cols;     // sorted global ids of non-empty columns
        std::vector<Index> nnz;      // per column
        std::vector<Index> offsets;  // cols.size()+1 prefix sums into the window
    };
    Index k = 0;  // global column count of A
    std::vector<OwnerCols> owners;

    Index total_nonzero_columns() const {
        Index s = 0;
        for (const auto& o : owners) s += static_cast<Index>(o.cols.size());
        return s;
    }
};

template <class V>
struct Exposure {
    std::vector<WindowPair<V>> windows;
    ColumnDirectory dir;
};

template <class V>
Exposure<V> expose_windows(const std::vector<SparseMatrix<V>>& slices, const Distribution1D& dist) {
    if (static_cast<Index>(slices.size()) != dist.procs)
        throw ShapeError("slice count does not match process count");
    Exposure<V> ex;
    ex.dir.k = dist.n();
    ex.dir.owners.resize(dist.procs);
    Index m = slices.empty() ? 0 : slices[0].nrows();
    for (Index i = 0; i < dist.procs; ++i) {
        const auto& s = slices[i];
        if (s.nrows() != m) throw ShapeError("slice row counts differ");
        if (s.ncols() != dist.width(i)) throw ShapeError("slice width does not match distribution");
        auto& own = ex.dir.owners[i];
        own.offsets.push_back(0);
        for (Index slot = 0; slot < s.stored_column_count(); ++slot) {
            const Index len = static_cast<Index>(s.stored_column_rows(slot).size());
            if (len == 0) continue;
            own.cols.push_back(dist.begin(i) + s.stored_column_id(slot));
            own.nnz.push_back(len);
            own.offsets.push_back(own.offsets.back() + len);
        }
        WindowPair<V> w;
        w.rows = s.row_ids();
        w.vals = s.values();
        w.exposed = true;
        ex.windows.push_back(std::move(w));
    }
    return ex;
}

// ---------------------------------------------------------------------------
// Hit vector and required-column intersection.

using HitVector = std::vector<std::uint8_t>;

// Dense indicator of the non-empty rows of a B slice.
template <class V>
HitVector build_hit_vector(const SparseMatrix<V>& b_slice, Index k) {
    if (b_slice.nrows() != k) throw ShapeError("B slice row count does not match k");
    HitVector hit(k, 0);
    for (const Index r : b_slice.row_ids()) hit[r] = 1;
    return hit;
}

// The required columns of A: non-empty (in the directory) and hit by H.
inline std::vector<Index> required_columns(const HitVector& hit, const ColumnDirectory& dir) {
    std::vector<Index> req;
    for (const auto& own : dir.owners)
        for (const Index c : own.cols)
            if (hit[c]) req.push_back(c);
    return req;
}

// ---------------------------------------------------------------------------
// Block fetching.

inline constexpr Index kDefaultBlocks = 2048;

struct FetchInterval {
    Index pos_begin = 0;  // positions into the owner's non-empty column list
    Index pos_end = 0;
    Index col_begin = 0;  // global column ids at the interval ends
    Index col_end = 0;
};

struct FetchPlan {
    Index blocks = 0;            // K
    Index columns_required = 0;  // |required| on this remote
    std::vector<FetchInterval> intervals;

    Index interval_count() const { return static_cast<Index>(intervals.size()); }  // M
    Index columns_fetched() const {
        Index s = 0;
        for (const auto& iv : intervals) s += iv.pos_end - iv.pos_begin;
        return s;
    }
};

// Splits the owner's non-empty column list into K nearly equal contiguous
// groups (sizes differ by at most one) and selects every group holding at
// least one required column. Adjacent selected groups coalesce into a single
// interval when `coalesce` is set, which never changes the fetched columns.
inline FetchPlan plan_block_fetch(std::span<const Index> required, std::span<const Index> owner_cols,
                                  Index blocks, bool coalesce = true) {
    if (blocks < 1) throw ConfigError("block count K must be >= 1");
    FetchPlan plan;
    plan.blocks = blocks;
    plan.columns_required = static_cast<Index>(required.size());
    const Index len = static_cast<Index>(owner_cols.size());
    if (len == 0 || required.empty()) return plan;

    std::vector<Index> pos;
    pos.reserve(required.size());
    Index p = 0;
    for (const Index c : required) {
        while (p < len && owner_cols[p] < c) ++p;
        if (p >= len || owner_cols[p] != c)
            throw InternalError("required column " + std::to_string(c) + " not in directory");
        pos.push_back(p);
    }

    const Index groups = std::min(blocks, len);  // groups beyond len would be empty
    std::size_t rp = 0;
    for (Index g = 0; g < groups; ++g) {
        const Index lo = g * len / groups;
        const Index hi = (g + 1) * len / groups;
        while (rp < pos.size() && pos[rp] < lo) ++rp;
        if (rp == pos.size()) break;
        if (pos[rp] >= hi) continue;
        if (coalesce && !plan.intervals.empty() && plan.intervals.back().pos_end == lo)
            plan.intervals.back().pos_end = hi;
        else
            plan.intervals.push_back({lo, hi, 0, 0});
        while (rp < pos.size() && pos[rp] < hi) ++rp;
    }
    for (auto& iv : plan.intervals) {
        iv.col_begin = owner_cols[iv.pos_begin];
        iv.col_end = owner_cols[iv.pos_end - 1];
    }
    return plan;
}

// ---------------------------------------------------------------------------
// Per-process planning: hit vector, required set, per-remote fetch plans and
// the complete communication accounting. Everything here is derived from the
// directory alone, before any data moves.

struct ProcessPlan {
    HitVector hit;
    std::vector<Index> required;        // all required global columns, sorted
    std::vector<Index> local_required;  // the subset this process already owns
    std::vector<FetchPlan> plans;       // indexed by owner; self entry stays empty
};

template <class V>
ProcessPlan make_process_plan(Index self, const SparseMatrix<V>& b_slice, const ColumnDirectory& dir,
                              const Distribution1D& dist_k, Index blocks, bool naive, bool coalesce,
                              ProcessMetrics& pm) {
    ProcessPlan pp;
    pp.hit = build_hit_vector(b_slice, dir.k);
    pp.required = required_columns(pp.hit, dir);
    pp.plans.resize(dist_k.procs);

    std::size_t q = 0;
    for (Index o = 0; o < dist_k.procs; ++o) {
        const auto& own = dir.owners[o];
        std::size_t q_end = q;
        while (q_end < pp.required.size() && pp.required[q_end] < dist_k.end(o)) ++q_end;
        std::span<const Index> req(pp.required.data() + q, q_end - q);
        q = q_end;

        if (o == self) {
            pp.local_required.assign(req.begin(), req.end());
            pm.local_columns_used = static_cast<Index>(req.size());
            continue;
        }
        FetchPlan& plan = pp.plans[o];
        if (naive) {
            plan.blocks = 1;
            plan.columns_required = static_cast<Index>(req.size());
            const Index len = static_cast<Index>(own.cols.size());
            if (len > 0) plan.intervals.push_back({0, len, own.cols.front(), own.cols.back()});
        } else {
            plan = plan_block_fetch(req, own.cols, blocks, coalesce);
        }

        PerRemoteStat rs;
        rs.remote = o;
        rs.intervals = plan.interval_count();
        rs.columns_required = plan.columns_required;
        rs.columns_fetched = plan.columns_fetched();
        for (const auto& iv : plan.intervals) rs.bytes += kBytesPerEntry * (own.offsets[iv.pos_end] - own.offsets[iv.pos_begin]);
        // bytes of the strictly required columns, for the overfetch report
        {
            Index req_nnz = 0;
            Index rp = 0;
            for (const Index c : req) {
                while (rp < static_cast<Index>(own.cols.size()) && own.cols[rp] < c) ++rp;
                if (rp < static_cast<Index>(own.cols.size()) && own.cols[rp] == c) req_nnz += own.nnz[rp];
            }
            pm.required_bytes += kBytesPerEntry * req_nnz;
        }
        pm.bytes_fetched += rs.bytes;
        pm.messages += kMessagesPerInterval * rs.intervals;
        pm.intervals += rs.intervals;
        pm.required_columns += rs.columns_required;
        pm.fetched_columns += rs.columns_fetched;
        pm.remotes.push_back(rs);
    }
    return pp;
}

// ---------------------------------------------------------------------------
// Fetch + assembly of the compacted operand. The result holds global column
// ids: the required local columns are referenced directly from the owner's
// slice data and every column covered by the remote plans. The accounting
// already happened during planning; this step only moves the data.

template <class V>
SparseMatrix<V> fetch_and_assemble(Index self, const ProcessPlan& pp,
                                   const std::vector<WindowPair<V>>& windows,
                                   const ColumnDirectory& dir, Index nrows) {
    std::vector<Index> jc, colptr, rows;
    std::vector<V> vals;
    const Index procs = static_cast<Index>(windows.size());
    for (Index o = 0; o < procs; ++o) {
        const auto& own = dir.owners[o];
        const auto& win = windows[o];
        auto copy_range = [&](Index pos_begin, Index pos_end) {
            if (pos_begin < 0 || pos_end > static_cast<Index>(own.cols.size()) || pos_begin > pos_end)
                throw InternalError("fetch interval outside directory bounds");
            if (!win.exposed) throw InternalError("window read outside exposure epoch");
            for (Index pos = pos_begin; pos < pos_end; ++pos) {
                jc.push_back(own.cols[pos]);
                colptr.push_back(static_cast<Index>(rows.size()) + own.offsets[pos] - own.offsets[pos_begin]);
            }
            rows.insert(rows.end(), win.rows.begin() + own.offsets[pos_begin],
                        win.rows.begin() + own.offsets[pos_end]);
            vals.insert(vals.end(), win.vals.begin() + own.offsets[pos_begin],
                        win.vals.begin() + own.offsets[pos_end]);
        };
        if (o == self) {
            // own columns join the compacted matrix without any fetch
            Index rp = 0;
            for (const Index c : pp.local_required) {
                while (rp < static_cast<Index>(own.cols.size()) && own.cols[rp] < c) ++rp;
                if (rp < static_cast<Index>(own.cols.size()) && own.cols[rp] == c) {
                    copy_range(rp, rp + 1);
                    ++rp;
                }
            }
        } else {
            for (const auto& iv : pp.plans[o].intervals) copy_range(iv.pos_begin, iv.pos_end);
        }
    }
    colptr.push_back(static_cast<Index>(rows.size()));
    return SparseMatrix<V>(nrows, dir.k, Storage::DCSC, std::move(jc), std::move(colptr),
                           std::move(rows), std::move(vals));
}

// ---------------------------------------------------------------------------
// The distributed multiply.

struct RuntimeOptions {
    int workers = 0;       // <=0: one per hardware thread, capped at P
    bool naive = false;    // fetch-everything baseline instead of block fetch
    bool coalesce = true;  // merge adjacent selected groups into one get
};

template <class V>
struct RunResult {
    SparseMatrix<V> c;
    RunMetrics metrics;
};

namespace detail {

template <class V>
SparseMatrix<V> concat_column_slices(Index m, const Distribution1D& dist_n,
                                     std::vector<SparseMatrix<V>>& slices) {
    std::vector<Index> jc, colptr, rows;
    std::vector<V> vals;
    for (Index i = 0; i < dist_n.procs; ++i) {
        const auto& s = slices[i];
        const Index base = static_cast<Index>(rows.size());
        for (Index slot = 0; slot < s.stored_column_count(); ++slot) {
            if (s.stored_column_rows(slot).empty()) continue;
            jc.push_back(dist_n.begin(i) + s.stored_column_id(slot));
            colptr.push_back(base + s.colptr()[slot]);
        }
        rows.insert(rows.end(), s.row_ids().begin(), s.row_ids().end());
        vals.insert(vals.end(), s.values().begin(), s.values().end());
    }
    colptr.push_back(static_cast<Index>(rows.size()));
    return SparseMatrix<V>(m, dist_n.n(), Storage::DCSC, std::move(jc), std::move(colptr),
                           std::move(rows), std::move(vals));
}

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace detail

// Runs the full pipeline on P logical processes: slice, expose windows,
// gather the column directory, plan and execute the block fetches, build the
// compacted operand and multiply it against the local B slice. A and B must
// share the k-dimension boundaries carried by dist_k; dist_n places B's (and
// C's) columns. C is returned gathered; ownership of its columns follows
// dist_n and no result communication is modeled.
template <class SR = RealPlusTimes, class Mask = NoMask>
RunResult<typename SR::value_type> spgemm_1d(const SparseMatrix<typename SR::value_type>& a,
                                             const SparseMatrix<typename SR::value_type>& b,
                                             const Distribution1D& dist_k,
                                             const Distribution1D& dist_n, Index blocks, SR sr = {},
                                             const RuntimeOptions& opt = {}, Mask mask = {}) {
    using V = typename SR::value_type;
    if (a.ncols() != b.nrows())
        throw ShapeError("spgemm_1d: inner dimensions differ (" + std::to_string(a.ncols()) + " vs " +
                         std::to_string(b.nrows()) + ")");
    if (dist_k.n() != a.ncols()) throw ConfigError("k distribution does not match A's columns");
    if (dist_n.n() != b.ncols()) throw ConfigError("n distribution does not match B's columns");
    if (dist_k.procs != dist_n.procs) throw ConfigError("mismatched distributions");
    if (!opt.naive && blocks < 1) throw ConfigError("block count K must be >= 1");

    const Index procs = dist_k.procs;
    RunMetrics metrics;
    metrics.procs = procs;
    metrics.blocks = opt.naive ? 1 : blocks;
    metrics.mem_a_bytes = kBytesPerEntry * a.nnz();
    metrics.replication_bytes = (procs - 1) * metrics.mem_a_bytes;
    metrics.per_process.resize(procs);

    std::vector<SparseMatrix<V>> a_slices(procs), b_slices(procs);
    run_parallel(procs, opt.workers, [&](Index i) {
        const auto t0 = std::chrono::steady_clock::now();
        a_slices[i] = slice_local(a, dist_k, i);
        b_slices[i] = slice_local(b, dist_n, i);
        metrics.per_process[i].rank = i;
        metrics.per_process[i].seconds_other += detail::seconds_since(t0);
    });

    auto ex = expose_windows(a_slices, dist_k);

    // fetch epoch: plan and pull remote column blocks, build the compacted operand
    std::vector<SparseMatrix<V>> a_tilde(procs);
    run_parallel(procs, opt.workers, [&](Index i) {
        auto& pm = metrics.per_process[i];
        const auto t_plan = std::chrono::steady_clock::now();
        const ProcessPlan pp = make_process_plan(i, b_slices[i], ex.dir, dist_k,
                                                 opt.naive ? 1 : blocks, opt.naive, opt.coalesce, pm);
        pm.seconds_other += detail::seconds_since(t_plan);
        const auto t_fetch = std::chrono::steady_clock::now();
        a_tilde[i] = fetch_and_assemble(i, pp, ex.windows, ex.dir, a.nrows());
        pm.seconds_comm += detail::seconds_since(t_fetch);
    });
    for (auto& w : ex.windows) w.exposed = false;  // epoch closed

    // compute epoch: local multiplies only
    std::vector<SparseMatrix<V>> c_slices(procs);
    run_parallel(procs, opt.workers, [&](Index i) {
        auto& pm = metrics.per_process[i];
        const auto t0 = std::chrono::steady_clock::now();
        Index flops = 0;
        c_slices[i] = spgemm_local(a_tilde[i], b_slices[i], sr, Accumulator::Hybrid, &flops, mask,
                                   dist_n.begin(i));
        pm.flops = flops;
        pm.seconds_comp += detail::seconds_since(t0);
    });

    RunResult<V> out{detail::concat_column_slices(a.nrows(), dist_n, c_slices), std::move(metrics)};
    return out;
}

// Baseline without sparsity awareness: every process pulls every remote
// non-empty column of A in one interval per remote, then multiplies locally.
template <class SR = RealPlusTimes>
RunResult<typename SR::value_type> spgemm_1d_naive(const SparseMatrix<typename SR::value_type>& a,
                                                   const SparseMatrix<typename SR::value_type>& b,
                                                   const Distribution1D& dist_k,
                                                   const Distribution1D& dist_n, SR sr = {},
                                                   RuntimeOptions opt = {}) {
    opt.naive = true;
    return spgemm_1d(a, b, dist_k, dist_n, 1, sr, opt);
}

// ---------------------------------------------------------------------------
// Planning-only communication analysis.

inline constexpr double kDefaultCvThreshold = 0.30;

struct CvAnalysis {
    RunMetrics metrics;
    double ratio = 0.0;
    double threshold = kDefaultCvThreshold;
    bool advisory = false;  // ratio strictly above threshold
};

// Computes the fetch plans and their volume without moving any data: the
// ratio of planned communication volume to the size of the full A matrix.
template <class VA, class VB>
CvAnalysis analyze_cv(const SparseMatrix<VA>& a, const SparseMatrix<VB>& b,
                      const Distribution1D& dist_k, const Distribution1D& dist_n, Index blocks,
                      double threshold = kDefaultCvThreshold, int workers = 0) {
    if (a.ncols() != b.nrows())
        throw ShapeError("analyze_cv: inner dimensions differ (" + std::to_string(a.ncols()) +
                         " vs " + std::to_string(b.nrows()) + ")");
    if (dist_k.n() != a.ncols()) throw ConfigError("k distribution does not match A's columns");
    if (dist_n.n() != b.ncols()) throw ConfigError("n distribution does not match B's columns");
    if (dist_k.procs != dist_n.procs) throw ConfigError("mismatched distributions");
    if (blocks < 1) throw ConfigError("block count K must be >= 1");
    if (threshold <= 0.0 || threshold > 1.0) throw ConfigError("threshold must lie in (0, 1]");

    const Index procs = dist_k.procs;
    CvAnalysis an;
    an.threshold = threshold;
    an.metrics.procs = procs;
    an.metrics.blocks = blocks;
    an.metrics.mem_a_bytes = kBytesPerEntry * a.nnz();
    an.metrics.replication_bytes = (procs - 1) * an.metrics.mem_a_bytes;
    an.metrics.per_process.resize(procs);

    std::vector<SparseMatrix<VA>> a_slices(procs);
    std::vector<SparseMatrix<VB>> b_slices(procs);
    run_parallel(procs, workers, [&](Index i) {
        a_slices[i] = slice_local(a, dist_k, i);
        b_slices[i] = slice_local(b, dist_n, i);
        an.metrics.per_process[i].rank = i;
    });
    auto ex = expose_windows(a_slices, dist_k);
    for (auto& w : ex.windows) w.exposed = false;  // analysis never reads data

    run_parallel(procs, workers, [&](Index i) {
        make_process_plan(i, b_slices[i], ex.dir, dist_k, blocks, false, true,
                          an.metrics.per_process[i]);
    });
    an.ratio = an.metrics.cv_over_mem_a();
    an.advisory = an.ratio > threshold;
    return an;
}

}  // namespace spgemm1d

#endif
