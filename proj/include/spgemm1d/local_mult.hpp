#ifndef SPGEMM1D_LOCAL_MULT_HPP
#define SPGEMM1D_LOCAL_MULT_HPP

#include <algorithm>
#include <cstdint>
#include <vector>

#include "spgemm1d/semiring.hpp"
#include "spgemm1d/sparse.hpp"

namespace spgemm1d {

enum class Accumulator { Heap, Hash, Hybrid };

// Passes every output row; the default mask of the kernels below.
struct NoMask {
    constexpr bool operator()(Index, Index) const { return true; }
};

// Sparse flops: scalar multiplications a*b with both operands stored.
struct FlopsEstimate {
    std::vector<Index> per_col;  // indexed by output column id
    Index total = 0;
};

// Per output column j, the flop count is the sum of nnz(A column t) over the
// stored entries (t, j) of B; the total is the inner product of A's
// column-count vector with B's row-count vector.
template <class TA, class TB>
FlopsEstimate estimate_flops(const SparseMatrix<TA>& a, const SparseMatrix<TB>& b) {
    if (a.ncols() != b.nrows())
        throw ShapeError("estimate_flops: inner dimensions differ (" + std::to_string(a.ncols()) +
                         " vs " + std::to_string(b.nrows()) + ")");
    std::vector<Index> a_colnnz(a.ncols(), 0);
    for (Index s = 0; s < a.stored_column_count(); ++s)
        a_colnnz[a.stored_column_id(s)] = static_cast<Index>(a.stored_column_rows(s).size());

    FlopsEstimate est;
    est.per_col.assign(b.ncols(), 0);
    for (Index s = 0; s < b.stored_column_count(); ++s) {
        const Index j = b.stored_column_id(s);
        Index f = 0;
        for (Index t : b.stored_column_rows(s)) f += a_colnnz[t];
        est.per_col[j] = f;
        est.total += f;
    }
    return est;
}

namespace detail {

// Hash map grows to the next power of two >= 2x the expected insert count,
// keeping the load factor at or below one half. Linear probing.
inline std::size_t hash_table_size(Index expected) {
    std::size_t want = static_cast<std::size_t>(expected) * 2;
    std::size_t cap = 4;
    while (cap < want) cap <<= 1;
    return cap;
}

inline std::size_t hash_slot(Index key, std::size_t cap) {
    return static_cast<std::size_t>(static_cast<std::uint64_t>(key) * 0x9E3779B97F4A7C15ull) & (cap - 1);
}

template <class SR>
struct ColumnKernel {
    using V = typename SR::value_type;

    struct Stream {
        std::span<const Index> rows;
        std::span<const V> vals;
        V scale;
        std::size_t pos;
    };

    std::vector<Stream> streams;
    std::vector<std::pair<Index, V>> table;  // hash slots, row == -1 when empty
    std::vector<std::pair<Index, V>> sorted;
    std::vector<Index> heap;  // indices into streams, ordered by (row, stream)

    void clear_streams() { streams.clear(); }

    void add_stream(std::span<const Index> rows, std::span<const V> vals, V scale) {
        if (!rows.empty()) streams.push_back({rows, vals, scale, 0});
    }

    bool heap_less(Index x, Index y) const {
        const Index rx = streams[x].rows[streams[x].pos];
        const Index ry = streams[y].rows[streams[y].pos];
        return rx != ry ? rx < ry : x < y;
    }

    void heap_sift_down(std::size_t i) {
        const std::size_t n = heap.size();
        while (true) {
            std::size_t l = 2 * i + 1, r = 2 * i + 2, best = i;
            if (l < n && heap_less(heap[l], heap[best])) best = l;
            if (r < n && heap_less(heap[r], heap[best])) best = r;
            if (best == i) break;
            std::swap(heap[i], heap[best]);
            i = best;
        }
    }

    // Merges the scaled A-columns as sorted streams; equal row ids are
    // combined with semiring add in ascending stream order.
    template <class Mask, class Emit>
    Index merge_heap(SR sr, Index out_col, Mask&& mask, Emit&& emit) {
        Index flops = 0;
        heap.clear();
        for (Index s = 0; s < static_cast<Index>(streams.size()); ++s) heap.push_back(s);
        for (std::size_t i = heap.size(); i-- > 0;) heap_sift_down(i);
        while (!heap.empty()) {
            const Index row = streams[heap[0]].rows[streams[heap[0]].pos];
            V acc = sr.zero();
            while (!heap.empty() && streams[heap[0]].rows[streams[heap[0]].pos] == row) {
                Stream& st = streams[heap[0]];
                acc = sr.add(acc, sr.mul(st.vals[st.pos], st.scale));
                ++flops;
                ++st.pos;
                if (st.pos == st.rows.size()) {
                    heap[0] = heap.back();
                    heap.pop_back();
                }
                if (!heap.empty()) heap_sift_down(0);
            }
            if (mask(row, out_col)) emit(row, acc);
        }
        return flops;
    }

    template <class Mask, class Emit>
    Index scatter_hash(SR sr, Index out_col, Index expected, Mask&& mask, Emit&& emit) {
        Index flops = 0;
        const std::size_t cap = hash_table_size(expected);
        table.assign(cap, {Index{-1}, sr.zero()});
        for (Stream& st : streams) {
            for (std::size_t p = 0; p < st.rows.size(); ++p) {
                const Index row = st.rows[p];
                const V prod = sr.mul(st.vals[p], st.scale);
                ++flops;
                if (!mask(row, out_col)) continue;
                std::size_t slot = hash_slot(row, cap);
                while (true) {
                    if (table[slot].first == row) {
                        table[slot].second = sr.add(table[slot].second, prod);
                        break;
                    }
                    if (table[slot].first < 0) {
                        table[slot] = {row, prod};
                        break;
                    }
                    slot = (slot + 1) & (cap - 1);
                }
            }
        }
        sorted.clear();
        for (const auto& kv : table)
            if (kv.first >= 0) sorted.push_back(kv);
        std::sort(sorted.begin(), sorted.end(),
                  [](const auto& x, const auto& y) { return x.first < y.first; });
        for (const auto& kv : sorted) emit(kv.first, kv.second);
        return flops;
    }
};

}  // namespace detail

// Column-by-column SpGEMM over a semiring. The hybrid accumulator picks, per
// output column, hash when the estimated flops exceed twice the number of
// merged A-columns, heap otherwise. `mask` filters output positions by
// (row, mask_col_offset + output column); a masked-off position is never
// accumulated. Returns the result and reports the multiplications performed
// through `flops_out` when non-null.
template <class SR, class Mask = NoMask>
SparseMatrix<typename SR::value_type> spgemm_local(
    const SparseMatrix<typename SR::value_type>& a, const SparseMatrix<typename SR::value_type>& b,
    SR sr = {}, Accumulator acc = Accumulator::Hybrid, Index* flops_out = nullptr,
    Mask mask = {}, Index mask_col_offset = 0, Storage out_mode = Storage::DCSC) {
    using V = typename SR::value_type;
    if (a.ncols() != b.nrows())
        throw ShapeError("spgemm_local: inner dimensions differ (" + std::to_string(a.ncols()) +
                         " vs " + std::to_string(b.nrows()) + ")");

    detail::ColumnKernel<SR> kern;
    std::vector<Index> jc, colptr, rows;
    std::vector<V> vals;
    Index flops = 0;

    for (Index s = 0; s < b.stored_column_count(); ++s) {
        const Index j = b.stored_column_id(s);
        auto brows = b.stored_column_rows(s);
        auto bvals = b.stored_column_vals(s);

        kern.clear_streams();
        Index col_flops = 0;
        for (std::size_t p = 0; p < brows.size(); ++p) {
            auto acol = a.column(brows[p]);
            col_flops += acol.size();
            kern.add_stream(acol.rows, acol.vals, bvals[p]);
        }
        if (kern.streams.empty()) continue;

        const Index before = static_cast<Index>(rows.size());
        auto emit = [&](Index row, V v) {
            rows.push_back(row);
            vals.push_back(v);
        };
        const Index gcol = mask_col_offset + j;
        bool use_hash;
        switch (acc) {
            case Accumulator::Heap: use_hash = false; break;
            case Accumulator::Hash: use_hash = true; break;
            default: use_hash = col_flops > 2 * static_cast<Index>(kern.streams.size()); break;
        }
        flops += use_hash ? kern.scatter_hash(sr, gcol, col_flops, mask, emit)
                          : kern.merge_heap(sr, gcol, mask, emit);
        if (static_cast<Index>(rows.size()) > before) {
            jc.push_back(j);
            colptr.push_back(before);
        }
    }
    colptr.push_back(static_cast<Index>(rows.size()));
    if (flops_out) *flops_out = flops;

    SparseMatrix<V> c(a.nrows(), b.ncols(), Storage::DCSC, std::move(jc), std::move(colptr),
                      std::move(rows), std::move(vals));
    return out_mode == Storage::DCSC ? c : c.with_storage(out_mode);
}

}  // namespace spgemm1d

#endif
