#ifndef SPGEMM1D_SPARSE_HPP
#define SPGEMM1D_SPARSE_HPP

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "spgemm1d/errors.hpp"

namespace spgemm1d {

using Index = std::int64_t;

template <class T>
struct Triplet {
    Index row = 0;
    Index col = 0;
    T val{};
};

enum class Storage { CSC, DCSC };

// Compressed-column sparse matrix. CSC keeps a colptr entry for every column
// (empty columns have zero-length ranges); DCSC additionally compresses away
// empty columns and keeps the list of non-empty column ids. Row indices are
// strictly increasing within each column. Immutable after construction.
template <class T>
class SparseMatrix {
public:
    using value_type = T;

    SparseMatrix() = default;

    SparseMatrix(Index nrows, Index ncols, Storage mode, std::vector<Index> jc,
                 std::vector<Index> colptr, std::vector<Index> rows, std::vector<T> vals)
        : nrows_(nrows),
          ncols_(ncols),
          mode_(mode),
          jc_(std::move(jc)),
          colptr_(std::move(colptr)),
          rows_(std::move(rows)),
          vals_(std::move(vals)) {}

    Index nrows() const { return nrows_; }
    Index ncols() const { return ncols_; }
    Storage mode() const { return mode_; }
    Index nnz() const { return static_cast<Index>(rows_.size()); }

    // Count of columns holding at least one stored entry.
    Index nzc() const {
        if (mode_ == Storage::DCSC) return static_cast<Index>(jc_.size());
        Index c = 0;
        for (Index j = 0; j < ncols_; ++j)
            if (colptr_[j + 1] > colptr_[j]) ++c;
        return c;
    }

    // Number of column slots physically stored (== nzc for DCSC).
    Index stored_column_count() const {
        return mode_ == Storage::DCSC ? static_cast<Index>(jc_.size()) : ncols_;
    }

    Index stored_column_id(Index slot) const {
        return mode_ == Storage::DCSC ? jc_[slot] : slot;
    }

    std::span<const Index> stored_column_rows(Index slot) const {
        return {rows_.data() + colptr_[slot], static_cast<std::size_t>(colptr_[slot + 1] - colptr_[slot])};
    }

    std::span<const T> stored_column_vals(Index slot) const {
        return {vals_.data() + colptr_[slot], static_cast<std::size_t>(colptr_[slot + 1] - colptr_[slot])};
    }

    struct ColumnView {
        std::span<const Index> rows;
        std::span<const T> vals;
        bool empty() const { return rows.empty(); }
        Index size() const { return static_cast<Index>(rows.size()); }
    };

    // Column by global id; empty view for columns with no stored entries.
    ColumnView column(Index j) const {
        if (j < 0 || j >= ncols_) throw IndexError("column id out of range: " + std::to_string(j));
        Index slot;
        if (mode_ == Storage::CSC) {
            slot = j;
        } else {
            auto it = std::lower_bound(jc_.begin(), jc_.end(), j);
            if (it == jc_.end() || *it != j) return {};
            slot = static_cast<Index>(it - jc_.begin());
        }
        return {stored_column_rows(slot), stored_column_vals(slot)};
    }

    const std::vector<Index>& nonzero_column_ids() const { return jc_; }
    const std::vector<Index>& colptr() const { return colptr_; }
    const std::vector<Index>& row_ids() const { return rows_; }
    const std::vector<T>& values() const { return vals_; }

    std::vector<Triplet<T>> triplets() const {
        std::vector<Triplet<T>> out;
        out.reserve(rows_.size());
        for (Index s = 0; s < stored_column_count(); ++s) {
            const Index j = stored_column_id(s);
            for (Index p = colptr_[s]; p < colptr_[s + 1]; ++p)
                out.push_back({rows_[p], j, vals_[p]});
        }
        return out;
    }

    SparseMatrix<T> with_storage(Storage target) const;

    // Logical comparison: dims plus stored (row, col, value) sequences.
    friend bool operator==(const SparseMatrix<T>& a, const SparseMatrix<T>& b) {
        if (a.nrows_ != b.nrows_ || a.ncols_ != b.ncols_ || a.nnz() != b.nnz()) return false;
        auto ta = a.triplets(), tb = b.triplets();
        for (std::size_t i = 0; i < ta.size(); ++i)
            if (ta[i].row != tb[i].row || ta[i].col != tb[i].col || !(ta[i].val == tb[i].val))
                return false;
        return true;
    }

private:
    Index nrows_ = 0;
    Index ncols_ = 0;
    Storage mode_ = Storage::DCSC;
    std::vector<Index> jc_;      // DCSC only: sorted non-empty column ids
    std::vector<Index> colptr_;  // CSC: ncols+1 entries; DCSC: jc.size()+1
    std::vector<Index> rows_;
    std::vector<T> vals_;
};

namespace detail {

// Shared assembly step: triplets must arrive sorted by (col, row) with
// duplicates adjacent; duplicates are summed with `add`. Exact zeros produced
// by the summation are retained (a semiring cannot in general test for them).
template <class T, class Add>
SparseMatrix<T> assemble_sorted(Index m, Index n, std::vector<Triplet<T>>& ts, Storage mode, Add add) {
    std::vector<Index> jc, colptr, rows;
    std::vector<T> vals;
    rows.reserve(ts.size());
    vals.reserve(ts.size());
    std::size_t i = 0;
    while (i < ts.size()) {
        Index col = ts[i].col;
        Index row = ts[i].row;
        T acc = ts[i].val;
        ++i;
        while (i < ts.size() && ts[i].col == col && ts[i].row == row) {
            acc = add(acc, ts[i].val);
            ++i;
        }
        if (jc.empty() || jc.back() != col) {
            jc.push_back(col);
            colptr.push_back(static_cast<Index>(rows.size()));
        }
        rows.push_back(row);
        vals.push_back(acc);
    }
    colptr.push_back(static_cast<Index>(rows.size()));

    if (mode == Storage::DCSC)
        return SparseMatrix<T>(m, n, mode, std::move(jc), std::move(colptr), std::move(rows), std::move(vals));

    // Expand to one colptr entry per column.
    std::vector<Index> full(n + 1, 0);
    for (std::size_t s = 0; s < jc.size(); ++s) full[jc[s] + 1] = colptr[s + 1] - colptr[s];
    for (Index j = 0; j < n; ++j) full[j + 1] += full[j];
    return SparseMatrix<T>(m, n, mode, {}, std::move(full), std::move(rows), std::move(vals));
}

}  // namespace detail

template <class T, class Add>
SparseMatrix<T> from_triplets(Index m, Index n, std::vector<Triplet<T>> ts, Storage mode, Add add) {
    if (m < 0 || n < 0) throw ShapeError("negative matrix dimension");
    for (const auto& t : ts)
        if (t.row < 0 || t.row >= m || t.col < 0 || t.col >= n)
            throw IndexError("triplet (" + std::to_string(t.row) + "," + std::to_string(t.col) +
                             ") outside " + std::to_string(m) + "x" + std::to_string(n));
    // stable sort keeps duplicate-summation order deterministic
    std::stable_sort(ts.begin(), ts.end(), [](const Triplet<T>& a, const Triplet<T>& b) {
        return a.col != b.col ? a.col < b.col : a.row < b.row;
    });
    return detail::assemble_sorted(m, n, ts, mode, add);
}

template <class T>
SparseMatrix<T> from_triplets(Index m, Index n, std::vector<Triplet<T>> ts, Storage mode = Storage::DCSC) {
    return from_triplets(m, n, std::move(ts), mode, [](T a, T b) { return T(a + b); });
}

template <class T>
SparseMatrix<T> SparseMatrix<T>::with_storage(Storage target) const {
    if (target == mode_) return *this;
    if (target == Storage::CSC) {
        std::vector<Index> full(ncols_ + 1, 0);
        for (std::size_t s = 0; s < jc_.size(); ++s) full[jc_[s] + 1] = colptr_[s + 1] - colptr_[s];
        for (Index j = 0; j < ncols_; ++j) full[j + 1] += full[j];
        return SparseMatrix<T>(nrows_, ncols_, target, {}, std::move(full), rows_, vals_);
    }
    std::vector<Index> jc, cp;
    for (Index j = 0; j < ncols_; ++j) {
        if (colptr_[j + 1] > colptr_[j]) {
            jc.push_back(j);
            cp.push_back(colptr_[j]);
        }
    }
    cp.push_back(static_cast<Index>(rows_.size()));
    return SparseMatrix<T>(nrows_, ncols_, target, std::move(jc), std::move(cp), rows_, vals_);
}

template <class T>
SparseMatrix<T> transpose(const SparseMatrix<T>& a) {
    auto ts = a.triplets();
    for (auto& t : ts) std::swap(t.row, t.col);
    return from_triplets<T>(a.ncols(), a.nrows(), std::move(ts), a.mode());
}

// Drop entries equal to the given additive identity.
template <class T>
SparseMatrix<T> prune_zeros(const SparseMatrix<T>& a, T zero = T{}) {
    auto ts = a.triplets();
    std::erase_if(ts, [&](const Triplet<T>& t) { return t.val == zero; });
    return from_triplets<T>(a.nrows(), a.ncols(), std::move(ts), a.mode());
}

template <class To, class From, class Fn>
SparseMatrix<To> map_values(const SparseMatrix<From>& a, Fn fn) {
    auto ts = a.triplets();
    std::vector<Triplet<To>> out;
    out.reserve(ts.size());
    for (const auto& t : ts) out.push_back({t.row, t.col, fn(t.val)});
    return from_triplets<To>(a.nrows(), a.ncols(), std::move(out), a.mode());
}

// Bijective relabeling of 0..n-1. forward()[old] == new.
class Permutation {
public:
    explicit Permutation(std::vector<Index> fwd) : fwd_(std::move(fwd)) {
        std::vector<char> seen(fwd_.size(), 0);
        for (Index v : fwd_) {
            if (v < 0 || v >= static_cast<Index>(fwd_.size()) || seen[v])
                throw ConfigError("permutation is not a bijection");
            seen[v] = 1;
        }
    }

    static Permutation identity(Index n) {
        std::vector<Index> f(n);
        std::iota(f.begin(), f.end(), Index{0});
        return Permutation(std::move(f));
    }

    Index size() const { return static_cast<Index>(fwd_.size()); }
    Index operator()(Index i) const { return fwd_[i]; }
    const std::vector<Index>& forward() const { return fwd_; }

    Permutation inverse() const {
        std::vector<Index> inv(fwd_.size());
        for (Index i = 0; i < size(); ++i) inv[fwd_[i]] = i;
        return Permutation(std::move(inv));
    }

    bool is_identity() const {
        for (Index i = 0; i < size(); ++i)
            if (fwd_[i] != i) return false;
        return true;
    }

private:
    std::vector<Index> fwd_;
};

// Symmetric relabeling: result[perm(i), perm(j)] = a[i, j].
template <class T>
SparseMatrix<T> permute_symmetric(const SparseMatrix<T>& a, const Permutation& perm) {
    if (a.nrows() != a.ncols()) throw ShapeError("symmetric permutation requires a square matrix");
    if (perm.size() != a.ncols()) throw ShapeError("permutation size does not match matrix");
    auto ts = a.triplets();
    for (auto& t : ts) {
        t.row = perm(t.row);
        t.col = perm(t.col);
    }
    return from_triplets<T>(a.nrows(), a.ncols(), std::move(ts), a.mode());
}

// Structural symmetry: entry (i,j) stored iff (j,i) stored.
template <class T>
bool pattern_symmetric(const SparseMatrix<T>& a) {
    if (a.nrows() != a.ncols()) return false;
    auto ts = a.triplets();
    std::vector<std::pair<Index, Index>> fwd, rev;
    fwd.reserve(ts.size());
    rev.reserve(ts.size());
    for (const auto& t : ts) {
        fwd.emplace_back(t.row, t.col);
        rev.emplace_back(t.col, t.row);
    }
    std::sort(fwd.begin(), fwd.end());
    std::sort(rev.begin(), rev.end());
    return fwd == rev;
}

}  // namespace spgemm1d

#endif
