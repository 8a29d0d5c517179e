#ifndef SPGEMM1D_LAYOUT_HPP
#define SPGEMM1D_LAYOUT_HPP

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "spgemm1d/sparse.hpp"

namespace spgemm1d {

// 1D block-column layout: process i owns global columns
// [boundaries[i], boundaries[i+1]).
struct Distribution1D {
    Index procs = 1;
    std::vector<Index> boundaries;  // procs+1 offsets, [0]==0, back()==n

    Distribution1D() : boundaries{0, 0} {}
    Distribution1D(Index p, std::vector<Index> b);

    Index n() const { return boundaries.back(); }
    Index begin(Index i) const { return boundaries[i]; }
    Index end(Index i) const { return boundaries[i + 1]; }
    Index width(Index i) const { return boundaries[i + 1] - boundaries[i]; }
    Index owner(Index col) const;

    friend bool operator==(const Distribution1D&, const Distribution1D&) = default;
};

// Block sizes differ by at most one; the remainder goes to the leading blocks.
Distribution1D distribute_even(Index n, Index procs);

using PartitionVector = std::vector<Index>;  // part id per column, in 0..P-1
using VertexWeights = std::vector<Index>;

// ASCII partition-vector file: one base-10 part id per line.
PartitionVector read_partition_vector(const std::string& path);
void write_partition_vector(const PartitionVector& parts, const std::string& path);

struct Strategy {
    enum class Kind { Identity, Random, Partition };
    Kind kind = Kind::Identity;
    std::uint64_t seed = 0;          // Random
    PartitionVector partition;       // Partition
    bool allow_symmetrize = false;   // permit Partition on pattern-asymmetric input

    static Strategy identity() { return {}; }
    static Strategy random(std::uint64_t seed) { return {Kind::Random, seed, {}, false}; }
    static Strategy from_partition(PartitionVector parts, bool allow_symmetrize = false) {
        return {Kind::Partition, 0, std::move(parts), allow_symmetrize};
    }
};

// weight[j] = nnz(column j)^2; in graph terms, the squared vertex degree.
template <class T>
VertexWeights compute_vertex_weights(const SparseMatrix<T>& a) {
    VertexWeights w(a.ncols(), 0);
    for (Index s = 0; s < a.stored_column_count(); ++s) {
        const Index c = static_cast<Index>(a.stored_column_rows(s).size());
        w[a.stored_column_id(s)] = c * c;
    }
    return w;
}

namespace detail {

// Deterministic Fisher-Yates; avoids std::shuffle so the permutation is
// identical across standard library implementations.
inline std::vector<Index> random_perm(Index n, std::uint64_t seed) {
    std::vector<Index> p(n);
    for (Index i = 0; i < n; ++i) p[i] = i;
    std::mt19937_64 rng(seed);
    for (Index i = n - 1; i > 0; --i) {
        const Index j = static_cast<Index>(rng() % static_cast<std::uint64_t>(i + 1));
        std::swap(p[i], p[j]);
    }
    return p;
}

std::pair<Permutation, Distribution1D> partition_to_permutation(const PartitionVector& parts, Index n,
                                                                Index procs);

}  // namespace detail

// Resolves a strategy into the column relabeling plus the block boundaries.
// Partition groups each part's columns contiguously (stable within a part)
// with boundaries at the part sizes; partitioning is restricted to square,
// pattern-symmetric inputs unless the caller explicitly allows symmetrization.
template <class T>
std::pair<Permutation, Distribution1D> strategy_to_permutation(const SparseMatrix<T>& a,
                                                               const Strategy& strategy, Index procs) {
    const Index n = a.ncols();
    switch (strategy.kind) {
        case Strategy::Kind::Identity:
            return {Permutation::identity(n), distribute_even(n, procs)};
        case Strategy::Kind::Random:
            return {Permutation(detail::random_perm(n, strategy.seed)), distribute_even(n, procs)};
        default: {
            if (a.nrows() != a.ncols())
                throw ShapeError("partition strategy requires a square matrix");
            if (!strategy.allow_symmetrize && !pattern_symmetric(a))
                throw ShapeError(
                    "partition strategy requires a pattern-symmetric matrix (pass --symmetrize to "
                    "override)");
            return detail::partition_to_permutation(strategy.partition, n, procs);
        }
    }
}

struct GreedyPartitionResult {
    PartitionVector parts;
    std::vector<Index> part_weights;
    Index cut_edges = 0;
    double imbalance = 1.0;  // max part weight over average
    bool balanced = true;    // imbalance <= kBalanceBound
};

inline constexpr double kBalanceBound = 1.25;

namespace detail {
GreedyPartitionResult greedy_partition_core(Index n, const std::vector<Index>& adj_ptr,
                                            const std::vector<Index>& adj_ids,
                                            const VertexWeights& weights, Index procs);

template <class T>
void symmetric_adjacency(const SparseMatrix<T>& a, std::vector<Index>& ptr, std::vector<Index>& ids) {
    const Index n = a.ncols();
    std::vector<std::pair<Index, Index>> edges;
    for (Index s = 0; s < a.stored_column_count(); ++s) {
        const Index j = a.stored_column_id(s);
        for (Index r : a.stored_column_rows(s)) {
            if (r == j) continue;  // self-loops are not graph edges
            edges.emplace_back(r, j);
            edges.emplace_back(j, r);
        }
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    ptr.assign(n + 1, 0);
    ids.clear();
    ids.reserve(edges.size());
    for (const auto& [u, v] : edges) {
        ++ptr[u + 1];
        ids.push_back(v);
    }
    for (Index i = 0; i < n; ++i) ptr[i + 1] += ptr[i];
}

}  // namespace detail

// Built-in fallback partitioner: grows parts as unions of BFS clusters over
// the symmetrized pattern, aiming each part at the average weight. Imbalance
// is reported, never silently repaired.
template <class T>
GreedyPartitionResult greedy_partition(const SparseMatrix<T>& a, Index procs,
                                       const VertexWeights& weights) {
    if (a.nrows() != a.ncols()) throw ShapeError("greedy_partition requires a square matrix");
    if (procs < 1) throw ConfigError("process count must be >= 1");
    if (static_cast<Index>(weights.size()) != a.ncols())
        throw ShapeError("weight vector length does not match column count");
    std::vector<Index> ptr, ids;
    detail::symmetric_adjacency(a, ptr, ids);
    return detail::greedy_partition_core(a.ncols(), ptr, ids, weights, procs);
}

template <class T>
GreedyPartitionResult greedy_partition(const SparseMatrix<T>& a, Index procs) {
    return greedy_partition(a, procs, compute_vertex_weights(a));
}

// The m x width(i) column slice owned by process i; global column j maps to
// local column j - boundaries[i]. Keeps the input's storage mode.
template <class T>
SparseMatrix<T> slice_local(const SparseMatrix<T>& a, const Distribution1D& dist, Index i) {
    if (i < 0 || i >= dist.procs) throw IndexError("process id out of range: " + std::to_string(i));
    if (dist.n() != a.ncols()) throw ConfigError("distribution does not match matrix columns");
    const Index lo = dist.begin(i), hi = dist.end(i);
    std::vector<Index> jc, colptr, rows;
    std::vector<T> vals;
    for (Index s = 0; s < a.stored_column_count(); ++s) {
        const Index j = a.stored_column_id(s);
        if (j < lo || j >= hi) continue;
        auto r = a.stored_column_rows(s);
        auto v = a.stored_column_vals(s);
        if (a.mode() == Storage::DCSC && r.empty()) continue;
        jc.push_back(j - lo);
        colptr.push_back(static_cast<Index>(rows.size()));
        rows.insert(rows.end(), r.begin(), r.end());
        vals.insert(vals.end(), v.begin(), v.end());
    }
    colptr.push_back(static_cast<Index>(rows.size()));
    SparseMatrix<T> slice(a.nrows(), hi - lo, Storage::DCSC, std::move(jc), std::move(colptr),
                          std::move(rows), std::move(vals));
    return a.mode() == Storage::DCSC ? slice : slice.with_storage(Storage::CSC);
}

}  // namespace spgemm1d

#endif
