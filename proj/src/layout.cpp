#include "spgemm1d/layout.hpp"

#include <algorithm>
#include <cerrno>
#include <cstdlib>
#include <deque>
#include <fstream>

namespace spgemm1d {

Distribution1D::Distribution1D(Index p, std::vector<Index> b) : procs(p), boundaries(std::move(b)) {
    if (procs < 1) throw ConfigError("process count must be >= 1");
    if (static_cast<Index>(boundaries.size()) != procs + 1 || boundaries.front() != 0)
        throw ConfigError("distribution boundaries malformed");
    for (Index i = 0; i < procs; ++i)
        if (boundaries[i + 1] < boundaries[i]) throw ConfigError("distribution boundaries decrease");
}

Index Distribution1D::owner(Index col) const {
    if (col < 0 || col >= n()) throw IndexError("column id out of range: " + std::to_string(col));
    const auto it = std::upper_bound(boundaries.begin(), boundaries.end(), col);
    return static_cast<Index>(it - boundaries.begin()) - 1;
}

Distribution1D distribute_even(Index n, Index procs) {
    if (procs < 1) throw ConfigError("process count must be >= 1");
    if (n < 0) throw ConfigError("negative column count");
    std::vector<Index> b(procs + 1, 0);
    const Index base = n / procs, extra = n % procs;
    for (Index i = 0; i < procs; ++i) b[i + 1] = b[i] + base + (i < extra ? 1 : 0);
    return Distribution1D(procs, std::move(b));
}

PartitionVector read_partition_vector(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    PartitionVector parts;
    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::size_t i = 0;
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        if (i == line.size()) continue;
        char* end = nullptr;
        errno = 0;
        const long long v = std::strtoll(line.c_str() + i, &end, 10);
        if (end == line.c_str() + i || errno == ERANGE) throw ParseError("expected part id", lineno);
        while (*end) {
            if (!std::isspace(static_cast<unsigned char>(*end))) throw ParseError("trailing garbage", lineno);
            ++end;
        }
        if (v < 0) throw ParseError("negative part id", lineno);
        parts.push_back(static_cast<Index>(v));
    }
    return parts;
}

void write_partition_vector(const PartitionVector& parts, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    for (Index p : parts) out << p << '\n';
    if (!out) throw IoError("write to '" + path + "' failed");
}

namespace detail {

std::pair<Permutation, Distribution1D> partition_to_permutation(const PartitionVector& parts, Index n,
                                                                Index procs) {
    if (procs < 1) throw ConfigError("process count must be >= 1");
    if (static_cast<Index>(parts.size()) != n)
        throw ConfigError("partition vector length " + std::to_string(parts.size()) +
                          " does not match column count " + std::to_string(n));
    std::vector<Index> sizes(procs, 0);
    for (Index p : parts) {
        if (p < 0 || p >= procs)
            throw ConfigError("part id " + std::to_string(p) + " outside 0.." + std::to_string(procs - 1));
        ++sizes[p];
    }
    if (n >= procs)
        for (Index p = 0; p < procs; ++p)
            if (sizes[p] == 0) throw ConfigError("part " + std::to_string(p) + " is empty");

    std::vector<Index> b(procs + 1, 0);
    for (Index p = 0; p < procs; ++p) b[p + 1] = b[p] + sizes[p];
    std::vector<Index> next(b.begin(), b.end() - 1);
    std::vector<Index> fwd(n);
    for (Index j = 0; j < n; ++j) fwd[j] = next[parts[j]]++;  // stable within a part
    return {Permutation(std::move(fwd)), Distribution1D(procs, std::move(b))};
}

GreedyPartitionResult greedy_partition_core(Index n, const std::vector<Index>& adj_ptr,
                                            const std::vector<Index>& adj_ids,
                                            const VertexWeights& weights, Index procs) {
    GreedyPartitionResult res;
    res.parts.assign(n, 0);
    res.part_weights.assign(procs, 0);

    Index total = 0;
    for (Index w : weights) total += w;

    if (total == 0) {
        // no work to balance; contiguous even chunks
        const Distribution1D even = distribute_even(n, procs);
        for (Index p = 0; p < procs; ++p)
            for (Index j = even.begin(p); j < even.end(p); ++j) res.parts[j] = p;
    } else {
        std::vector<char> assigned(n, 0);
        std::deque<Index> queue;
        Index assigned_count = 0;
        Index next_seed = 0;
        Index remaining = total;
        for (Index p = 0; p < procs && assigned_count < n; ++p) {
            if (p == procs - 1) {
                for (Index j = 0; j < n; ++j)
                    if (!assigned[j]) {
                        res.parts[j] = p;
                        res.part_weights[p] += weights[j];
                        ++assigned_count;
                    }
                break;
            }
            const double target = static_cast<double>(remaining) / static_cast<double>(procs - p);
            const Index vertex_cap = n - assigned_count - (procs - 1 - p);
            Index grabbed = 0;
            queue.clear();
            while (grabbed < vertex_cap &&
                   (grabbed == 0 || static_cast<double>(res.part_weights[p]) < target)) {
                Index v = -1;
                while (!queue.empty()) {
                    const Index cand = queue.front();
                    queue.pop_front();
                    if (!assigned[cand]) {
                        v = cand;
                        break;
                    }
                }
                if (v < 0) {
                    while (next_seed < n && assigned[next_seed]) ++next_seed;
                    if (next_seed == n) break;
                    v = next_seed;  // start a fresh BFS cluster inside this part
                }
                assigned[v] = 1;
                res.parts[v] = p;
                res.part_weights[p] += weights[v];
                remaining -= weights[v];
                ++assigned_count;
                ++grabbed;
                for (Index e = adj_ptr[v]; e < adj_ptr[v + 1]; ++e)
                    if (!assigned[adj_ids[e]]) queue.push_back(adj_ids[e]);
            }
        }
    }

    for (Index u = 0; u < n; ++u)
        for (Index e = adj_ptr[u]; e < adj_ptr[u + 1]; ++e)
            if (u < adj_ids[e] && res.parts[u] != res.parts[adj_ids[e]]) ++res.cut_edges;

    if (total > 0) {
        const double avg = static_cast<double>(total) / static_cast<double>(procs);
        Index maxw = 0;
        for (Index w : res.part_weights) maxw = std::max(maxw, w);
        res.imbalance = static_cast<double>(maxw) / avg;
    }
    res.balanced = res.imbalance <= kBalanceBound;
    return res;
}

}  // namespace detail

}  // namespace spgemm1d
