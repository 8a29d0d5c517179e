#ifndef SPGEMM1D_METRICS_HPP
#define SPGEMM1D_METRICS_HPP

#include <algorithm>
#include <vector>

#include "spgemm1d/sparse.hpp"

namespace spgemm1d {

// Byte accounting convention: every stored entry moves as an 8-byte row id
// plus an 8-byte value, one from each window; there is no per-message header.
inline constexpr Index kBytesPerEntry = 16;
// Every planned interval issues one get per window (row ids, values).
inline constexpr Index kMessagesPerInterval = 2;

struct PerRemoteStat {
    Index remote = 0;
    Index intervals = 0;         // M for this remote, always <= K
    Index columns_required = 0;  // columns of this remote's slice we need
    Index columns_fetched = 0;   // columns actually pulled (block granularity)
    Index bytes = 0;
};

struct ProcessMetrics {
    Index rank = 0;
    Index bytes_fetched = 0;
    Index required_bytes = 0;  // bytes of the strictly required remote columns
    Index messages = 0;
    Index intervals = 0;
    Index flops = 0;
    Index required_columns = 0;  // remote columns needed
    Index fetched_columns = 0;   // remote columns pulled
    Index local_columns_used = 0;
    std::vector<PerRemoteStat> remotes;
    double seconds_comm = 0.0;
    double seconds_comp = 0.0;
    double seconds_other = 0.0;
};

// Communication volume relative to what full replication of A would move:
// each of the P processes would pull everything it does not own, (P-1)*memA
// bytes in total. 1.0 means every process fetches all remote columns of A.
inline double cv_ratio(Index total_fetched_bytes, Index replication_bytes) {
    if (replication_bytes <= 0) return 0.0;
    return static_cast<double>(total_fetched_bytes) / static_cast<double>(replication_bytes);
}

struct RunMetrics {
    Index procs = 1;
    Index blocks = 0;
    Index mem_a_bytes = 0;           // 16 * nnz(A)
    Index replication_bytes = 0;     // (P-1) * mem_a, the cv denominator
    std::vector<ProcessMetrics> per_process;

    Index total_bytes() const {
        Index s = 0;
        for (const auto& p : per_process) s += p.bytes_fetched;
        return s;
    }
    Index total_required_bytes() const {
        Index s = 0;
        for (const auto& p : per_process) s += p.required_bytes;
        return s;
    }
    Index total_messages() const {
        Index s = 0;
        for (const auto& p : per_process) s += p.messages;
        return s;
    }
    Index total_intervals() const {
        Index s = 0;
        for (const auto& p : per_process) s += p.intervals;
        return s;
    }
    Index total_flops() const {
        Index s = 0;
        for (const auto& p : per_process) s += p.flops;
        return s;
    }
    Index total_required_columns() const {
        Index s = 0;
        for (const auto& p : per_process) s += p.required_columns;
        return s;
    }
    Index total_fetched_columns() const {
        Index s = 0;
        for (const auto& p : per_process) s += p.fetched_columns;
        return s;
    }
    Index max_intervals_per_remote() const {
        Index m = 0;
        for (const auto& p : per_process)
            for (const auto& r : p.remotes) m = std::max(m, r.intervals);
        return m;
    }
    double cv_over_mem_a() const { return cv_ratio(total_bytes(), replication_bytes); }
};

// Elementwise sum, used to combine the metrics of multi-run pipelines
// (Galerkin's two multiplies, BC's per-level products). The cv denominator
// accumulates so cv_over_mem_a stays a volume-weighted ratio.
inline void merge_metrics(RunMetrics& dst, const RunMetrics& src) {
    if (dst.per_process.empty()) {
        dst = src;
        return;
    }
    dst.blocks = src.blocks;
    dst.mem_a_bytes += src.mem_a_bytes;
    dst.replication_bytes += src.replication_bytes;
    for (std::size_t i = 0; i < dst.per_process.size() && i < src.per_process.size(); ++i) {
        auto& d = dst.per_process[i];
        const auto& s = src.per_process[i];
        d.bytes_fetched += s.bytes_fetched;
        d.required_bytes += s.required_bytes;
        d.messages += s.messages;
        d.intervals += s.intervals;
        d.flops += s.flops;
        d.required_columns += s.required_columns;
        d.fetched_columns += s.fetched_columns;
        d.local_columns_used += s.local_columns_used;
        d.seconds_comm += s.seconds_comm;
        d.seconds_comp += s.seconds_comp;
        d.seconds_other += s.seconds_other;
        d.remotes.clear();  // per-remote detail is not meaningful across runs
    }
}

}  // namespace spgemm1d

#endif
