#ifndef SPGEMM1D_REPORT_HPP
#define SPGEMM1D_REPORT_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "spgemm1d/apps.hpp"
#include "spgemm1d/metrics.hpp"

namespace spgemm1d {

using ReportValue = std::variant<std::int64_t, double, bool, std::string>;
using ReportFields = std::vector<std::pair<std::string, ReportValue>>;

// Everything a run report can carry. Field order is fixed so identical runs
// serialize to identical bytes; wall-clock phase times only appear when
// include_timings is set.
struct ReportInfo {
    std::string command;
    ReportFields config;
    ReportFields extra;
    const RunMetrics* metrics = nullptr;
    const RunMetrics* metrics_left = nullptr;
    const RunMetrics* metrics_right = nullptr;
    const OracleCheck* oracle = nullptr;
    bool include_timings = false;
    bool has_result = false;
    Index result_rows = 0;
    Index result_cols = 0;
    Index result_nnz = 0;
    bool has_advisory = false;
    double ratio = 0.0;
    double threshold = 0.0;
    bool advisory = false;
};

std::string render_report(const ReportInfo& info);

}  // namespace spgemm1d

#endif
