#include "spgemm1d/report.hpp"

#include "json.hpp"

namespace spgemm1d {

namespace {

using Json = nlohmann::ordered_json;

Json value_to_json(const ReportValue& v) {
    return std::visit([](const auto& x) { return Json(x); }, v);
}

Json fields_to_json(const ReportFields& fields) {
    Json out = Json::object();
    for (const auto& [k, v] : fields) out[k] = value_to_json(v);
    return out;
}

Json aggregate_json(const RunMetrics& m) {
    Json a = Json::object();
    a["procs"] = m.procs;
    a["blocks"] = m.blocks;
    a["bytes_fetched"] = m.total_bytes();
    a["required_bytes"] = m.total_required_bytes();
    a["messages"] = m.total_messages();
    a["intervals"] = m.total_intervals();
    a["max_intervals_per_remote"] = m.max_intervals_per_remote();
    a["flops"] = m.total_flops();
    a["required_columns"] = m.total_required_columns();
    a["fetched_columns"] = m.total_fetched_columns();
    a["mem_a_bytes"] = m.mem_a_bytes;
    a["cv_over_memA"] = m.cv_over_mem_a();
    return a;
}

Json per_process_json(const RunMetrics& m, bool timings) {
    Json arr = Json::array();
    for (const auto& p : m.per_process) {
        Json e = Json::object();
        e["rank"] = p.rank;
        e["bytes_fetched"] = p.bytes_fetched;
        e["required_bytes"] = p.required_bytes;
        e["messages"] = p.messages;
        e["intervals"] = p.intervals;
        e["flops"] = p.flops;
        e["required_columns"] = p.required_columns;
        e["fetched_columns"] = p.fetched_columns;
        e["local_columns_used"] = p.local_columns_used;
        if (timings) {
            e["seconds_comm"] = p.seconds_comm;
            e["seconds_comp"] = p.seconds_comp;
            e["seconds_other"] = p.seconds_other;
        }
        arr.push_back(std::move(e));
    }
    return arr;
}

}  // namespace

std::string render_report(const ReportInfo& info) {
    Json root = Json::object();
    root["command"] = info.command;
    root["config"] = fields_to_json(info.config);
    if (info.has_result) {
        Json r = Json::object();
        r["nrows"] = info.result_rows;
        r["ncols"] = info.result_cols;
        r["nnz"] = info.result_nnz;
        root["result"] = std::move(r);
    }
    if (info.metrics) {
        root["aggregate"] = aggregate_json(*info.metrics);
        root["per_process"] = per_process_json(*info.metrics, info.include_timings);
    }
    if (info.metrics_left) root["left"] = aggregate_json(*info.metrics_left);
    if (info.metrics_right) root["right"] = aggregate_json(*info.metrics_right);
    if (info.oracle && info.oracle->checked) {
        Json o = Json::object();
        o["pattern_equal"] = info.oracle->pattern_equal;
        o["max_rel_err"] = info.oracle->max_rel_err;
        o["pass"] = info.oracle->pass;
        root["oracle"] = std::move(o);
    }
    if (info.has_advisory) {
        Json a = Json::object();
        a["cv_over_memA"] = info.ratio;
        a["threshold"] = info.threshold;
        a["partitioning_advised"] = info.advisory;
        root["advisory"] = std::move(a);
    }
    for (const auto& [k, v] : info.extra) root[k] = value_to_json(v);
    return root.dump(2) + "\n";
}

}  // namespace spgemm1d
