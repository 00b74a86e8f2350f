#include "apgdiag/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "apgdiag/error.hpp"
#include "apgdiag/model.hpp"

namespace apgdiag {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

[[noreturn]] void schema_error(const std::string& where, const std::string& what) {
    throw Error(ErrorCode::SchemaViolation, where + ": " + what);
}

json parse_json(const std::string& text, const std::string& source) {
    if (text.find_first_not_of(" \t\r\n") == std::string::npos) {
        throw Error(ErrorCode::ParseError, source + ": empty document");
    }
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::ParseError, source + ": " + e.what());
    }
}

const json& field(const json& obj, const char* key, const std::string& where) {
    if (!obj.is_object()) schema_error(where, "expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) schema_error(where, std::string("missing field '") + key + "'");
    return *it;
}

std::string get_string(const json& obj, const char* key, const std::string& where) {
    const json& v = field(obj, key, where);
    if (!v.is_string()) schema_error(where + "." + key, "expected a string");
    return v.get<std::string>();
}

std::string get_string_or(const json& obj, const char* key, const std::string& where, std::string fallback) {
    if (!obj.contains(key)) return fallback;
    return get_string(obj, key, where);
}

double get_number(const json& obj, const char* key, const std::string& where) {
    const json& v = field(obj, key, where);
    if (!v.is_number()) schema_error(where + "." + key, "expected a number");
    return v.get<double>();
}

std::int64_t get_int(const json& obj, const char* key, const std::string& where) {
    const json& v = field(obj, key, where);
    if (!v.is_number_integer()) schema_error(where + "." + key, "expected an integer");
    return v.get<std::int64_t>();
}

const json& get_array(const json& obj, const char* key, const std::string& where) {
    const json& v = field(obj, key, where);
    if (!v.is_array()) schema_error(where + "." + key, "expected an array");
    return v;
}

const json& optional_array(const json& obj, const char* key, const std::string& where) {
    static const json kEmpty = json::array();
    if (!obj.is_object()) schema_error(where, "expected an object");
    if (!obj.contains(key)) return kEmpty;
    return get_array(obj, key, where);
}

std::string at(const std::string& where, const char* key, std::size_t i) {
    return where + "." + key + "[" + std::to_string(i) + "]";
}

bool safe_name(const std::string& s) {
    if (s.empty()) return false;
    return std::all_of(s.begin(), s.end(), [](char c) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' ||
               c == '-' || c == '.';
    });
}

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

OperatorRecord parse_operator(const json& j, const std::string& where) {
    OperatorRecord op;
    op.op_id = get_string(j, "op_id", where);
    op.op_kind = get_string(j, "op_kind", where);
    op.elapsed_s = get_number(j, "elapsed_s", where);
    const json& reads = optional_array(j, "reads", where);
    for (std::size_t i = 0; i < reads.size(); ++i) {
        if (!reads[i].is_string()) schema_error(at(where, "reads", i), "expected a string");
        op.reads.push_back(reads[i].get<std::string>());
    }
    const json& children = optional_array(j, "children", where);
    for (std::size_t i = 0; i < children.size(); ++i) {
        op.children.push_back(parse_operator(children[i], at(where, "children", i)));
    }
    return op;
}

json operator_to_json(const OperatorRecord& op) {
    json children = json::array();
    for (const auto& c : op.children) children.push_back(operator_to_json(c));
    return {{"op_id", op.op_id},
            {"op_kind", op.op_kind},
            {"reads", op.reads},
            {"elapsed_s", op.elapsed_s},
            {"children", children}};
}

PlanSnapshot plan_from_json(const json& j, const std::string& where) {
    PlanSnapshot p;
    p.query_id = get_string(j, "query_id", where);
    p.run_id = get_string(j, "run_id", where);
    p.started_at = get_int(j, "started_at", where);
    p.total_elapsed_s = get_number(j, "total_elapsed_s", where);
    p.host = get_string_or(j, "host", where, "");
    p.root = parse_operator(field(j, "root", where), where + ".root");
    auto violations = validate_plan(p);
    if (!violations.empty()) schema_error(where, violations.front());
    return p;
}

json plan_to_json(const PlanSnapshot& p) {
    json j = {{"query_id", p.query_id},
              {"run_id", p.run_id},
              {"started_at", p.started_at},
              {"total_elapsed_s", p.total_elapsed_s},
              {"root", operator_to_json(p.root)}};
    if (!p.host.empty()) j["host"] = p.host;
    return j;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        auto pos = line.find(',', start);
        out.push_back(line.substr(start, pos == std::string::npos ? std::string::npos : pos - start));
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    return out;
}

}  // namespace

// --- files ------------------------------------------------------------------

std::string read_text_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const fs::path& path, const std::string& text) {
    std::error_code ec;
    if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + tmp.string());
        out << text;
        out.flush();
        if (!out) throw Error(ErrorCode::IoFailure, "short write to " + tmp.string());
    }
    fs::rename(tmp, path, ec);
    if (ec) throw Error(ErrorCode::IoFailure, "cannot rename " + tmp.string() + ": " + ec.message());
}

// --- topology ---------------------------------------------------------------

std::vector<std::string> validate_topology(const TopologyDoc& doc) {
    std::vector<std::string> out;
    std::map<std::string, NodeKind> kinds;
    for (const auto& c : doc.components) {
        if (c.id.empty()) {
            out.push_back("component with empty id");
            continue;
        }
        if (!kinds.emplace(c.id, c.kind).second) out.push_back("duplicate component id '" + c.id + "'");
        if (layer_of(c.kind) == Layer::DbLogical && c.kind != NodeKind::Tablespace) {
            out.push_back("component '" + c.id + "' has plan-level kind " + std::string(to_string(c.kind)));
        }
        for (const auto& [k, v] : c.attrs) {
            if (k.empty()) out.push_back("component '" + c.id + "' has an empty attribute key");
        }
    }
    auto known = [&](const std::string& id, const std::string& where) {
        if (kinds.count(id) != 0) return true;
        out.push_back(where + " references undeclared component '" + id + "'");
        return false;
    };

    std::map<std::string, int> onward;  // logical id -> number of allocations out
    for (const auto& conn : doc.connections) {
        bool ok = known(conn.from, "connection " + conn.from + " -> " + conn.to);
        ok = known(conn.to, "connection " + conn.from + " -> " + conn.to) && ok;
        if (ok && !path_edge_for(kinds[conn.from], kinds[conn.to])) {
            out.push_back("connection " + conn.from + " -> " + conn.to + " joins " +
                          std::string(to_string(kinds[conn.from])) + " to " + std::string(to_string(kinds[conn.to])));
        }
    }
    for (const auto& a : doc.allocations) {
        bool ok = known(a.logical, "allocation " + a.logical + " -> " + a.physical);
        ok = known(a.physical, "allocation " + a.logical + " -> " + a.physical) && ok;
        if (!ok) continue;
        if (!allocation_edge_for(kinds[a.logical], kinds[a.physical])) {
            out.push_back("allocation " + a.logical + " -> " + a.physical + " maps " +
                          std::string(to_string(kinds[a.logical])) + " to " +
                          std::string(to_string(kinds[a.physical])));
        } else {
            ++onward[a.logical];
        }
    }
    for (const auto& s : doc.sharing) {
        bool ok = known(s.workload, "sharing " + s.workload + " -> " + s.target);
        ok = known(s.target, "sharing " + s.workload + " -> " + s.target) && ok;
        if (ok && !edge_allowed(EdgeKind::SharesWith, kinds[s.workload], kinds[s.target])) {
            out.push_back("sharing " + s.workload + " -> " + s.target + " must link an ExternalWorkload to a "
                          "Volume or StoragePool");
        }
    }
    for (const auto& c : doc.components) {
        if ((c.kind == NodeKind::Tablespace || c.kind == NodeKind::Volume || c.kind == NodeKind::StoragePool) &&
            onward[c.id] == 0) {
            out.push_back(std::string(to_string(c.kind)) + " '" + c.id +
                          "' has no allocation; allocation chains must terminate at Disk nodes");
        }
    }
    return out;
}

TopologyDoc parse_topology(const std::string& text) {
    const json j = parse_json(text, "topology");
    const std::string where = "topology";
    if (!j.is_object()) schema_error(where, "expected an object");
    TopologyDoc doc;
    const json& comps = get_array(j, "components", where);
    for (std::size_t i = 0; i < comps.size(); ++i) {
        const std::string w = at(where, "components", i);
        Component c;
        c.id = get_string(comps[i], "id", w);
        const std::string kind = get_string(comps[i], "kind", w);
        auto k = parse_node_kind(kind);
        if (!k) schema_error(w + ".kind", "unknown node kind '" + kind + "'");
        c.kind = *k;
        if (comps[i].contains("attrs")) {
            const json& attrs = comps[i]["attrs"];
            if (!attrs.is_object()) schema_error(w + ".attrs", "expected an object");
            for (const auto& [key, value] : attrs.items()) {
                if (value.is_string()) {
                    c.attrs[key] = value.get<std::string>();
                } else if (value.is_number() || value.is_boolean()) {
                    c.attrs[key] = value.dump();
                } else {
                    schema_error(w + ".attrs." + key, "expected a scalar");
                }
            }
        }
        doc.components.push_back(std::move(c));
    }
    const json& conns = optional_array(j, "connections", where);
    for (std::size_t i = 0; i < conns.size(); ++i) {
        const std::string w = at(where, "connections", i);
        doc.connections.push_back({get_string(conns[i], "from", w), get_string(conns[i], "to", w)});
    }
    const json& allocs = optional_array(j, "allocations", where);
    for (std::size_t i = 0; i < allocs.size(); ++i) {
        const std::string w = at(where, "allocations", i);
        doc.allocations.push_back({get_string(allocs[i], "logical", w), get_string(allocs[i], "physical", w)});
    }
    const json& shares = optional_array(j, "sharing", where);
    for (std::size_t i = 0; i < shares.size(); ++i) {
        const std::string w = at(where, "sharing", i);
        doc.sharing.push_back({get_string(shares[i], "workload", w), get_string(shares[i], "target", w)});
    }
    auto violations = validate_topology(doc);
    if (!violations.empty()) {
        std::string msg = violations.front();
        for (std::size_t i = 1; i < violations.size(); ++i) msg += "; " + violations[i];
        throw Error(ErrorCode::SchemaViolation, msg);
    }
    return doc;
}

TopologyDoc load_topology(const fs::path& path) {
    if (!fs::exists(path)) throw Error(ErrorCode::IoFailure, "no such file " + path.string());
    return parse_topology(read_text_file(path));
}

std::string serialize_topology(const TopologyDoc& doc) {
    json comps = json::array();
    for (const auto& c : doc.components) {
        comps.push_back({{"id", c.id}, {"kind", to_string(c.kind)}, {"attrs", c.attrs}});
    }
    json conns = json::array();
    for (const auto& c : doc.connections) conns.push_back({{"from", c.from}, {"to", c.to}});
    json allocs = json::array();
    for (const auto& a : doc.allocations) allocs.push_back({{"logical", a.logical}, {"physical", a.physical}});
    json shares = json::array();
    for (const auto& s : doc.sharing) shares.push_back({{"workload", s.workload}, {"target", s.target}});
    json j = {{"components", comps}, {"connections", conns}, {"allocations", allocs}, {"sharing", shares}};
    return j.dump(2) + "\n";
}

// --- plans ------------------------------------------------------------------

std::vector<std::string> validate_plan(const PlanSnapshot& plan) {
    std::vector<std::string> out;
    if (!safe_name(plan.query_id)) out.push_back("query_id '" + plan.query_id + "' must match [A-Za-z0-9._-]+");
    if (!safe_name(plan.run_id)) out.push_back("run_id '" + plan.run_id + "' must match [A-Za-z0-9._-]+");
    if (!(plan.total_elapsed_s > 0.0)) out.push_back("total_elapsed_s must be positive");
    std::set<std::string> ids;
    for_each_operator(plan.root, [&](const OperatorRecord& op) {
        if (op.op_id.empty()) out.push_back("operator with empty op_id");
        if (op.op_kind.empty()) out.push_back("operator '" + op.op_id + "' has empty op_kind");
        if (!ids.insert(op.op_id).second) out.push_back("operator id '" + op.op_id + "' repeats in the plan tree");
        if (!(op.elapsed_s >= 0.0)) out.push_back("operator '" + op.op_id + "' has negative elapsed_s");
        if (op.elapsed_s > plan.total_elapsed_s * (1.0 + 1e-9)) {
            out.push_back("operator '" + op.op_id + "' elapsed exceeds the query total");
        }
    });
    return out;
}

PlanSnapshot parse_plan(const std::string& text) {
    return plan_from_json(parse_json(text, "plan"), "plan");
}

std::string serialize_plan(const PlanSnapshot& plan) { return plan_to_json(plan).dump(2) + "\n"; }

// --- metrics ----------------------------------------------------------------

std::vector<double> MetricSeries::values_in(const TimeWindow& window) const {
    std::vector<double> out;
    for (const auto& s : samples) {
        if (window.contains(s.timestamp)) out.push_back(s.value);
    }
    return out;
}

std::string unit_for_metric(const std::string& metric) {
    auto ends_with = [&](std::string_view suffix) {
        return metric.size() >= suffix.size() && metric.compare(metric.size() - suffix.size(), suffix.size(), suffix) == 0;
    };
    if (ends_with("_pct")) return "percent";
    if (ends_with("_ms")) return "ms";
    if (ends_with("_s")) return "s";
    if (ends_with("_mbps")) return "MB/s";
    if (metric == "iops") return "ops/s";
    if (ends_with("_len")) return "count";
    return "";
}

void validate_series(const MetricSeries& series) {
    if (series.interval_s <= 0) {
        throw Error(ErrorCode::IrregularSampling, series.component_id + "/" + series.metric + ": interval must be positive");
    }
    for (std::size_t i = 1; i < series.samples.size(); ++i) {
        const auto prev = series.samples[i - 1].timestamp;
        const auto cur = series.samples[i].timestamp;
        if (cur <= prev) {
            throw Error(ErrorCode::NonMonotoneTimestamps, series.component_id + "/" + series.metric + ": timestamp " +
                                                               std::to_string(cur) + " does not follow " +
                                                               std::to_string(prev));
        }
        if ((cur - prev) % series.interval_s != 0) {
            throw Error(ErrorCode::IrregularSampling,
                        series.component_id + "/" + series.metric + ": gap " + std::to_string(cur - prev) +
                            " s is not a multiple of " + std::to_string(series.interval_s) + " s");
        }
    }
}

std::vector<MetricSeries> parse_metrics(const std::string& text, const MetricFilter& filter, std::int64_t interval_s,
                                        const std::string& source) {
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    bool header_seen = false;
    std::map<std::pair<std::string, std::string>, MetricSeries> series;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!header_seen) {
            if (line != kMetricsHeader) {
                throw Error(ErrorCode::ParseError, source + ":" + std::to_string(lineno) + ": expected header '" +
                                                       kMetricsHeader + "'");
            }
            header_seen = true;
            continue;
        }
        if (line.empty()) continue;
        auto cols = split_csv_line(line);
        const std::string locus = source + ":" + std::to_string(lineno);
        if (cols.size() != 4) throw Error(ErrorCode::ParseError, locus + ": expected 4 columns");
        MetricSample s;
        {
            const auto& c = cols[0];
            auto res = std::from_chars(c.data(), c.data() + c.size(), s.timestamp);
            if (res.ec != std::errc() || res.ptr != c.data() + c.size()) {
                throw Error(ErrorCode::ParseError, locus + ": bad timestamp '" + c + "'");
            }
        }
        {
            const auto& c = cols[3];
            auto res = std::from_chars(c.data(), c.data() + c.size(), s.value);
            if (res.ec != std::errc() || res.ptr != c.data() + c.size()) {
                throw Error(ErrorCode::ParseError, locus + ": bad value '" + c + "'");
            }
        }
        if (cols[1].empty() || cols[2].empty()) throw Error(ErrorCode::ParseError, locus + ": empty identifier");
        auto& ser = series[{cols[1], cols[2]}];
        if (ser.samples.empty()) {
            ser.component_id = cols[1];
            ser.metric = cols[2];
            ser.unit = unit_for_metric(cols[2]);
            ser.interval_s = interval_s;
        } else if (s.timestamp <= ser.samples.back().timestamp) {
            throw Error(ErrorCode::NonMonotoneTimestamps, locus + ": " + cols[1] + "/" + cols[2] + " timestamp " +
                                                               cols[0] + " does not follow " +
                                                               std::to_string(ser.samples.back().timestamp));
        }
        ser.samples.push_back(s);
    }
    if (!header_seen) throw Error(ErrorCode::ParseError, source + ": empty file");

    std::vector<MetricSeries> out;
    for (auto& [key, ser] : series) {
        validate_series(ser);
        if (!filter.components.empty() && filter.components.count(ser.component_id) == 0) continue;
        if (filter.window) {
            std::erase_if(ser.samples, [&](const MetricSample& s) { return !filter.window->contains(s.timestamp); });
            if (ser.samples.empty()) continue;
        }
        out.push_back(std::move(ser));
    }
    return out;
}

std::vector<MetricSeries> load_metrics(const fs::path& path, const MetricFilter& filter, std::int64_t interval_s) {
    if (!fs::exists(path)) throw Error(ErrorCode::IoFailure, "no such file " + path.string());
    return parse_metrics(read_text_file(path), filter, interval_s, path.filename().string());
}

std::vector<MetricSeries> load_metrics_dir(const fs::path& dir, const MetricFilter& filter, std::int64_t interval_s) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".csv") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    // Parse every file unfiltered so cross-file ordering is still checked.
    std::map<std::pair<std::string, std::string>, MetricSeries> merged;
    for (const auto& f : files) {
        for (auto& ser : load_metrics(f, {}, interval_s)) {
            auto& dst = merged[{ser.component_id, ser.metric}];
            if (dst.samples.empty()) {
                dst = std::move(ser);
                continue;
            }
            if (!ser.samples.empty() && ser.samples.front().timestamp <= dst.samples.back().timestamp) {
                throw Error(ErrorCode::NonMonotoneTimestamps,
                            f.filename().string() + ": " + ser.component_id + "/" + ser.metric +
                                " overlaps samples from an earlier file");
            }
            dst.samples.insert(dst.samples.end(), ser.samples.begin(), ser.samples.end());
        }
    }
    std::vector<MetricSeries> out;
    for (auto& [key, ser] : merged) {
        validate_series(ser);
        if (!filter.components.empty() && filter.components.count(ser.component_id) == 0) continue;
        if (filter.window) {
            std::erase_if(ser.samples, [&](const MetricSample& s) { return !filter.window->contains(s.timestamp); });
            if (ser.samples.empty()) continue;
        }
        out.push_back(std::move(ser));
    }
    return out;
}

std::string serialize_metrics(const std::vector<MetricRow>& rows) {
    std::string out = std::string(kMetricsHeader) + "\n";
    for (const auto& r : rows) {
        out += std::to_string(r.timestamp);
        out += ',';
        out += r.component_id;
        out += ',';
        out += r.metric;
        out += ',';
        out += format_double(r.value);
        out += '\n';
    }
    return out;
}

// --- events -----------------------------------------------------------------

EventLog parse_events(const std::string& text) {
    EventLog log;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const std::string where = "events.jsonl:" + std::to_string(lineno);
        const json j = parse_json(line, where);
        const std::string type = get_string_or(j, "type", where, "config");
        if (type == "config") {
            ConfigEvent e;
            e.timestamp = get_int(j, "timestamp", where);
            e.component_id = get_string(j, "component_id", where);
            e.key = get_string(j, "key", where);
            e.old_value = get_string(j, "old_value", where);
            e.new_value = get_string(j, "new_value", where);
            if (e.old_value == e.new_value) schema_error(where, "old_value equals new_value");
            log.config.push_back(std::move(e));
        } else if (type == "db") {
            DbEvent e;
            e.timestamp = get_int(j, "timestamp", where);
            e.code = get_string(j, "code", where);
            e.target = get_string(j, "target", where);
            log.db.push_back(std::move(e));
        } else {
            schema_error(where + ".type", "unknown event type '" + type + "'");
        }
    }
    return log;
}

EventLog load_events(const fs::path& path) {
    if (!fs::exists(path)) throw Error(ErrorCode::IoFailure, "no such file " + path.string());
    return parse_events(read_text_file(path));
}

std::string serialize_events(const EventLog& log) {
    // Merge both kinds in timestamp order; config before db on ties.
    struct Line {
        std::int64_t ts;
        int kind;
        std::size_t idx;
    };
    std::vector<Line> lines;
    for (std::size_t i = 0; i < log.config.size(); ++i) lines.push_back({log.config[i].timestamp, 0, i});
    for (std::size_t i = 0; i < log.db.size(); ++i) lines.push_back({log.db[i].timestamp, 1, i});
    std::stable_sort(lines.begin(), lines.end(), [](const Line& a, const Line& b) {
        return a.ts != b.ts ? a.ts < b.ts : a.kind < b.kind;
    });
    std::string out;
    for (const auto& l : lines) {
        json j;
        if (l.kind == 0) {
            const auto& e = log.config[l.idx];
            j = {{"type", "config"},     {"timestamp", e.timestamp},     {"component_id", e.component_id},
                 {"key", e.key},         {"old_value", e.old_value},     {"new_value", e.new_value}};
        } else {
            const auto& e = log.db[l.idx];
            j = {{"type", "db"}, {"timestamp", e.timestamp}, {"code", e.code}, {"target", e.target}};
        }
        out += j.dump() + "\n";
    }
    return out;
}

// --- run store --------------------------------------------------------------

std::string serialize_run(const RunRecord& r) {
    json j = {{"run_index", r.index},
              {"fingerprint", r.fingerprint},
              {"window", {{"start", r.window.start}, {"end", r.window.end}}},
              {"snapshot", plan_to_json(r.snapshot)}};
    return j.dump(2) + "\n";
}

RunRecord parse_run(const std::string& text) {
    const json j = parse_json(text, "run");
    const std::string where = "run";
    RunRecord r;
    const std::int64_t idx = get_int(j, "run_index", where);
    if (idx < 0) schema_error(where + ".run_index", "must be non-negative");
    r.index = static_cast<std::size_t>(idx);
    r.fingerprint = get_string(j, "fingerprint", where);
    const json& w = field(j, "window", where);
    r.window.start = get_int(w, "start", where + ".window");
    r.window.end = get_int(w, "end", where + ".window");
    r.snapshot = plan_from_json(field(j, "snapshot", where), where + ".snapshot");
    const std::string expected = plan_fingerprint(r.snapshot);
    if (expected != r.fingerprint) {
        schema_error(where + ".fingerprint", "stored " + r.fingerprint + " but plan hashes to " + expected);
    }
    return r;
}

RunStore RunStore::open(const fs::path& root, std::int64_t interval_s) {
    RunStore store(root, interval_s);
    std::error_code ec;
    fs::create_directories(root, ec);
    if (ec) throw Error(ErrorCode::IoFailure, "cannot create run store at " + root.string() + ": " + ec.message());

    std::vector<fs::path> query_dirs;
    for (const auto& entry : fs::directory_iterator(root)) {
        if (entry.is_directory()) query_dirs.push_back(entry.path());
    }
    std::sort(query_dirs.begin(), query_dirs.end());
    for (const auto& qdir : query_dirs) {
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(qdir)) {
            if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
        }
        std::sort(files.begin(), files.end());
        const std::string query_id = qdir.filename().string();
        auto& seq = store.by_query_[query_id];
        for (const auto& f : files) {
            RunRecord r;
            try {
                r = parse_run(read_text_file(f));
            } catch (const Error& e) {
                throw Error(e.code(), f.string() + ": " + e.what());
            }
            if (r.snapshot.query_id != query_id) {
                throw Error(ErrorCode::SchemaViolation, f.string() + ": run belongs to query '" +
                                                            r.snapshot.query_id + "'");
            }
            if (r.index != seq.size()) {
                throw Error(ErrorCode::SchemaViolation, f.string() + ": expected run_index " +
                                                            std::to_string(seq.size()));
            }
            if (!store.run_ids_.insert(r.snapshot.run_id).second) {
                throw Error(ErrorCode::DuplicateRunId, f.string() + ": run id '" + r.snapshot.run_id + "' repeats");
            }
            seq.push_back(std::move(r));
        }
    }
    return store;
}

std::size_t RunStore::append(const PlanSnapshot& snapshot) {
    auto violations = validate_plan(snapshot);
    if (!violations.empty()) throw Error(ErrorCode::SchemaViolation, violations.front());
    if (run_ids_.count(snapshot.run_id) != 0) {
        throw Error(ErrorCode::DuplicateRunId, "run id '" + snapshot.run_id + "' already stored");
    }
    auto& seq = by_query_[snapshot.query_id];
    RunRecord r;
    r.index = seq.size();
    r.fingerprint = plan_fingerprint(snapshot);
    const auto duration = static_cast<std::int64_t>(std::ceil(snapshot.total_elapsed_s));
    r.window = {snapshot.started_at - interval_s_, snapshot.started_at + duration + interval_s_};
    r.snapshot = snapshot;

    char name[32];
    std::snprintf(name, sizeof(name), "%06zu-", r.index);
    const fs::path file = root_ / snapshot.query_id / (std::string(name) + snapshot.run_id + ".json");
    write_text_file(file, serialize_run(r));

    run_ids_.insert(snapshot.run_id);
    seq.push_back(std::move(r));
    return seq.back().index;
}

const std::vector<RunRecord>& RunStore::runs(const std::string& query_id) const {
    static const std::vector<RunRecord> kEmpty;
    auto it = by_query_.find(query_id);
    return it == by_query_.end() ? kEmpty : it->second;
}

const RunRecord* RunStore::find_run(const std::string& query_id, const std::string& run_id) const {
    for (const auto& r : runs(query_id)) {
        if (r.snapshot.run_id == run_id) return &r;
    }
    return nullptr;
}

std::vector<std::string> RunStore::query_ids() const {
    std::vector<std::string> out;
    for (const auto& [q, seq] : by_query_) {
        if (!seq.empty()) out.push_back(q);
    }
    return out;
}

std::size_t append_run(RunStore& store, const PlanSnapshot& snapshot) { return store.append(snapshot); }

std::vector<RunRecord> history(const RunStore& store, const std::string& query_id, const std::string& fingerprint,
                               std::size_t limit, std::optional<std::size_t> before) {
    std::vector<RunRecord> out;
    const auto& seq = store.runs(query_id);
    for (auto it = seq.rbegin(); it != seq.rend() && out.size() < limit; ++it) {
        if (before && it->index >= *before) continue;
        if (it->fingerprint == fingerprint) out.push_back(*it);
    }
    std::reverse(out.begin(), out.end());
    return out;
}

// --- dataset ----------------------------------------------------------------

Dataset open_dataset(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw Error(ErrorCode::IoFailure, "no dataset directory " + dir.string());
    Dataset ds{load_topology(dir / "topology.json"), RunStore::open(dir / "runs"), {}, {}};
    if (fs::is_directory(dir / "metrics")) ds.metrics = load_metrics_dir(dir / "metrics");
    if (fs::exists(dir / "events.jsonl")) ds.events = load_events(dir / "events.jsonl");
    return ds;
}

}  // namespace apgdiag
