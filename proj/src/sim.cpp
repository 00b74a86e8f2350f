#include "apgdiag/sim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <set>

#include <nlohmann/json.hpp>

#include "apgdiag/error.hpp"
#include "apgdiag/model.hpp"

namespace apgdiag::sim {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

[[noreturn]] void invalid(const std::string& what) { throw Error(ErrorCode::InvalidScenario, what); }

struct MetricDef {
    const char* name;
    double base;
};

// Metric vocabulary per component kind, with default base values.
std::vector<MetricDef> vocabulary(NodeKind kind) {
    switch (kind) {
        case NodeKind::Server: return {{"cpu_util_pct", 35.0}, {"run_queue_len", 2.0}};
        case NodeKind::Hba: return {{"throughput_mbps", 200.0}};
        case NodeKind::SwitchPort: return {{"utilization_pct", 30.0}};
        case NodeKind::Switch: return {{"throughput_mbps", 800.0}};
        case NodeKind::ControllerPort: return {{"utilization_pct", 40.0}};
        case NodeKind::Controller: return {{"cpu_util_pct", 30.0}};
        case NodeKind::StoragePool: return {{"utilization_pct", 50.0}, {"iops", 5000.0}, {"latency_ms", 4.0}};
        case NodeKind::Volume: return {{"iops", 500.0}, {"latency_ms", 5.0}};
        case NodeKind::Disk: return {{"utilization_pct", 50.0}, {"latency_ms", 8.0}};
        case NodeKind::ExternalWorkload: return {{"iops", 300.0}};
        default: return {};
    }
}

double attr_number(const Component& c, const std::string& key, double fallback) {
    auto it = c.attrs.find(key);
    if (it == c.attrs.end()) return fallback;
    try {
        std::size_t used = 0;
        double v = std::stod(it->second, &used);
        if (used != it->second.size()) throw std::invalid_argument(key);
        return v;
    } catch (const std::exception&) {
        invalid("component '" + c.id + "' attribute " + key + " is not a number");
    }
}

double base_of(const Component& c, const std::string& metric, double fallback) {
    return attr_number(c, "base_" + metric, fallback);
}

double round_to(double v, double quantum) { return std::round(v / quantum) * quantum; }

OperatorSpec parse_operator_spec(const json& j, const std::string& where) {
    if (!j.is_object()) invalid(where + ": expected an object");
    OperatorSpec op;
    try {
        op.op_id = j.at("op_id").get<std::string>();
        op.op_kind = j.at("op_kind").get<std::string>();
        op.nominal_s = j.at("nominal_s").get<double>();
        if (j.contains("reads")) op.reads = j["reads"].get<std::vector<std::string>>();
        op.io_fraction = j.value("io_fraction", 0.0);
    } catch (const json::exception& e) {
        invalid(where + ": " + e.what());
    }
    if (j.contains("children")) {
        if (!j["children"].is_array()) invalid(where + ".children: expected an array");
        for (std::size_t i = 0; i < j["children"].size(); ++i) {
            op.children.push_back(parse_operator_spec(j["children"][i], where + ".children[" + std::to_string(i) + "]"));
        }
    }
    return op;
}

void check_operator_spec(const OperatorSpec& op, const std::string& query) {
    if (!(op.nominal_s > 0.0)) invalid("query '" + query + "' operator '" + op.op_id + "' needs nominal_s > 0");
    if (op.io_fraction < 0.0 || op.io_fraction > 1.0) {
        invalid("query '" + query + "' operator '" + op.op_id + "' io_fraction must lie in [0, 1]");
    }
    if (op.reads.empty() && op.io_fraction != 0.0) {
        invalid("query '" + query + "' operator '" + op.op_id + "' has io_fraction but reads nothing");
    }
    for (const auto& c : op.children) check_operator_spec(c, query);
}

OperatorRecord shape_of(const OperatorSpec& spec) {
    OperatorRecord r{spec.op_id, spec.op_kind, spec.reads, spec.nominal_s, {}};
    for (const auto& c : spec.children) r.children.push_back(shape_of(c));
    return r;
}

double total_nominal(const OperatorSpec& spec) {
    double t = spec.nominal_s;
    for (const auto& c : spec.children) t += total_nominal(c);
    return t;
}

std::string utc_date(std::int64_t epoch) {
    using namespace std::chrono;
    const sys_days day = floor<days>(sys_seconds{seconds{epoch}});
    const year_month_day ymd{day};
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

// Static lookups over the scenario topology.
struct TopologyIndex {
    std::map<std::string, const Component*> by_id;
    std::map<std::string, std::vector<std::string>> volumes_of_ts;
    std::map<std::string, std::vector<std::string>> pools_of_volume;
    std::map<std::string, std::vector<std::string>> volumes_of_pool;
    std::map<std::string, std::vector<std::string>> disks_of_pool;
    std::map<std::string, std::set<std::string>> path_of_volume;  // PathVia nodes leading to the volume's pools
    std::map<std::string, std::vector<std::string>> sharers;      // pool or volume -> external workloads

    explicit TopologyIndex(const TopologyDoc& topo) {
        for (const auto& c : topo.components) by_id[c.id] = &c;
        std::map<std::string, std::vector<std::string>> path_in;
        for (const auto& conn : topo.connections) path_in[conn.to].push_back(conn.from);
        for (const auto& a : topo.allocations) {
            const NodeKind lk = by_id.at(a.logical)->kind;
            if (lk == NodeKind::Tablespace) volumes_of_ts[a.logical].push_back(a.physical);
            if (lk == NodeKind::Volume) {
                pools_of_volume[a.logical].push_back(a.physical);
                volumes_of_pool[a.physical].push_back(a.logical);
            }
            if (lk == NodeKind::StoragePool) disks_of_pool[a.logical].push_back(a.physical);
        }
        for (const auto& [vol, pools] : pools_of_volume) {
            auto& path = path_of_volume[vol];
            std::vector<std::string> stack(pools.begin(), pools.end());
            while (!stack.empty()) {
                std::string id = stack.back();
                stack.pop_back();
                for (const auto& up : path_in[id]) {
                    if (path.insert(up).second) stack.push_back(up);
                }
            }
        }
        for (const auto& s : topo.sharing) sharers[s.target].push_back(s.workload);
    }

    const Component& at(const std::string& id) const { return *by_id.at(id); }

    double pool_base_util(const std::string& pool) const {
        return base_of(at(pool), "utilization_pct", 50.0) / 100.0;
    }

    double pool_capacity(const std::string& pool) const {
        const double iops = base_of(at(pool), "iops", 5000.0);
        const double util = std::max(pool_base_util(pool), 0.01);
        return attr_number(at(pool), "capacity_iops", iops / util);
    }

    std::vector<std::string> workloads_on_pool(const std::string& pool) const {
        std::vector<std::string> out;
        auto add = [&](const std::string& target) {
            auto it = sharers.find(target);
            if (it != sharers.end()) out.insert(out.end(), it->second.begin(), it->second.end());
        };
        add(pool);
        auto vols = volumes_of_pool.find(pool);
        if (vols != volumes_of_pool.end()) {
            for (const auto& v : vols->second) add(v);
        }
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }

    // Latency multiplier seen by a volume under the given active faults.
    double volume_multiplier(const std::string& volume, const std::vector<const FaultSpec*>& faults) const {
        double mult = 1.0;
        const auto path_it = path_of_volume.find(volume);
        const auto pools_it = pools_of_volume.find(volume);
        for (const FaultSpec* f : faults) {
            switch (f->kind) {
                case FaultKind::ControllerPortCongestion:
                    if (path_it != path_of_volume.end() && path_it->second.count(f->target) != 0) {
                        const double base = base_of(at(f->target), "utilization_pct", 40.0);
                        mult *= queueing_latency_multiplier(std::min(100.0, base + 100.0 * f->magnitude) / 100.0);
                    }
                    break;
                case FaultKind::VolumeContention:
                    if (pools_it != pools_of_volume.end() &&
                        std::find(pools_it->second.begin(), pools_it->second.end(), f->target) !=
                            pools_it->second.end()) {
                        mult *= queueing_latency_multiplier(pool_base_util(f->target) + f->magnitude);
                    }
                    break;
                case FaultKind::ZoningChange:
                    if (path_it != path_of_volume.end() && path_it->second.count(f->target) != 0) {
                        mult *= 1.0 + f->magnitude;
                    }
                    break;
                default:
                    break;
            }
        }
        return mult;
    }
};

}  // namespace

std::string_view to_string(FaultKind kind) {
    switch (kind) {
        case FaultKind::LockContention: return "lock_contention";
        case FaultKind::CpuSaturation: return "cpu_saturation";
        case FaultKind::ControllerPortCongestion: return "controller_port_congestion";
        case FaultKind::VolumeContention: return "volume_contention";
        case FaultKind::PlanChange: return "plan_change";
        case FaultKind::ZoningChange: return "zoning_change";
    }
    return "?";
}

std::optional<FaultKind> parse_fault_kind(std::string_view text) {
    for (FaultKind k : {FaultKind::LockContention, FaultKind::CpuSaturation, FaultKind::ControllerPortCongestion,
                        FaultKind::VolumeContention, FaultKind::PlanChange, FaultKind::ZoningChange}) {
        if (to_string(k) == text) return k;
    }
    return std::nullopt;
}

std::string cause_id_for(FaultKind kind) {
    switch (kind) {
        case FaultKind::LockContention: return "db_lock_contention";
        case FaultKind::CpuSaturation: return "server_cpu_saturation";
        default: return std::string(to_string(kind));
    }
}

double NoiseGenerator::factor() {
    const double e = std::clamp(dist_(rng_), -3.0 * sigma_, 3.0 * sigma_);
    return 1.0 + e;
}

double queueing_latency_multiplier(double utilization) {
    const double u = std::clamp(utilization, 0.0, 0.95);
    return 1.0 / (1.0 - u);
}

Scenario parse_scenario(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::ParseError, std::string("scenario: ") + e.what());
    }
    if (!j.is_object()) invalid("scenario must be an object");
    Scenario s;
    try {
        s.name = j.at("name").get<std::string>();
        if (j.contains("seed")) {
            if (!j["seed"].is_number_integer() || (j["seed"].is_number_integer() && !j["seed"].is_number_unsigned() &&
                                                   j["seed"].get<std::int64_t>() < 0)) {
                invalid("seed must be a non-negative integer");
            }
            s.seed = j["seed"].get<std::uint64_t>();
        }
        s.start_epoch = j.value("start_epoch", s.start_epoch);
        s.run_spacing_s = j.value("run_spacing_s", s.run_spacing_s);
        s.interval_s = j.value("interval_s", s.interval_s);
        s.baseline_runs = j.value("baseline_runs", s.baseline_runs);
        s.runs = j.value("runs", s.baseline_runs + 10);
        s.noise_sigma = j.value("noise_sigma", s.noise_sigma);
    } catch (const json::exception& e) {
        invalid(e.what());
    }
    if (!j.contains("topology")) invalid("scenario has no topology");
    try {
        s.topology = parse_topology(j["topology"].dump());
    } catch (const Error& e) {
        invalid(std::string("topology: ") + e.what());
    }
    if (!j.contains("queries") || !j["queries"].is_array()) invalid("scenario needs a 'queries' array");
    for (std::size_t i = 0; i < j["queries"].size(); ++i) {
        const json& q = j["queries"][i];
        const std::string where = "queries[" + std::to_string(i) + "]";
        QuerySpec spec;
        try {
            spec.query_id = q.at("query_id").get<std::string>();
            spec.host = q.value("host", "");
        } catch (const json::exception& e) {
            invalid(where + ": " + e.what());
        }
        if (!q.contains("plan")) invalid(where + ": missing plan");
        spec.plan = parse_operator_spec(q["plan"], where + ".plan");
        if (q.contains("alternate_plan")) spec.alternate_plan = parse_operator_spec(q["alternate_plan"], where + ".alternate_plan");
        s.queries.push_back(std::move(spec));
    }
    if (j.contains("faults")) {
        if (!j["faults"].is_array()) invalid("faults must be an array");
        for (std::size_t i = 0; i < j["faults"].size(); ++i) {
            const json& f = j["faults"][i];
            const std::string where = "faults[" + std::to_string(i) + "]";
            FaultSpec spec;
            try {
                const std::string kind = f.at("kind").get<std::string>();
                auto k = parse_fault_kind(kind);
                if (!k) invalid(where + ": unknown fault kind '" + kind + "'");
                spec.kind = *k;
                spec.target = f.at("target").get<std::string>();
                spec.magnitude = f.at("magnitude").get<double>();
                const auto window = f.at("window").get<std::vector<std::size_t>>();
                if (window.size() != 2) invalid(where + ": window must be [first_run, last_run]");
                spec.first_run = window[0];
                spec.last_run = window[1];
            } catch (const json::exception& e) {
                invalid(where + ": " + e.what());
            }
            s.faults.push_back(std::move(spec));
        }
    }
    validate_scenario(s);
    return s;
}

Scenario load_scenario(const fs::path& path) {
    if (!fs::exists(path)) throw Error(ErrorCode::IoFailure, "no such file " + path.string());
    return parse_scenario(read_text_file(path));
}

void validate_scenario(const Scenario& s) {
    if (s.name.empty()) invalid("scenario name is empty");
    if (s.interval_s <= 0) invalid("interval_s must be positive");
    if (s.start_epoch % s.interval_s != 0) invalid("start_epoch must be a multiple of interval_s");
    if (s.run_spacing_s <= 0 || s.run_spacing_s % s.interval_s != 0) {
        invalid("run_spacing_s must be a positive multiple of interval_s");
    }
    if (s.baseline_runs < 1 || s.runs < s.baseline_runs) invalid("need runs >= baseline_runs >= 1");
    if (!(s.noise_sigma >= 0.0)) invalid("noise_sigma must be non-negative");
    if (auto v = validate_topology(s.topology); !v.empty()) invalid("topology: " + v.front());
    if (s.queries.empty()) invalid("scenario has no queries");

    std::set<std::string> query_ids;
    for (const auto& q : s.queries) {
        if (!query_ids.insert(q.query_id).second) invalid("query '" + q.query_id + "' declared twice");
        check_operator_spec(q.plan, q.query_id);
        if (q.alternate_plan) check_operator_spec(*q.alternate_plan, q.query_id);
        // Both plan shapes must map onto the topology.
        for (const OperatorSpec* plan : {&q.plan, q.alternate_plan ? &*q.alternate_plan : nullptr}) {
            if (plan == nullptr) continue;
            PlanSnapshot probe{q.query_id, "probe", s.start_epoch, total_nominal(*plan), q.host, shape_of(*plan)};
            try {
                build_apg(probe, s.topology);
            } catch (const Error& e) {
                invalid("query '" + q.query_id + "': " + e.what());
            }
        }
    }

    for (const auto& f : s.faults) {
        const std::string where = std::string(to_string(f.kind)) + " fault on '" + f.target + "'";
        if (!(f.magnitude > 0.0)) invalid(where + ": magnitude must be positive");
        if (f.first_run > f.last_run || f.last_run >= s.runs) {
            invalid(where + ": window [" + std::to_string(f.first_run) + ", " + std::to_string(f.last_run) +
                    "] lies outside runs [0, " + std::to_string(s.runs - 1) + "]");
        }
        if (f.kind == FaultKind::PlanChange) {
            auto q = std::find_if(s.queries.begin(), s.queries.end(),
                                  [&](const QuerySpec& qs) { return qs.query_id == f.target; });
            if (q == s.queries.end()) {
                throw Error(ErrorCode::InconsistentFaultTarget, where + ": target must be a query id");
            }
            if (!q->alternate_plan) invalid(where + ": query has no alternate_plan");
            continue;
        }
        const Component* c = s.topology.find(f.target);
        if (c == nullptr) throw Error(ErrorCode::InconsistentFaultTarget, where + ": no such component");
        NodeKind want = NodeKind::Tablespace;
        switch (f.kind) {
            case FaultKind::LockContention: want = NodeKind::Tablespace; break;
            case FaultKind::CpuSaturation: want = NodeKind::Server; break;
            case FaultKind::ControllerPortCongestion: want = NodeKind::ControllerPort; break;
            case FaultKind::VolumeContention: want = NodeKind::StoragePool; break;
            case FaultKind::ZoningChange: want = NodeKind::Switch; break;
            case FaultKind::PlanChange: break;
        }
        if (c->kind != want) {
            throw Error(ErrorCode::InconsistentFaultTarget,
                        where + ": target is a " + std::string(to_string(c->kind)) + ", expected " +
                            std::string(to_string(want)));
        }
    }
}

GeneratedDataset simulate(const Scenario& s, const SimOptions& options) {
    validate_scenario(s);
    const TopologyIndex topo(s.topology);
    NoiseGenerator noise(s.seed, s.noise_sigma);

    GeneratedDataset out;
    out.scenario = s.name;
    out.seed = s.seed;
    out.topology = s.topology;

    auto faults_in_run = [&](std::size_t run) {
        std::vector<const FaultSpec*> active;
        for (const auto& f : s.faults) {
            if (f.active(run)) active.push_back(&f);
        }
        return active;
    };

    std::vector<TimeWindow> run_windows(s.runs);
    for (std::size_t i = 0; i < s.runs; ++i) {
        const auto active = faults_in_run(i);
        const std::int64_t start = s.start_epoch + static_cast<std::int64_t>(i) * s.run_spacing_s;
        std::vector<std::string> causes;
        for (const FaultSpec* f : active) causes.push_back(cause_id_for(f->kind));
        std::sort(causes.begin(), causes.end());
        causes.erase(std::unique(causes.begin(), causes.end()), causes.end());

        double longest = 0.0;
        for (const auto& q : s.queries) {
            bool alternate = false;
            for (const FaultSpec* f : active) {
                alternate = alternate || (f->kind == FaultKind::PlanChange && f->target == q.query_id);
            }
            const OperatorSpec& plan = alternate ? *q.alternate_plan : q.plan;
            std::string host = q.host;
            if (host.empty()) {
                for (const auto& c : s.topology.components) {
                    if (c.kind == NodeKind::Server) host = c.id;
                }
            }

            double total = 0.0;
            std::function<OperatorRecord(const OperatorSpec&)> run_op = [&](const OperatorSpec& spec) {
                double cpu_scale = 1.0;
                double lock_add = 0.0;
                double io_mult = 1.0;
                for (const FaultSpec* f : active) {
                    if (f->kind == FaultKind::CpuSaturation && f->target == host) cpu_scale *= 1.0 + f->magnitude;
                    if (f->kind == FaultKind::LockContention &&
                        std::find(spec.reads.begin(), spec.reads.end(), f->target) != spec.reads.end()) {
                        lock_add += f->magnitude;
                    }
                }
                for (const auto& ts : spec.reads) {
                    auto vols = topo.volumes_of_ts.find(ts);
                    if (vols == topo.volumes_of_ts.end()) continue;
                    for (const auto& v : vols->second) io_mult = std::max(io_mult, topo.volume_multiplier(v, active));
                }
                const double factor = noise.factor();
                const double shape = cpu_scale * ((1.0 - spec.io_fraction) + spec.io_fraction * io_mult) + lock_add;
                OperatorRecord rec{spec.op_id, spec.op_kind, spec.reads, round_to(spec.nominal_s * factor * shape, 1e-6), {}};
                total += rec.elapsed_s;
                for (const auto& child : spec.children) rec.children.push_back(run_op(child));
                return rec;
            };

            GeneratedRun run;
            run.run_index = i;
            run.causes = causes;
            run.snapshot.query_id = q.query_id;
            char id[32];
            std::snprintf(id, sizeof(id), "-r%04zu", i);
            run.snapshot.run_id = q.query_id + id;
            run.snapshot.started_at = start;
            run.snapshot.host = q.host;
            run.snapshot.root = run_op(plan);
            run.snapshot.total_elapsed_s = total;
            longest = std::max(longest, total);
            out.runs.push_back(std::move(run));
        }
        run_windows[i] = {start - s.interval_s,
                          start + static_cast<std::int64_t>(std::ceil(longest)) + s.interval_s};

        for (const FaultSpec* f : active) {
            if (f->kind == FaultKind::LockContention) out.events.db.push_back({start + 1, "lock_wait", f->target});
        }
    }

    // Faults are visible in telemetry from the first faulted run's window
    // to the last faulted run's window.
    std::vector<TimeWindow> fault_spans;
    for (const auto& f : s.faults) {
        fault_spans.push_back({run_windows[f.first_run].start, run_windows[f.last_run].end});
        if (f.kind == FaultKind::ZoningChange) {
            const std::string before = "zoneset-" + f.target + "-a";
            const std::string after = "zoneset-" + f.target + "-b";
            out.events.config.push_back({fault_spans.back().start, f.target, "zone_set", before, after});
            if (f.last_run + 1 < s.runs) {
                out.events.config.push_back({fault_spans.back().end + 1, f.target, "zone_set", after, before});
            }
        }
    }
    std::sort(out.events.config.begin(), out.events.config.end(),
              [](const ConfigEvent& a, const ConfigEvent& b) { return a.timestamp < b.timestamp; });

    if (!options.emit_metrics) return out;

    const std::int64_t t_begin = s.start_epoch - s.run_spacing_s;
    const std::int64_t t_end = s.start_epoch + static_cast<std::int64_t>(s.runs) * s.run_spacing_s;
    for (std::int64_t t = t_begin; t < t_end; t += s.interval_s) {
        std::vector<const FaultSpec*> active;
        for (std::size_t i = 0; i < s.faults.size(); ++i) {
            if (fault_spans[i].contains(t)) active.push_back(&s.faults[i]);
        }
        for (const auto& c : s.topology.components) {
            for (const auto& def : vocabulary(c.kind)) {
                const std::string metric = def.name;
                const double base = base_of(c, metric, def.base);
                double value = base;
                const bool pct = metric.size() > 4 && metric.compare(metric.size() - 4, 4, "_pct") == 0;

                for (const FaultSpec* f : active) {
                    switch (f->kind) {
                        case FaultKind::CpuSaturation:
                            if (c.id == f->target && metric == "cpu_util_pct") value = 90.0 + 10.0 * std::min(f->magnitude, 1.0);
                            if (c.id == f->target && metric == "run_queue_len") value *= 1.0 + 4.0 * f->magnitude;
                            break;
                        case FaultKind::ControllerPortCongestion:
                            if (c.id == f->target && metric == "utilization_pct") value = base + 100.0 * f->magnitude;
                            break;
                        case FaultKind::VolumeContention: {
                            const double added = f->magnitude * topo.pool_capacity(f->target);
                            const double util = topo.pool_base_util(f->target) + f->magnitude;
                            if (c.id == f->target) {
                                if (metric == "utilization_pct") value = 100.0 * util;
                                if (metric == "iops") value += added;
                                if (metric == "latency_ms") value *= queueing_latency_multiplier(util);
                            }
                            if (c.kind == NodeKind::Disk && metric == "utilization_pct") {
                                auto disks = topo.disks_of_pool.find(f->target);
                                if (disks != topo.disks_of_pool.end() &&
                                    std::find(disks->second.begin(), disks->second.end(), c.id) != disks->second.end()) {
                                    value = 100.0 * util;
                                }
                            }
                            const auto workloads = topo.workloads_on_pool(f->target);
                            if (!workloads.empty() && metric == "iops") {
                                const double share = added / static_cast<double>(workloads.size());
                                if (std::find(workloads.begin(), workloads.end(), c.id) != workloads.end()) value += share;
                                if (c.kind == NodeKind::Volume) {
                                    auto it = topo.sharers.find(c.id);
                                    if (it != topo.sharers.end()) value += share * static_cast<double>(it->second.size());
                                }
                            }
                            break;
                        }
                        default:
                            break;
                    }
                }
                if (c.kind == NodeKind::Volume && metric == "latency_ms") value *= topo.volume_multiplier(c.id, active);

                value *= noise.factor();
                if (pct) value = std::clamp(value, 0.0, 100.0);
                out.metrics.push_back({t, c.id, metric, round_to(value, 1e-4)});
            }
        }
    }
    return out;
}

std::string serialize_ground_truth(const GeneratedDataset& data) {
    json runs = json::array();
    for (const auto& r : data.runs) {
        runs.push_back({{"run_index", r.run_index},
                        {"query_id", r.snapshot.query_id},
                        {"run_id", r.snapshot.run_id},
                        {"causes", r.causes}});
    }
    return json{{"scenario", data.scenario}, {"seed", data.seed}, {"runs", runs}}.dump(2) + "\n";
}

void write_dataset(const GeneratedDataset& data, const fs::path& dir) {
    if (fs::exists(dir) && !fs::is_empty(dir)) {
        throw Error(ErrorCode::InvalidScenario, "output directory " + dir.string() + " is not empty");
    }
    fs::create_directories(dir);
    write_text_file(dir / "topology.json", serialize_topology(data.topology));
    RunStore store = RunStore::open(dir / "runs");
    for (const auto& r : data.runs) store.append(r.snapshot);

    std::map<std::string, std::vector<MetricRow>> by_date;
    for (const auto& row : data.metrics) by_date[utc_date(row.timestamp)].push_back(row);
    fs::create_directories(dir / "metrics");
    for (const auto& [date, rows] : by_date) write_text_file(dir / "metrics" / (date + ".csv"), serialize_metrics(rows));

    write_text_file(dir / "events.jsonl", serialize_events(data.events));
    write_text_file(dir / "ground_truth.json", serialize_ground_truth(data));
}

void generate(const Scenario& scenario, const fs::path& dir) { write_dataset(simulate(scenario), dir); }

}  // namespace apgdiag::sim
