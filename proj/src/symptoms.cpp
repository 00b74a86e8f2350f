#include "apgdiag/symptoms.hpp"

#include <cstdio>
#include <set>

#include <nlohmann/json.hpp>

#include "apgdiag/error.hpp"

namespace apgdiag {

using nlohmann::json;

namespace {

[[noreturn]] void bad_predicate(const std::string& where, const std::string& what) {
    throw Error(ErrorCode::InvalidPredicate, where + ": " + what);
}

[[noreturn]] void bad_entry(const std::string& where, const std::string& what) {
    throw Error(ErrorCode::ParseError, where + ": " + what);
}

std::string string_field(const json& j, const char* key, const std::string& where, bool predicate) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_string() || it->get<std::string>().empty()) {
        std::string msg = std::string("field '") + key + "' must be a non-empty string";
        if (predicate) bad_predicate(where, msg);
        bad_entry(where, msg);
    }
    return it->get<std::string>();
}

std::string fmt_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return buf;
}

SymptomPredicate parse_predicate(const json& j, const std::string& where) {
    if (!j.is_object()) bad_predicate(where, "expected an object");
    SymptomPredicate p;
    const std::string kind = string_field(j, "kind", where, true);
    if (kind == "metric_anomaly") {
        p.kind = PredicateKind::MetricAnomaly;
    } else if (kind == "config_event") {
        p.kind = PredicateKind::ConfigEvent;
    } else if (kind == "db_event") {
        p.kind = PredicateKind::DbEvent;
    } else {
        bad_predicate(where, "unknown predicate kind '" + kind + "'");
    }
    const std::string tk = string_field(j, "target_kind", where, true);
    auto target = parse_node_kind(tk);
    if (!target) bad_predicate(where, "unknown target_kind '" + tk + "'");
    p.target_kind = *target;

    auto expect_only = [&](std::initializer_list<const char*> allowed) {
        static const char* kKindFields[] = {"metric", "direction", "event_code", "config_key"};
        for (const char* f : kKindFields) {
            bool ok = false;
            for (const char* a : allowed) ok = ok || std::string_view(a) == f;
            if (!ok && j.contains(f)) bad_predicate(where, std::string("field '") + f + "' does not apply to " + kind);
        }
    };
    switch (p.kind) {
        case PredicateKind::MetricAnomaly: {
            expect_only({"metric", "direction"});
            p.metric = string_field(j, "metric", where, true);
            const std::string dir = j.contains("direction") ? string_field(j, "direction", where, true) : "any";
            if (dir == "high") {
                p.direction = DirectionMatch::High;
            } else if (dir == "low") {
                p.direction = DirectionMatch::Low;
            } else if (dir == "any") {
                p.direction = DirectionMatch::Any;
            } else {
                bad_predicate(where, "direction must be high, low or any");
            }
            break;
        }
        case PredicateKind::ConfigEvent:
            expect_only({"config_key"});
            p.config_key = string_field(j, "config_key", where, true);
            break;
        case PredicateKind::DbEvent:
            expect_only({"event_code"});
            p.event_code = string_field(j, "event_code", where, true);
            break;
    }
    auto w = j.find("weight");
    if (w == j.end() || !w->is_number()) bad_predicate(where, "weight must be a number");
    p.weight = w->get<double>();
    if (!(p.weight > 0.0 && p.weight <= 1.0)) bad_predicate(where, "weight must lie in (0, 1]");
    if (j.contains("required")) {
        if (!j["required"].is_boolean()) bad_predicate(where, "required must be a boolean");
        p.required = j["required"].get<bool>();
    }
    return p;
}

json predicate_to_json(const SymptomPredicate& p) {
    json j = {{"kind", to_string(p.kind)}, {"target_kind", to_string(p.target_kind)}, {"weight", p.weight},
              {"required", p.required}};
    switch (p.kind) {
        case PredicateKind::MetricAnomaly:
            j["metric"] = p.metric;
            j["direction"] = to_string(p.direction);
            break;
        case PredicateKind::ConfigEvent:
            j["config_key"] = p.config_key;
            break;
        case PredicateKind::DbEvent:
            j["event_code"] = p.event_code;
            break;
    }
    return j;
}

bool kind_is(const EvidenceSet& ev, const std::string& id, NodeKind kind) {
    auto it = ev.node_kinds.find(id);
    return it != ev.node_kinds.end() && it->second == kind;
}

bool direction_matches(DirectionMatch want, Direction got) {
    return want == DirectionMatch::Any || (want == DirectionMatch::High) == (got == Direction::High);
}

EvidenceRef ref_of(const AnomalyVerdict& a) {
    return {"anomaly", a.component_id,
            a.component_id + "/" + a.metric + " " + std::string(to_string(a.direction)) + " (score " +
                fmt_num(a.score) + ")"};
}

EvidenceRef ref_of(const ConfigEvent& e) {
    return {"config_event", e.component_id,
            e.component_id + " " + e.key + ": " + e.old_value + " -> " + e.new_value + " at " +
                std::to_string(e.timestamp)};
}

EvidenceRef ref_of(const DbEvent& e) {
    return {"db_event", e.target, e.code + " on " + e.target + " at " + std::to_string(e.timestamp)};
}

}  // namespace

std::string_view to_string(PredicateKind k) {
    switch (k) {
        case PredicateKind::MetricAnomaly: return "metric_anomaly";
        case PredicateKind::ConfigEvent: return "config_event";
        case PredicateKind::DbEvent: return "db_event";
    }
    return "?";
}

std::string_view to_string(DirectionMatch d) {
    switch (d) {
        case DirectionMatch::High: return "high";
        case DirectionMatch::Low: return "low";
        case DirectionMatch::Any: return "any";
    }
    return "?";
}

std::string_view to_string(CauseLayer l) {
    switch (l) {
        case CauseLayer::Db: return "db";
        case CauseLayer::San: return "san";
        case CauseLayer::Both: return "both";
    }
    return "?";
}

std::string describe(const SymptomPredicate& p) {
    std::string out;
    switch (p.kind) {
        case PredicateKind::MetricAnomaly:
            out = std::string(to_string(p.target_kind)) + "." + p.metric + " anomaly (" +
                  std::string(to_string(p.direction)) + ")";
            break;
        case PredicateKind::ConfigEvent:
            out = std::string(to_string(p.target_kind)) + " config change of '" + p.config_key + "'";
            break;
        case PredicateKind::DbEvent:
            out = "db event '" + p.event_code + "' on " + std::string(to_string(p.target_kind));
            break;
    }
    out += " [w=" + fmt_num(p.weight) + (p.required ? ", required]" : "]");
    return out;
}

std::vector<RootCauseEntry> parse_symptoms_db(const std::string& text) {
    if (text.find_first_not_of(" \t\r\n") == std::string::npos) {
        throw Error(ErrorCode::ParseError, "symptoms: empty document");
    }
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::ParseError, std::string("symptoms: ") + e.what());
    }
    if (!j.is_object() || !j.contains("causes") || !j["causes"].is_array()) {
        throw Error(ErrorCode::ParseError, "symptoms: expected an object with a 'causes' array");
    }
    std::vector<RootCauseEntry> out;
    std::set<std::string> ids;
    const json& causes = j["causes"];
    for (std::size_t i = 0; i < causes.size(); ++i) {
        const std::string where = "causes[" + std::to_string(i) + "]";
        const json& c = causes[i];
        if (!c.is_object()) bad_entry(where, "expected an object");
        RootCauseEntry e;
        e.id = string_field(c, "id", where, false);
        if (!ids.insert(e.id).second) throw Error(ErrorCode::DuplicateCauseId, where + ": id '" + e.id + "' repeats");
        const std::string layer = string_field(c, "layer", where, false);
        if (layer == "db") {
            e.layer = CauseLayer::Db;
        } else if (layer == "san") {
            e.layer = CauseLayer::San;
        } else if (layer == "both") {
            e.layer = CauseLayer::Both;
        } else {
            bad_entry(where, "layer must be db, san or both");
        }
        e.description = string_field(c, "description", where, false);
        if (c.contains("fix")) e.fix = string_field(c, "fix", where, false);
        if (!c.contains("symptoms") || !c["symptoms"].is_array() || c["symptoms"].empty()) {
            bad_predicate(where, "symptoms must be a non-empty array");
        }
        const json& preds = c["symptoms"];
        for (std::size_t p = 0; p < preds.size(); ++p) {
            e.symptoms.push_back(parse_predicate(preds[p], where + ".symptoms[" + std::to_string(p) + "]"));
        }
        out.push_back(std::move(e));
    }
    return out;
}

std::vector<RootCauseEntry> load_symptoms_db(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw Error(ErrorCode::IoFailure, "no such file " + path.string());
    return parse_symptoms_db(read_text_file(path));
}

std::string serialize_symptoms_db(const std::vector<RootCauseEntry>& entries) {
    json causes = json::array();
    for (const auto& e : entries) {
        json preds = json::array();
        for (const auto& p : e.symptoms) preds.push_back(predicate_to_json(p));
        json c = {{"id", e.id}, {"layer", to_string(e.layer)}, {"description", e.description}, {"symptoms", preds}};
        if (e.fix) c["fix"] = *e.fix;
        causes.push_back(std::move(c));
    }
    return json{{"causes", causes}}.dump(2) + "\n";
}

MatchResult match_cause(const RootCauseEntry& entry, const EvidenceSet& evidence) {
    MatchResult result;
    double total = 0.0;
    double satisfied = 0.0;
    auto candidate = [&](const std::string& id) { return evidence.candidate_nodes.count(id) != 0; };

    for (std::size_t i = 0; i < entry.symptoms.size(); ++i) {
        const auto& p = entry.symptoms[i];
        PredicateMatch m{i, describe(p), p.required, p.weight, {}};
        switch (p.kind) {
            case PredicateKind::MetricAnomaly:
                for (const auto& a : evidence.anomalies) {
                    if (a.degraded && a.metric == p.metric && kind_is(evidence, a.component_id, p.target_kind) &&
                        direction_matches(p.direction, a.direction) && candidate(a.component_id)) {
                        m.evidence.push_back(ref_of(a));
                    }
                }
                break;
            case PredicateKind::ConfigEvent:
                for (const auto& e : evidence.config_events) {
                    if (e.key == p.config_key && kind_is(evidence, e.component_id, p.target_kind) &&
                        candidate(e.component_id)) {
                        m.evidence.push_back(ref_of(e));
                    }
                }
                break;
            case PredicateKind::DbEvent:
                for (const auto& e : evidence.db_events) {
                    if (e.code == p.event_code && kind_is(evidence, e.target, p.target_kind) && candidate(e.target)) {
                        m.evidence.push_back(ref_of(e));
                    }
                }
                break;
        }
        total += p.weight;
        if (!m.evidence.empty()) {
            satisfied += p.weight;
            for (const auto& ref : m.evidence) result.locus.insert(ref.target);
            result.satisfied.push_back(std::move(m));
        } else {
            if (p.required) result.disqualified = true;
            result.missing.push_back(std::move(m));
        }
    }
    result.score = total > 0.0 ? satisfied / total : 0.0;
    return result;
}

std::vector<EvidenceRef> suppressed_evidence(const EvidenceSet& evidence) {
    std::vector<EvidenceRef> out;
    auto outside = [&](const std::string& id) { return evidence.candidate_nodes.count(id) == 0; };
    for (const auto& a : evidence.anomalies) {
        if (a.degraded && outside(a.component_id)) out.push_back(ref_of(a));
    }
    for (const auto& e : evidence.config_events) {
        if (outside(e.component_id)) out.push_back(ref_of(e));
    }
    for (const auto& e : evidence.db_events) {
        if (outside(e.target)) out.push_back(ref_of(e));
    }
    return out;
}

}  // namespace apgdiag
