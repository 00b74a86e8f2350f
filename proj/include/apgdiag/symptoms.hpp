#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "apgdiag/analytics.hpp"
#include "apgdiag/ingest.hpp"
#include "apgdiag/kinds.hpp"
#include "apgdiag/model.hpp"

namespace apgdiag {

enum class PredicateKind { MetricAnomaly, ConfigEvent, DbEvent };
enum class DirectionMatch { High, Low, Any };
enum class CauseLayer { Db, San, Both };

std::string_view to_string(PredicateKind k);
std::string_view to_string(DirectionMatch d);
std::string_view to_string(CauseLayer l);

struct SymptomPredicate {
    PredicateKind kind = PredicateKind::MetricAnomaly;
    NodeKind target_kind = NodeKind::Volume;
    std::string metric;       // metric_anomaly only
    DirectionMatch direction = DirectionMatch::Any;  // metric_anomaly only
    std::string event_code;   // db_event only
    std::string config_key;   // config_event only
    double weight = 1.0;      // (0, 1]
    bool required = false;
};

struct RootCauseEntry {
    std::string id;
    CauseLayer layer = CauseLayer::San;
    std::string description;
    std::vector<SymptomPredicate> symptoms;
    std::optional<std::string> fix;
};

// Everything observed for one diagnosis. Items may target nodes outside
// candidate_nodes; the matcher ignores those and reports them as suppressed.
struct EvidenceSet {
    std::vector<AnomalyVerdict> anomalies;
    std::vector<ConfigEvent> config_events;
    std::vector<DbEvent> db_events;
    NodeSet candidate_nodes;
    std::map<std::string, NodeKind> node_kinds;
};

struct EvidenceRef {
    std::string type;    // "anomaly" | "config_event" | "db_event"
    std::string target;  // component id
    std::string detail;  // human-readable summary
};

struct PredicateMatch {
    std::size_t index = 0;  // position in the entry's symptom list
    std::string description;
    bool required = false;
    double weight = 0.0;
    std::vector<EvidenceRef> evidence;
};

struct MatchResult {
    double score = 0.0;
    std::vector<PredicateMatch> satisfied;
    std::vector<PredicateMatch> missing;
    bool disqualified = false;
    // Candidate nodes whose evidence satisfied at least one predicate.
    NodeSet locus;
};

std::string describe(const SymptomPredicate& p);

std::vector<RootCauseEntry> parse_symptoms_db(const std::string& text);
std::vector<RootCauseEntry> load_symptoms_db(const std::filesystem::path& path);
std::string serialize_symptoms_db(const std::vector<RootCauseEntry>& entries);

MatchResult match_cause(const RootCauseEntry& entry, const EvidenceSet& evidence);

// Evidence items that target nodes outside the candidate set.
std::vector<EvidenceRef> suppressed_evidence(const EvidenceSet& evidence);

}  // namespace apgdiag
