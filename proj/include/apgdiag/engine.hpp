#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "apgdiag/analytics.hpp"
#include "apgdiag/ingest.hpp"
#include "apgdiag/model.hpp"
#include "apgdiag/symptoms.hpp"

namespace apgdiag {

inline constexpr const char* kReportSchema = "diagnosis/1";
inline constexpr const char* kPlanChangeCause = "plan_change";

struct EngineConfig {
    double theta = 0.2;    // query slowdown threshold (relative)
    double tau = 3.0;      // anomaly threshold
    double delta = 0.2;    // operator slowdown threshold (relative)
    double floor_s = 1.0;  // operator slowdown floor (seconds)
    std::size_t k = 5;     // minimum history length
    std::size_t history_limit = 20;

    // Empty when all thresholds are usable.
    std::vector<std::string> violations() const;
};

struct SlowdownVerdict {
    std::string query_id;
    double baseline_median_s = 0.0;
    double current_s = 0.0;
    double rel_delta = 0.0;
    bool slowed = false;
};

struct OperatorFinding {
    DegradationRecord record;
    std::string op_kind;
    NodeSet closure;  // filled for degraded operators
};

struct RankedCause {
    std::string cause_id;
    CauseLayer layer = CauseLayer::San;
    std::string description;
    double confidence = 0.0;
    double impact = 0.0;
    double rank_score = 0.0;
    NodeSet locus;
    std::vector<std::string> affected_operators;
    std::vector<PredicateMatch> satisfied;
    std::vector<PredicateMatch> missing;
    std::optional<std::string> fix;
};

struct DiagnosisReport {
    std::string query_id;
    std::string run_id;
    SlowdownVerdict verdict;
    double theta = 0.2;
    bool plan_changed = false;
    std::string baseline_fingerprint;
    std::string current_fingerprint;
    TimeWindow window;
    std::vector<OperatorFinding> operators;
    std::vector<DegradationRecord> degraded_operators;
    NodeSet candidate_nodes;
    std::vector<AnomalyVerdict> anomalies;  // degraded verdicts only
    std::vector<RankedCause> causes;
    std::vector<EvidenceRef> suppressed_evidence;
    std::vector<std::string> notes;
};

SlowdownVerdict detect_slowdown(const std::vector<RunRecord>& history, const RunRecord& current, double theta = 0.2,
                                std::size_t k = 5);

// impact(c) = min(1, sum of delta_s over degraded operators whose closure
// meets locus(c), divided by total_delta_s).
std::map<std::string, double> impact_rollup(const std::vector<DegradationRecord>& degraded,
                                            const std::map<std::string, NodeSet>& closures,
                                            const std::map<std::string, NodeSet>& cause_locus, double total_delta_s);

// Match every entry, roll up impact and rank. Disqualified entries and
// entries with a zero rank score are dropped.
std::vector<RankedCause> rank_causes(const std::vector<RootCauseEntry>& entries, const EvidenceSet& evidence,
                                     const std::vector<DegradationRecord>& degraded,
                                     const std::map<std::string, NodeSet>& closures);

DiagnosisReport diagnose(const Dataset& data, const std::string& query_id, const std::string& run_id,
                         const std::vector<RootCauseEntry>& symptoms_db, const EngineConfig& config = {});

enum class ReportFormat { Json, Text };

std::string render_report(const DiagnosisReport& report, ReportFormat format);

// Evidence trace of one cause from a rendered JSON report.
std::string explain_cause(const std::string& report_json, const std::string& cause_id);

}  // namespace apgdiag
