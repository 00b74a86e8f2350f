#include <gtest/gtest.h>

#include "apgdiag/error.hpp"
#include "apgdiag/symptoms.hpp"
#include "fixtures.hpp"

namespace apgdiag {
namespace {

using testing::expect_error;

SymptomPredicate metric_pred(NodeKind kind, std::string metric, double w, bool required = false) {
    SymptomPredicate p;
    p.kind = PredicateKind::MetricAnomaly;
    p.target_kind = kind;
    p.metric = std::move(metric);
    p.direction = DirectionMatch::High;
    p.weight = w;
    p.required = required;
    return p;
}

AnomalyVerdict high(const std::string& id, const std::string& metric) {
    AnomalyVerdict a;
    a.component_id = id;
    a.metric = metric;
    a.score = 5;
    a.degraded = true;
    return a;
}

EvidenceSet evidence_with(std::vector<AnomalyVerdict> anomalies) {
    EvidenceSet ev;
    ev.anomalies = std::move(anomalies);
    ev.candidate_nodes = {"P", "V", "S"};
    ev.node_kinds = {{"P", NodeKind::StoragePool}, {"V", NodeKind::Volume}, {"S", NodeKind::Server},
                     {"V9", NodeKind::Volume}};
    return ev;
}

RootCauseEntry three_predicate_entry() {
    RootCauseEntry e;
    e.id = "pool";
    e.symptoms = {metric_pred(NodeKind::StoragePool, "utilization_pct", 0.5, true),
                  metric_pred(NodeKind::Volume, "latency_ms", 0.3),
                  metric_pred(NodeKind::Server, "cpu_util_pct", 0.2)};
    return e;
}

TEST(SymptomsDb, ShippedDatabase) {
    const auto db = load_symptoms_db(testing::data_dir() / "symptoms.json");
    EXPECT_GE(db.size(), 6u);
    for (const char* id : {"db_lock_contention", "server_cpu_saturation", "controller_port_congestion",
                           "volume_contention", "zoning_change", "plan_change"}) {
        bool found = false;
        for (const auto& e : db) found = found || e.id == id;
        EXPECT_TRUE(found) << id;
    }
    EXPECT_EQ(serialize_symptoms_db(parse_symptoms_db(serialize_symptoms_db(db))), serialize_symptoms_db(db));
}

TEST(SymptomsDb, DuplicateId) {
    const std::string text = R"({"causes":[
      {"id":"x","layer":"db","description":"a","symptoms":[{"kind":"db_event","target_kind":"Tablespace","event_code":"lock_wait","weight":1}]},
      {"id":"x","layer":"db","description":"b","symptoms":[{"kind":"db_event","target_kind":"Tablespace","event_code":"lock_wait","weight":1}]}]})";
    expect_error(ErrorCode::DuplicateCauseId, [&] { parse_symptoms_db(text); });
}

TEST(SymptomsDb, ZeroWeight) {
    const std::string text = R"({"causes":[
      {"id":"x","layer":"db","description":"a","symptoms":[{"kind":"db_event","target_kind":"Tablespace","event_code":"lock_wait","weight":0}]}]})";
    expect_error(ErrorCode::InvalidPredicate, [&] { parse_symptoms_db(text); });
}

TEST(SymptomsDb, FieldForWrongKind) {
    const std::string text = R"({"causes":[
      {"id":"x","layer":"db","description":"a","symptoms":[{"kind":"db_event","target_kind":"Tablespace","event_code":"lock_wait","metric":"iops","weight":1}]}]})";
    expect_error(ErrorCode::InvalidPredicate, [&] { parse_symptoms_db(text); });
}

TEST(SymptomsDb, Malformed) {
    expect_error(ErrorCode::ParseError, [&] { parse_symptoms_db("{"); });
    expect_error(ErrorCode::ParseError, [&] { parse_symptoms_db(""); });
}

TEST(MatchCause, AllSatisfied) {
    const auto r = match_cause(three_predicate_entry(), evidence_with({high("P", "utilization_pct"),
                                                                       high("V", "latency_ms"),
                                                                       high("S", "cpu_util_pct")}));
    EXPECT_DOUBLE_EQ(r.score, 1.0);
    EXPECT_FALSE(r.disqualified);
    EXPECT_EQ(r.locus, (NodeSet{"P", "V", "S"}));
}

TEST(MatchCause, NoneSatisfied) {
    const auto r = match_cause(three_predicate_entry(), evidence_with({}));
    EXPECT_DOUBLE_EQ(r.score, 0.0);
    EXPECT_TRUE(r.disqualified);
    EXPECT_EQ(r.missing.size(), 3u);
}

TEST(MatchCause, WeightArithmetic) {
    const auto r = match_cause(three_predicate_entry(),
                               evidence_with({high("P", "utilization_pct"), high("V", "latency_ms")}));
    EXPECT_NEAR(r.score, 0.8, 1e-12);
    EXPECT_FALSE(r.disqualified);
    ASSERT_EQ(r.missing.size(), 1u);
    EXPECT_EQ(r.missing[0].index, 2u);
}

TEST(MatchCause, EvidenceOutsideCandidatesIgnored) {
    const auto r = match_cause(three_predicate_entry(),
                               evidence_with({high("P", "utilization_pct"), high("V9", "latency_ms")}));
    EXPECT_NEAR(r.score, 0.5, 1e-12);
    EXPECT_EQ(r.locus, NodeSet{"P"});
    const auto suppressed = suppressed_evidence(evidence_with({high("V9", "latency_ms")}));
    ASSERT_EQ(suppressed.size(), 1u);
    EXPECT_EQ(suppressed[0].target, "V9");
}

TEST(MatchCause, DirectionAndDegradedFlag) {
    auto low = high("P", "utilization_pct");
    low.direction = Direction::Low;
    EXPECT_TRUE(match_cause(three_predicate_entry(), evidence_with({low})).disqualified);
    auto quiet = high("P", "utilization_pct");
    quiet.degraded = false;
    EXPECT_TRUE(match_cause(three_predicate_entry(), evidence_with({quiet})).disqualified);
}

}  // namespace
}  // namespace apgdiag
