#include "apgdiag/engine.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include <nlohmann/json.hpp>

#include "apgdiag/error.hpp"

namespace apgdiag {

using nlohmann::json;

namespace {

std::string fixed(double v, int digits = 2) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
    return buf;
}

std::string percent(double rel) {
    return (rel >= 0 ? "+" : "") + fixed(rel * 100.0, 1) + "%";
}

std::string join(const NodeSet& ids) {
    std::string out;
    for (const auto& id : ids) {
        if (!out.empty()) out += ", ";
        out += id;
    }
    return out;
}

// Most frequent fingerprint; ties go to the one seen most recently.
std::string dominant_fingerprint(const std::vector<RunRecord>& runs) {
    std::map<std::string, std::pair<std::size_t, std::size_t>> counts;  // fp -> (count, last position)
    for (std::size_t i = 0; i < runs.size(); ++i) {
        auto& c = counts[runs[i].fingerprint];
        ++c.first;
        c.second = i;
    }
    std::string best;
    std::pair<std::size_t, std::size_t> best_key{0, 0};
    for (const auto& [fp, key] : counts) {
        if (best.empty() || key > best_key) {
            best = fp;
            best_key = key;
        }
    }
    return best;
}

json refs_to_json(const std::vector<EvidenceRef>& refs) {
    json out = json::array();
    for (const auto& r : refs) out.push_back({{"type", r.type}, {"target", r.target}, {"detail", r.detail}});
    return out;
}

json matches_to_json(const std::vector<PredicateMatch>& ms) {
    json out = json::array();
    for (const auto& m : ms) {
        out.push_back({{"index", m.index},
                       {"predicate", m.description},
                       {"required", m.required},
                       {"weight", m.weight},
                       {"evidence", refs_to_json(m.evidence)}});
    }
    return out;
}

json record_to_json(const DegradationRecord& r) {
    return {{"op_id", r.op_id},         {"baseline_median_s", r.baseline_median_s},
            {"current_s", r.current_s}, {"delta_s", r.delta_s},
            {"rel_delta", r.rel_delta}, {"degraded", r.degraded}};
}

json report_to_json(const DiagnosisReport& r) {
    json j;
    j["schema"] = kReportSchema;
    j["query_id"] = r.query_id;
    j["run_id"] = r.run_id;
    j["verdict"] = {{"baseline_median_s", r.verdict.baseline_median_s},
                    {"current_s", r.verdict.current_s},
                    {"rel_delta", r.verdict.rel_delta},
                    {"slowed", r.verdict.slowed},
                    {"theta", r.theta}};
    j["plan_changed"] = r.plan_changed;
    j["plan"] = {{"baseline_fingerprint", r.baseline_fingerprint}, {"current_fingerprint", r.current_fingerprint}};
    j["window"] = {{"start", r.window.start}, {"end", r.window.end}};
    json ops = json::array();
    for (const auto& op : r.operators) {
        json o = record_to_json(op.record);
        o["op_kind"] = op.op_kind;
        o["closure"] = op.closure;
        ops.push_back(std::move(o));
    }
    j["operators"] = std::move(ops);
    json degraded = json::array();
    for (const auto& d : r.degraded_operators) degraded.push_back(record_to_json(d));
    j["degraded_operators"] = std::move(degraded);
    j["candidate_nodes"] = r.candidate_nodes;
    json anomalies = json::array();
    for (const auto& a : r.anomalies) {
        anomalies.push_back({{"component_id", a.component_id},
                             {"metric", a.metric},
                             {"score", a.score},
                             {"direction", to_string(a.direction)},
                             {"candidate", r.candidate_nodes.count(a.component_id) != 0}});
    }
    j["anomalies"] = std::move(anomalies);
    json causes = json::array();
    for (std::size_t i = 0; i < r.causes.size(); ++i) {
        const auto& c = r.causes[i];
        json cj = {{"rank", i + 1},
                   {"cause_id", c.cause_id},
                   {"layer", to_string(c.layer)},
                   {"description", c.description},
                   {"confidence", c.confidence},
                   {"impact", c.impact},
                   {"rank_score", c.rank_score},
                   {"locus", c.locus},
                   {"affected_operators", c.affected_operators},
                   {"satisfied", matches_to_json(c.satisfied)},
                   {"missing", matches_to_json(c.missing)}};
        cj["fix"] = c.fix ? json(*c.fix) : json(nullptr);
        causes.push_back(std::move(cj));
    }
    j["causes"] = std::move(causes);
    j["suppressed_evidence"] = refs_to_json(r.suppressed_evidence);
    j["notes"] = r.notes;
    return j;
}

std::string report_to_text(const DiagnosisReport& r) {
    std::ostringstream out;
    out << "Query " << r.query_id << ", run " << r.run_id << "\n";
    out << "  elapsed " << fixed(r.verdict.current_s) << " s vs baseline median " << fixed(r.verdict.baseline_median_s)
        << " s (" << percent(r.verdict.rel_delta) << ", threshold " << percent(r.theta) << ")\n";
    if (!r.verdict.slowed) {
        out << "  no slowdown detected\n";
        for (const auto& n : r.notes) out << "  note: " << n << "\n";
        return out.str();
    }
    out << "  slowdown detected\n";
    if (r.plan_changed) {
        out << "Plan: CHANGED " << r.baseline_fingerprint << " -> " << r.current_fingerprint << "\n";
    } else {
        out << "Plan: unchanged (" << r.current_fingerprint << ")\n";
        out << "Operators:\n";
        for (const auto& op : r.operators) {
            const auto& rec = op.record;
            out << "  " << rec.op_id << " [" << op.op_kind << "] " << fixed(rec.baseline_median_s) << " s -> "
                << fixed(rec.current_s) << " s (" << percent(rec.rel_delta) << ")"
                << (rec.degraded ? "  DEGRADED" : "") << "\n";
            if (rec.degraded) out << "      depends on: " << join(op.closure) << "\n";
        }
        out << "Candidate components: " << (r.candidate_nodes.empty() ? "(none)" : join(r.candidate_nodes)) << "\n";
        out << "Anomalies:\n";
        if (r.anomalies.empty()) out << "  (none)\n";
        for (const auto& a : r.anomalies) {
            out << "  " << a.component_id << "/" << a.metric << " " << to_string(a.direction) << " score "
                << fixed(a.score) << (r.candidate_nodes.count(a.component_id) ? "" : "  (outside closure)") << "\n";
        }
    }
    out << "Root causes:\n";
    if (r.causes.empty()) out << "  (none identified)\n";
    for (std::size_t i = 0; i < r.causes.size(); ++i) {
        const auto& c = r.causes[i];
        out << "  " << (i + 1) << ". " << c.cause_id << " (" << to_string(c.layer) << ")  score "
            << fixed(c.rank_score, 3) << " = impact " << fixed(c.impact, 3) << " x confidence "
            << fixed(c.confidence, 3) << "\n";
        out << "     " << c.description << "\n";
        if (!c.affected_operators.empty()) {
            out << "     operators:";
            for (const auto& op : c.affected_operators) out << " " << op;
            out << "\n";
        }
        if (!c.locus.empty()) out << "     components: " << join(c.locus) << "\n";
        for (const auto& m : c.satisfied) {
            out << "     [x] " << m.description << "\n";
            for (const auto& e : m.evidence) out << "         <- " << e.detail << "\n";
        }
        for (const auto& m : c.missing) out << "     [ ] " << m.description << "\n";
        if (c.fix) out << "     fix: " << *c.fix << "\n";
    }
    if (!r.suppressed_evidence.empty()) {
        out << "Suppressed evidence (outside the dependency closure):\n";
        for (const auto& e : r.suppressed_evidence) out << "  " << e.detail << "\n";
    }
    for (const auto& n : r.notes) out << "note: " << n << "\n";
    return out.str();
}

}  // namespace

std::vector<std::string> EngineConfig::violations() const {
    std::vector<std::string> out;
    if (!(theta > 0)) out.push_back("theta must be positive");
    if (!(tau > 0)) out.push_back("tau must be positive");
    if (!(delta > 0)) out.push_back("delta must be positive");
    if (!(floor_s > 0)) out.push_back("floor_s must be positive");
    if (k < 2) out.push_back("k must be at least 2");
    if (history_limit < k) out.push_back("history limit must be at least k");
    return out;
}

SlowdownVerdict detect_slowdown(const std::vector<RunRecord>& history, const RunRecord& current, double theta,
                                std::size_t k) {
    if (history.size() < k) {
        throw Error(ErrorCode::InsufficientHistory, std::to_string(history.size()) + " historical runs of '" +
                                                        current.snapshot.query_id + "', need " + std::to_string(k));
    }
    std::vector<double> totals;
    totals.reserve(history.size());
    for (const auto& h : history) totals.push_back(h.snapshot.total_elapsed_s);
    SlowdownVerdict v;
    v.query_id = current.snapshot.query_id;
    v.baseline_median_s = median(std::move(totals));
    v.current_s = current.snapshot.total_elapsed_s;
    v.rel_delta = (v.current_s - v.baseline_median_s) / std::max(v.baseline_median_s, kScoreEpsilon);
    v.slowed = v.rel_delta >= theta;
    return v;
}

std::map<std::string, double> impact_rollup(const std::vector<DegradationRecord>& degraded,
                                            const std::map<std::string, NodeSet>& closures,
                                            const std::map<std::string, NodeSet>& cause_locus, double total_delta_s) {
    if (!(total_delta_s > 0.0)) {
        throw Error(ErrorCode::NonPositiveDelta, "total delta " + std::to_string(total_delta_s) + " s");
    }
    std::map<std::string, double> out;
    for (const auto& [cause, locus] : cause_locus) {
        double attributed = 0.0;
        for (const auto& d : degraded) {
            if (!d.degraded) continue;
            auto it = closures.find(d.op_id);
            if (it == closures.end()) continue;
            const bool touches = std::any_of(locus.begin(), locus.end(),
                                             [&](const std::string& id) { return it->second.count(id) != 0; });
            if (touches) attributed += d.delta_s;
        }
        out[cause] = std::clamp(attributed / total_delta_s, 0.0, 1.0);
    }
    return out;
}

std::vector<RankedCause> rank_causes(const std::vector<RootCauseEntry>& entries, const EvidenceSet& evidence,
                                     const std::vector<DegradationRecord>& degraded,
                                     const std::map<std::string, NodeSet>& closures) {
    double total_delta = 0.0;
    for (const auto& d : degraded) {
        if (d.degraded) total_delta += d.delta_s;
    }
    if (!(total_delta > 0.0)) return {};

    std::vector<std::pair<const RootCauseEntry*, MatchResult>> matched;
    std::map<std::string, NodeSet> loci;
    for (const auto& entry : entries) {
        if (entry.id == kPlanChangeCause) continue;
        MatchResult m = match_cause(entry, evidence);
        if (m.disqualified || m.score <= 0.0) continue;
        loci[entry.id] = m.locus;
        matched.emplace_back(&entry, std::move(m));
    }
    const auto impacts = impact_rollup(degraded, closures, loci, total_delta);

    std::vector<RankedCause> out;
    for (auto& [entry, m] : matched) {
        RankedCause c;
        c.cause_id = entry->id;
        c.layer = entry->layer;
        c.description = entry->description;
        c.confidence = m.score;
        c.impact = impacts.at(entry->id);
        c.rank_score = c.impact * c.confidence;
        c.locus = m.locus;
        c.satisfied = std::move(m.satisfied);
        c.missing = std::move(m.missing);
        c.fix = entry->fix;
        for (const auto& d : degraded) {
            if (!d.degraded) continue;
            auto it = closures.find(d.op_id);
            if (it == closures.end()) continue;
            for (const auto& id : c.locus) {
                if (it->second.count(id) != 0) {
                    c.affected_operators.push_back(d.op_id);
                    break;
                }
            }
        }
        if (c.rank_score > 0.0) out.push_back(std::move(c));
    }
    std::sort(out.begin(), out.end(), [](const RankedCause& a, const RankedCause& b) {
        if (a.rank_score != b.rank_score) return a.rank_score > b.rank_score;
        return a.cause_id < b.cause_id;
    });
    return out;
}

DiagnosisReport diagnose(const Dataset& data, const std::string& query_id, const std::string& run_id,
                         const std::vector<RootCauseEntry>& symptoms_db, const EngineConfig& config) {
    if (auto v = config.violations(); !v.empty()) throw Error(ErrorCode::InvalidConfig, v.front());

    const RunRecord* current = data.store.find_run(query_id, run_id);
    if (current == nullptr) {
        throw Error(ErrorCode::UnknownRun, "no run '" + run_id + "' for query '" + query_id + "'");
    }
    DiagnosisReport report;
    report.query_id = query_id;
    report.run_id = run_id;
    report.theta = config.theta;
    report.window = current->window;
    report.current_fingerprint = current->fingerprint;

    // (1) query level: compare with recent runs regardless of plan.
    std::vector<RunRecord> prior;
    for (const auto& r : data.store.runs(query_id)) {
        if (r.index < current->index) prior.push_back(r);
    }
    if (prior.size() > config.history_limit) {
        prior.erase(prior.begin(), prior.end() - static_cast<std::ptrdiff_t>(config.history_limit));
    }
    report.verdict = detect_slowdown(prior, *current, config.theta, config.k);
    report.baseline_fingerprint = dominant_fingerprint(prior);
    if (!report.verdict.slowed) return report;

    // (2) plan level.
    if (report.baseline_fingerprint != current->fingerprint) {
        report.plan_changed = true;
        RankedCause c;
        c.cause_id = kPlanChangeCause;
        c.layer = CauseLayer::Db;
        c.description = "execution plan changed";
        c.confidence = 1.0;
        c.impact = 1.0;
        c.rank_score = 1.0;
        for (const auto& e : symptoms_db) {
            if (e.id == kPlanChangeCause) {
                c.layer = e.layer;
                c.description = e.description;
                c.fix = e.fix;
            }
        }
        PredicateMatch m;
        m.description = "plan fingerprint differs from the baseline plan";
        m.required = true;
        m.weight = 1.0;
        m.evidence.push_back({"plan", query_node_id(query_id),
                              "fingerprint " + report.baseline_fingerprint + " -> " + current->fingerprint});
        c.satisfied.push_back(std::move(m));
        report.causes.push_back(std::move(c));
        return report;
    }

    // (3) operator level over same-plan history.
    const auto same_plan =
        history(data.store, query_id, current->fingerprint, config.history_limit, current->index);
    const auto records = operator_degradation(same_plan, *current, config.delta, config.floor_s, config.k);

    // (4) dependency analysis.
    const AnnotatedPlanGraph apg = build_apg(current->snapshot, data.topology);
    std::map<std::string, NodeSet> closures;
    const auto ops = flatten_operators(current->snapshot.root);
    for (std::size_t i = 0; i < records.size(); ++i) {
        OperatorFinding f{records[i], ops[i]->op_kind, {}};
        if (records[i].degraded) {
            f.closure = dependency_closure(apg, records[i].op_id);
            closures[records[i].op_id] = f.closure;
            report.candidate_nodes.insert(f.closure.begin(), f.closure.end());
            report.degraded_operators.push_back(records[i]);
        }
        report.operators.push_back(std::move(f));
    }
    if (report.degraded_operators.empty()) {
        report.notes.push_back("query slowed but no operator exceeded the degradation thresholds");
        return report;
    }

    // (5) evidence: metrics of every component, events in window.
    EvidenceSet evidence;
    evidence.candidate_nodes = report.candidate_nodes;
    for (const auto& n : apg.nodes()) evidence.node_kinds[n.id] = n.kind;

    auto in_history = [&](std::int64_t ts) {
        if (report.window.contains(ts)) return false;
        return std::any_of(same_plan.begin(), same_plan.end(),
                           [&](const RunRecord& h) { return h.window.contains(ts); });
    };
    for (const auto& series : data.metrics) {
        if (evidence.node_kinds.count(series.component_id) == 0) continue;
        std::vector<double> base;
        for (const auto& s : series.samples) {
            if (in_history(s.timestamp)) base.push_back(s.value);
        }
        const auto window = series.values_in(report.window);
        if (base.empty() || window.empty()) continue;
        BaselineModel model = fit_baseline(base);
        model.component_id = series.component_id;
        model.metric = series.metric;
        AnomalyVerdict v = anomaly_score(model, window, config.tau);
        v.window = report.window;
        if (v.degraded) {
            report.anomalies.push_back(v);
            evidence.anomalies.push_back(std::move(v));
        }
    }
    const std::int64_t config_from = same_plan.front().window.start;
    for (const auto& e : data.events.config) {
        if (e.timestamp >= config_from && e.timestamp <= report.window.end) evidence.config_events.push_back(e);
    }
    for (const auto& e : data.events.db) {
        if (report.window.contains(e.timestamp)) evidence.db_events.push_back(e);
    }

    // (6)-(8) match, roll up, rank.
    report.causes = rank_causes(symptoms_db, evidence, report.degraded_operators, closures);
    report.suppressed_evidence = suppressed_evidence(evidence);
    return report;
}

std::string render_report(const DiagnosisReport& report, ReportFormat format) {
    if (format == ReportFormat::Json) return report_to_json(report).dump(2) + "\n";
    return report_to_text(report);
}

std::string explain_cause(const std::string& report_json, const std::string& cause_id) {
    json j;
    try {
        j = json::parse(report_json);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::ParseError, std::string("report: ") + e.what());
    }
    if (!j.is_object() || j.value("schema", "") != kReportSchema) {
        throw Error(ErrorCode::ParseError, std::string("report: expected schema ") + kReportSchema);
    }
    const json* cause = nullptr;
    for (const auto& c : j["causes"]) {
        if (c.value("cause_id", "") == cause_id) cause = &c;
    }
    if (cause == nullptr) throw Error(ErrorCode::UnknownNode, "report has no cause '" + cause_id + "'");

    std::ostringstream out;
    const auto& v = j["verdict"];
    out << "Cause " << cause_id << " (rank " << (*cause)["rank"].get<int>() << ", layer "
        << (*cause)["layer"].get<std::string>() << ")\n";
    out << "  " << (*cause)["description"].get<std::string>() << "\n";
    out << "Query " << j["query_id"].get<std::string>() << " run " << j["run_id"].get<std::string>() << ": "
        << fixed(v["baseline_median_s"].get<double>()) << " s -> " << fixed(v["current_s"].get<double>()) << " s ("
        << percent(v["rel_delta"].get<double>()) << ")\n";
    if (j["plan_changed"].get<bool>()) {
        out << "Plan: changed " << j["plan"]["baseline_fingerprint"].get<std::string>() << " -> "
            << j["plan"]["current_fingerprint"].get<std::string>() << "\n";
    }
    std::set<std::string> affected;
    for (const auto& op : (*cause)["affected_operators"]) affected.insert(op.get<std::string>());
    for (const auto& op : j["operators"]) {
        const std::string id = op["op_id"].get<std::string>();
        if (affected.count(id) == 0) continue;
        out << "Operator " << id << " [" << op["op_kind"].get<std::string>() << "] "
            << fixed(op["baseline_median_s"].get<double>()) << " s -> " << fixed(op["current_s"].get<double>())
            << " s (delta " << fixed(op["delta_s"].get<double>()) << " s)\n";
        std::vector<std::string> hits;
        for (const auto& id2 : op["closure"]) {
            for (const auto& l : (*cause)["locus"]) {
                if (l == id2) hits.push_back(id2.get<std::string>());
            }
        }
        out << "  depends on implicated components:";
        for (const auto& h : hits) out << " " << h;
        out << "\n";
    }
    out << "Symptoms:\n";
    for (const auto& m : (*cause)["satisfied"]) {
        out << "  [x] " << m["predicate"].get<std::string>() << "\n";
        for (const auto& e : m["evidence"]) out << "      <- " << e["detail"].get<std::string>() << "\n";
    }
    for (const auto& m : (*cause)["missing"]) out << "  [ ] " << m["predicate"].get<std::string>() << "\n";
    out << "Impact " << fixed((*cause)["impact"].get<double>(), 3) << " x confidence "
        << fixed((*cause)["confidence"].get<double>(), 3) << " = " << fixed((*cause)["rank_score"].get<double>(), 3)
        << "\n";
    if (!(*cause)["fix"].is_null()) out << "Suggested fix: " << (*cause)["fix"].get<std::string>() << "\n";
    return out.str();
}

}  // namespace apgdiag
