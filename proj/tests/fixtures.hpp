#pragma once

#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "apgdiag/documents.hpp"
#include "apgdiag/error.hpp"
#include "apgdiag/ingest.hpp"
#include "apgdiag/model.hpp"
#include "apgdiag/sim.hpp"

namespace apgdiag::testing {

// S -> H -> SP -> SW -> CP -> C -> P, T -> V -> P -> {d1, d2}.
inline TopologyDoc small_topology() {
    TopologyDoc t;
    auto add = [&](std::string id, NodeKind kind) { t.components.push_back({std::move(id), kind, {}}); };
    add("S", NodeKind::Server);
    add("H", NodeKind::Hba);
    add("SP", NodeKind::SwitchPort);
    add("SW", NodeKind::Switch);
    add("CP", NodeKind::ControllerPort);
    add("C", NodeKind::Controller);
    add("P", NodeKind::StoragePool);
    add("d1", NodeKind::Disk);
    add("d2", NodeKind::Disk);
    add("V", NodeKind::Volume);
    add("T", NodeKind::Tablespace);
    t.connections = {{"S", "H"}, {"H", "SP"}, {"SP", "SW"}, {"SW", "CP"}, {"CP", "C"}, {"C", "P"}};
    t.allocations = {{"T", "V"}, {"V", "P"}, {"P", "d1"}, {"P", "d2"}};
    return t;
}

inline OperatorRecord op(std::string id, std::string kind, std::vector<std::string> reads, double elapsed,
                         std::vector<OperatorRecord> children = {}) {
    return OperatorRecord{std::move(id), std::move(kind), std::move(reads), elapsed, std::move(children)};
}

inline PlanSnapshot snapshot(std::string query, std::string run, std::int64_t started, OperatorRecord root) {
    PlanSnapshot p;
    p.query_id = std::move(query);
    p.run_id = std::move(run);
    p.started_at = started;
    double total = 0.0;
    for_each_operator(root, [&](const OperatorRecord& o) { total += o.elapsed_s; });
    p.total_elapsed_s = total;
    p.root = std::move(root);
    return p;
}

inline PlanSnapshot scan_plan(const std::string& run, double elapsed, std::int64_t started = 1700000000) {
    return snapshot("q1", run, started, op("op1", "SeqScan", {"T"}, elapsed));
}

inline RunRecord record(std::size_t index, PlanSnapshot snap) {
    RunRecord r;
    r.index = index;
    r.fingerprint = plan_fingerprint(snap);
    r.window = {snap.started_at - 300, snap.started_at + 600};
    r.snapshot = std::move(snap);
    return r;
}

class TempDir {
public:
    TempDir() {
        static std::mt19937_64 rng(std::random_device{}());
        path_ = std::filesystem::temp_directory_path() / ("apgdiag-test-" + std::to_string(rng()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

inline void expect_error(ErrorCode code, const std::function<void()>& fn) {
    try {
        fn();
        ADD_FAILURE() << "expected " << to_string(code);
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), code) << e.what();
    }
}

inline std::filesystem::path data_dir() { return APGDIAG_DATA_DIR; }

inline std::filesystem::path scenario_path(const std::string& name) {
    return data_dir() / "scenarios" / (name + ".json");
}

// Generates a shipped scenario into `dir` and returns the scenario.
inline sim::Scenario generate_scenario(const std::string& name, const std::filesystem::path& dir) {
    auto scenario = sim::load_scenario(scenario_path(name));
    sim::generate(scenario, dir);
    return scenario;
}

}  // namespace apgdiag::testing
