#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "apgdiag/documents.hpp"
#include "apgdiag/ingest.hpp"

namespace apgdiag::sim {

enum class FaultKind {
    LockContention,
    CpuSaturation,
    ControllerPortCongestion,
    VolumeContention,
    PlanChange,
    ZoningChange,
};

std::string_view to_string(FaultKind kind);
std::optional<FaultKind> parse_fault_kind(std::string_view text);

// Cause id the default symptoms database uses for each fault kind.
std::string cause_id_for(FaultKind kind);

struct FaultSpec {
    FaultKind kind = FaultKind::LockContention;
    std::string target;
    double magnitude = 0.0;
    std::size_t first_run = 0;  // inclusive run indices
    std::size_t last_run = 0;

    bool active(std::size_t run) const { return run >= first_run && run <= last_run; }
};

struct OperatorSpec {
    std::string op_id;
    std::string op_kind;
    std::vector<std::string> reads;
    double nominal_s = 0.0;
    double io_fraction = 0.0;  // share of the nominal time spent waiting on storage
    std::vector<OperatorSpec> children;
};

struct QuerySpec {
    std::string query_id;
    std::string host;
    OperatorSpec plan;
    std::optional<OperatorSpec> alternate_plan;
};

struct Scenario {
    std::string name;
    std::uint64_t seed = 1;
    std::int64_t start_epoch = 1700000100;
    std::int64_t run_spacing_s = 3600;
    std::int64_t interval_s = kDefaultIntervalS;
    std::size_t baseline_runs = 20;
    std::size_t runs = 30;
    double noise_sigma = 0.05;
    TopologyDoc topology;
    std::vector<QuerySpec> queries;
    std::vector<FaultSpec> faults;
};

struct GeneratedRun {
    std::size_t run_index = 0;
    PlanSnapshot snapshot;
    std::vector<std::string> causes;  // injected cause ids, sorted
};

struct GeneratedDataset {
    std::string scenario;
    std::uint64_t seed = 0;
    TopologyDoc topology;
    std::vector<GeneratedRun> runs;  // append order
    std::vector<MetricRow> metrics;  // time order
    EventLog events;
};

struct SimOptions {
    bool emit_metrics = true;
};

// Multiplicative noise factor 1 + e, e ~ N(0, sigma) clamped to +-3 sigma.
class NoiseGenerator {
public:
    NoiseGenerator(std::uint64_t seed, double sigma) : rng_(seed), dist_(0.0, sigma), sigma_(sigma) {}

    double factor();
    std::mt19937_64& engine() { return rng_; }

private:
    std::mt19937_64 rng_;
    std::normal_distribution<double> dist_;
    double sigma_;
};

// 1 / (1 - u) with u capped at 0.95.
double queueing_latency_multiplier(double utilization);

Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::filesystem::path& path);

// Throws InvalidScenario or InconsistentFaultTarget.
void validate_scenario(const Scenario& scenario);

GeneratedDataset simulate(const Scenario& scenario, const SimOptions& options = {});

std::string serialize_ground_truth(const GeneratedDataset& data);

// Writes topology.json, runs/, metrics/<date>.csv, events.jsonl and
// ground_truth.json. The directory must not already hold a dataset.
void write_dataset(const GeneratedDataset& data, const std::filesystem::path& dir);

void generate(const Scenario& scenario, const std::filesystem::path& dir);

}  // namespace apgdiag::sim
