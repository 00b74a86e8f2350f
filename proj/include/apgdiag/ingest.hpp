#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "apgdiag/documents.hpp"

namespace apgdiag {

inline constexpr std::int64_t kDefaultIntervalS = 300;

// Closed interval of epoch seconds.
struct TimeWindow {
    std::int64_t start = 0;
    std::int64_t end = 0;

    bool contains(std::int64_t t) const { return t >= start && t <= end; }
    bool operator==(const TimeWindow&) const = default;
};

struct MetricSample {
    std::int64_t timestamp = 0;
    double value = 0.0;
    bool operator==(const MetricSample&) const = default;
};

struct MetricSeries {
    std::string component_id;
    std::string metric;
    std::string unit;
    std::int64_t interval_s = kDefaultIntervalS;
    std::vector<MetricSample> samples;

    // Values whose timestamps fall inside `window`, in time order.
    std::vector<double> values_in(const TimeWindow& window) const;
};

struct MetricRow {
    std::int64_t timestamp = 0;
    std::string component_id;
    std::string metric;
    double value = 0.0;
};

struct MetricFilter {
    std::set<std::string> components;  // empty: every component
    std::optional<TimeWindow> window;
};

struct ConfigEvent {
    std::int64_t timestamp = 0;
    std::string component_id;
    std::string key;
    std::string old_value;
    std::string new_value;
};

struct DbEvent {
    std::int64_t timestamp = 0;
    std::string code;
    std::string target;
};

struct EventLog {
    std::vector<ConfigEvent> config;
    std::vector<DbEvent> db;
};

struct RunRecord {
    std::size_t index = 0;  // position in the query's sequence
    std::string fingerprint;
    TimeWindow window;  // metric window associated with the run
    PlanSnapshot snapshot;
};

// --- topology -------------------------------------------------------------

// Every broken constraint, phrased with the offending id. Empty when valid.
std::vector<std::string> validate_topology(const TopologyDoc& doc);

TopologyDoc parse_topology(const std::string& text);
TopologyDoc load_topology(const std::filesystem::path& path);
std::string serialize_topology(const TopologyDoc& doc);

// --- plan snapshots -------------------------------------------------------

std::vector<std::string> validate_plan(const PlanSnapshot& plan);
PlanSnapshot parse_plan(const std::string& text);
std::string serialize_plan(const PlanSnapshot& plan);

// --- metrics --------------------------------------------------------------

inline constexpr const char* kMetricsHeader = "timestamp,component_id,metric,value";

std::string unit_for_metric(const std::string& metric);

// Throws NonMonotoneTimestamps / IrregularSampling.
void validate_series(const MetricSeries& series);

std::vector<MetricSeries> parse_metrics(const std::string& text, const MetricFilter& filter = {},
                                        std::int64_t interval_s = kDefaultIntervalS,
                                        const std::string& source = "<metrics>");
std::vector<MetricSeries> load_metrics(const std::filesystem::path& path, const MetricFilter& filter = {},
                                       std::int64_t interval_s = kDefaultIntervalS);
// All `*.csv` files of a directory, concatenated in file-name order.
std::vector<MetricSeries> load_metrics_dir(const std::filesystem::path& dir, const MetricFilter& filter = {},
                                           std::int64_t interval_s = kDefaultIntervalS);
std::string serialize_metrics(const std::vector<MetricRow>& rows);

// --- events ---------------------------------------------------------------

EventLog parse_events(const std::string& text);
EventLog load_events(const std::filesystem::path& path);
std::string serialize_events(const EventLog& log);

// --- run store ------------------------------------------------------------

// Append-only store: <root>/<query_id>/<seq>-<run_id>.json, one document
// per run. Single writer; reopening yields the same contents.
class RunStore {
public:
    static RunStore open(const std::filesystem::path& root, std::int64_t interval_s = kDefaultIntervalS);

    std::size_t append(const PlanSnapshot& snapshot);

    const std::vector<RunRecord>& runs(const std::string& query_id) const;
    const RunRecord* find_run(const std::string& query_id, const std::string& run_id) const;
    std::vector<std::string> query_ids() const;
    std::size_t size() const { return run_ids_.size(); }
    const std::filesystem::path& root() const { return root_; }
    std::int64_t interval_s() const { return interval_s_; }

private:
    RunStore(std::filesystem::path root, std::int64_t interval_s)
        : root_(std::move(root)), interval_s_(interval_s) {}

    std::filesystem::path root_;
    std::int64_t interval_s_;
    std::map<std::string, std::vector<RunRecord>> by_query_;
    std::set<std::string> run_ids_;
};

std::size_t append_run(RunStore& store, const PlanSnapshot& snapshot);

// Most recent `limit` runs of the query with the given fingerprint, newest
// last. `before` restricts to runs with a smaller sequence index.
std::vector<RunRecord> history(const RunStore& store, const std::string& query_id,
                               const std::string& fingerprint, std::size_t limit,
                               std::optional<std::size_t> before = std::nullopt);

std::string serialize_run(const RunRecord& record);
RunRecord parse_run(const std::string& text);

// --- dataset directory ----------------------------------------------------

// topology.json, runs/, metrics/*.csv, events.jsonl
struct Dataset {
    TopologyDoc topology;
    RunStore store;
    std::vector<MetricSeries> metrics;
    EventLog events;
};

Dataset open_dataset(const std::filesystem::path& dir);

std::string read_text_file(const std::filesystem::path& path);
// Writes via a temporary file and rename so readers never see partial data.
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace apgdiag
