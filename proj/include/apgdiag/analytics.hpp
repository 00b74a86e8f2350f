#pragma once

#include <span>
#include <string>
#include <vector>

#include "apgdiag/ingest.hpp"

namespace apgdiag {

struct BaselineModel {
    std::string component_id;
    std::string metric;
    std::size_t n = 0;
    double mean = 0.0;
    double std = 0.0;  // sample standard deviation (n - 1 denominator)
    double min = 0.0;
    double max = 0.0;
};

enum class Direction { High, Low };

std::string_view to_string(Direction d);

struct AnomalyVerdict {
    std::string component_id;
    std::string metric;
    double score = 0.0;
    Direction direction = Direction::High;
    bool degraded = false;
    TimeWindow window;
};

struct DegradationRecord {
    std::string op_id;
    double baseline_median_s = 0.0;
    double current_s = 0.0;
    double delta_s = 0.0;
    double rel_delta = 0.0;
    bool degraded = false;
};

struct AnalyticsConfig {
    double tau = 3.0;       // anomaly threshold, in baseline standard deviations
    double delta = 0.2;     // relative operator slowdown
    double floor_s = 1.0;   // absolute operator slowdown
    std::size_t k = 5;      // minimum history length
};

inline constexpr double kScoreEpsilon = 1e-9;

BaselineModel fit_baseline(std::span<const double> samples);

AnomalyVerdict anomaly_score(const BaselineModel& baseline, std::span<const double> window, double tau = 3.0);

double median(std::vector<double> values);

std::vector<DegradationRecord> operator_degradation(const std::vector<RunRecord>& history, const RunRecord& current,
                                                    double delta = 0.2, double floor_s = 1.0, std::size_t k = 5);

// Pearson coefficient over the samples both series share by timestamp.
double correlate(const MetricSeries& a, const MetricSeries& b);

}  // namespace apgdiag
