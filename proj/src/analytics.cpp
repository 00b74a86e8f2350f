#include "apgdiag/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "apgdiag/error.hpp"

namespace apgdiag {

std::string_view to_string(Direction d) { return d == Direction::High ? "high" : "low"; }

BaselineModel fit_baseline(std::span<const double> samples) {
    if (samples.empty()) throw Error(ErrorCode::EmptyInput, "cannot fit a baseline to zero samples");
    BaselineModel m;
    m.n = samples.size();
    const double n = static_cast<double>(m.n);
    m.mean = std::accumulate(samples.begin(), samples.end(), 0.0) / n;
    auto [lo, hi] = std::minmax_element(samples.begin(), samples.end());
    m.min = *lo;
    m.max = *hi;
    if (m.n >= 2) {
        double ss = 0.0;
        for (double x : samples) ss += (x - m.mean) * (x - m.mean);
        m.std = std::sqrt(ss / (n - 1.0));
    }
    // Rounding can push the mean a hair outside [min, max] for constant input.
    m.mean = std::clamp(m.mean, m.min, m.max);
    return m;
}

AnomalyVerdict anomaly_score(const BaselineModel& baseline, std::span<const double> window, double tau) {
    if (window.empty()) throw Error(ErrorCode::EmptyWindow, baseline.component_id + "/" + baseline.metric);
    const double mean = std::accumulate(window.begin(), window.end(), 0.0) / static_cast<double>(window.size());
    const double diff = mean - baseline.mean;
    AnomalyVerdict v;
    v.component_id = baseline.component_id;
    v.metric = baseline.metric;
    v.score = std::abs(diff) / std::max(baseline.std, kScoreEpsilon);
    v.direction = diff < 0.0 ? Direction::Low : Direction::High;
    v.degraded = v.score >= tau;
    return v;
}

double median(std::vector<double> values) {
    if (values.empty()) throw Error(ErrorCode::EmptyInput, "median of zero values");
    std::sort(values.begin(), values.end());
    const std::size_t mid = values.size() / 2;
    return values.size() % 2 == 1 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

std::vector<DegradationRecord> operator_degradation(const std::vector<RunRecord>& history, const RunRecord& current,
                                                    double delta, double floor_s, std::size_t k) {
    if (history.size() < k) {
        throw Error(ErrorCode::InsufficientHistory, std::to_string(history.size()) + " historical runs, need " +
                                                        std::to_string(k));
    }
    for (const auto& h : history) {
        if (h.fingerprint != current.fingerprint) {
            throw Error(ErrorCode::FingerprintMismatch, "run '" + h.snapshot.run_id + "' has plan " + h.fingerprint +
                                                            ", current plan is " + current.fingerprint);
        }
    }
    // Same fingerprint means same shape, so walk operators by pre-order position.
    std::vector<std::vector<double>> per_op;
    const auto current_ops = flatten_operators(current.snapshot.root);
    per_op.resize(current_ops.size());
    for (const auto& h : history) {
        const auto ops = flatten_operators(h.snapshot.root);
        for (std::size_t i = 0; i < ops.size() && i < per_op.size(); ++i) per_op[i].push_back(ops[i]->elapsed_s);
    }
    std::vector<DegradationRecord> out;
    for (std::size_t i = 0; i < current_ops.size(); ++i) {
        DegradationRecord r;
        r.op_id = current_ops[i]->op_id;
        r.baseline_median_s = median(per_op[i]);
        r.current_s = current_ops[i]->elapsed_s;
        r.delta_s = r.current_s - r.baseline_median_s;
        r.rel_delta = r.delta_s / std::max(r.baseline_median_s, kScoreEpsilon);
        r.degraded = r.rel_delta >= delta && r.delta_s >= floor_s;
        out.push_back(std::move(r));
    }
    return out;
}

double correlate(const MetricSeries& a, const MetricSeries& b) {
    std::map<std::int64_t, double> by_ts;
    for (const auto& s : a.samples) by_ts[s.timestamp] = s.value;
    std::vector<double> xs, ys;
    for (const auto& s : b.samples) {
        auto it = by_ts.find(s.timestamp);
        if (it == by_ts.end()) continue;
        xs.push_back(it->second);
        ys.push_back(s.value);
    }
    if (xs.size() < 3) {
        throw Error(ErrorCode::InsufficientOverlap, a.component_id + "/" + a.metric + " and " + b.component_id + "/" +
                                                        b.metric + " share " + std::to_string(xs.size()) +
                                                        " timestamps, need 3");
    }
    const double n = static_cast<double>(xs.size());
    const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double dx = xs[i] - mx;
        const double dy = ys[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    auto constant = [](const std::vector<double>& v) {
        return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
    };
    const bool x_const = constant(xs);
    if (x_const || constant(ys) || sxx == 0.0 || syy == 0.0) {
        throw Error(ErrorCode::ZeroVariance, (x_const ? a.component_id + "/" + a.metric
                                                         : b.component_id + "/" + b.metric) +
                                                 " is constant over the joint samples");
    }
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

}  // namespace apgdiag
