#include <gtest/gtest.h>

#include <random>

#include "apgdiag/analytics.hpp"
#include "apgdiag/engine.hpp"
#include "apgdiag/error.hpp"
#include "apgdiag/sim.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

namespace apgdiag {
namespace {

TEST(Property, ClosureMatchesReachabilityOracle) {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 150; ++i) {
        const auto gc = oracle::random_graph_case(rng);
        const auto g = build_apg(gc.plan, gc.topology);
        ASSERT_LE(g.nodes().size(), 50u);
        for (const auto& id : g.ids_of_kind(NodeKind::Operator)) {
            ASSERT_EQ(dependency_closure(g, id), oracle::closure(g, id)) << "case " << i << " op " << id;
        }
    }
}

TEST(Property, ClosureOfParentDoesNotIncludeChildStorage) {
    std::mt19937_64 rng(12);
    for (int i = 0; i < 50; ++i) {
        auto gc = oracle::random_graph_case(rng);
        gc.plan.root.reads.clear();
        const auto g = build_apg(gc.plan, gc.topology);
        EXPECT_EQ(dependency_closure(g, gc.plan.root.op_id), NodeSet{gc.plan.host});
    }
}

TEST(Property, MatchCauseMatchesExhaustiveOracle) {
    std::mt19937_64 rng(13);
    for (int i = 0; i < 300; ++i) {
        const auto mc = oracle::random_match_case(rng);
        const auto got = match_cause(mc.entry, mc.evidence);
        const auto want = oracle::match(mc.entry, mc.evidence);
        ASSERT_NEAR(got.score, want.score, 1e-12) << i;
        ASSERT_EQ(got.disqualified, want.disqualified) << i;
        ASSERT_EQ(got.locus, want.locus) << i;
        std::vector<std::size_t> sat;
        for (const auto& m : got.satisfied) sat.push_back(m.index);
        ASSERT_EQ(sat, want.satisfied) << i;
        ASSERT_EQ(got.satisfied.size() + got.missing.size(), mc.entry.symptoms.size());
    }
}

TEST(Property, MatchScoreInvariantUnderWeightScaling) {
    std::mt19937_64 rng(14);
    for (int i = 0; i < 200; ++i) {
        auto mc = oracle::random_match_case(rng);
        const auto before = match_cause(mc.entry, mc.evidence);
        for (auto& p : mc.entry.symptoms) p.weight *= 0.37;
        const auto after = match_cause(mc.entry, mc.evidence);
        ASSERT_NEAR(before.score, after.score, 1e-12);
        ASSERT_EQ(before.disqualified, after.disqualified);
    }
}

TEST(Property, RankingInvariantUnderWeightScaling) {
    std::mt19937_64 rng(15);
    for (int i = 0; i < 100; ++i) {
        std::vector<RootCauseEntry> entries;
        auto first = oracle::random_match_case(rng);
        const EvidenceSet ev = first.evidence;
        for (int c = 0; c < 4; ++c) {
            auto mc = c == 0 ? first : oracle::random_match_case(rng);
            mc.entry.id = "c" + std::to_string(c);
            entries.push_back(mc.entry);
        }
        std::vector<DegradationRecord> degraded;
        std::map<std::string, NodeSet> closures;
        for (int o = 0; o < 3; ++o) {
            const std::string id = "op" + std::to_string(o);
            degraded.push_back({id, 10.0, 15.0 + o, 5.0 + o, 0.5, true});
            NodeSet cl;
            for (const auto& n : ev.candidate_nodes)
                if (std::bernoulli_distribution(0.5)(rng)) cl.insert(n);
            closures[id] = cl;
        }
        auto ids = [](const std::vector<RankedCause>& v) {
            std::vector<std::string> out;
            for (const auto& c : v) out.push_back(c.cause_id);
            return out;
        };
        const auto before = rank_causes(entries, ev, degraded, closures);
        for (auto& e : entries)
            for (auto& p : e.symptoms) p.weight *= 0.5;
        const auto after = rank_causes(entries, ev, degraded, closures);
        ASSERT_EQ(ids(before), ids(after));
        for (const auto& c : before) {
            ASSERT_GE(c.impact, 0.0);
            ASSERT_LE(c.impact, 1.0);
        }
        for (std::size_t k = 1; k < before.size(); ++k) {
            ASSERT_TRUE(before[k - 1].rank_score > before[k].rank_score ||
                        (before[k - 1].rank_score == before[k].rank_score &&
                         before[k - 1].cause_id < before[k].cause_id));
        }
    }
}

MetricSeries random_series(std::mt19937_64& rng, std::size_t n) {
    std::normal_distribution<double> d(0.0, 1.0);
    MetricSeries s{"x", "m", "", 300, {}};
    for (std::size_t i = 0; i < n; ++i) s.samples.push_back({static_cast<std::int64_t>(300 * i), d(rng)});
    return s;
}

MetricSeries affine(MetricSeries s, double a, double b) {
    for (auto& x : s.samples) x.value = a * x.value + b;
    return s;
}

TEST(Property, CorrelateBoundsSymmetryAffine) {
    std::mt19937_64 rng(16);
    std::uniform_real_distribution<double> slope(0.1, 10.0), shift(-100.0, 100.0);
    for (int i = 0; i < 300; ++i) {
        const auto n = std::uniform_int_distribution<std::size_t>(3, 40)(rng);
        const auto a = random_series(rng, n);
        const auto b = random_series(rng, n);
        const double r = correlate(a, b);
        ASSERT_GE(r, -1.0);
        ASSERT_LE(r, 1.0);
        ASSERT_NEAR(r, correlate(b, a), 1e-12);
        const double k = slope(rng), c = shift(rng);
        ASSERT_NEAR(correlate(affine(a, k, c), b), r, 1e-9);
        ASSERT_NEAR(correlate(affine(a, -k, c), b), -r, 1e-9);
    }
}

TEST(Property, AnomalyScoreShiftInvariant) {
    std::mt19937_64 rng(17);
    std::normal_distribution<double> d(50.0, 5.0);
    std::uniform_real_distribution<double> shift(-1000.0, 1000.0);
    for (int i = 0; i < 300; ++i) {
        std::vector<double> base(20), win(3);
        for (auto& x : base) x = d(rng);
        for (auto& x : win) x = d(rng) + 8.0;
        const double c = shift(rng);
        auto moved_base = base, moved_win = win;
        for (auto& x : moved_base) x += c;
        for (auto& x : moved_win) x += c;
        const auto v1 = anomaly_score(fit_baseline(base), win);
        const auto v2 = anomaly_score(fit_baseline(moved_base), moved_win);
        ASSERT_NEAR(v1.score, v2.score, 1e-6 * (1 + v1.score));
        ASSERT_EQ(v1.degraded, v2.degraded);
    }
}

TEST(Property, MedianRunNeverDegrades) {
    std::mt19937_64 rng(18);
    std::uniform_real_distribution<double> u(1.0, 100.0);
    for (int i = 0; i < 100; ++i) {
        std::vector<RunRecord> hist;
        std::vector<double> a, b;
        for (int r = 0; r < 7; ++r) {
            a.push_back(u(rng));
            b.push_back(u(rng));
            hist.push_back(testing::record(
                r, testing::snapshot("q", "r" + std::to_string(r), r * 3600,
                                     testing::op("j", "HashJoin", {}, a.back(), {testing::op("s", "SeqScan", {"T"}, b.back())}))));
        }
        const auto cur = testing::record(
            7, testing::snapshot("q", "cur", 0, testing::op("j", "HashJoin", {}, median(a), {testing::op("s", "SeqScan", {"T"}, median(b))})));
        for (const auto& d : operator_degradation(hist, cur)) {
            ASSERT_FALSE(d.degraded);
            ASSERT_DOUBLE_EQ(d.delta_s, 0.0);
        }
    }
}

TEST(Property, SlowedIffAboveTheta) {
    std::mt19937_64 rng(19);
    std::uniform_real_distribution<double> u(50.0, 200.0), th(0.05, 0.8);
    for (int i = 0; i < 500; ++i) {
        std::vector<RunRecord> hist;
        for (int r = 0; r < 5; ++r)
            hist.push_back(testing::record(r, testing::scan_plan("r" + std::to_string(r), u(rng), r * 3600)));
        const auto cur = testing::record(5, testing::scan_plan("cur", u(rng)));
        const double theta = th(rng);
        const auto v = detect_slowdown(hist, cur, theta, 5);
        ASSERT_EQ(v.slowed, v.rel_delta >= theta);
    }
}

TEST(Property, StationaryFalsePositiveRate) {
    sim::NoiseGenerator noise(20, 0.05);
    int degraded = 0;
    const int windows = 2000;
    for (int w = 0; w < windows; ++w) {
        std::vector<double> base(36), win(3);
        for (auto& x : base) x = 100.0 * noise.factor();
        for (auto& x : win) x = 100.0 * noise.factor();
        degraded += anomaly_score(fit_baseline(base), win, 3.0).degraded ? 1 : 0;
    }
    EXPECT_LE(degraded, windows * 0.015);
}

}  // namespace
}  // namespace apgdiag
