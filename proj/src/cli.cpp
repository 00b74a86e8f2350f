#include "apgdiag/cli.hpp"

#include <charconv>
#include <cstdio>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "apgdiag/analytics.hpp"
#include "apgdiag/error.hpp"
#include "apgdiag/ingest.hpp"
#include "apgdiag/model.hpp"
#include "apgdiag/sim.hpp"
#include "apgdiag/symptoms.hpp"

namespace apgdiag::cli {

namespace fs = std::filesystem;

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string cell(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%10.3f", v);
    return buf;
}

int cmd_simulate(const fs::path& scenario_path, std::optional<std::uint64_t> seed, const fs::path& out_dir,
                 std::ostream& out) {
    sim::Scenario scenario = sim::load_scenario(scenario_path);
    if (seed) scenario.seed = *seed;
    const auto data = sim::simulate(scenario);
    sim::write_dataset(data, out_dir);
    out << "scenario " << scenario.name << " seed " << scenario.seed << ": " << data.runs.size() << " runs, "
        << data.metrics.size() << " metric samples -> " << out_dir.string() << "\n";
    return kExitOk;
}

int cmd_diagnose(const CliConfig& cfg, const std::string& query, const std::string& run, std::ostream& out) {
    const Dataset data = open_dataset(cfg.data_dir);
    const auto symptoms = load_symptoms_db(cfg.symptoms_path);
    const DiagnosisReport report = diagnose(data, query, run, symptoms, cfg.engine);
    out << render_report(report, cfg.format);
    return report.verdict.slowed && !report.causes.empty() ? kExitCauses : kExitOk;
}

int cmd_baseline(const fs::path& dir, const std::string& query, std::size_t limit, std::ostream& out) {
    const RunStore store = RunStore::open(dir / "runs");
    const auto& runs = store.runs(query);
    if (runs.empty()) throw Error(ErrorCode::UnknownRun, "no runs for query '" + query + "'");
    const std::string fp = runs.back().fingerprint;
    const auto hist = history(store, query, fp, limit);

    out << "query " << query << ", plan " << fp << ", " << hist.size() << " runs\n";
    out << "operator   kind              n       mean        std        min        max     median\n";
    const auto shape = flatten_operators(hist.back().snapshot.root);
    auto row = [&](const std::string& id, const std::string& kind, const std::vector<double>& xs) {
        const BaselineModel m = fit_baseline(xs);
        char head[48];
        std::snprintf(head, sizeof(head), "%-10s %-14s %4zu ", id.c_str(), kind.c_str(), m.n);
        out << head << cell(m.mean) << " " << cell(m.std) << " " << cell(m.min) << " " << cell(m.max) << " "
            << cell(median(xs)) << "\n";
    };
    for (std::size_t i = 0; i < shape.size(); ++i) {
        std::vector<double> xs;
        for (const auto& r : hist) xs.push_back(flatten_operators(r.snapshot.root)[i]->elapsed_s);
        row(shape[i]->op_id, shape[i]->op_kind, xs);
    }
    std::vector<double> totals;
    for (const auto& r : hist) totals.push_back(r.snapshot.total_elapsed_s);
    row("(total)", "", totals);
    return kExitOk;
}

int cmd_validate(const fs::path& dir, std::ostream& out) {
    std::vector<std::string> problems;
    auto attempt = [&](const std::string& what, auto&& fn) {
        try {
            fn();
        } catch (const Error& e) {
            problems.push_back(what + ": " + e.what());
        } catch (const std::exception& e) {
            problems.push_back(what + ": " + e.what());
        }
    };
    if (!fs::is_directory(dir)) {
        out << "violation: no dataset directory " << dir.string() << "\n";
        return kExitError;
    }
    std::optional<TopologyDoc> topology;
    attempt("topology.json", [&] { topology = load_topology(dir / "topology.json"); });
    attempt("runs", [&] {
        const RunStore store = RunStore::open(dir / "runs");
        if (!topology) return;
        for (const auto& q : store.query_ids()) {
            for (const auto& r : store.runs(q)) {
                attempt("run " + r.snapshot.run_id, [&] { build_apg(r.snapshot, *topology); });
            }
        }
    });
    if (fs::is_directory(dir / "metrics")) {
        attempt("metrics", [&] {
            const auto series = load_metrics_dir(dir / "metrics");
            if (!topology) return;
            for (const auto& s : series) {
                if (topology->find(s.component_id) == nullptr) {
                    problems.push_back("metrics: series " + s.component_id + "/" + s.metric +
                                       " names an undeclared component");
                }
            }
        });
    }
    if (fs::exists(dir / "events.jsonl")) {
        attempt("events.jsonl", [&] {
            const auto log = load_events(dir / "events.jsonl");
            if (!topology) return;
            for (const auto& e : log.config) {
                if (topology->find(e.component_id) == nullptr) {
                    problems.push_back("events.jsonl: config event names undeclared component '" + e.component_id + "'");
                }
            }
        });
    }
    for (const auto& p : problems) out << "violation: " << p << "\n";
    if (problems.empty()) out << "ok\n";
    return problems.empty() ? kExitOk : kExitError;
}

}  // namespace

void apply_defaults_file(const std::string& text, EngineConfig& config) {
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty() || line.front() == '[') continue;
        const auto eq = line.find('=');
        const std::string locus = "diagnose.toml:" + std::to_string(lineno);
        if (eq == std::string::npos) throw Error(ErrorCode::InvalidConfig, locus + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        double v = 0.0;
        auto res = std::from_chars(value.data(), value.data() + value.size(), v);
        if (res.ec != std::errc() || res.ptr != value.data() + value.size()) {
            throw Error(ErrorCode::InvalidConfig, locus + ": '" + value + "' is not a number");
        }
        if (key == "theta") {
            config.theta = v;
        } else if (key == "tau") {
            config.tau = v;
        } else if (key == "delta") {
            config.delta = v;
        } else if (key == "floor_s") {
            config.floor_s = v;
        } else if (key == "k" || key == "history_limit") {
            if (v < 0 || v != static_cast<double>(static_cast<std::size_t>(v))) {
                throw Error(ErrorCode::InvalidConfig, locus + ": " + key + " must be a non-negative integer");
            }
            (key == "k" ? config.k : config.history_limit) = static_cast<std::size_t>(v);
        } else {
            throw Error(ErrorCode::InvalidConfig, locus + ": unknown key '" + key + "'");
        }
    }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Root-cause diagnosis of query slowdowns across database and SAN layers"};
    app.require_subcommand(1);

    std::string scenario_path, out_dir;
    std::optional<std::uint64_t> seed;
    auto* simulate = app.add_subcommand("simulate", "Generate a synthetic dataset from a fault-injection scenario");
    simulate->add_option("--scenario", scenario_path, "Scenario JSON file")->required();
    simulate->add_option("--seed", seed, "Override the scenario seed");
    simulate->add_option("--out", out_dir, "Output directory (must be empty or absent)")->required();

    const EngineConfig defaults;
    std::string data_dir, query, run_id, symptoms_path, format = "text";
    std::optional<double> theta, tau, delta, floor_s;
    std::optional<std::size_t> k, history_limit;
    auto* diag = app.add_subcommand("diagnose", "Diagnose one run of a query; exit 2 when causes are found");
    diag->add_option("--data", data_dir, "Dataset directory")->required();
    diag->add_option("--query", query, "Query id")->required();
    diag->add_option("--run", run_id, "Run id")->required();
    diag->add_option("--symptoms", symptoms_path, "Symptoms database JSON")->required();
    diag->add_option("--format", format, "Output format: json or text (default text)")
        ->check(CLI::IsMember({"json", "text"}));
    diag->add_option("--theta", theta, "Query slowdown threshold (default " + std::to_string(defaults.theta) + ")");
    diag->add_option("--tau", tau, "Anomaly threshold in std devs (default " + std::to_string(defaults.tau) + ")");
    diag->add_option("--delta", delta, "Operator slowdown threshold (default " + std::to_string(defaults.delta) + ")");
    diag->add_option("--floor", floor_s, "Operator slowdown floor, seconds (default " +
                                             std::to_string(defaults.floor_s) + ")");
    diag->add_option("--k", k, "Minimum history runs (default " + std::to_string(defaults.k) + ")");
    diag->add_option("--history", history_limit, "History runs considered (default " +
                                                     std::to_string(defaults.history_limit) + ")");
    diag->footer("Flags override settings in <data>/diagnose.toml, which override the defaults.");

    std::size_t baseline_limit = defaults.history_limit;
    auto* base = app.add_subcommand("baseline", "Per-operator baseline statistics of a query's current plan");
    base->add_option("--data", data_dir, "Dataset directory")->required();
    base->add_option("--query", query, "Query id")->required();
    base->add_option("--limit", baseline_limit, "Most recent runs to include (default 20)");

    auto* validate = app.add_subcommand("validate", "Check every file of a dataset; exit 1 on any violation");
    validate->add_option("--data", data_dir, "Dataset directory")->required();

    std::string report_path, cause_id;
    auto* explain = app.add_subcommand("explain", "Print the evidence trace of one cause from a JSON report");
    explain->add_option("--report", report_path, "Report produced by diagnose --format json")->required();
    explain->add_option("--cause", cause_id, "Cause id")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitError;
    }

    try {
        if (*simulate) return cmd_simulate(scenario_path, seed, out_dir, out);
        if (*diag) {
            CliConfig cfg;
            cfg.data_dir = data_dir;
            cfg.symptoms_path = symptoms_path;
            cfg.format = format == "json" ? ReportFormat::Json : ReportFormat::Text;
            if (fs::exists(cfg.data_dir / "diagnose.toml")) {
                apply_defaults_file(read_text_file(cfg.data_dir / "diagnose.toml"), cfg.engine);
            }
            if (theta) cfg.engine.theta = *theta;
            if (tau) cfg.engine.tau = *tau;
            if (delta) cfg.engine.delta = *delta;
            if (floor_s) cfg.engine.floor_s = *floor_s;
            if (k) cfg.engine.k = *k;
            if (history_limit) cfg.engine.history_limit = *history_limit;
            if (auto v = cfg.engine.violations(); !v.empty()) throw Error(ErrorCode::InvalidConfig, v.front());
            return cmd_diagnose(cfg, query, run_id, out);
        }
        if (*base) return cmd_baseline(data_dir, query, baseline_limit, out);
        if (*validate) return cmd_validate(data_dir, out);
        if (*explain) {
            out << explain_cause(read_text_file(report_path), cause_id);
            return kExitOk;
        }
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitError;
}

}  // namespace apgdiag::cli
