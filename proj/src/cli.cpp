#include "caas/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <regex>
#include <sstream>

#include "CLI11.hpp"
#include "caas/output.hpp"

namespace caas::cli {

namespace {

enum class Level { Debug = 0, Info = 1, Warn = 2, Error = 3 };

Level log_level() {
    const char* env = std::getenv("CAAS_LOG");
    if (!env) return Level::Info;
    const std::string v = env;
    if (v == "debug") return Level::Debug;
    if (v == "warn") return Level::Warn;
    if (v == "error") return Level::Error;
    return Level::Info;
}

void log(Level lvl, const std::string& msg) {
    static const Level threshold = log_level();
    if (lvl < threshold) return;
    static const char* names[] = {"debug", "info", "warn", "error"};
    std::cerr << "[" << names[static_cast<int>(lvl)] << "] " << msg << '\n';
}

std::string join(const std::string& dir, const std::string& file) {
    return (std::filesystem::path(dir) / file).string();
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(ErrorKind::Io, "cannot create output directory " + dir + ": " + ec.message());
}

struct Common {
    std::string scenario_path;
    std::string out_dir = "out";
    long seed = -1;
    bool verbose = false;
};

Scenario load(const Common& c) {
    Scenario sc = parse_scenario(c.scenario_path);
    if (c.seed >= 0) sc.seed = static_cast<std::uint64_t>(c.seed);
    return sc;
}

void add_common(CLI::App* app, Common& c) {
    app->add_option("--scenario", c.scenario_path, "Scenario JSON file")->required();
    app->add_option("--out", c.out_dir, "Output directory")->capture_default_str();
    app->add_option("--seed", c.seed, "Seed override (negative keeps the scenario seed)")->capture_default_str();
    app->add_flag("--verbose", c.verbose, "Write per-step diagnostics")->capture_default_str();
}

void cmd_coverage(const Common& c) {
    const Scenario sc = load(c);
    const auto ues = sim::populate_ues(sc);
    std::vector<constellation::GroundPoint> gps;
    for (const auto& u : ues) gps.push_back(u.position);
    const auto orbits = constellation::build_constellation(sc.shells);
    const auto windows = constellation::coverage_windows_batch(orbits, gps, {0.0, sc.duration_s}, sc.mask_deg);
    ensure_dir(c.out_dir);
    const auto path = join(c.out_dir, "windows.csv");
    output::write_atomic(path, [&](std::ostream& os) { constellation::write_windows_csv(os, windows); });
    log(Level::Info, std::to_string(windows.size()) + " windows written to " + path);
}

void cmd_simulate(const Common& c, const std::string& strategy_name, bool csi_trace) {
    const Scenario sc = load(c);
    const Strategy strategy = parse_strategy(strategy_name);
    sim::RunOptions opt;
    opt.record_allocations = c.verbose;
    opt.record_csi = csi_trace;
    const auto res = sim::run(sc, strategy, opt);
    ensure_dir(c.out_dir);
    const std::string tag = to_string(strategy);
    output::write_atomic(join(c.out_dir, "metrics_" + tag + ".json"),
                         [&](std::ostream& os) { os << output::metrics_json(res.report, sc, strategy); });
    output::write_atomic(join(c.out_dir, "events_" + tag + ".jsonl"),
                         [&](std::ostream& os) { output::write_events_jsonl(os, res.log); });
    if (opt.record_allocations)
        output::write_atomic(join(c.out_dir, "allocations_" + tag + ".csv"),
                             [&](std::ostream& os) { output::write_allocations_csv(os, res.allocations); });
    if (opt.record_csi)
        output::write_atomic(join(c.out_dir, "csi_" + tag + ".csv"), [&](std::ostream& os) {
            channel::write_csi_csv_header(os);
            for (const auto& s : res.csi) channel::write_csi_csv_row(os, s);
        });
    std::ostringstream msg;
    msg << tag << ": atr " << res.report.atr_bps / 1e6 << " Mbps, ho/ue " << res.report.ho_per_ue << ", pingpong "
        << res.report.pingpong_count << ", signaling " << res.report.signaling_messages << ", outage "
        << res.report.outage_fraction;
    log(Level::Info, msg.str());
}

void cmd_compare(const Common& c, const std::string& ues_expr, int seed_count) {
    Scenario sc = load(c);
    const auto counts = parse_ue_range(ues_expr);
    if (seed_count < 1) throw Error(ErrorKind::Parse, "--seeds must be >= 1");
    std::vector<std::uint64_t> seeds;
    for (int k = 0; k < seed_count; ++k) seeds.push_back(sc.seed + static_cast<std::uint64_t>(k));
    const auto result = sim::sweep(sc, counts, seeds);
    ensure_dir(c.out_dir);
    const auto path = join(c.out_dir, "compare.csv");
    output::write_atomic(path, [&](std::ostream& os) { output::write_sweep_csv(os, result); });
    log(Level::Info, std::to_string(result.rows.size()) + " rows written to " + path);
}

void cmd_hgm(const Common& c, int ue, const std::string& format) {
    const Scenario sc = load(c);
    const auto g = sim::ue_graph(sc, ue);
    std::ostringstream os;
    const auto& graph = g.graph;
    std::set<std::size_t> on_path;
    if (g.path)
        for (const auto& h : g.path->sequence) on_path.insert(h.vertex);
    if (format == "dot") {
        os << "digraph hgm_ue" << ue << " {\n  rankdir=LR;\n";
        os << "  v0 [label=\"source\", shape=point];\n";
        for (std::size_t v = 1; v < graph.vertex_count(); ++v) {
            const auto& w = graph.vertices[v];
            os << "  v" << v << " [label=\"sat " << w.satellite_id << "\\n[" << w.start_s << ", " << w.end_s << ")\""
               << (on_path.count(v) ? ", style=bold" : "") << "];\n";
        }
        for (const auto& e : graph.edges)
            os << "  v" << e.from << " -> v" << e.to << " [label=\"" << e.weight << "\"];\n";
        os << "}\n";
    } else if (format == "text") {
        os << "ue " << ue << ": " << graph.vertex_count() - 1 << " windows, " << graph.edges.size() << " edges\n";
        for (std::size_t v = 1; v < graph.vertex_count(); ++v) {
            const auto& w = graph.vertices[v];
            os << "  v" << v << " sat " << w.satellite_id << " [" << w.start_s << ", " << w.end_s << ")"
               << (on_path.count(v) ? " *" : "") << '\n';
        }
        if (g.path) {
            os << "path (" << g.path->handovers() << " handovers, benefit " << g.path->cumulative_benefit << "):";
            for (const auto& h : g.path->sequence) os << " " << h.satellite_id << "@" << h.switch_time_s;
            os << '\n';
        } else {
            os << "no gap-free path: " << g.note << '\n';
        }
    } else {
        throw Error(ErrorKind::Parse, "--format must be text or dot");
    }
    std::cout << os.str();
    ensure_dir(c.out_dir);
    output::write_atomic(join(c.out_dir, "hgm_ue" + std::to_string(ue) + (format == "dot" ? ".dot" : ".txt")),
                         [&](std::ostream& f) { f << os.str(); });
}

}  // namespace

std::vector<int> parse_ue_range(const std::string& expr) {
    static const std::regex re(R"(^\s*(\d+)\s*\.\.\s*(\d+)\s*(?::\s*(\d+))?\s*$)");
    std::smatch m;
    if (!std::regex_match(expr, m, re)) {
        // A single count is accepted as a one-point range.
        static const std::regex single(R"(^\s*(\d+)\s*$)");
        if (std::regex_match(expr, m, single)) return {std::stoi(m[1])};
        throw Error(ErrorKind::Parse, "malformed UE range '" + expr + "' (expected start..end:step)");
    }
    const int a = std::stoi(m[1]), b = std::stoi(m[2]);
    const int step = m[3].matched ? std::stoi(m[3]) : 1;
    if (step <= 0 || b < a) throw Error(ErrorKind::Parse, "UE range '" + expr + "' needs start <= end and step > 0");
    std::vector<int> out;
    for (int n = a; n <= b; n += step) out.push_back(n);
    return out;
}

int run_cli(int argc, char** argv) {
    CLI::App app{"Constellation-as-a-service simulator"};
    app.require_subcommand(1);

    Common coverage_opts, simulate_opts, compare_opts, hgm_opts;
    std::string strategy = "caas";
    bool csi_trace = false;
    std::string ues = "20..120:20";
    int seeds = 5;
    int ue = 0;
    std::string format = "text";

    auto* coverage = app.add_subcommand("coverage", "Coverage windows of every (satellite, UE) pair as CSV");
    add_common(coverage, coverage_opts);

    auto* simulate = app.add_subcommand("simulate", "Run one strategy; writes metrics JSON and events JSONL");
    add_common(simulate, simulate_opts);
    simulate->add_option("--strategy", strategy, "caas or standalone")
        ->check(CLI::IsMember({"caas", "standalone"}))
        ->capture_default_str();
    simulate->add_flag("--csi-trace", csi_trace, "Write serving-link CSI samples as CSV")->capture_default_str();

    auto* compare = app.add_subcommand("compare", "Sweep UE counts and seeds for both strategies; writes CSV");
    add_common(compare, compare_opts);
    compare->add_option("--ues", ues, "UE counts as start..end:step")->capture_default_str();
    compare->add_option("--seeds", seeds, "Seeds per point, counting up from the scenario seed")->capture_default_str();

    auto* hgm = app.add_subcommand("hgm", "Handover graph and chosen path of one UE");
    add_common(hgm, hgm_opts);
    hgm->add_option("--ue", ue, "UE id")->capture_default_str();
    hgm->add_option("--format", format, "text or dot")->check(CLI::IsMember({"text", "dot"}))->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (*coverage) cmd_coverage(coverage_opts);
        if (*simulate) cmd_simulate(simulate_opts, strategy, csi_trace);
        if (*compare) cmd_compare(compare_opts, ues, seeds);
        if (*hgm) cmd_hgm(hgm_opts, ue, format);
    } catch (const Error& e) {
        log(Level::Error, e.what());
        return e.kind() == ErrorKind::Io ? 2 : 1;
    } catch (const std::exception& e) {
        log(Level::Error, e.what());
        return 1;
    }
    return 0;
}

}  // namespace caas::cli
