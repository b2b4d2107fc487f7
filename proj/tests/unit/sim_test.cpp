#include <filesystem>
#include <fstream>
#include <sstream>

#include "caas/cli.hpp"
#include "caas/output.hpp"
#include "caas/sim.hpp"
#include "doctest.h"
#include "json.hpp"

using namespace caas;

namespace {

// Two thinned shells over the paper's area; small enough for unit-test runs.
std::string small_scenario_json(int ues, double duration, int seed = 3) {
    std::ostringstream os;
    os << R"({"name": "small",
      "shells": [
        {"satellite_count": 396, "plane_count": 36, "inclination_deg": 53.0, "altitude_km": 550.0},
        {"satellite_count": 162, "plane_count": 9, "inclination_deg": 86.4, "altitude_km": 1200.0}],
      "area": {"lat_min_deg": 0.0, "lat_max_deg": 7.0, "lon_min_deg": 95.0, "lon_max_deg": 115.0},
      "ue_count": )" << ues << R"(, "duration_s": )" << duration << R"(, "seed": )" << seed << "}";
    return os.str();
}

Event rate(double t, UeId u, double r, std::vector<SatelliteId> serving = {1}) {
    Event e;
    e.t = t;
    e.kind = EventKind::Rate;
    e.ue_id = u;
    e.rate_bps = r;
    e.serving = std::move(serving);
    return e;
}

Event signal(double t, EventKind k, UeId u, SatelliteId from, SatelliteId to, int link = 0) {
    Event e;
    e.t = t;
    e.kind = k;
    e.ue_id = u;
    e.link_id = link;
    e.from_sat = from;
    e.to_sat = to;
    return e;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

std::filesystem::path scratch(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("caas_unit_" + name);
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

}  // namespace

TEST_CASE("named RNG streams are deterministic and independent") {
    auto a = sim::rng_stream(1, "ue-pos"), b = sim::rng_stream(1, "ue-pos");
    auto c = sim::rng_stream(1, "ue-demand"), d = sim::rng_stream(2, "ue-pos");
    const auto x = a();
    CHECK(x == b());
    CHECK(x != c());
    CHECK(x != d());
}

TEST_CASE("UE population") {
    auto sc = parse_scenario_text(small_scenario_json(120, 60));
    const auto ues = sim::populate_ues(sc);
    REQUIRE(ues.size() == 120);
    double demand = 0.0;
    for (std::size_t i = 0; i < ues.size(); ++i) {
        const auto& u = ues[i];
        CHECK(u.requirement.ue_id == static_cast<UeId>(i));
        CHECK(u.position.latitude_deg >= 0.0);
        CHECK(u.position.latitude_deg <= 7.0);
        CHECK(u.position.longitude_deg >= 95.0);
        CHECK(u.position.longitude_deg <= 115.0);
        CHECK(std::fmod(u.requirement.demand_bps, 1e6) == 0.0);
        const bool heavy = u.requirement.demand_bps > sc.demand_mean_bps;
        CHECK((u.requirement.connectivity == control::Connectivity::Dual) == heavy);
        if (u.default_satellite) CHECK(constellation::shell_of(*u.default_satellite) == u.default_shell);
        demand += u.requirement.demand_bps;
    }
    // Poisson(20) x 1 Mbps: the sample mean of 120 draws lies well within 20 +- 2 Mbps.
    CHECK(std::abs(demand / 120.0 - 20e6) < 2e6);

    const auto again = sim::populate_ues(sc);
    for (std::size_t i = 0; i < ues.size(); ++i) {
        CHECK(again[i].position.latitude_deg == ues[i].position.latitude_deg);
        CHECK(again[i].requirement.demand_bps == ues[i].requirement.demand_bps);
    }
    sc.ue_count = 0;
    CHECK(sim::populate_ues(sc).empty());
}

TEST_CASE("compute_metrics examples") {
    SUBCASE("constant rate, no handovers") {
        EventLog log;
        for (int t = 0; t < 10; ++t)
            for (UeId u = 0; u < 3; ++u) log.events.push_back(rate(t, u, 5e6));
        const auto r = compute_metrics(log, 3);
        CHECK(r.atr_bps == doctest::Approx(5e6));
        CHECK(r.ho_per_ue == 0.0);
        CHECK(r.outage_fraction == 0.0);
        CHECK(compute_metrics(log, 3) == r);
    }
    SUBCASE("half-covered UE") {
        EventLog log;
        for (int t = 0; t < 10; ++t) log.events.push_back(t < 5 ? rate(t, 0, 8e6) : rate(t, 0, 0.0, {}));
        const auto r = compute_metrics(log, 1);
        CHECK(r.atr_bps == doctest::Approx(4e6));
        CHECK(r.outage_fraction == doctest::Approx(0.5));
    }
    SUBCASE("handovers, ping-pong and signaling from the log") {
        EventLog log;
        log.events.push_back(signal(0.0, EventKind::Sequence, 0, 1, 1));
        for (auto [t, from, to] : {std::tuple{10.0, 1, 2}, {20.0, 2, 1}, {90.0, 1, 3}}) {
            log.events.push_back(signal(t - 0.1, EventKind::Prepare, 0, from, to));
            log.events.push_back(signal(t - 0.05, EventKind::Ack, 0, from, to));
            log.events.push_back(signal(t, EventKind::Execute, 0, from, to));
            log.events.push_back(signal(t + 0.1, EventKind::Complete, 0, from, to));
        }
        Event sc;
        sc.t = 95.0;
        sc.kind = EventKind::Sc;
        log.events.push_back(sc);
        const auto r = compute_metrics(log, 2);
        CHECK(r.ho_count == 3);
        CHECK(r.ho_per_ue == doctest::Approx(1.5));
        CHECK(r.pingpong_count == 1);
        CHECK(r.signaling_messages == 13);
        CHECK(r.per_ue[1].atr_bps == 0.0);
    }
    SUBCASE("ping-pong is per link") {
        EventLog log;
        log.events.push_back(signal(1.0, EventKind::Execute, 0, 1, 2, 0));
        log.events.push_back(signal(2.0, EventKind::Execute, 0, 2, 1, 1));
        CHECK(compute_metrics(log, 1).pingpong_count == 0);
    }
    SUBCASE("unordered log") {
        EventLog log;
        log.events = {rate(2.0, 0, 1.0), rate(1.0, 0, 1.0)};
        try {
            compute_metrics(log, 1);
            FAIL("expected ordering error");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::Ordering);
        }
    }
}

TEST_CASE("runs are reproducible and conserve power") {
    const auto sc = parse_scenario_text(small_scenario_json(8, 90));
    for (Strategy s : {Strategy::Caas, Strategy::Standalone}) {
        const auto a = sim::run(sc, s), b = sim::run(sc, s);
        CHECK(a.report == b.report);
        CHECK(a.log.events == b.log.events);
        CHECK(a.log.time_ordered());
        CHECK(a.max_budget_ratio <= 1.0 + 1e-9);
        CHECK(compute_metrics(a.log, sc) == a.report);
        int executes = 0, signaling = 0;
        for (const auto& e : a.log.events) {
            executes += e.kind == EventKind::Execute;
            signaling += is_signaling(e.kind);
        }
        CHECK(executes == a.report.ho_count);
        CHECK(signaling == a.report.signaling_messages);
        CHECK(a.report.atr_bps >= 0.0);
        CHECK(a.report.outage_fraction >= 0.0);
        CHECK(a.report.outage_fraction <= 1.0);
        CHECK(a.report.per_ue.size() == 8);
    }
}

TEST_CASE("zero duration gives an empty run") {
    auto sc = parse_scenario_text(small_scenario_json(5, 0));
    const auto r = sim::run(sc, Strategy::Caas);
    CHECK(r.log.events.empty());
    CHECK(r.report.atr_bps == 0.0);
    CHECK(r.report.ho_count == 0);
}

TEST_CASE("single UE under a single satellite: both strategies agree") {
    const auto sc = parse_scenario_text(R"({
      "shells": [{"satellite_count": 1, "plane_count": 1, "inclination_deg": 0.0, "altitude_km": 550.0}],
      "area": {"lat_min_deg": -0.5, "lat_max_deg": 0.5, "lon_min_deg": -0.5, "lon_max_deg": 0.5},
      "ue_count": 1, "duration_s": 120, "seed": 4})");
    const auto caas = sim::run(sc, Strategy::Caas), alone = sim::run(sc, Strategy::Standalone);
    CHECK(caas.report.ho_count == 0);
    CHECK(alone.report.ho_count == 0);
    CHECK(caas.report.atr_bps > 0.0);
    CHECK(caas.report.atr_bps == doctest::Approx(alone.report.atr_bps).epsilon(1e-9));
}

TEST_CASE("sweep rows: caas first, one row per strategy and count") {
    const auto sc = parse_scenario_text(small_scenario_json(4, 30));
    const std::vector<int> counts{3, 5};
    const std::vector<std::uint64_t> seeds{1, 2};
    const auto res = sim::sweep(sc, counts, seeds);
    CHECK(res.cells.size() == 8);
    REQUIRE(res.rows.size() == 4);
    CHECK(res.rows[0].strategy == Strategy::Caas);
    CHECK(res.rows[1].strategy == Strategy::Standalone);
    CHECK(res.rows[2].ue_count == 5);
    std::ostringstream os;
    output::write_sweep_csv(os, res);
    CHECK(os.str().rfind("ue_count,strategy,atr_mean_bps,atr_std,ho_per_ue_mean,ho_per_ue_std,pingpong_mean,signaling_mean\n", 0) == 0);
}

TEST_CASE("scenario parsing errors name the key") {
    auto kind_and_text = [](const std::string& text) -> std::pair<ErrorKind, std::string> {
        try {
            parse_scenario_text(text);
        } catch (const Error& e) {
            return {e.kind(), e.what()};
        }
        return {ErrorKind::Domain, "no error"};
    };
    const auto base = small_scenario_json(4, 30);
    auto with = [&](const std::string& extra) { return base.substr(0, base.size() - 1) + ", " + extra + "}"; };

    auto [k1, m1] = kind_and_text(with(R"("colour": 3)"));
    CHECK(k1 == ErrorKind::Parse);
    CHECK(m1.find("colour") != std::string::npos);
    auto [k2, m2] = kind_and_text(with(R"("handover": {"alpha": -1})"));
    CHECK(k2 == ErrorKind::Parse);
    CHECK(m2.find("handover.alpha") != std::string::npos);
    auto [k3, m3] = kind_and_text(R"({"shells": [], "area": {"lat_min_deg": 0, "lat_max_deg": 1, "lon_min_deg": 0, "lon_max_deg": 1}, "ue_count": 1, "duration_s": 1})");
    CHECK(k3 == ErrorKind::Parse);
    auto [k4, m4] = kind_and_text("{not json");
    CHECK(k4 == ErrorKind::Parse);
    auto [k5, m5] = kind_and_text(R"({"shells": [{"satellite_count": 4, "plane_count": 2, "inclination_deg": 200, "altitude_km": 550}], "area": {"lat_min_deg": 0, "lat_max_deg": 1, "lon_min_deg": 0, "lon_max_deg": 1}, "ue_count": 1, "duration_s": 1})");
    CHECK(k5 == ErrorKind::Parse);
    CHECK(m5.find("shells[0].inclination_deg") != std::string::npos);
    auto [k6, m6] = kind_and_text(R"({"shells": [{"satellite_count": 4, "plane_count": 2, "inclination_deg": 50, "altitude_km": 550}], "ue_count": 1, "duration_s": 1})");
    CHECK(k6 == ErrorKind::Parse);
    CHECK(m6.find("area") != std::string::npos);

    try {
        parse_scenario("/nonexistent/dir/scenario.json");
        FAIL("expected io error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Io);
    }
    // Optional sections may be omitted or overridden.
    const auto sc = parse_scenario_text(with(R"("link": {"bandwidth_hz": 1e7}, "control": {"capacity_per_satellite": 12})"));
    CHECK(sc.link.bandwidth_hz == 1e7);
    CHECK(sc.control.sc.capacity_per_satellite == 12);
    CHECK(parse_scenario_text(base).link.bandwidth_hz == 30e6);
}

TEST_CASE("bundled paper scenario parses") {
    const auto sc = parse_scenario(CAAS_SOURCE_DIR "/scenarios/paper_fig5.json");
    CHECK(sc.name == "paper_fig5");
    REQUIRE(sc.shells.size() == 2);
    CHECK(sc.shells[0].satellite_count == 1584);
    CHECK(sc.shells[1].altitude_km == 1200.0);
    CHECK(sc.ue_count == 40);
    CHECK(sc.duration_s == 600.0);
}

TEST_CASE("atomic writes leave either the whole file or nothing") {
    const auto dir = scratch("atomic");
    const auto path = (dir / "out.txt").string();
    output::write_atomic(path, [](std::ostream& os) { os << "first\n"; });
    CHECK(slurp(path) == "first\n");
    CHECK_THROWS(output::write_atomic(path, [](std::ostream& os) {
        os << "partial";
        throw std::runtime_error("interrupted");
    }));
    CHECK(slurp(path) == "first\n");
    CHECK(!std::filesystem::exists(path + ".tmp"));
    try {
        output::write_atomic((dir / "missing" / "x.txt").string(), [](std::ostream&) {});
        FAIL("expected io error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Io);
    }
}

TEST_CASE("event JSONL shapes") {
    EventLog log;
    log.events.push_back(rate(1.0, 2, 3e6, {5, 6}));
    log.events.push_back(signal(2.0, EventKind::Execute, 2, 5, 7, 1));
    Event sc;
    sc.t = 3.0;
    sc.kind = EventKind::Sc;
    sc.region_id = 4;
    sc.satellite_ids = {5, 7};
    sc.uncovered_demand_points = 2;
    log.events.push_back(sc);
    std::ostringstream os;
    output::write_events_jsonl(os, log);
    std::istringstream in(os.str());
    std::string line;
    std::vector<nlohmann::json> rows;
    while (std::getline(in, line)) rows.push_back(nlohmann::json::parse(line));
    REQUIRE(rows.size() == 3);
    CHECK(rows[0]["kind"] == "rate");
    CHECK(rows[0]["serving"] == nlohmann::json::array({5, 6}));
    CHECK(rows[1]["kind"] == "execute");
    CHECK(rows[1]["to_sat"] == 7);
    CHECK(rows[2]["kind"] == "sc");
    CHECK(rows[2]["uncovered_demand_points"] == 2);
    CHECK(!rows[2].contains("ue_id"));
}

TEST_CASE("UE range expressions") {
    CHECK(cli::parse_ue_range("20..120:20") == std::vector<int>{20, 40, 60, 80, 100, 120});
    CHECK(cli::parse_ue_range("5..7") == std::vector<int>{5, 6, 7});
    CHECK(cli::parse_ue_range("40") == std::vector<int>{40});
    CHECK_THROWS_AS(cli::parse_ue_range("10..5:1"), Error);
    CHECK_THROWS_AS(cli::parse_ue_range("1..5:0"), Error);
    CHECK_THROWS_AS(cli::parse_ue_range("a..b"), Error);
}

TEST_CASE("CLI end to end: simulate twice, byte-identical outputs; exit codes") {
    const auto dir = scratch("cli");
    const auto scenario = (dir / "s.json").string();
    output::write_atomic(scenario, [](std::ostream& os) { os << small_scenario_json(5, 40); });
    auto run = [&](std::vector<std::string> args) {
        std::vector<char*> argv;
        static std::string prog = "caas";
        argv.push_back(prog.data());
        for (auto& a : args) argv.push_back(a.data());
        return cli::run_cli(static_cast<int>(argv.size()), argv.data());
    };
    const auto a = (dir / "a").string(), b = (dir / "b").string();
    REQUIRE(run({"simulate", "--scenario", scenario, "--out", a}) == 0);
    REQUIRE(run({"simulate", "--scenario", scenario, "--out", b}) == 0);
    CHECK(slurp(a + "/metrics_caas.json") == slurp(b + "/metrics_caas.json"));
    CHECK(slurp(a + "/events_caas.jsonl") == slurp(b + "/events_caas.jsonl"));
    CHECK(!slurp(a + "/events_caas.jsonl").empty());

    CHECK(run({"coverage", "--scenario", scenario, "--out", a}) == 0);
    CHECK(slurp(a + "/windows.csv").rfind("satellite_id,ue_id,start_s,end_s,peak_elevation_deg", 0) == 0);
    CHECK(run({"hgm", "--scenario", scenario, "--out", a, "--ue", "0", "--format", "dot"}) == 0);
    CHECK(slurp(a + "/hgm_ue0.dot").rfind("digraph", 0) == 0);

    CHECK(run({"simulate", "--scenario", (dir / "absent.json").string(), "--out", a}) == 2);
    CHECK(run({"simulate", "--scenario", scenario, "--strategy", "greedy"}) == 1);
    CHECK(run({"compare", "--scenario", scenario, "--out", a, "--ues", "oops"}) == 1);
    CHECK(run({"frobnicate"}) == 1);
}
