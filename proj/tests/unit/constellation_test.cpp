#include <random>
#include <set>
#include <sstream>

#include "caas/visibility_kernels.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace caas;
using namespace caas::constellation;

namespace {

OrbitalShell shell(int id, int n, int planes, double inc, double alt, int phasing = 1) {
    OrbitalShell s;
    s.shell_id = id;
    s.satellite_count = n;
    s.plane_count = planes;
    s.inclination_deg = inc;
    s.altitude_km = alt;
    s.phasing_factor = phasing;
    return s;
}

}  // namespace

TEST_CASE("period matches Kepler for both reference shells") {
    for (double alt : {550.0, 1200.0}) {
        const auto orbits = build_walker_shell(shell(1, 4, 2, 53.0, alt));
        const double kepler = oracle::kepler_period_s(kEarthRadiusKm + alt);
        CHECK(orbits[0].period_s() == doctest::Approx(kepler).epsilon(1e-12));
        CHECK(std::abs(oracle::propagated_period_s(orbits[0], kepler) - kepler) < 1e-3);
    }
    // Published periods of the two shells.
    CHECK(std::abs(oracle::kepler_period_s(kEarthRadiusKm + 550.0) - 5739.0) < 1.0);
    CHECK(std::abs(oracle::kepler_period_s(kEarthRadiusKm + 1200.0) - 6565.0) < 1.0);
}

TEST_CASE("circular radius and speed are invariant") {
    const auto orbits = build_walker_shell(shell(0, 12, 3, 53.0, 550.0));
    const double a = kEarthRadiusKm + 550.0;
    const double v = std::sqrt(kEarthMuKm3S2 / a);
    for (const auto& o : orbits)
        for (double t = 0.0; t <= 600.0; t += 7.5) {
            const auto s = propagate_inertial(o, t);
            CHECK(std::abs(s.position_km.norm() - a) < 1e-6);
            CHECK(std::abs(s.velocity_km_s.norm() - v) < 1e-9);
            CHECK(std::abs(propagate(o, t).position_km.norm() - a) < 1e-6);
        }
}

TEST_CASE("Earth-fixed frame coincides with inertial at t = 0 and rotates after") {
    const auto o = build_walker_shell(shell(0, 1, 1, 53.0, 550.0))[0];
    const auto i0 = propagate_inertial(o, 0.0);
    const auto e0 = propagate(o, 0.0);
    CHECK((i0.position_km - e0.position_km).norm() < 1e-9);
    const double t = 1000.0;
    const auto it = propagate_inertial(o, t).position_km;
    const auto et = propagate(o, t).position_km;
    const double th = kEarthRotationRadS * t;
    const Vec3 rotated{std::cos(th) * it.x + std::sin(th) * it.y, -std::sin(th) * it.x + std::cos(th) * it.y, it.z};
    CHECK((rotated - et).norm() < 1e-6);
}

TEST_CASE("Walker delta and star layouts") {
    SUBCASE("delta spreads planes over 360 degrees") {
        const auto s = shell(2, 1584, 72, 53.0, 550.0);
        const auto orbits = build_walker_shell(s);
        REQUIRE(orbits.size() == 1584);
        std::set<SatelliteId> ids;
        for (const auto& o : orbits) {
            ids.insert(o.id);
            CHECK(shell_of(o.id) == 2);
            CHECK(o.raan_deg == doctest::Approx(o.plane_index * 5.0));
            CHECK(o.id == 2 * kShellIdStride + o.plane_index * 22 + o.slot_index);
        }
        CHECK(ids.size() == 1584);
        // Same slot, adjacent planes differ by the phasing offset 360 F / N.
        CHECK(std::fmod(orbits[22].initial_anomaly_deg - orbits[0].initial_anomaly_deg + 360.0, 360.0) ==
              doctest::Approx(360.0 / 1584));
    }
    SUBCASE("polar shell becomes a star over 180 degrees") {
        const auto orbits = build_walker_shell(shell(1, 648, 18, 86.4, 1200.0));
        CHECK(orbits.back().raan_deg == doctest::Approx(170.0));
        auto forced = shell(1, 648, 18, 86.4, 1200.0);
        forced.pattern = WalkerPattern::Delta;
        CHECK(build_walker_shell(forced).back().raan_deg == doctest::Approx(340.0));
    }
    SUBCASE("rotational symmetry: advancing one slot period maps the shell onto itself") {
        const auto s = shell(0, 24, 4, 53.0, 550.0, 0);
        const auto orbits = build_walker_shell(s);
        const double dt = orbits[0].period_s() / 6.0;
        // Inertial positions of slot k at dt equal those of slot k+1 at 0.
        for (int p = 0; p < 4; ++p)
            for (int k = 0; k < 6; ++k) {
                const auto a = propagate_inertial(orbits[p * 6 + k], dt).position_km;
                const auto b = propagate_inertial(orbits[p * 6 + (k + 1) % 6], 0.0).position_km;
                CHECK((a - b).norm() < 1e-6);
            }
    }
}

TEST_CASE("invalid shells are rejected") {
    CHECK_THROWS_AS(build_walker_shell(shell(0, 10, 3, 53.0, 550.0)), Error);  // not divisible
    CHECK_THROWS_AS(build_walker_shell(shell(0, 0, 1, 53.0, 550.0)), Error);
    CHECK_THROWS_AS(build_walker_shell(shell(0, 4, 2, 190.0, 550.0)), Error);
    CHECK_THROWS_AS(build_walker_shell(shell(0, 4, 2, 53.0, -5.0)), Error);
    try {
        build_walker_shell(shell(0, 10, 3, 53.0, 550.0));
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::InvalidSpec);
    }
}

TEST_CASE("elevation: zenith, horizon and slant range") {
    const GroundPoint gp{10.0, 20.0, 0.0};
    const Vec3 up = gp.ecef().normalized();
    SatelliteState s;
    s.position_km = gp.ecef() + up * 550.0;
    CHECK(elevation_deg(s, gp) == doctest::Approx(90.0));
    CHECK(slant_range_km(s, gp) == doctest::Approx(550.0));
    CHECK(slant_range_at_elevation_km(550.0, 90.0) == doctest::Approx(550.0));
    // Law of cosines oracle for the 10 degree mask.
    const double re = kEarthRadiusKm, r = re + 550.0, el = 10.0 * std::numbers::pi / 180.0;
    const double d = -re * std::sin(el) + std::sqrt(r * r - re * re * std::cos(el) * std::cos(el));
    CHECK(slant_range_at_elevation_km(550.0, 10.0) == doctest::Approx(d));
    CHECK_THROWS_AS(GroundPoint({95.0, 0.0, 0.0}).validate(), Error);
}

TEST_CASE("coverage windows agree with 0.1 s brute-force stepping") {
    const OrbitalShell shells[] = {shell(0, 1584, 72, 53.0, 550.0), shell(1, 648, 18, 86.4, 1200.0)};
    const auto orbits = build_constellation(shells);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> lat(0.0, 7.0), lon(95.0, 115.0);
    int compared = 0;
    for (int trial = 0; trial < 400 && compared < 8; ++trial) {
        const auto& o = orbits[std::uniform_int_distribution<std::size_t>(0, orbits.size() - 1)(rng)];
        const GroundPoint gp{lat(rng), lon(rng), 0.0};
        const auto got = coverage_windows(o, gp, {0.0, 3000.0}, 10.0);
        if (got.empty()) continue;
        ++compared;
        const auto ref = oracle::brute_force_windows(o, gp, 0.0, 3000.0, 10.0);
        REQUIRE(got.size() == ref.size());
        for (std::size_t i = 0; i < got.size(); ++i) {
            CHECK(std::abs(got[i].start_s - ref[i].start_s) <= 0.1);
            CHECK(std::abs(got[i].end_s - ref[i].end_s) <= 0.1);
            CHECK(got[i].peak_elevation_deg >= 10.0);
            const double mid = 0.5 * (got[i].start_s + got[i].end_s);
            CHECK(elevation_deg(propagate(o, mid), gp) >= 10.0);
            if (i > 0) CHECK(got[i].start_s > got[i - 1].end_s);
        }
    }
    CHECK(compared == 8);
}

TEST_CASE("coverage windows: domain errors") {
    const auto o = build_walker_shell(shell(0, 1, 1, 53.0, 550.0))[0];
    const GroundPoint gp{0.0, 0.0, 0.0};
    CHECK_THROWS_AS(coverage_windows(o, gp, {10.0, 5.0}, 10.0), Error);
    CHECK_THROWS_AS(coverage_windows(o, gp, {0.0, 10.0}, 95.0), Error);
    CHECK_THROWS_AS(coverage_windows(o, gp, {5.0, 5.0}, 10.0), Error);
    // A 53 degree orbit never rises over a point near the pole.
    CHECK(coverage_windows(o, {89.0, 0.0, 0.0}, {0.0, 6000.0}, 10.0).empty());
}

TEST_CASE("parallel kernels match their serial references") {
    const OrbitalShell shells[] = {shell(0, 120, 12, 53.0, 550.0), shell(1, 36, 6, 86.4, 1200.0)};
    const auto orbits = build_constellation(shells);
    std::vector<GroundPoint> gps;
    for (int i = 0; i < 6; ++i) gps.push_back({i * 4.0, 100.0 + i * 3.0, 0.0});
    const auto par = coverage_windows_batch(orbits, gps, {0.0, 1800.0}, 10.0);
    const auto ser = coverage_windows_batch_serial(orbits, gps, {0.0, 1800.0}, 10.0);
    REQUIRE(par.size() == ser.size());
    CHECK(!par.empty());
    for (std::size_t i = 0; i < par.size(); ++i) {
        CHECK(par[i].satellite_id == ser[i].satellite_id);
        CHECK(par[i].ground_point_id == ser[i].ground_point_id);
        CHECK(par[i].start_s == ser[i].start_s);
        CHECK(par[i].end_s == ser[i].end_s);
    }
    for (double t : {0.0, 333.0, 1200.0}) {
        const auto a = snapshot(std::span<const SatelliteOrbit>(orbits), gps, t, 10.0);
        const auto b = snapshot_parallel(orbits, gps, t, 10.0);
        REQUIRE(a.entries.size() == b.entries.size());
        for (std::size_t i = 0; i < a.entries.size(); ++i) {
            CHECK(a.entries[i].satellite_id == b.entries[i].satellite_id);
            CHECK(a.entries[i].elevation_deg == b.entries[i].elevation_deg);
        }
        // Snapshot entries are exactly the pairs above the mask.
        for (const auto& e : a.entries) CHECK(e.elevation_deg >= 10.0);
    }
}

TEST_CASE("snapshot is consistent with coverage windows") {
    const OrbitalShell shells[] = {shell(0, 120, 12, 53.0, 550.0)};
    const auto orbits = build_constellation(shells);
    const std::vector<GroundPoint> gps{{3.0, 105.0, 0.0}};
    const CoverageIndex index(coverage_windows_batch(orbits, gps, {0.0, 1800.0}, 10.0));
    for (double t = 5.5; t < 1800.0; t += 97.0) {
        const auto snap = snapshot(std::span<const SatelliteOrbit>(orbits), gps, t, 10.0);
        for (const auto& o : orbits) {
            bool in_window = false;
            for (const auto& w : index.windows_for(o.id, 0))
                if (w.start_s + 1e-3 < t && t < w.end_s - 1e-3) in_window = true;
            bool near_edge = false;
            for (const auto& w : index.windows_for(o.id, 0))
                if (std::abs(w.start_s - t) <= 1e-3 || std::abs(w.end_s - t) <= 1e-3) near_edge = true;
            if (!near_edge) CHECK((snap.find(o.id, 0) != nullptr) == in_window);
        }
    }
}

TEST_CASE("windows CSV header") {
    std::ostringstream os;
    CoverageWindow w{7, 2, 1.5, 9.25, 42.0};
    write_windows_csv(os, std::span<const CoverageWindow>(&w, 1));
    CHECK(os.str().rfind("satellite_id,ue_id,start_s,end_s,peak_elevation_deg\n", 0) == 0);
    CHECK(os.str().find("7,2,1.5,9.25,42") != std::string::npos);
}
