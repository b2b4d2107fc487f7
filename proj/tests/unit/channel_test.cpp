#include <sstream>
#include <vector>

#include "caas/channel.hpp"
#include "doctest.h"

using namespace caas;
using namespace caas::channel;

namespace {

// Satellite straight above gp at the given altitude, moving east.
SatelliteState overhead(const GroundPoint& gp, double altitude_km) {
    SatelliteState s;
    const Vec3 up = gp.ecef().normalized();
    s.position_km = gp.ecef() + up * altitude_km;
    s.velocity_km_s = Vec3{0.0, 0.0, 1.0}.cross(up).normalized() * 7.0;
    return s;
}

}  // namespace

TEST_CASE("link budget spot values") {
    // 32.45 + 20 log10(550) + 20 log10(2000) by hand.
    CHECK(free_space_path_loss_db(550.0, 2e9) == doctest::Approx(153.2778).epsilon(1e-6));
    CHECK(std::abs(free_space_path_loss_db(550.0, 2e9) - 153.28) <= 0.01);
    // k T B = 1.380649e-23 * 290 * 30e6 W = 1.2012e-13 W = -99.20 dBm.
    LinkParams p;
    CHECK(std::abs(noise_power_dbm(p) - (-99.20)) <= 0.1);
    CHECK(noise_power_w(p) == doctest::Approx(1.380649e-23 * 290.0 * 30e6));
    // 34 dBW + 30 dBi + 0 dBi - 153.28 dB = -59.28 dBm; SNR = 39.92 dB.
    const GroundPoint gp{0.0, 0.0, 0.0};
    const auto s = csi_sample(overhead(gp, 550.0), gp, gp, p, 0.0);
    const double snr = p.tx_power_dbw + 30.0 + s.channel_gain_db - noise_power_dbm(p);
    CHECK(std::abs(snr - 39.9) <= 0.1);
    CHECK(s.path_loss_db == doctest::Approx(free_space_path_loss_db(550.0, 2e9)));
    CHECK(sinr_db(p.tx_power_dbw + 30.0 + s.channel_gain_db, {}, p) == doctest::Approx(snr));
}

TEST_CASE("path loss grows 6 dB per distance doubling") {
    for (double d : {300.0, 800.0, 2000.0})
        CHECK(free_space_path_loss_db(2.0 * d, 2e9) - free_space_path_loss_db(d, 2e9) ==
              doctest::Approx(20.0 * std::log10(2.0)));
    CHECK_THROWS_AS(free_space_path_loss_db(0.0, 2e9), Error);
    CHECK_THROWS_AS(free_space_path_loss_db(10.0, -1.0), Error);
}

TEST_CASE("beam pattern: boresight, 3 dB edge, sidelobe floor, monotone") {
    LinkParams p;
    CHECK(beam_gain_dbi(0.0, p) == doctest::Approx(30.0));
    CHECK(beam_gain_dbi(2.0, p) == doctest::Approx(27.0));
    CHECK(beam_gain_dbi(45.0, p) == doctest::Approx(0.0));
    double prev = beam_gain_dbi(0.0, p);
    for (double a = 0.25; a < 30.0; a += 0.25) {
        const double g = beam_gain_dbi(a, p);
        CHECK(g <= prev);
        CHECK(g >= 0.0);
        prev = g;
    }
}

TEST_CASE("SINR with interferers and rate cap") {
    LinkParams p;
    const double n = noise_power_dbm(p);
    // Interferer equal to noise halves the SINR (-3.01 dB).
    const std::vector<double> one{n};
    CHECK(sinr_db(n + 10.0, one, p) == doctest::Approx(10.0 - 10.0 * std::log10(2.0)));
    CHECK(achievable_rate_bps(0.0, p) == doctest::Approx(30e6));
    CHECK(achievable_rate_bps(60.0, p) == doctest::Approx(30e6 * 7.8));
    CHECK(achievable_rate_bps(-std::numeric_limits<double>::infinity(), p) == 0.0);
    CHECK(achievable_rate_linear_bps(0.0, p) == 0.0);
    double prev = 0.0;
    for (double s = -20.0; s < 40.0; s += 0.5) {
        const double r = achievable_rate_bps(s, p);
        CHECK(r >= prev);
        CHECK(r <= 30e6 * 7.8 + 1e-6);
        prev = r;
    }
}

TEST_CASE("doppler sign follows the range rate") {
    const GroundPoint gp{0.0, 0.0, 0.0};
    auto s = overhead(gp, 550.0);
    // Displace the satellite westwards: moving east, it approaches.
    const Vec3 east = Vec3{0.0, 0.0, 1.0}.cross(gp.ecef().normalized()).normalized();
    s.position_km = s.position_km - east * 500.0;
    CHECK(doppler_shift_hz(s, gp, 2e9) > 0.0);
    s.position_km = s.position_km + east * 1000.0;
    CHECK(doppler_shift_hz(s, gp, 2e9) < 0.0);
    // Overhead the range rate is zero.
    CHECK(std::abs(doppler_shift_hz(overhead(gp, 550.0), gp, 2e9)) < 1e-6);
}

TEST_CASE("csi below the horizon is rejected") {
    const GroundPoint gp{0.0, 0.0, 0.0};
    SatelliteState s;
    s.position_km = gp.ecef() * -1.0;
    try {
        csi_sample(s, gp, gp, LinkParams{}, 0.0);
        FAIL("expected NotVisible");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::NotVisible);
    }
}

TEST_CASE("link params validation") {
    LinkParams p;
    CHECK_NOTHROW(p.validate());
    p.bandwidth_hz = 0.0;
    CHECK_THROWS_AS(p.validate(), Error);
    p = LinkParams{};
    p.excess_loss_db = -1.0;
    CHECK_THROWS_AS(p.validate(), Error);
}

TEST_CASE("csi CSV row layout") {
    std::ostringstream os;
    write_csi_csv_header(os);
    write_csi_csv_row(os, {1.0, 5, 3, -120.5, 150.25, 100.0});
    CHECK(os.str() == "time_s,sat_id,ue_id,gain_db,path_loss_db,doppler_hz\n1,5,3,-120.5,150.25,100\n");
}
