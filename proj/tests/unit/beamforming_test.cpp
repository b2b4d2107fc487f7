#include <random>

#include "caas/beamforming.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace caas;
using namespace caas::beamforming;

namespace {

// Random matrix: `sats` satellites, each with 1..3 beams, one serving column per UE.
InterferenceMatrix random_matrix(std::mt19937_64& rng, int sats, double noise) {
    std::uniform_int_distribution<int> beams(1, 3);
    std::uniform_real_distribution<double> snr_db(-5.0, 35.0), leak_db(-40.0, -10.0);
    InterferenceMatrix m;
    for (int s = 0; s < sats; ++s) {
        const int n = beams(rng);
        for (int k = 0; k < n; ++k) {
            const UeId u = static_cast<UeId>(m.ue_ids.size());
            m.ue_ids.push_back(u);
            m.tx.push_back({100 + s, u, {}});
        }
    }
    const std::size_t n = m.ue_ids.size();
    m.coefficients.assign(n * n, 0.0);
    m.serving.resize(n);
    const double budget = db_to_linear(34.0);
    for (std::size_t u = 0; u < n; ++u) {
        m.serving[u] = {u};
        const double direct = db_to_linear(snr_db(rng)) * noise / budget;
        for (std::size_t b = 0; b < n; ++b)
            m.at(u, b) = b == u ? direct : direct * db_to_linear(leak_db(rng));
    }
    return m;
}

std::map<SatelliteId, double> budgets_of(const InterferenceMatrix& m) {
    std::map<SatelliteId, double> out;
    for (const auto& t : m.tx) out[t.satellite_id] = db_to_linear(34.0);
    return out;
}

}  // namespace

TEST_CASE("power grid: 32 logarithmic points plus zero, ascending to the budget") {
    const auto g = power_grid(100.0, {});
    REQUIRE(g.size() == 33);
    CHECK(g.front() == 0.0);
    CHECK(g.back() == 100.0);
    CHECK(g[1] == doctest::Approx(100.0e-6));
    for (std::size_t i = 2; i < g.size(); ++i) CHECK(g[i] / g[i - 1] == doctest::Approx(std::pow(10.0, 6.0 / 31.0)));
}

TEST_CASE("equal split divides each budget over its beams") {
    InterferenceMatrix m;
    m.ue_ids = {0, 1, 2};
    m.tx = {{1, 0, {}}, {1, 1, {}}, {2, 2, {}}};
    m.coefficients.assign(9, 1e-15);
    m.serving = {{0}, {1}, {2}};
    const auto a = equal_split(m, {{1, 100.0}, {2, 60.0}});
    CHECK(a.power_w == std::vector<double>{50.0, 50.0, 60.0});
    CHECK_THROWS_AS(equal_split(m, {{1, 100.0}}), Error);
}

TEST_CASE("2x2 symmetric cross-interference is within 1% of the exhaustive grid optimum") {
    const channel::LinkParams params;
    const double noise = channel::noise_power_w(params);
    const double budget = db_to_linear(34.0);
    AllocationOptions opt;
    for (double snr_db : {0.0, 10.0, 25.0, 40.0}) {
        const double g = db_to_linear(snr_db) * noise / budget;
        InterferenceMatrix m;
        m.ue_ids = {0, 1};
        m.tx = {{1, 0, {}}, {2, 1, {}}};
        m.coefficients = {g, g, g, g};
        m.serving = {{0}, {1}};
        const auto res = allocate_power(m, {{1, budget}, {2, budget}}, {}, params, opt);
        const double gains[2][2] = {{g, g}, {g, g}};
        const double best = oracle::grid_optimum_2x2(gains, budget, noise, params.bandwidth_hz,
                                                     params.spectral_efficiency_cap, opt);
        const double got = utility(evaluate_rates(res.allocation, m, params), {}, opt.epsilon_bps);
        CHECK(got == doctest::Approx(res.sweep_utility.back()));
        CHECK(got >= best - 0.01 * std::abs(best));
    }
}

TEST_CASE("allocation properties on random matrices") {
    const channel::LinkParams params;
    const double noise = channel::noise_power_w(params);
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 40; ++trial) {
        const auto m = random_matrix(rng, 1 + trial % 5, noise);
        const auto budgets = budgets_of(m);
        std::vector<double> demands;
        std::uniform_real_distribution<double> d(5e6, 40e6);
        if (trial % 2)
            for (std::size_t u = 0; u < m.rows(); ++u) demands.push_back(d(rng));

        bool feasible = true;
        auto observer = [&](int, const PowerAllocation& a) {
            std::map<SatelliteId, double> used;
            for (std::size_t b = 0; b < m.cols(); ++b) {
                if (!(a.power_w[b] >= 0.0) || !std::isfinite(a.power_w[b])) feasible = false;
                used[m.tx[b].satellite_id] += a.power_w[b];
            }
            for (const auto& [sat, p] : used)
                if (p > budgets.at(sat) * (1.0 + 1e-9)) feasible = false;
        };
        const auto res = allocate_power(m, budgets, demands, params, {}, observer);
        CHECK(feasible);
        REQUIRE(res.sweep_utility.size() == static_cast<std::size_t>(res.sweeps) + 1);
        for (std::size_t k = 1; k < res.sweep_utility.size(); ++k)
            CHECK(res.sweep_utility[k] >= res.sweep_utility[k - 1] - 1e-9 * std::abs(res.sweep_utility[k - 1]));
        CHECK(res.sweep_utility.back() >= res.sweep_utility.front() - 1e-9);
        CHECK(res.sweeps <= 100);

        const auto again = allocate_power(m, budgets, demands, params);
        CHECK(again.allocation.power_w == res.allocation.power_w);
    }
}

TEST_CASE("allocation errors and trivial cases") {
    const channel::LinkParams params;
    InterferenceMatrix empty;
    CHECK(allocate_power(empty, {}, {}, params).allocation.power_w.empty());

    InterferenceMatrix m;
    m.ue_ids = {0};
    m.tx = {{1, 0, {}}};
    m.coefficients = {1e-12};
    m.serving = {{0}};
    CHECK_THROWS_AS(allocate_power(m, {{1, 0.0}}, {}, params), Error);
    CHECK_THROWS_AS(allocate_power(m, {{1, 10.0}}, std::vector<double>{1.0, 2.0}, params), Error);
    // A lone beam keeps the full budget: more power only helps.
    CHECK(allocate_power(m, {{1, 10.0}}, {}, params).allocation.power_w[0] == 10.0);

    m.coefficients = {1e-12, 2e-12};
    try {
        allocate_power(m, {{1, 10.0}}, {}, params);
        FAIL("expected shape error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Shape);
    }
}

TEST_CASE("point beams aim at the UE") {
    const std::map<UeId, GroundPoint> pos{{3, {1.0, 2.0, 0.0}}};
    const std::vector<Assignment> a{{3, 7}};
    const auto beams = point_beams(a, pos);
    REQUIRE(beams.size() == 1);
    CHECK(beams[0].boresight.latitude_deg == 1.0);
    CHECK(beams[0].bandwidth_share == 1.0);
    const std::vector<Assignment> unknown{{4, 7}};
    CHECK_THROWS_AS(point_beams(unknown, pos), Error);
}
