#include "caas/visibility_kernels.hpp"

#include <algorithm>

#include "window_finder.hpp"

namespace caas::constellation {

namespace {

bool window_less(const CoverageWindow& a, const CoverageWindow& b) {
    if (a.satellite_id != b.satellite_id) return a.satellite_id < b.satellite_id;
    if (a.ground_point_id != b.ground_point_id) return a.ground_point_id < b.ground_point_id;
    return a.start_s < b.start_s;
}

void check_inputs(Horizon horizon, double mask_deg) {
    if (!(horizon.start_s < horizon.end_s))
        throw Error(ErrorKind::Domain, "coverage horizon must satisfy t0 < t1");
    if (!(mask_deg >= 0.0 && mask_deg < 90.0))
        throw Error(ErrorKind::Domain, "mask must lie in [0, 90)");
}

// All windows of one satellite against every ground point.
std::vector<CoverageWindow> satellite_windows(const SatelliteOrbit& orbit, std::span<const Vec3> g,
                                              std::span<const double> times, Horizon horizon,
                                              double mask_deg) {
    std::vector<Vec3> pos(times.size());
    for (std::size_t k = 0; k < times.size(); ++k) pos[k] = propagate(orbit, times[k]).position_km;

    std::vector<CoverageWindow> out;
    std::vector<double> samples(times.size());
    for (std::size_t j = 0; j < g.size(); ++j) {
        double best = -90.0;
        for (std::size_t k = 0; k < times.size(); ++k) {
            samples[k] = elevation_deg(pos[k], g[j]);
            best = std::max(best, samples[k]);
        }
        if (best <= mask_deg - detail::kGrazingMarginDeg) continue;
        const Vec3 gj = g[j];
        auto elev = [&](double t) { return elevation_deg(propagate(orbit, t).position_km, gj); };
        auto ws = detail::find_windows(elev, times, samples, horizon, mask_deg, orbit.id,
                                       static_cast<int>(j));
        out.insert(out.end(), ws.begin(), ws.end());
    }
    return out;
}

std::vector<Vec3> ecef_all(std::span<const GroundPoint> gps) {
    std::vector<Vec3> g(gps.size());
    for (std::size_t j = 0; j < gps.size(); ++j) g[j] = gps[j].ecef();
    return g;
}

}  // namespace

std::vector<CoverageWindow> coverage_windows_batch(std::span<const SatelliteOrbit> orbits,
                                                   std::span<const GroundPoint> gps, Horizon horizon,
                                                   double mask_deg) {
    check_inputs(horizon, mask_deg);
    const auto g = ecef_all(gps);
    const auto times = detail::coarse_times(horizon, kCoarseScanStepS);
    std::vector<std::vector<CoverageWindow>> per_sat(orbits.size());
    const long n = static_cast<long>(orbits.size());

#pragma omp parallel for schedule(dynamic, 16)
    for (long i = 0; i < n; ++i)
        per_sat[static_cast<std::size_t>(i)] =
            satellite_windows(orbits[static_cast<std::size_t>(i)], g, times, horizon, mask_deg);

    std::vector<CoverageWindow> all;
    for (auto& ws : per_sat) all.insert(all.end(), ws.begin(), ws.end());
    std::stable_sort(all.begin(), all.end(), window_less);
    return all;
}

std::vector<CoverageWindow> coverage_windows_batch_serial(std::span<const SatelliteOrbit> orbits,
                                                          std::span<const GroundPoint> gps,
                                                          Horizon horizon, double mask_deg) {
    check_inputs(horizon, mask_deg);
    std::vector<CoverageWindow> all;
    for (const auto& orbit : orbits) {
        for (std::size_t j = 0; j < gps.size(); ++j) {
            auto ws = coverage_windows(orbit, gps[j], horizon, mask_deg, static_cast<int>(j));
            all.insert(all.end(), ws.begin(), ws.end());
        }
    }
    std::stable_sort(all.begin(), all.end(), window_less);
    return all;
}

std::vector<SatelliteState> propagate_all(std::span<const SatelliteOrbit> orbits, double t_s) {
    std::vector<SatelliteState> states(orbits.size());
    const long n = static_cast<long>(orbits.size());
#pragma omp parallel for schedule(static)
    for (long i = 0; i < n; ++i)
        states[static_cast<std::size_t>(i)] = propagate(orbits[static_cast<std::size_t>(i)], t_s);
    return states;
}

CoverageSnapshot snapshot_parallel(std::span<const SatelliteOrbit> orbits,
                                   std::span<const GroundPoint> gps, double t_s, double mask_deg) {
    CoverageSnapshot snap;
    snap.time_s = t_s;
    if (gps.empty()) return snap;
    const auto g = ecef_all(gps);
    std::vector<std::vector<SnapshotEntry>> per_sat(orbits.size());
    const long n = static_cast<long>(orbits.size());

#pragma omp parallel for schedule(static)
    for (long i = 0; i < n; ++i) {
        const auto& orbit = orbits[static_cast<std::size_t>(i)];
        const Vec3 r = propagate(orbit, t_s).position_km;
        auto& out = per_sat[static_cast<std::size_t>(i)];
        for (std::size_t j = 0; j < g.size(); ++j) {
            const double e = elevation_deg(r, g[j]);
            if (e >= mask_deg) out.push_back({orbit.id, static_cast<int>(j), e, (r - g[j]).norm()});
        }
    }
    for (auto& es : per_sat) snap.entries.insert(snap.entries.end(), es.begin(), es.end());
    std::sort(snap.entries.begin(), snap.entries.end(), [](const auto& a, const auto& b) {
        return std::pair{a.satellite_id, a.ground_point_id} < std::pair{b.satellite_id, b.ground_point_id};
    });
    return snap;
}

CoverageIndex::CoverageIndex(std::vector<CoverageWindow> windows) : windows_(std::move(windows)) {
    std::stable_sort(windows_.begin(), windows_.end(), window_less);
}

std::span<const CoverageWindow> CoverageIndex::windows_for(SatelliteId sat, int gp) const {
    auto lo = std::lower_bound(windows_.begin(), windows_.end(), std::pair{sat, gp},
                               [](const CoverageWindow& w, const std::pair<SatelliteId, int>& k) {
                                   return std::pair{w.satellite_id, w.ground_point_id} < k;
                               });
    auto hi = lo;
    while (hi != windows_.end() && hi->satellite_id == sat && hi->ground_point_id == gp) ++hi;
    return {lo, hi};
}

std::vector<CoverageWindow> CoverageIndex::windows_of_ground_point(int gp) const {
    std::vector<CoverageWindow> out;
    for (const auto& w : windows_)
        if (w.ground_point_id == gp) out.push_back(w);
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        return std::pair{a.start_s, a.satellite_id} < std::pair{b.start_s, b.satellite_id};
    });
    return out;
}

std::vector<SatelliteId> CoverageIndex::satellites_covering(int gp) const {
    std::vector<SatelliteId> out;
    for (const auto& w : windows_)
        if (w.ground_point_id == gp && (out.empty() || out.back() != w.satellite_id))
            out.push_back(w.satellite_id);
    return out;
}

bool CoverageIndex::covers_interval(SatelliteId sat, int gp, double t0, double t1) const {
    for (const auto& w : windows_for(sat, gp))
        if (w.start_s <= t0 && w.end_s >= t1) return true;
    return false;
}

}  // namespace caas::constellation
