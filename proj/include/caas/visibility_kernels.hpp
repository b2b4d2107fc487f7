#pragma once

// Batch visibility kernels over (satellite, ground point) pairs. Each kernel has
// an OpenMP version and a serial reference; both return identical results.

#include <span>
#include <vector>

#include "caas/constellation.hpp"

namespace caas::constellation {

// Windows for every (orbit, gp) pair, sorted by (satellite_id, ground_point_id, start).
// ground_point_id is the index into gps.
std::vector<CoverageWindow> coverage_windows_batch(std::span<const SatelliteOrbit> orbits,
                                                   std::span<const GroundPoint> gps, Horizon horizon,
                                                   double mask_deg);
std::vector<CoverageWindow> coverage_windows_batch_serial(std::span<const SatelliteOrbit> orbits,
                                                          std::span<const GroundPoint> gps,
                                                          Horizon horizon, double mask_deg);

CoverageSnapshot snapshot_parallel(std::span<const SatelliteOrbit> orbits,
                                   std::span<const GroundPoint> gps, double t_s, double mask_deg);

// Earth-fixed states of all orbits at t.
std::vector<SatelliteState> propagate_all(std::span<const SatelliteOrbit> orbits, double t_s);

// Windows grouped for lookup by (satellite, ground point).
class CoverageIndex {
public:
    CoverageIndex() = default;
    explicit CoverageIndex(std::vector<CoverageWindow> windows);

    std::span<const CoverageWindow> all() const { return windows_; }
    std::span<const CoverageWindow> windows_for(SatelliteId sat, int gp) const;
    // All windows of one ground point, sorted by (start, satellite_id).
    std::vector<CoverageWindow> windows_of_ground_point(int gp) const;
    // Satellites with at least one window for gp.
    std::vector<SatelliteId> satellites_covering(int gp) const;
    // True if some window of (sat, gp) contains [t0, t1].
    bool covers_interval(SatelliteId sat, int gp, double t0, double t1) const;

private:
    std::vector<CoverageWindow> windows_;
};

}  // namespace caas::constellation
