#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "caas/common.hpp"

namespace caas::constellation {

enum class WalkerPattern { Auto, Delta, Star };

// Shells with inclination at or above this build a star pattern under Auto.
inline constexpr double kStarInclinationDeg = 80.0;
inline constexpr double kDefaultMaskDeg = 10.0;
inline constexpr double kCoarseScanStepS = 1.0;
inline constexpr double kEndpointToleranceS = 1e-3;

struct OrbitalShell {
    int shell_id = 0;
    int satellite_count = 1;
    int plane_count = 1;
    double inclination_deg = 0.0;
    double altitude_km = 550.0;
    int phasing_factor = 1;
    WalkerPattern pattern = WalkerPattern::Auto;

    int satellites_per_plane() const { return satellite_count / plane_count; }
    double semi_major_axis_km() const { return kEarthRadiusKm + altitude_km; }

    // Throws ErrorKind::InvalidSpec.
    void validate() const;
};

// Satellite ids are shell_id * kShellIdStride + plane * per_plane + slot.
inline constexpr int kShellIdStride = 100000;
inline int shell_of(SatelliteId id) { return id / kShellIdStride; }

struct SatelliteOrbit {
    SatelliteId id = 0;
    int shell_id = 0;
    int plane_index = 0;
    int slot_index = 0;
    double raan_deg = 0.0;
    double initial_anomaly_deg = 0.0;
    double inclination_deg = 0.0;
    double semi_major_axis_km = kEarthRadiusKm + 550.0;
    double epoch_s = 0.0;

    double mean_motion_rad_s() const;
    double period_s() const;
};

struct SatelliteState {
    SatelliteId id = 0;
    double time_s = 0.0;
    Vec3 position_km;    // ECEF
    Vec3 velocity_km_s;  // ECEF
};

struct GroundPoint {
    double latitude_deg = 0.0;
    double longitude_deg = 0.0;
    double altitude_km = 0.0;

    void validate() const;
    Vec3 ecef() const;
};

struct Horizon {
    double start_s = 0.0;
    double end_s = 0.0;
    double length() const { return end_s - start_s; }
};

struct CoverageWindow {
    SatelliteId satellite_id = 0;
    int ground_point_id = 0;
    double start_s = 0.0;
    double end_s = 0.0;
    double peak_elevation_deg = 0.0;

    double duration() const { return end_s - start_s; }
    bool contains(double t) const { return t >= start_s && t < end_s; }
};

struct SnapshotEntry {
    SatelliteId satellite_id = 0;
    int ground_point_id = 0;
    double elevation_deg = 0.0;
    double slant_range_km = 0.0;
};

struct CoverageSnapshot {
    double time_s = 0.0;
    std::vector<SnapshotEntry> entries;  // sorted by (satellite_id, ground_point_id)

    const SnapshotEntry* find(SatelliteId sat, int gp) const;
};

std::vector<SatelliteOrbit> build_walker_shell(const OrbitalShell& spec);
std::vector<SatelliteOrbit> build_constellation(std::span<const OrbitalShell> shells);

struct InertialState {
    Vec3 position_km;
    Vec3 velocity_km_s;
};

// Earth-centred inertial frame; it coincides with the Earth-fixed frame at t = 0.
InertialState propagate_inertial(const SatelliteOrbit& orbit, double t_s);

// Earth-fixed state. Velocity is relative to the rotating Earth, so its norm
// differs from the circular speed by the Earth-rotation term.
SatelliteState propagate(const SatelliteOrbit& orbit, double t_s);

double elevation_deg(const SatelliteState& state, const GroundPoint& gp);
double elevation_deg(const Vec3& sat_ecef, const Vec3& gp_ecef);
double slant_range_km(const SatelliteState& state, const GroundPoint& gp);

// Slant range on a spherical Earth for a given altitude and elevation.
double slant_range_at_elevation_km(double altitude_km, double elevation_deg);

std::vector<CoverageWindow> coverage_windows(const SatelliteOrbit& orbit, const GroundPoint& gp,
                                             Horizon horizon, double mask_deg,
                                             int ground_point_id = 0);

CoverageSnapshot snapshot(std::span<const OrbitalShell> shells, std::span<const GroundPoint> gps,
                          double t_s, double mask_deg);
CoverageSnapshot snapshot(std::span<const SatelliteOrbit> orbits,
                          std::span<const GroundPoint> gps, double t_s, double mask_deg);

// CSV with header satellite_id,ue_id,start_s,end_s,peak_elevation_deg.
void write_windows_csv(std::ostream& os, std::span<const CoverageWindow> windows);

}  // namespace caas::constellation
