#pragma once

#include <map>
#include <span>
#include <vector>

#include "caas/visibility_kernels.hpp"

namespace caas::control {

using constellation::CoverageIndex;
using constellation::GroundPoint;
using constellation::Horizon;

struct Area {
    double lat_min_deg = 0.0;
    double lat_max_deg = 0.0;
    double lon_min_deg = 0.0;
    double lon_max_deg = 0.0;

    void validate() const;
    double span_product() const { return (lat_max_deg - lat_min_deg) * (lon_max_deg - lon_min_deg); }
};

struct Region {
    int id = 0;
    Area bounds;
    std::vector<UeId> ue_ids;
    int controller_id = 0;
    int depth = 0;
};

inline constexpr int kDefaultMaxUesPerRegion = 50;
inline constexpr int kDefaultMaxDepth = 6;

// Quadtree leaves. Cells are half-open (south and west edges inclusive); the
// outer north and east edges of the area belong to the area. UE ids are
// indices into ue_positions; UEs outside the area are ignored.
std::vector<Region> divide_regions(const Area& area, std::span<const GroundPoint> ue_positions,
                                   int max_ues_per_region = kDefaultMaxUesPerRegion,
                                   int max_depth = kDefaultMaxDepth);

enum class Connectivity { Single = 1, Dual = 2 };
enum class Preference { LatencySensitive, CoverageStable };

const char* to_string(Connectivity c);
const char* to_string(Preference p);

struct UeRequirement {
    UeId ue_id = 0;
    double demand_bps = 0.0;
    double min_rate_bps = 0.0;
    Connectivity connectivity = Connectivity::Single;
    Preference preference = Preference::CoverageStable;
};

struct ScOptions {
    double slice_s = 10.0;
    double validity_s = 60.0;
    int capacity_per_satellite = 30;
    double altitude_preference = 1.5;
};

// Satellites available to every controller, with windows already computed
// against the scenario mask (ground_point_id = UeId).
struct SatellitePool {
    const CoverageIndex* coverage = nullptr;
    std::map<int, double> shell_altitude_km;  // shell_id -> altitude
    std::vector<SatelliteId> satellites;      // empty: every satellite with a window

    bool is_high_shell(SatelliteId sat) const;
    bool is_low_shell(SatelliteId sat) const;
};

struct SliceAssignment {
    UeId ue_id = 0;
    int slice = 0;
    SatelliteId satellite_id = 0;
};

struct SubConstellation {
    int region_id = 0;
    std::vector<SatelliteId> satellite_ids;  // in selection order
    double valid_from_s = 0.0;
    double valid_to_s = 0.0;
    int capacity_per_satellite = 0;
    double slice_s = 10.0;

    std::vector<SliceAssignment> assignments;
    std::vector<std::pair<UeId, int>> uncovered;  // (ue, slice) demand points left short

    bool partial() const { return !uncovered.empty(); }
    int uncovered_demand_points() const { return static_cast<int>(uncovered.size()); }
    bool contains(SatelliteId sat) const;
    int slice_count() const;
};

// Greedy weighted set cover over (UE, time slice) demand points. Members of
// `retained` are kept, ahead of any newcomer, while they cover some region UE
// for a whole slice; newcomers join only to cover open demand. Score ties go
// to the satellite whose taken windows run furthest past the validity end,
// then to lower ids. Never throws on shortfall: the
// remaining demand is reported in SubConstellation::uncovered.
SubConstellation form_sc(const Region& region, const SatellitePool& pool,
                         std::span<const UeRequirement> requirements, Horizon validity,
                         const ScOptions& options = {}, std::span<const SatelliteId> retained = {});

SubConstellation reconfigure_sc(const SubConstellation& sc, double t_s, const Region& region,
                                const SatellitePool& pool, std::span<const UeRequirement> requirements,
                                const ScOptions& options = {});

}  // namespace caas::control
