#include "caas/control.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace caas::control {

void Area::validate() const {
    if (!(lat_min_deg >= -90.0 && lat_max_deg <= 90.0 && lat_min_deg < lat_max_deg))
        throw Error(ErrorKind::Domain, "area latitude bounds invalid");
    if (!(lon_min_deg >= -180.0 && lon_max_deg <= 180.0 && lon_min_deg < lon_max_deg))
        throw Error(ErrorKind::Domain, "area longitude bounds invalid");
}

const char* to_string(Connectivity c) { return c == Connectivity::Dual ? "dual" : "single"; }
const char* to_string(Preference p) {
    return p == Preference::LatencySensitive ? "latency-sensitive" : "coverage-stable";
}

namespace {

struct Cell {
    Area bounds;
    bool north_closed;
    bool east_closed;
    int depth;
};

bool in_cell(const Cell& c, const GroundPoint& p) {
    const bool lat_ok = p.latitude_deg >= c.bounds.lat_min_deg &&
                        (p.latitude_deg < c.bounds.lat_max_deg ||
                         (c.north_closed && p.latitude_deg == c.bounds.lat_max_deg));
    const bool lon_ok = p.longitude_deg >= c.bounds.lon_min_deg &&
                        (p.longitude_deg < c.bounds.lon_max_deg ||
                         (c.east_closed && p.longitude_deg == c.bounds.lon_max_deg));
    return lat_ok && lon_ok;
}

void split(const Cell& cell, std::vector<UeId> ues, std::span<const GroundPoint> pos, int max_ues,
           int max_depth, std::vector<Region>& out) {
    if (static_cast<int>(ues.size()) <= max_ues || cell.depth >= max_depth) {
        Region r;
        r.id = static_cast<int>(out.size());
        r.bounds = cell.bounds;
        r.ue_ids = std::move(ues);
        r.controller_id = r.id;
        r.depth = cell.depth;
        out.push_back(std::move(r));
        return;
    }
    const auto& b = cell.bounds;
    const double lat_mid = 0.5 * (b.lat_min_deg + b.lat_max_deg);
    const double lon_mid = 0.5 * (b.lon_min_deg + b.lon_max_deg);
    // SW, SE, NW, NE
    const Cell kids[4] = {
        {{b.lat_min_deg, lat_mid, b.lon_min_deg, lon_mid}, false, false, cell.depth + 1},
        {{b.lat_min_deg, lat_mid, lon_mid, b.lon_max_deg}, false, cell.east_closed, cell.depth + 1},
        {{lat_mid, b.lat_max_deg, b.lon_min_deg, lon_mid}, cell.north_closed, false, cell.depth + 1},
        {{lat_mid, b.lat_max_deg, lon_mid, b.lon_max_deg}, cell.north_closed, cell.east_closed, cell.depth + 1},
    };
    for (const auto& kid : kids) {
        std::vector<UeId> mine;
        for (UeId u : ues)
            if (in_cell(kid, pos[static_cast<std::size_t>(u)])) mine.push_back(u);
        split(kid, std::move(mine), pos, max_ues, max_depth, out);
    }
}

}  // namespace

std::vector<Region> divide_regions(const Area& area, std::span<const GroundPoint> ue_positions,
                                   int max_ues_per_region, int max_depth) {
    area.validate();
    if (max_ues_per_region < 1) throw Error(ErrorKind::Domain, "max_ues_per_region must be >= 1");
    const Cell root{area, true, true, 0};
    std::vector<UeId> ues;
    for (std::size_t i = 0; i < ue_positions.size(); ++i)
        if (in_cell(root, ue_positions[i])) ues.push_back(static_cast<UeId>(i));
    std::vector<Region> out;
    split(root, std::move(ues), ue_positions, max_ues_per_region, max_depth, out);
    return out;
}

bool SatellitePool::is_high_shell(SatelliteId sat) const {
    if (shell_altitude_km.size() < 2) return false;
    double mean = 0.0;
    for (const auto& [id, alt] : shell_altitude_km) mean += alt;
    mean /= static_cast<double>(shell_altitude_km.size());
    auto it = shell_altitude_km.find(constellation::shell_of(sat));
    return it != shell_altitude_km.end() && it->second > mean;
}

bool SatellitePool::is_low_shell(SatelliteId sat) const {
    if (shell_altitude_km.size() < 2) return false;
    double mean = 0.0;
    for (const auto& [id, alt] : shell_altitude_km) mean += alt;
    mean /= static_cast<double>(shell_altitude_km.size());
    auto it = shell_altitude_km.find(constellation::shell_of(sat));
    return it != shell_altitude_km.end() && it->second < mean;
}

bool SubConstellation::contains(SatelliteId sat) const {
    return std::find(satellite_ids.begin(), satellite_ids.end(), sat) != satellite_ids.end();
}

int SubConstellation::slice_count() const {
    return static_cast<int>(std::ceil((valid_to_s - valid_from_s) / slice_s - 1e-9));
}

SubConstellation form_sc(const Region& region, const SatellitePool& pool,
                         std::span<const UeRequirement> requirements, Horizon validity,
                         const ScOptions& options, std::span<const SatelliteId> retained) {
    if (!pool.coverage) throw Error(ErrorKind::Domain, "satellite pool has no coverage index");
    if (!(validity.start_s < validity.end_s)) throw Error(ErrorKind::Domain, "SC validity must be non-empty");
    if (options.capacity_per_satellite < 1) throw Error(ErrorKind::Domain, "capacity must be >= 1");

    SubConstellation sc;
    sc.region_id = region.id;
    sc.valid_from_s = validity.start_s;
    sc.valid_to_s = validity.end_s;
    sc.capacity_per_satellite = options.capacity_per_satellite;
    sc.slice_s = options.slice_s;
    const int slices = sc.slice_count();

    auto requirement_of = [&](UeId u) -> const UeRequirement& {
        for (const auto& r : requirements)
            if (r.ue_id == u) return r;
        throw Error(ErrorKind::Lookup, "no requirement for UE " + std::to_string(u));
    };

    struct Point {
        UeId ue;
        int slice;
        int need;
        Preference pref;
    };
    std::vector<Point> points;
    for (UeId u : region.ue_ids) {
        const auto& req = requirement_of(u);
        for (int k = 0; k < slices; ++k) points.push_back({u, k, static_cast<int>(req.connectivity), req.preference});
    }

    // Candidate satellite -> indices of demand points it covers for a whole slice.
    std::set<SatelliteId> allowed(pool.satellites.begin(), pool.satellites.end());
    std::map<SatelliteId, std::vector<std::size_t>> covers;
    // Coverage left past the validity end, per (satellite, point): the mobility tie-break.
    std::map<std::pair<SatelliteId, std::size_t>, double> beyond;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto& pt = points[i];
        const double a = validity.start_s + pt.slice * options.slice_s;
        const double b = std::min(a + options.slice_s, validity.end_s);
        for (SatelliteId sat : pool.coverage->satellites_covering(pt.ue)) {
            if (!allowed.empty() && !allowed.count(sat)) continue;
            for (const auto& w : pool.coverage->windows_for(sat, pt.ue))
                if (w.start_s <= a && w.end_s >= b) {
                    covers[sat].push_back(i);
                    beyond[{sat, i}] = std::max(0.0, w.end_s - validity.end_s);
                    break;
                }
        }
    }
    auto weight_of = [&](SatelliteId sat, const Point& pt) {
        if (pt.pref == Preference::CoverageStable && pool.is_high_shell(sat)) return options.altitude_preference;
        if (pt.pref == Preference::LatencySensitive && pool.is_low_shell(sat)) return options.altitude_preference;
        return 1.0;
    };
    const std::set<SatelliteId> keep(retained.begin(), retained.end());

    // Points a satellite would take: per slice, the heaviest open points up to capacity.
    auto pick = [&](SatelliteId sat, double* score, double* stay) {
        std::vector<std::vector<std::pair<double, std::size_t>>> per_slice(static_cast<std::size_t>(slices));
        for (std::size_t i : covers[sat])
            if (points[i].need > 0)
                per_slice[static_cast<std::size_t>(points[i].slice)].push_back({weight_of(sat, points[i]), i});
        std::vector<std::size_t> chosen;
        double s = 0.0, st = 0.0;
        for (auto& v : per_slice) {
            std::sort(v.begin(), v.end(), [&](const auto& x, const auto& y) {
                if (x.first != y.first) return x.first > y.first;
                return points[x.second].ue < points[y.second].ue;
            });
            if (static_cast<int>(v.size()) > options.capacity_per_satellite)
                v.resize(static_cast<std::size_t>(options.capacity_per_satellite));
            for (const auto& [w, i] : v) {
                s += w;
                st += beyond[{sat, i}];
                chosen.push_back(i);
            }
        }
        *score = s;
        *stay = st;
        return chosen;
    };

    std::set<SatelliteId> used;
    for (;;) {
        SatelliteId best = 0;
        double best_score = 0.0, best_stay = 0.0;
        bool found = false;
        for (const auto& [sat, idx] : covers) {
            if (used.count(sat)) continue;
            double score = 0.0, stay = 0.0;
            pick(sat, &score, &stay);
            // Retained members stay while they cover any region UE for a whole
            // slice, ahead of every newcomer; newcomers must add open demand.
            const bool kept = keep.count(sat) > 0, best_kept = found && keep.count(best) > 0;
            if (score <= 0.0 && !kept) continue;
            const bool better = !found || (kept && !best_kept) ||
                                (kept == best_kept && (score > best_score || (score == best_score && stay > best_stay)));
            if (better) {
                best = sat;
                best_score = score;
                best_stay = stay;
                found = true;
            }
        }
        if (!found) break;
        double score = 0.0, stay = 0.0;
        for (std::size_t i : pick(best, &score, &stay)) {
            --points[i].need;
            sc.assignments.push_back({points[i].ue, points[i].slice, best});
        }
        used.insert(best);
        sc.satellite_ids.push_back(best);
    }
    for (const auto& pt : points)
        if (pt.need > 0) sc.uncovered.push_back({pt.ue, pt.slice});
    return sc;
}

SubConstellation reconfigure_sc(const SubConstellation& sc, double t_s, const Region& region,
                                const SatellitePool& pool, std::span<const UeRequirement> requirements,
                                const ScOptions& options) {
    if (t_s < sc.valid_from_s) throw Error(ErrorKind::Ordering, "reconfiguration before SC validity start");
    return form_sc(region, pool, requirements, {t_s, t_s + options.validity_s}, options, sc.satellite_ids);
}

}  // namespace caas::control
