#include "caas/constellation.hpp"

#include <algorithm>
#include <ostream>

#include "window_finder.hpp"

namespace caas {

const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::InvalidSpec: return "invalid spec";
        case ErrorKind::Domain: return "domain error";
        case ErrorKind::NotVisible: return "not visible";
        case ErrorKind::Ordering: return "ordering error";
        case ErrorKind::InsufficientData: return "insufficient data";
        case ErrorKind::CoverageViolation: return "coverage violation";
        case ErrorKind::Lookup: return "lookup error";
        case ErrorKind::Shape: return "shape error";
        case ErrorKind::InfeasibleSwitch: return "infeasible switch";
        case ErrorKind::NoInitialCoverage: return "no initial coverage";
        case ErrorKind::CoverageGap: return "coverage gap";
        case ErrorKind::DualInfeasible: return "dual infeasible";
        case ErrorKind::Parse: return "parse error";
        case ErrorKind::Io: return "i/o error";
    }
    return "error";
}

}  // namespace caas

namespace caas::constellation {

void OrbitalShell::validate() const {
    auto fail = [&](const std::string& what) {
        throw Error(ErrorKind::InvalidSpec, "shell " + std::to_string(shell_id) + ": " + what);
    };
    if (satellite_count <= 0) fail("satellite_count must be positive");
    if (plane_count <= 0) fail("plane_count must be positive");
    if (satellite_count % plane_count != 0) fail("satellite_count not divisible by plane_count");
    if (!(inclination_deg >= 0.0 && inclination_deg <= 180.0)) fail("inclination outside [0,180]");
    if (!(altitude_km > 0.0)) fail("altitude must be positive");
    if (phasing_factor < 0 || phasing_factor >= std::max(plane_count, 1)) {
        // A single-plane shell has no inter-plane phasing; accept the default there.
        if (!(plane_count == 1 && phasing_factor <= 1)) fail("phasing_factor outside [0, plane_count)");
    }
    if (satellite_count / plane_count >= kShellIdStride) fail("too many satellites per shell");
}

void GroundPoint::validate() const {
    if (!(latitude_deg >= -90.0 && latitude_deg <= 90.0))
        throw Error(ErrorKind::Domain, "latitude outside [-90,90]");
    if (!(longitude_deg >= -180.0 && longitude_deg <= 180.0))
        throw Error(ErrorKind::Domain, "longitude outside [-180,180]");
}

Vec3 GroundPoint::ecef() const {
    const double r = kEarthRadiusKm + altitude_km;
    const double lat = deg2rad(latitude_deg);
    const double lon = deg2rad(longitude_deg);
    return {r * std::cos(lat) * std::cos(lon), r * std::cos(lat) * std::sin(lon), r * std::sin(lat)};
}

double SatelliteOrbit::mean_motion_rad_s() const {
    return std::sqrt(kEarthMuKm3S2 / (semi_major_axis_km * semi_major_axis_km * semi_major_axis_km));
}

double SatelliteOrbit::period_s() const { return 2.0 * std::numbers::pi / mean_motion_rad_s(); }

const SnapshotEntry* CoverageSnapshot::find(SatelliteId sat, int gp) const {
    auto it = std::lower_bound(entries.begin(), entries.end(), std::pair{sat, gp},
                               [](const SnapshotEntry& e, const std::pair<SatelliteId, int>& key) {
                                   return std::pair{e.satellite_id, e.ground_point_id} < key;
                               });
    if (it == entries.end() || it->satellite_id != sat || it->ground_point_id != gp) return nullptr;
    return &*it;
}

std::vector<SatelliteOrbit> build_walker_shell(const OrbitalShell& spec) {
    spec.validate();
    const int per_plane = spec.satellites_per_plane();
    bool star = spec.inclination_deg >= kStarInclinationDeg;
    if (spec.pattern == WalkerPattern::Delta) star = false;
    if (spec.pattern == WalkerPattern::Star) star = true;
    const double raan_spread = star ? 180.0 : 360.0;
    const double raan_step = raan_spread / spec.plane_count;
    const double slot_step = 360.0 / per_plane;
    const double phase_step = spec.phasing_factor * 360.0 / spec.satellite_count;

    std::vector<SatelliteOrbit> orbits;
    orbits.reserve(static_cast<std::size_t>(spec.satellite_count));
    for (int p = 0; p < spec.plane_count; ++p) {
        for (int s = 0; s < per_plane; ++s) {
            SatelliteOrbit o;
            o.id = spec.shell_id * kShellIdStride + p * per_plane + s;
            o.shell_id = spec.shell_id;
            o.plane_index = p;
            o.slot_index = s;
            o.raan_deg = p * raan_step;
            o.initial_anomaly_deg = std::fmod(s * slot_step + p * phase_step, 360.0);
            o.inclination_deg = spec.inclination_deg;
            o.semi_major_axis_km = spec.semi_major_axis_km();
            orbits.push_back(o);
        }
    }
    return orbits;
}

std::vector<SatelliteOrbit> build_constellation(std::span<const OrbitalShell> shells) {
    std::vector<SatelliteOrbit> all;
    for (const auto& shell : shells) {
        auto orbits = build_walker_shell(shell);
        all.insert(all.end(), orbits.begin(), orbits.end());
    }
    std::sort(all.begin(), all.end(),
              [](const SatelliteOrbit& a, const SatelliteOrbit& b) { return a.id < b.id; });
    return all;
}

InertialState propagate_inertial(const SatelliteOrbit& orbit, double t_s) {
    const double a = orbit.semi_major_axis_km;
    const double n = orbit.mean_motion_rad_s();
    const double u = deg2rad(orbit.initial_anomaly_deg) + n * (t_s - orbit.epoch_s);
    const double inc = deg2rad(orbit.inclination_deg);
    const double raan = deg2rad(orbit.raan_deg);
    const double cu = std::cos(u), su = std::sin(u);
    const double ci = std::cos(inc), si = std::sin(inc);
    const double co = std::cos(raan), so = std::sin(raan);

    // Perifocal (x, y, 0) rotated by inclination about x, then by RAAN about z.
    auto rotate = [&](double x, double y) -> Vec3 {
        const double y1 = y * ci;
        const double z1 = y * si;
        return {x * co - y1 * so, x * so + y1 * co, z1};
    };
    const double v = a * n;
    return {rotate(a * cu, a * su), rotate(-v * su, v * cu)};
}

SatelliteState propagate(const SatelliteOrbit& orbit, double t_s) {
    const InertialState eci = propagate_inertial(orbit, t_s);
    const double theta = kEarthRotationRadS * t_s;
    const double c = std::cos(theta), s = std::sin(theta);
    auto to_ecef = [&](const Vec3& v) -> Vec3 { return {c * v.x + s * v.y, -s * v.x + c * v.y, v.z}; };
    const Vec3 r = to_ecef(eci.position_km);
    Vec3 v = to_ecef(eci.velocity_km_s);
    v.x += kEarthRotationRadS * r.y;
    v.y -= kEarthRotationRadS * r.x;
    return {orbit.id, t_s, r, v};
}

double elevation_deg(const Vec3& sat_ecef, const Vec3& gp_ecef) {
    const Vec3 rho = sat_ecef - gp_ecef;
    const double up = rho.dot(gp_ecef) / gp_ecef.norm();
    return rad2deg(std::asin(std::clamp(up / rho.norm(), -1.0, 1.0)));
}

double elevation_deg(const SatelliteState& state, const GroundPoint& gp) {
    return elevation_deg(state.position_km, gp.ecef());
}

double slant_range_km(const SatelliteState& state, const GroundPoint& gp) {
    return (state.position_km - gp.ecef()).norm();
}

double slant_range_at_elevation_km(double altitude_km, double elevation_deg) {
    const double r = kEarthRadiusKm;
    const double se = std::sin(deg2rad(elevation_deg));
    return std::sqrt(r * r * se * se + 2.0 * r * altitude_km + altitude_km * altitude_km) - r * se;
}

std::vector<CoverageWindow> coverage_windows(const SatelliteOrbit& orbit, const GroundPoint& gp,
                                             Horizon horizon, double mask_deg, int ground_point_id) {
    if (!(horizon.start_s < horizon.end_s))
        throw Error(ErrorKind::Domain, "coverage horizon must satisfy t0 < t1");
    if (!(mask_deg >= 0.0 && mask_deg < 90.0))
        throw Error(ErrorKind::Domain, "mask must lie in [0, 90)");
    const Vec3 g = gp.ecef();
    auto elev = [&](double t) { return elevation_deg(propagate(orbit, t).position_km, g); };
    const auto times = detail::coarse_times(horizon, kCoarseScanStepS);
    std::vector<double> samples(times.size());
    for (std::size_t k = 0; k < times.size(); ++k) samples[k] = elev(times[k]);
    return detail::find_windows(elev, times, samples, horizon, mask_deg, orbit.id, ground_point_id);
}

CoverageSnapshot snapshot(std::span<const SatelliteOrbit> orbits, std::span<const GroundPoint> gps,
                          double t_s, double mask_deg) {
    CoverageSnapshot snap;
    snap.time_s = t_s;
    if (gps.empty()) return snap;
    std::vector<Vec3> g(gps.size());
    for (std::size_t j = 0; j < gps.size(); ++j) g[j] = gps[j].ecef();
    for (const auto& orbit : orbits) {
        const Vec3 r = propagate(orbit, t_s).position_km;
        for (std::size_t j = 0; j < gps.size(); ++j) {
            const double e = elevation_deg(r, g[j]);
            if (e >= mask_deg)
                snap.entries.push_back({orbit.id, static_cast<int>(j), e, (r - g[j]).norm()});
        }
    }
    std::sort(snap.entries.begin(), snap.entries.end(), [](const auto& a, const auto& b) {
        return std::pair{a.satellite_id, a.ground_point_id} < std::pair{b.satellite_id, b.ground_point_id};
    });
    return snap;
}

CoverageSnapshot snapshot(std::span<const OrbitalShell> shells, std::span<const GroundPoint> gps,
                          double t_s, double mask_deg) {
    const auto orbits = build_constellation(shells);
    return snapshot(std::span<const SatelliteOrbit>(orbits), gps, t_s, mask_deg);
}

void write_windows_csv(std::ostream& os, std::span<const CoverageWindow> windows) {
    os << "satellite_id,ue_id,start_s,end_s,peak_elevation_deg\n";
    for (const auto& w : windows)
        os << w.satellite_id << ',' << w.ground_point_id << ',' << w.start_s << ',' << w.end_s << ','
           << w.peak_elevation_deg << '\n';
}

}  // namespace caas::constellation
