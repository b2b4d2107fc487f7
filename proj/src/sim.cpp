#include "caas/sim.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "caas/beamforming.hpp"

namespace caas::sim {

using constellation::CoverageIndex;
using constellation::CoverageSnapshot;
using constellation::CoverageWindow;
using constellation::Horizon;
using constellation::SatelliteOrbit;
using constellation::SatelliteState;
using prediction::Assignment;
using prediction::InterferenceMatrix;

namespace {

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Numerical slack on the mask when re-checking planned links at a step.
constexpr double kMaskSlackDeg = 1e-6;

}  // namespace

std::mt19937_64 rng_stream(std::uint64_t seed, std::string_view name) {
    return std::mt19937_64(splitmix64(seed ^ fnv1a(name)));
}

namespace {

double rsrp_dbw(const SatelliteState& s, const GroundPoint& gp, const channel::LinkParams& p) {
    return p.tx_power_dbw + p.sat_antenna_gain_boresight_dbi + p.ue_antenna_gain_dbi -
           channel::free_space_path_loss_db(constellation::slant_range_km(s, gp), p.carrier_frequency_hz) -
           p.excess_loss_db;
}

// Strongest covering satellite among `states` restricted to one shell.
std::optional<SatelliteId> strongest_in_shell(std::span<const SatelliteState> states, int shell,
                                              const GroundPoint& gp, double mask_deg,
                                              const channel::LinkParams& p) {
    std::optional<SatelliteId> best;
    double best_rsrp = -1e300;
    for (const auto& s : states) {
        if (constellation::shell_of(s.id) != shell) continue;
        if (constellation::elevation_deg(s, gp) < mask_deg) continue;
        const double r = rsrp_dbw(s, gp, p);
        if (r > best_rsrp) {
            best_rsrp = r;
            best = s.id;
        }
    }
    return best;
}

std::vector<UeProfile> populate(const Scenario& sc, std::span<const SatelliteOrbit> orbits) {
    std::vector<UeProfile> ues;
    if (sc.ue_count == 0) return ues;
    auto pos_rng = rng_stream(sc.seed, "ue-pos");
    auto demand_rng = rng_stream(sc.seed, "ue-demand");
    auto shell_rng = rng_stream(sc.seed, "ue-shell");
    std::uniform_real_distribution<double> lat(sc.area.lat_min_deg, sc.area.lat_max_deg);
    std::uniform_real_distribution<double> lon(sc.area.lon_min_deg, sc.area.lon_max_deg);
    std::poisson_distribution<long> demand(sc.demand_mean_bps / sc.demand_unit_bps);
    std::uniform_int_distribution<int> shell(0, static_cast<int>(sc.shells.size()) - 1);

    const auto states = constellation::propagate_all(orbits, 0.0);
    for (int i = 0; i < sc.ue_count; ++i) {
        UeProfile u;
        u.position.latitude_deg = lat(pos_rng);
        u.position.longitude_deg = lon(pos_rng);
        auto& r = u.requirement;
        r.ue_id = i;
        r.demand_bps = static_cast<double>(demand(demand_rng)) * sc.demand_unit_bps;
        r.min_rate_bps = 0.0;
        const bool heavy = r.demand_bps > sc.demand_mean_bps;
        r.connectivity = heavy ? control::Connectivity::Dual : control::Connectivity::Single;
        r.preference = heavy ? control::Preference::LatencySensitive : control::Preference::CoverageStable;
        u.default_shell = sc.shells[static_cast<std::size_t>(shell(shell_rng))].shell_id;
        u.default_satellite = strongest_in_shell(states, u.default_shell, u.position, sc.mask_deg, sc.link);
        ues.push_back(u);
    }
    return ues;
}

// Shared per-run context.
struct World {
    const Scenario& sc;
    std::vector<SatelliteOrbit> orbits;
    std::vector<UeProfile> ues;
    std::vector<GroundPoint> positions;
    std::vector<UeId> ue_ids;
    std::map<UeId, GroundPoint> position_map;
    double budget_w = 0.0;
    std::vector<double> step_times;

    explicit World(const Scenario& s) : sc(s) {
        orbits = constellation::build_constellation(sc.shells);
        ues = populate(sc, orbits);
        for (const auto& u : ues) {
            positions.push_back(u.position);
            ue_ids.push_back(u.requirement.ue_id);
            position_map[u.requirement.ue_id] = u.position;
        }
        budget_w = sc.link.tx_power_w();
        const auto n = static_cast<long>(std::ceil(sc.duration_s / sc.time_step_s - 1e-9));
        for (long k = 0; k < n; ++k) step_times.push_back(static_cast<double>(k) * sc.time_step_s);
    }

    const SatelliteOrbit& orbit(SatelliteId id) const {
        auto it = std::lower_bound(orbits.begin(), orbits.end(), id,
                                   [](const SatelliteOrbit& o, SatelliteId v) { return o.id < v; });
        if (it == orbits.end() || it->id != id) throw Error(ErrorKind::Lookup, "unknown satellite");
        return *it;
    }
};

Event signaling_event(const handover::SignalingMessage& m, int link_id) {
    Event e;
    e.t = m.time_s;
    e.ue_id = m.ue_id;
    e.link_id = link_id;
    e.from_sat = m.from_sat;
    e.to_sat = m.to_sat;
    switch (m.kind) {
        case handover::SignalKind::SequenceDistribution: e.kind = EventKind::Sequence; break;
        case handover::SignalKind::HoRequest: e.kind = EventKind::Prepare; break;
        case handover::SignalKind::HoAck: e.kind = EventKind::Ack; break;
        case handover::SignalKind::HoCommand: e.kind = EventKind::Execute; break;
        case handover::SignalKind::HoComplete: e.kind = EventKind::Complete; break;
    }
    return e;
}

// Reactive break-before-make handover: request, ack, command, completion.
void log_reactive_ho(std::vector<Event>& out, double t, UeId ue, int link, SatelliteId from, SatelliteId to,
                     double rtt_s, const HandoverKnobs& k) {
    using handover::SignalKind;
    const std::pair<double, SignalKind> seq[] = {{t, SignalKind::HoRequest},
                                                 {t + rtt_s, SignalKind::HoAck},
                                                 {t + rtt_s, SignalKind::HoCommand},
                                                 {t + rtt_s + k.execution_time_s, SignalKind::HoComplete}};
    for (const auto& [time, kind] : seq) out.push_back(signaling_event({time, kind, ue, from, to}, link));
}

// Snapshot holding only the pairs that are actually assigned.
CoverageSnapshot assigned_snapshot(double t, std::span<const Assignment> assignments,
                                   const prediction::LinkGeometry& geo) {
    CoverageSnapshot snap;
    snap.time_s = t;
    for (const auto& a : assignments) {
        const auto& s = geo.state_of(a.satellite_id);
        const auto& gp = geo.position_of(a.ue_id);
        snap.entries.push_back({a.satellite_id, a.ue_id, constellation::elevation_deg(s, gp),
                                constellation::slant_range_km(s, gp)});
    }
    std::sort(snap.entries.begin(), snap.entries.end(), [](const auto& x, const auto& y) {
        return std::tie(x.satellite_id, x.ground_point_id) < std::tie(y.satellite_id, y.ground_point_id);
    });
    return snap;
}

std::vector<GroundPoint> boresights_for(std::span<const Assignment> assignments, const World& w) {
    std::vector<GroundPoint> out;
    for (const auto& b : beamforming::point_beams(assignments, w.position_map)) out.push_back(b.boresight);
    return out;
}

void log_rates(std::vector<Event>& out, double t, const World& w, const InterferenceMatrix& m,
               const std::vector<double>& rates) {
    for (std::size_t u = 0; u < m.rows(); ++u) {
        Event e;
        e.t = t;
        e.kind = EventKind::Rate;
        e.ue_id = m.ue_ids[u];
        e.rate_bps = rates[u];
        for (std::size_t b : m.serving[u]) e.serving.push_back(m.tx[b].satellite_id);
        out.push_back(std::move(e));
    }
    (void)w;
}

double budget_ratio(const InterferenceMatrix& m, const beamforming::PowerAllocation& a, double budget_w) {
    std::map<SatelliteId, double> used;
    for (std::size_t b = 0; b < m.cols(); ++b) used[m.tx[b].satellite_id] += a.power_w[b];
    double worst = 0.0;
    for (const auto& [sat, p] : used) worst = std::max(worst, p / budget_w);
    return worst;
}

void record_allocation(RunResult& r, double t, int region, const InterferenceMatrix& m,
                       const beamforming::PowerAllocation& a) {
    for (std::size_t b = 0; b < m.cols(); ++b)
        r.allocations.push_back({t, region, m.tx[b].satellite_id, m.tx[b].beam_ue, a.power_w[b]});
}

// ============================================================
// Standalone
// ============================================================

void run_standalone(const World& w, const RunOptions& opt, RunResult& out) {
    const auto& sc = w.sc;
    const std::size_t n = w.ues.size();
    std::vector<std::optional<SatelliteId>> serving(n);
    std::vector<std::optional<SatelliteId>> ttt_candidate(n);
    std::vector<int> ttt_count(n, 0);
    for (std::size_t i = 0; i < n; ++i) serving[i] = w.ues[i].default_satellite;

    auto& ev = out.log.events;
    for (double t : w.step_times) {
        const auto states = constellation::propagate_all(w.orbits, t);
        prediction::LinkGeometry geo{states, w.ue_ids, w.positions};
        std::vector<Assignment> assignments;
        for (std::size_t i = 0; i < n; ++i) {
            const auto& ue = w.ues[i];
            const UeId id = ue.requirement.ue_id;
            // Strongest and current signal within the default shell.
            std::optional<SatelliteId> best;
            double best_rsrp = -1e300, serving_rsrp = -1e300;
            bool serving_covers = false;
            for (const auto& s : states) {
                if (constellation::shell_of(s.id) != ue.default_shell) continue;
                if (constellation::elevation_deg(s, ue.position) < sc.mask_deg) continue;
                const double r = rsrp_dbw(s, ue.position, sc.link);
                if (serving[i] && s.id == *serving[i]) {
                    serving_covers = true;
                    serving_rsrp = r;
                    continue;
                }
                if (r > best_rsrp) {
                    best_rsrp = r;
                    best = s.id;
                }
            }
            auto rtt_to = [&](SatelliteId sat) {
                return handover::round_trip_time_s(constellation::slant_range_km(geo.state_of(sat), ue.position));
            };
            if (!serving_covers) {
                if (serving[i] && best) log_reactive_ho(ev, t, id, 0, *serving[i], *best, rtt_to(*best), sc.handover);
                serving[i] = best;  // attach after outage is not a handover
                ttt_candidate[i].reset();
                ttt_count[i] = 0;
            } else if (best && best_rsrp > serving_rsrp + sc.handover.hysteresis_db) {
                if (ttt_candidate[i] == best) {
                    ++ttt_count[i];
                } else {
                    ttt_candidate[i] = best;
                    ttt_count[i] = 1;
                }
                if (ttt_count[i] >= sc.handover.time_to_trigger_steps) {
                    log_reactive_ho(ev, t, id, 0, *serving[i], *best, rtt_to(*best), sc.handover);
                    serving[i] = best;
                    ttt_candidate[i].reset();
                    ttt_count[i] = 0;
                }
            } else {
                ttt_candidate[i].reset();
                ttt_count[i] = 0;
            }
            if (serving[i]) assignments.push_back({id, *serving[i]});
        }

        const auto snap = assigned_snapshot(t, assignments, geo);
        const auto bores = boresights_for(assignments, w);
        const auto m = prediction::interference_matrix(snap, assignments, bores, sc.link, geo);
        std::map<SatelliteId, double> budgets;
        for (const auto& a : assignments) budgets[a.satellite_id] = w.budget_w;
        const auto alloc = beamforming::equal_split(m, budgets);
        out.max_budget_ratio = std::max(out.max_budget_ratio, budget_ratio(m, alloc, w.budget_w));
        if (opt.record_allocations) record_allocation(out, t, 0, m, alloc);
        if (opt.record_csi)
            for (const auto& a : assignments)
                out.csi.push_back(channel::csi_sample(geo.state_of(a.satellite_id), geo.position_of(a.ue_id),
                                                      geo.position_of(a.ue_id), sc.link, t, a.ue_id));
        log_rates(ev, t, w, m, beamforming::evaluate_rates(alloc, m, sc.link));
    }
}

// ============================================================
// CaaS
// ============================================================

struct Segment {
    Horizon span;  // [start, end) served by `path`
    handover::HoPath path;
    handover::HoProtocolState protocol;
};

struct LinkPlan {
    std::vector<Segment> segments;

    const Segment* at(double t) const {
        for (const auto& s : segments)
            if (t >= s.span.start_s && t < s.span.end_s) return &s;
        return nullptr;
    }
};

// Merged [from, to) intervals.
using Intervals = std::vector<std::pair<double, double>>;

void add_interval(Intervals& iv, double a, double b) {
    if (!iv.empty() && iv.back().second >= a)
        iv.back().second = std::max(iv.back().second, b);
    else
        iv.emplace_back(a, b);
}

std::vector<CoverageWindow> clip_windows(std::span<const CoverageWindow> windows, const Intervals& iv) {
    std::vector<CoverageWindow> out;
    for (const auto& w : windows)
        for (const auto& [a, b] : iv) {
            const double s = std::max(w.start_s, a), e = std::min(w.end_s, b);
            if (e > s) {
                auto c = w;
                c.start_s = s;
                c.end_s = e;
                out.push_back(c);
            }
        }
    return out;
}

// Satellite held by a planned link over [from, to), one entry per hop.
struct Occupancy {
    SatelliteId satellite_id = 0;
    double from_s = 0.0;
    double to_s = 0.0;
};

std::vector<Occupancy> occupancy(const LinkPlan& plan) {
    std::vector<Occupancy> out;
    for (const auto& seg : plan.segments) {
        const auto& seq = seg.path.sequence;
        for (std::size_t k = 0; k < seq.size(); ++k) {
            const double from = k == 0 ? seg.span.start_s : seq[k].switch_time_s;
            const double to = k + 1 < seq.size() ? seq[k + 1].switch_time_s : seg.span.end_s;
            if (to > from) out.push_back({seq[k].satellite_id, from, to});
        }
    }
    return out;
}

// Windows with the busy intervals of their satellite cut out.
std::vector<CoverageWindow> subtract(std::span<const CoverageWindow> windows,
                                     const std::map<SatelliteId, Intervals>& busy) {
    std::vector<CoverageWindow> out;
    for (const auto& w : windows) {
        auto it = busy.find(w.satellite_id);
        if (it == busy.end()) {
            out.push_back(w);
            continue;
        }
        double s = w.start_s;
        for (const auto& [a, b] : it->second) {
            if (b <= s || a >= w.end_s) continue;
            if (a > s) {
                auto c = w;
                c.start_s = s;
                c.end_s = a;
                out.push_back(c);
            }
            s = std::max(s, b);
        }
        if (w.end_s > s) {
            auto c = w;
            c.start_s = s;
            out.push_back(c);
        }
    }
    std::sort(out.begin(), out.end(), [](const CoverageWindow& a, const CoverageWindow& b) {
        return std::tie(a.start_s, a.satellite_id) < std::tie(b.start_s, b.satellite_id);
    });
    return out;
}

// Planned links per (satellite, time slice).
class SliceLoad {
public:
    explicit SliceLoad(double slice_s) : slice_s_(slice_s) {}

    long slice_of(double t) const { return static_cast<long>(std::floor(t / slice_s_)); }

    int at(SatelliteId sat, double t) const {
        auto it = load_.find({sat, slice_of(t)});
        return it == load_.end() ? 0 : it->second;
    }

    void add(const Occupancy& o) {
        const long last = static_cast<long>(std::ceil(o.to_s / slice_s_)) - 1;
        for (long k = slice_of(o.from_s); k <= last; ++k) ++load_[{o.satellite_id, k}];
    }

    // Satellites with at least one planned link in the slice containing t.
    std::vector<SatelliteId> active(double t) const {
        std::vector<SatelliteId> out;
        const long k = slice_of(t);
        for (const auto& [key, n] : load_)
            if (key.second == k && n > 0) out.push_back(key.first);
        return out;
    }

    // Slices at or above capacity, per satellite.
    std::map<SatelliteId, Intervals> full(int capacity) const {
        std::map<SatelliteId, Intervals> out;
        for (const auto& [key, n] : load_)
            if (n >= capacity)
                add_interval(out[key.first], static_cast<double>(key.second) * slice_s_,
                             static_cast<double>(key.second + 1) * slice_s_);
        return out;
    }

private:
    double slice_s_;
    std::map<std::pair<SatelliteId, long>, int> load_;
};

// Plans UEs one after another against a shared load table, so later UEs see
// the beams already committed and no satellite exceeds its per-slice capacity.
struct CaasPlanner {
    const World& w;
    Horizon horizon;
    handover::HgmOptions hgm_options;
    int capacity;
    SliceLoad load;
    double noise_w;

    // Expected rate with the satellite budget shared among its planned beams and
    // every other satellite already active in the slice radiating its budget at
    // the sidelobe floor.
    double capability(const CoverageWindow& win, double t) const {
        const auto state = constellation::propagate(w.orbit(win.satellite_id), t);
        const auto& gp = w.positions[static_cast<std::size_t>(win.ground_point_id)];
        const int beams = load.at(win.satellite_id, t) + 1;
        const double g = prediction::link_gain_linear(state, gp, gp, w.sc.link);
        const double floor = db_to_linear(-channel::kSidelobeFloorDb);
        double interference = 0.0;
        for (SatelliteId other : load.active(t)) {
            if (other == win.satellite_id) continue;
            const auto s = constellation::propagate(w.orbit(other), t);
            interference += w.budget_w * floor * prediction::link_gain_linear(s, gp, gp, w.sc.link);
        }
        return channel::achievable_rate_linear_bps(w.budget_w / beams * g / (noise_w + interference), w.sc.link);
    }

    handover::HandoverGraph graph(UeId ue, std::span<const CoverageWindow> windows, Horizon h) const {
        auto cap = [this](const CoverageWindow& win, double t) { return capability(win, t); };
        return handover::build_hgm(windows, {ue, std::nullopt}, h, w.sc.handover.weights, cap, hgm_options);
    }

    // Piecewise plan: each piece runs until the graph can no longer reach further.
    LinkPlan plan_single(UeId ue, const std::vector<CoverageWindow>& windows, int link_id) const {
        LinkPlan plan;
        double t0 = horizon.start_s;
        while (t0 < horizon.end_s) {
            bool covered = false;
            double next_start = horizon.end_s;
            for (const auto& win : windows) {
                if (win.contains(t0)) covered = true;
                if (win.start_s > t0) next_start = std::min(next_start, win.start_s);
            }
            if (!covered) {
                t0 = next_start;
                continue;
            }
            Horizon h{t0, horizon.end_s};
            handover::HoPath path;
            for (;;) {
                try {
                    path = handover::best_path(graph(ue, windows, h));
                    break;
                } catch (const handover::CoverageGapError& e) {
                    h.end_s = e.first_uncovered_s();
                }
            }
            path.ue_id = ue;
            plan.segments.push_back({h, path, handover::initial_protocol_state(path, link_id)});
            if (!(h.end_s > t0)) break;
            t0 = h.end_s;
        }
        return plan;
    }

    void commit(const LinkPlan& plan) {
        for (const auto& o : occupancy(plan)) load.add(o);
    }

    std::pair<LinkPlan, std::optional<LinkPlan>> plan(UeId ue, const std::vector<CoverageWindow>& windows,
                                                      bool dual) {
        const auto avail = subtract(windows, load.full(capacity));
        if (!dual) {
            auto p = plan_single(ue, avail, 0);
            commit(p);
            return {p, std::nullopt};
        }
        try {
            auto [a, b] = handover::best_dual_paths(graph(ue, avail, horizon));
            a.ue_id = b.ue_id = ue;
            LinkPlan pa, pb;
            pa.segments.push_back({horizon, a, handover::initial_protocol_state(a, 0)});
            pb.segments.push_back({horizon, b, handover::initial_protocol_state(b, 1)});
            commit(pa);
            commit(pb);
            return {pa, pb};
        } catch (const Error&) {
            // No horizon-wide disjoint pair: a primary link, then a second link
            // on whatever the primary leaves free.
        }
        auto p = plan_single(ue, avail, 0);
        commit(p);
        std::map<SatelliteId, Intervals> busy = load.full(capacity);
        for (const auto& o : occupancy(p)) busy[o.satellite_id].emplace_back(o.from_s, o.to_s);
        for (auto& [sat, iv] : busy) std::sort(iv.begin(), iv.end());
        auto s = plan_single(ue, subtract(windows, busy), 1);
        if (s.segments.empty()) return {p, std::nullopt};
        commit(s);
        return {p, s};
    }
};

void run_caas(const World& w, const RunOptions& opt, RunResult& out) {
    const auto& sc = w.sc;
    const Horizon horizon{0.0, sc.duration_s};
    auto& ev = out.log.events;

    const CoverageIndex cov(constellation::coverage_windows_batch(w.orbits, w.positions, horizon, sc.mask_deg));

    std::vector<control::UeRequirement> reqs;
    for (const auto& u : w.ues) reqs.push_back(u.requirement);
    const auto regions = control::divide_regions(sc.area, w.positions, sc.control.max_ues_per_region,
                                                 sc.control.max_depth);
    std::map<UeId, int> region_of;
    for (std::size_t r = 0; r < regions.size(); ++r)
        for (UeId u : regions[r].ue_ids) region_of[u] = static_cast<int>(r);

    control::SatellitePool pool;
    pool.coverage = &cov;
    for (const auto& s : sc.shells) pool.shell_altitude_km[s.shell_id] = s.altitude_km;

    // Sub-constellation chain per region, one per validity interval.
    std::vector<double> epochs;
    for (double t = 0.0; t < sc.duration_s; t += sc.control.sc.validity_s) epochs.push_back(t);
    std::vector<std::vector<control::SubConstellation>> chain(regions.size());
    for (std::size_t e = 0; e < epochs.size(); ++e) {
        const Horizon validity{epochs[e], std::min(epochs[e] + sc.control.sc.validity_s, sc.duration_s)};
        for (std::size_t r = 0; r < regions.size(); ++r) {
            std::vector<SatelliteId> retained;
            if (e > 0) retained = chain[r].back().satellite_ids;
            chain[r].push_back(control::form_sc(regions[r], pool, reqs, validity, sc.control.sc, retained));
            const auto& s = chain[r].back();
            Event sev;
            sev.t = epochs[e];
            sev.kind = EventKind::Sc;
            sev.region_id = regions[r].id;
            sev.satellite_ids = s.satellite_ids;
            sev.uncovered_demand_points = s.uncovered_demand_points();
            ev.push_back(std::move(sev));
        }
    }

    double max_alt = 0.0;
    for (const auto& s : sc.shells) max_alt = std::max(max_alt, s.altitude_km);
    handover::HgmOptions hgm_options;
    hgm_options.delta_min_s = sc.handover.delta_min_s;
    hgm_options.lead_s = sc.handover.guard_s +
                         handover::round_trip_time_s(constellation::slant_range_at_elevation_km(max_alt, sc.mask_deg));
    CaasPlanner planner{w, horizon, hgm_options, sc.control.sc.capacity_per_satellite,
                        SliceLoad(sc.control.sc.slice_s), channel::noise_power_w(sc.link)};

    // Per-UE plans over windows restricted to the UE's sub-constellation membership.
    const std::size_t n = w.ues.size();
    std::vector<LinkPlan> primary(n);
    std::vector<std::optional<LinkPlan>> secondary(n);
    for (std::size_t i = 0; i < n; ++i) {
        const UeId id = w.ues[i].requirement.ue_id;
        const auto& scs = chain[static_cast<std::size_t>(region_of.at(id))];
        std::map<SatelliteId, Intervals> member;
        for (std::size_t e = 0; e < scs.size(); ++e)
            for (SatelliteId sat : scs[e].satellite_ids)
                add_interval(member[sat], scs[e].valid_from_s, scs[e].valid_to_s);
        std::vector<CoverageWindow> windows;
        for (const auto& [sat, iv] : member) {
            const auto clipped = clip_windows(cov.windows_for(sat, id), iv);
            windows.insert(windows.end(), clipped.begin(), clipped.end());
        }
        std::sort(windows.begin(), windows.end(), [](const CoverageWindow& a, const CoverageWindow& b) {
            return std::tie(a.start_s, a.satellite_id) < std::tie(b.start_s, b.satellite_id);
        });
        const bool dual = w.ues[i].requirement.connectivity == control::Connectivity::Dual;
        std::tie(primary[i], secondary[i]) = planner.plan(id, windows, dual);
    }

    std::map<std::pair<SatelliteId, UeId>, prediction::CsiHistory> histories;
    const handover::ProtocolTiming timing{sc.handover.guard_s, sc.handover.execution_time_s};

    for (double t : w.step_times) {
        const auto states = constellation::propagate_all(w.orbits, t);
        prediction::LinkGeometry geo{states, w.ue_ids, w.positions};
        std::vector<Assignment> assignments;

        auto drive = [&](LinkPlan& plan, UeId id, int link) {
            for (std::size_t k = 0; k < plan.segments.size(); ++k) {
                auto& seg = plan.segments[k];
                if (seg.span.start_s > t) break;
                // Back-to-back pieces switch satellites without a prepared sequence.
                if (k > 0 && t - sc.time_step_s < seg.span.start_s) {
                    const auto& prev = plan.segments[k - 1];
                    const auto from = prev.path.sequence.back().satellite_id;
                    const auto to = seg.path.sequence.front().satellite_id;
                    if (prev.span.end_s == seg.span.start_s && from != to) {
                        const double rtt = handover::round_trip_time_s(
                            constellation::slant_range_km(geo.state_of(to), geo.position_of(id)));
                        log_reactive_ho(ev, seg.span.start_s, id, link, from, to, rtt, sc.handover);
                    }
                }
                const auto current = seg.path.serving_at(std::min(t, seg.span.end_s));
                const double rtt = current ? handover::round_trip_time_s(constellation::slant_range_km(
                                                 geo.state_of(*current), geo.position_of(id)))
                                           : 0.0;
                auto [next, msgs] = handover::ho_protocol_step(seg.protocol, t, seg.path, rtt, timing);
                seg.protocol = next;
                for (const auto& m : msgs) ev.push_back(signaling_event(m, link));
            }
            const auto* seg = plan.at(t);
            if (!seg) return;
            const auto sat = seg->path.serving_at(t);
            if (!sat) return;
            if (constellation::elevation_deg(geo.state_of(*sat), geo.position_of(id)) < sc.mask_deg - kMaskSlackDeg)
                return;
            assignments.push_back({id, *sat});
        };
        for (std::size_t i = 0; i < n; ++i) {
            const UeId id = w.ues[i].requirement.ue_id;
            drive(primary[i], id, 0);
            if (secondary[i]) drive(*secondary[i], id, 1);
        }

        const auto snap = assigned_snapshot(t, assignments, geo);
        const auto bores = boresights_for(assignments, w);
        const auto truth = prediction::interference_matrix(snap, assignments, bores, sc.link, geo);

        // Predicted CSIT for serving links; the rest of the matrix follows from ephemeris.
        auto predicted = truth;
        if (sc.prediction.predictor == Predictor::Attention)
            for (std::size_t u = 0; u < truth.rows(); ++u)
                for (std::size_t b : truth.serving[u]) {
                    auto it = histories.find({truth.tx[b].satellite_id, truth.ue_ids[u]});
                    if (it == histories.end() || it->second.size() < 2) continue;
                    const auto p = prediction::predict_csi_attention(it->second, t, sc.prediction.tau_s);
                    predicted.at(u, b) = db_to_linear(p.channel_gain_db);
                }

        // Beams per satellite, for splitting budgets across regions.
        std::map<SatelliteId, int> beams_total;
        for (const auto& tx : truth.tx) ++beams_total[tx.satellite_id];

        beamforming::PowerAllocation alloc;
        alloc.power_w.assign(truth.cols(), 0.0);
        for (std::size_t r = 0; r < regions.size(); ++r) {
            InterferenceMatrix sub;
            std::vector<std::size_t> rows, cols;
            std::vector<double> demands;
            for (std::size_t u = 0; u < truth.rows(); ++u)
                if (region_of.at(truth.ue_ids[u]) == static_cast<int>(r)) {
                    rows.push_back(u);
                    for (std::size_t b : truth.serving[u]) cols.push_back(b);
                }
            if (rows.empty() || cols.empty()) continue;
            std::sort(cols.begin(), cols.end());
            std::map<SatelliteId, double> budgets;
            for (std::size_t b : cols) budgets[truth.tx[b].satellite_id] += w.budget_w / beams_total[truth.tx[b].satellite_id];
            for (std::size_t u : rows) {
                sub.ue_ids.push_back(truth.ue_ids[u]);
                demands.push_back(w.ues[static_cast<std::size_t>(truth.ue_ids[u])].requirement.demand_bps);
            }
            for (std::size_t b : cols) sub.tx.push_back(truth.tx[b]);
            sub.coefficients.resize(rows.size() * cols.size());
            sub.serving.resize(rows.size());
            for (std::size_t i = 0; i < rows.size(); ++i) {
                for (std::size_t j = 0; j < cols.size(); ++j) sub.at(i, j) = predicted.at(rows[i], cols[j]);
                for (std::size_t b : truth.serving[rows[i]])
                    sub.serving[i].push_back(static_cast<std::size_t>(std::lower_bound(cols.begin(), cols.end(), b) - cols.begin()));
            }
            const auto res = beamforming::allocate_power(sub, budgets, demands, sc.link, sc.power);
            for (std::size_t j = 0; j < cols.size(); ++j) alloc.power_w[cols[j]] = res.allocation.power_w[j];
            if (opt.record_allocations) record_allocation(out, t, regions[r].id, sub, res.allocation);
        }
        out.max_budget_ratio = std::max(out.max_budget_ratio, budget_ratio(truth, alloc, w.budget_w));
        log_rates(ev, t, w, truth, beamforming::evaluate_rates(alloc, truth, sc.link));

        // CSI feedback of this step becomes history for the next.
        for (const auto& a : assignments) {
            const auto s = channel::csi_sample(geo.state_of(a.satellite_id), geo.position_of(a.ue_id),
                                               geo.position_of(a.ue_id), sc.link, t, a.ue_id);
            auto it = histories.try_emplace({a.satellite_id, a.ue_id}, a.satellite_id, a.ue_id,
                                            sc.prediction.history_capacity).first;
            it->second.push(s);
            if (opt.record_csi) out.csi.push_back(s);
        }
    }
}

}  // namespace

std::vector<UeProfile> populate_ues(const Scenario& scenario) {
    scenario.validate();
    const auto orbits = constellation::build_constellation(scenario.shells);
    return populate(scenario, orbits);
}

RunResult run(const Scenario& scenario, Strategy strategy, const RunOptions& options) {
    scenario.validate();
    RunResult out;
    if (scenario.duration_s <= 0.0) {
        out.report = compute_metrics(out.log, 0, scenario.handover.pingpong_window_s);
        return out;
    }
    const World w(scenario);
    if (strategy == Strategy::Caas)
        run_caas(w, options, out);
    else
        run_standalone(w, options, out);
    std::stable_sort(out.log.events.begin(), out.log.events.end(),
                     [](const Event& a, const Event& b) { return a.t < b.t; });
    out.report = compute_metrics(out.log, scenario);
    return out;
}

UeGraph ue_graph(const Scenario& scenario, UeId ue) {
    scenario.validate();
    const World w(scenario);
    if (ue < 0 || ue >= static_cast<int>(w.ues.size())) throw Error(ErrorKind::Lookup, "unknown UE " + std::to_string(ue));
    const Horizon horizon{0.0, scenario.duration_s};
    const GroundPoint gp = w.positions[static_cast<std::size_t>(ue)];
    std::vector<CoverageWindow> windows;
    for (const auto& o : w.orbits) {
        auto ws = constellation::coverage_windows(o, gp, horizon, scenario.mask_deg, ue);
        windows.insert(windows.end(), ws.begin(), ws.end());
    }
    const double noise = channel::noise_power_w(scenario.link);
    auto capability = [&](const CoverageWindow& win, double t) {
        const auto state = constellation::propagate(w.orbit(win.satellite_id), t);
        return channel::achievable_rate_linear_bps(
            w.budget_w * prediction::link_gain_linear(state, gp, gp, scenario.link) / noise, scenario.link);
    };
    handover::HgmOptions options;
    options.delta_min_s = scenario.handover.delta_min_s;
    UeGraph out;
    out.ues = w.ues;
    out.graph = handover::build_hgm(windows, {ue, std::nullopt}, horizon, scenario.handover.weights, capability, options);
    try {
        out.path = handover::best_path(out.graph);
        out.path->ue_id = ue;
    } catch (const handover::CoverageGapError& e) {
        out.note = e.what();
    }
    return out;
}

SweepResult sweep(const Scenario& scenario_template, std::span<const int> ue_counts,
                  std::span<const std::uint64_t> seeds) {
    if (ue_counts.empty() || seeds.empty()) throw Error(ErrorKind::InvalidSpec, "sweep needs UE counts and seeds");
    SweepResult result;
    for (int n : ue_counts)
        for (auto seed : seeds)
            for (auto s : {Strategy::Caas, Strategy::Standalone}) result.cells.push_back({n, seed, s, {}});

    const long cells = static_cast<long>(result.cells.size());
    std::vector<std::string> errors(result.cells.size());
#pragma omp parallel for schedule(dynamic)
    for (long c = 0; c < cells; ++c) {
        auto& cell = result.cells[static_cast<std::size_t>(c)];
        try {
            Scenario sc = scenario_template;
            sc.ue_count = cell.ue_count;
            sc.seed = cell.seed;
            cell.report = run(sc, cell.strategy).report;
        } catch (const std::exception& e) {
            errors[static_cast<std::size_t>(c)] = e.what();
        }
    }
    for (const auto& e : errors)
        if (!e.empty()) throw Error(ErrorKind::InvalidSpec, e);

    auto mean_std = [](const std::vector<double>& xs) {
        const double m = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
        double v = 0.0;
        for (double x : xs) v += (x - m) * (x - m);
        // Sample standard deviation across seeds.
        const double sd = xs.size() > 1 ? std::sqrt(v / static_cast<double>(xs.size() - 1)) : 0.0;
        return std::pair{m, sd};
    };
    for (int n : ue_counts)
        for (auto s : {Strategy::Caas, Strategy::Standalone}) {
            std::vector<double> atr, ho, pp, sig;
            for (const auto& c : result.cells)
                if (c.ue_count == n && c.strategy == s) {
                    atr.push_back(c.report.atr_bps);
                    ho.push_back(c.report.ho_per_ue);
                    pp.push_back(c.report.pingpong_count);
                    sig.push_back(c.report.signaling_messages);
                }
            SweepRow row;
            row.ue_count = n;
            row.strategy = s;
            std::tie(row.atr_mean_bps, row.atr_std) = mean_std(atr);
            std::tie(row.ho_per_ue_mean, row.ho_per_ue_std) = mean_std(ho);
            row.pingpong_mean = mean_std(pp).first;
            row.signaling_mean = mean_std(sig).first;
            result.rows.push_back(row);
        }
    return result;
}

}  // namespace caas::sim
