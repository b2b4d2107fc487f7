#include "caas/handover.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace caas::handover {

void HoMetricWeights::validate() const {
    if (!(alpha >= 0.0 && alpha <= 1.0 && beta >= 0.0 && beta <= 1.0) || std::abs(alpha + beta - 1.0) > 1e-9)
        throw Error(ErrorKind::Domain, "HO metric weights must lie in [0,1] and sum to 1");
}

double edge_benefit(const CoverageWindow& from, const CoverageWindow& to, double t_switch,
                    const HoMetricWeights& weights, double cap_to, double cap_max, double stay_max) {
    const double lo = std::max(from.start_s, to.start_s);
    const double hi = std::min(from.end_s, to.end_s);
    if (!(t_switch >= lo && t_switch <= hi))
        throw Error(ErrorKind::InfeasibleSwitch, "switch time outside window overlap");
    const double cap_term = cap_max > 0.0 ? cap_to / cap_max : 0.0;
    const double stay_term = stay_max > 0.0 ? (to.end_s - t_switch) / stay_max : 0.0;
    return std::clamp(weights.alpha * cap_term + weights.beta * stay_term, 0.0, 1.0);
}

bool HandoverGraph::is_sink(std::size_t v) const { return v > 0 && vertices[v].end_s >= horizon.end_s; }

void add_edge(HandoverGraph& g, const HgmEdge& e) {
    if (!(e.from < e.to) || e.to >= g.vertices.size())
        throw Error(ErrorKind::Domain, "HGM edges must go from a lower to a higher vertex");
    if (!(e.weight >= 0.0) || !std::isfinite(e.weight)) throw Error(ErrorKind::Domain, "HGM weights must be finite, >= 0");
    if (g.out_edges.size() < g.vertices.size()) g.out_edges.resize(g.vertices.size());
    g.out_edges[e.from].push_back(g.edges.size());
    g.edges.push_back(e);
}

HandoverGraph build_hgm(std::span<const CoverageWindow> windows, const UeState& ue, Horizon horizon,
                        const HoMetricWeights& weights, const CapabilityFn& capability,
                        const HgmOptions& options) {
    weights.validate();
    if (!(horizon.start_s < horizon.end_s)) throw Error(ErrorKind::Domain, "HGM horizon must satisfy t0 < t1");
    const double t0 = horizon.start_s, t1 = horizon.end_s;

    HandoverGraph g;
    g.ue_id = ue.ue_id;
    g.horizon = horizon;
    CoverageWindow source;
    source.satellite_id = -1;
    source.ground_point_id = ue.ue_id;
    source.start_s = t0;
    source.end_s = t0;
    g.vertices.push_back(source);

    std::vector<CoverageWindow> clipped;
    for (auto w : windows) {
        w.start_s = std::max(w.start_s, t0);
        w.end_s = std::min(w.end_s, t1);
        if (w.end_s > w.start_s) clipped.push_back(w);
    }
    std::sort(clipped.begin(), clipped.end(), [](const CoverageWindow& a, const CoverageWindow& b) {
        if (a.start_s != b.start_s) return a.start_s < b.start_s;
        if (a.end_s != b.end_s) return a.end_s < b.end_s;
        return a.satellite_id < b.satellite_id;
    });
    g.vertices.insert(g.vertices.end(), clipped.begin(), clipped.end());
    const std::size_t n = g.vertices.size();
    g.out_edges.assign(n, {});

    // Initial attachment: every window holding t0, or only the serving one.
    std::vector<std::size_t> initial;
    for (std::size_t v = 1; v < n; ++v)
        if (g.vertices[v].start_s <= t0 && g.vertices[v].end_s > t0) initial.push_back(v);
    if (ue.serving) {
        std::vector<std::size_t> own;
        for (std::size_t v : initial)
            if (g.vertices[v].satellite_id == *ue.serving) own.push_back(v);
        if (!own.empty()) initial = own;
    }
    if (initial.empty())
        throw Error(ErrorKind::NoInitialCoverage, "no window covers t0 for UE " + std::to_string(ue.ue_id));

    struct Candidate {
        std::size_t from, to;
        double t_switch;
        double cap;
    };
    std::vector<Candidate> cands;
    for (std::size_t v : initial) cands.push_back({0, v, t0, capability(g.vertices[v], t0)});
    for (std::size_t i = 1; i < n; ++i) {
        const auto& wi = g.vertices[i];
        for (std::size_t j = i + 1; j < n; ++j) {
            const auto& wj = g.vertices[j];
            const double lo = std::max(wi.start_s, wj.start_s);
            const double hi = std::min(wi.end_s, wj.end_s);
            // A hop must extend coverage; nested windows never help reach the horizon end.
            if (hi - lo < options.delta_min_s || !(wj.end_s > wi.end_s)) continue;
            const double ts = std::min(lo + options.lead_s, hi);
            cands.push_back({i, j, ts, capability(wj, ts)});
        }
    }
    double cap_max = 0.0, stay_max = 0.0;
    for (const auto& c : cands) {
        cap_max = std::max(cap_max, c.cap);
        stay_max = std::max(stay_max, g.vertices[c.to].end_s - c.t_switch);
    }
    const double span = t1 - t0;
    for (const auto& c : cands) {
        const auto& to = g.vertices[c.to];
        const auto& from = c.from == 0 ? to : g.vertices[c.from];
        const double benefit = edge_benefit(from, to, c.t_switch, weights, c.cap, cap_max, stay_max);
        const double covered_until = c.from == 0 ? t0 : g.vertices[c.from].end_s;
        const double added = std::max(to.end_s - covered_until, 0.0);
        add_edge(g, {c.from, c.to, c.t_switch, benefit, benefit * added / span});
    }
    for (auto& oe : g.out_edges)
        std::sort(oe.begin(), oe.end(), [&](std::size_t a, std::size_t b) { return g.edges[a].to < g.edges[b].to; });
    return g;
}

std::optional<SatelliteId> HoPath::serving_at(double t_s) const {
    std::optional<SatelliteId> s;
    for (const auto& hop : sequence) {
        if (hop.switch_time_s <= t_s)
            s = hop.satellite_id;
        else
            break;
    }
    if (s && t_s >= end_s) return std::nullopt;
    return s;
}

bool path_better(const HoPath& a, const HoPath& b) {
    if (a.cumulative_benefit != b.cumulative_benefit) return a.cumulative_benefit > b.cumulative_benefit;
    if (a.handovers() != b.handovers()) return a.handovers() < b.handovers();
    return std::lexicographical_compare(
        a.sequence.begin(), a.sequence.end(), b.sequence.begin(), b.sequence.end(),
        [](const HoHop& x, const HoHop& y) { return x.satellite_id < y.satellite_id; });
}

namespace {

// Partial paths ending at a vertex, kept as full HoPaths for ordering.
std::vector<std::vector<HoPath>> label_paths(const HandoverGraph& g, std::span<const char> removed, std::size_t k) {
    const std::size_t n = g.vertex_count();
    std::vector<std::vector<HoPath>> labels(n);
    HoPath start;
    start.ue_id = g.ue_id;
    labels[0].push_back(start);
    for (std::size_t v = 0; v < n; ++v) {
        if (labels[v].empty()) continue;
        std::sort(labels[v].begin(), labels[v].end(), path_better);
        if (labels[v].size() > k) labels[v].resize(k);
        if (v >= g.out_edges.size()) continue;
        for (std::size_t ei : g.out_edges[v]) {
            const auto& e = g.edges[ei];
            if (!removed.empty() && removed[e.to]) continue;
            for (const auto& p : labels[v]) {
                HoPath q = p;
                q.sequence.push_back({g.vertices[e.to].satellite_id, e.switch_time_s, e.to});
                q.cumulative_benefit = p.cumulative_benefit + e.weight;
                q.end_s = g.vertices[e.to].end_s;
                labels[e.to].push_back(std::move(q));
            }
        }
    }
    return labels;
}

[[noreturn]] void throw_gap(const HandoverGraph& g, const std::vector<std::vector<HoPath>>& labels) {
    double reach = g.horizon.start_s;
    for (std::size_t v = 1; v < g.vertex_count(); ++v)
        if (!labels[v].empty()) reach = std::max(reach, g.vertices[v].end_s);
    throw CoverageGapError(reach, "UE " + std::to_string(g.ue_id) + " loses coverage at t=" + std::to_string(reach));
}

}  // namespace

std::vector<HoPath> top_k_paths(const HandoverGraph& g, std::size_t k) {
    const auto labels = label_paths(g, {}, k);
    std::vector<HoPath> all;
    for (std::size_t v = 1; v < g.vertex_count(); ++v)
        if (g.is_sink(v))
            for (const auto& p : labels[v]) all.push_back(p);
    std::sort(all.begin(), all.end(), path_better);
    if (all.size() > k) all.resize(k);
    return all;
}

HoPath best_path(const HandoverGraph& g, std::span<const char> removed) {
    const auto labels = label_paths(g, removed, 1);
    const HoPath* best = nullptr;
    for (std::size_t v = 1; v < g.vertex_count(); ++v) {
        if (!g.is_sink(v) || labels[v].empty()) continue;
        if (!best || path_better(labels[v].front(), *best)) best = &labels[v].front();
    }
    if (!best) throw_gap(g, labels);
    return *best;
}

HoPath best_path(const HandoverGraph& g) { return best_path(g, {}); }

std::pair<HoPath, HoPath> best_dual_paths(const HandoverGraph& g, std::size_t top_k) {
    std::size_t initial = 0;
    if (!g.out_edges.empty()) initial = g.out_edges[0].size();
    if (initial < 2) throw Error(ErrorKind::DualInfeasible, "fewer than two windows cover t0");

    std::optional<std::pair<HoPath, HoPath>> best;
    auto consider = [&](const HoPath& first) {
        std::vector<char> removed(g.vertex_count(), 0);
        for (const auto& hop : first.sequence) removed[hop.vertex] = 1;
        try {
            HoPath second = best_path(g, removed);
            auto pair = path_better(second, first) ? std::pair{second, first} : std::pair{first, second};
            if (!best) {
                best = pair;
                return;
            }
            const double s_new = pair.first.cumulative_benefit + pair.second.cumulative_benefit;
            const double s_old = best->first.cumulative_benefit + best->second.cumulative_benefit;
            const int h_new = pair.first.handovers() + pair.second.handovers();
            const int h_old = best->first.handovers() + best->second.handovers();
            if (s_new > s_old || (s_new == s_old && h_new < h_old)) best = pair;
        } catch (const CoverageGapError&) {
        }
    };
    for (const auto& first : top_k_paths(g, top_k)) consider(first);
    if (!best) throw Error(ErrorKind::DualInfeasible, "no vertex-disjoint pair of paths reaches the horizon end");
    return *best;
}

// ============================================================
// Conditional handover protocol
// ============================================================

const char* to_string(SignalKind kind) {
    switch (kind) {
        case SignalKind::SequenceDistribution: return "sequence";
        case SignalKind::HoRequest: return "prepare";
        case SignalKind::HoAck: return "ack";
        case SignalKind::HoCommand: return "execute";
        case SignalKind::HoComplete: return "complete";
    }
    return "unknown";
}

HoProtocolState initial_protocol_state(const HoPath& path, int link_id) {
    HoProtocolState s;
    s.ue_id = path.ue_id;
    s.link_id = link_id;
    if (!path.sequence.empty()) s.serving = path.sequence.front().satellite_id;
    return s;
}

std::pair<HoProtocolState, std::vector<SignalingMessage>> ho_protocol_step(
    HoProtocolState state, double t_s, const HoPath& path, double rtt_s, const ProtocolTiming& timing) {
    if (t_s < state.last_step_s) throw Error(ErrorKind::Ordering, "protocol time went backwards");
    state.last_step_s = t_s;
    std::vector<SignalingMessage> msgs;
    if (path.sequence.size() < 2) return {state, msgs};

    if (!state.sequence_shared) {
        msgs.push_back({path.sequence.front().switch_time_s, SignalKind::SequenceDistribution, state.ue_id,
                        state.serving, state.serving});
        state.sequence_shared = true;
    }
    for (;;) {
        switch (state.phase) {
            case HoPhase::Connected: {
                if (state.next_hop >= path.sequence.size()) return {state, msgs};
                const auto& hop = path.sequence[state.next_hop];
                const double prep = hop.switch_time_s - (rtt_s + timing.guard_s);
                if (t_s < prep) return {state, msgs};
                state.phase = HoPhase::Preparing;
                state.target = hop.satellite_id;
                state.planned_exec_time_s = hop.switch_time_s;
                state.phase_since_s = prep;
                msgs.push_back({prep, SignalKind::HoRequest, state.ue_id, state.serving, *state.target});
                break;
            }
            case HoPhase::Preparing: {
                const double ack = state.phase_since_s + rtt_s;
                if (t_s < ack) return {state, msgs};
                state.phase = HoPhase::Ready;
                state.phase_since_s = ack;
                msgs.push_back({ack, SignalKind::HoAck, state.ue_id, state.serving, *state.target});
                break;
            }
            case HoPhase::Ready: {
                if (t_s < state.planned_exec_time_s) return {state, msgs};
                state.phase = HoPhase::Executing;
                state.phase_since_s = state.planned_exec_time_s;
                msgs.push_back({state.planned_exec_time_s, SignalKind::HoCommand, state.ue_id, state.serving,
                                *state.target});
                break;
            }
            case HoPhase::Executing: {
                const double done = state.planned_exec_time_s + timing.execution_time_s;
                if (t_s < done) return {state, msgs};
                msgs.push_back({done, SignalKind::HoComplete, state.ue_id, state.serving, *state.target});
                state.serving = *state.target;
                state.target.reset();
                state.phase = HoPhase::Connected;
                state.phase_since_s = done;
                ++state.next_hop;
                break;
            }
        }
    }
}

double round_trip_time_s(double slant_range_km) { return 2.0 * slant_range_km / kSpeedOfLightKmS; }

int detect_ping_pong(std::span<const HoLogEntry> log, double window_s) {
    std::map<SatelliteId, double> left_at;
    int count = 0;
    for (const auto& e : log) {
        auto it = left_at.find(e.to_sat);
        if (it != left_at.end() && e.time_s - it->second <= window_s) ++count;
        left_at[e.from_sat] = e.time_s;
    }
    return count;
}

}  // namespace caas::handover
