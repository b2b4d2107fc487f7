#include "caas/metrics.hpp"

#include <map>

namespace caas {

const char* to_string(EventKind kind) {
    switch (kind) {
        case EventKind::Rate: return "rate";
        case EventKind::Sequence: return "sequence";
        case EventKind::Prepare: return "prepare";
        case EventKind::Ack: return "ack";
        case EventKind::Execute: return "execute";
        case EventKind::Complete: return "complete";
        case EventKind::Sc: return "sc";
    }
    return "?";
}

bool EventLog::time_ordered() const {
    for (std::size_t i = 1; i < events.size(); ++i)
        if (events[i].t < events[i - 1].t) return false;
    return true;
}

MetricsReport compute_metrics(const EventLog& log, int ue_count, double pingpong_window_s) {
    if (!log.time_ordered()) throw Error(ErrorKind::Ordering, "event log is not time-ordered");

    struct Acc {
        double rate_sum = 0.0;
        long samples = 0;
        long outage = 0;
        int signaling = 0;
        // Executed handovers per link; ping-pong is a per-link notion.
        std::map<int, std::vector<handover::HoLogEntry>> hops;
    };
    std::map<UeId, Acc> acc;
    for (int u = 0; u < ue_count; ++u) acc[u];

    for (const auto& e : log.events) {
        if (e.kind == EventKind::Sc) continue;
        auto& a = acc[e.ue_id];
        if (e.kind == EventKind::Rate) {
            a.rate_sum += e.rate_bps;
            ++a.samples;
            if (e.serving.empty()) ++a.outage;
            continue;
        }
        ++a.signaling;
        if (e.kind == EventKind::Execute) a.hops[e.link_id].push_back({e.t, e.from_sat, e.to_sat});
    }

    MetricsReport r;
    long samples = 0, outage = 0;
    double atr_sum = 0.0;
    for (const auto& [ue, a] : acc) {
        UeMetrics m;
        m.ue_id = ue;
        m.atr_bps = a.samples ? a.rate_sum / static_cast<double>(a.samples) : 0.0;
        m.outage_fraction = a.samples ? static_cast<double>(a.outage) / static_cast<double>(a.samples) : 0.0;
        m.signaling_messages = a.signaling;
        for (const auto& [link, hops] : a.hops) {
            m.ho_count += static_cast<int>(hops.size());
            m.pingpong_count += handover::detect_ping_pong(hops, pingpong_window_s);
        }
        r.ho_count += m.ho_count;
        r.pingpong_count += m.pingpong_count;
        r.signaling_messages += m.signaling_messages;
        atr_sum += m.atr_bps;
        samples += a.samples;
        outage += a.outage;
        r.per_ue.push_back(m);
    }
    if (!r.per_ue.empty()) {
        r.atr_bps = atr_sum / static_cast<double>(r.per_ue.size());
        r.ho_per_ue = static_cast<double>(r.ho_count) / static_cast<double>(r.per_ue.size());
    }
    r.outage_fraction = samples ? static_cast<double>(outage) / static_cast<double>(samples) : 0.0;
    return r;
}

MetricsReport compute_metrics(const EventLog& log, const Scenario& scenario) {
    return compute_metrics(log, scenario.ue_count, scenario.handover.pingpong_window_s);
}

}  // namespace caas
