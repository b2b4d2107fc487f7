#pragma once

#include <span>
#include <string>
#include <vector>

#include "caas/scenario.hpp"

namespace caas {

enum class EventKind { Rate, Sequence, Prepare, Ack, Execute, Complete, Sc };

const char* to_string(EventKind kind);

// One log record. Fields not meaningful for a kind keep their defaults and are
// not serialized.
struct Event {
    double t = 0.0;
    EventKind kind = EventKind::Rate;
    UeId ue_id = -1;
    int link_id = 0;

    // Rate
    double rate_bps = 0.0;
    std::vector<SatelliteId> serving;  // empty: outage

    // Handover signaling
    SatelliteId from_sat = -1;
    SatelliteId to_sat = -1;

    // Sub-constellation
    int region_id = -1;
    std::vector<SatelliteId> satellite_ids;
    int uncovered_demand_points = 0;

    bool operator==(const Event&) const = default;
};

struct EventLog {
    std::vector<Event> events;

    bool time_ordered() const;
};

inline bool is_signaling(EventKind k) {
    return k == EventKind::Sequence || k == EventKind::Prepare || k == EventKind::Ack ||
           k == EventKind::Execute || k == EventKind::Complete;
}

struct UeMetrics {
    UeId ue_id = 0;
    double atr_bps = 0.0;
    int ho_count = 0;
    int pingpong_count = 0;
    int signaling_messages = 0;
    double outage_fraction = 0.0;

    bool operator==(const UeMetrics&) const = default;
};

struct MetricsReport {
    std::vector<UeMetrics> per_ue;
    double atr_bps = 0.0;  // mean over UEs of per-UE ATR
    int ho_count = 0;
    double ho_per_ue = 0.0;
    int pingpong_count = 0;
    int signaling_messages = 0;
    double outage_fraction = 0.0;

    bool operator==(const MetricsReport&) const = default;
};

// Pure function of the log. UEs without rate samples count with ATR 0.
// Throws ErrorKind::Ordering for a log that is not time-ordered.
MetricsReport compute_metrics(const EventLog& log, int ue_count,
                              double pingpong_window_s = handover::kDefaultPingPongWindowS);
MetricsReport compute_metrics(const EventLog& log, const Scenario& scenario);

}  // namespace caas
