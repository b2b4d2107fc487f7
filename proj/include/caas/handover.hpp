#pragma once

#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "caas/constellation.hpp"

namespace caas::handover {

using constellation::CoverageWindow;
using constellation::Horizon;

inline constexpr double kDefaultDeltaMinS = 2.0;
inline constexpr double kDefaultGuardS = 0.05;
inline constexpr double kDefaultExecutionTimeS = 0.1;
inline constexpr double kDefaultPingPongWindowS = 30.0;
inline constexpr std::size_t kDualTopK = 16;

struct HoMetricWeights {
    double alpha = 0.5;  // link capability
    double beta = 0.5;   // remaining time of stay

    void validate() const;
};

// alpha * cap_to / cap_max + beta * (end_to - t_switch) / stay_max, in [0, 1].
// Throws ErrorKind::InfeasibleSwitch when t_switch is outside both windows' overlap.
double edge_benefit(const CoverageWindow& from, const CoverageWindow& to, double t_switch,
                    const HoMetricWeights& weights, double cap_to, double cap_max, double stay_max);

// Link capability (bps) of a window at a switch instant.
using CapabilityFn = std::function<double(const CoverageWindow&, double t_s)>;

struct UeState {
    UeId ue_id = 0;
    // When set and covering t0, the source only connects to that satellite's window.
    std::optional<SatelliteId> serving;
};

struct HgmEdge {
    std::size_t from = 0;
    std::size_t to = 0;
    double switch_time_s = 0.0;
    double benefit = 0.0;  // edge_benefit of the hop
    double weight = 0.0;   // benefit scaled by the coverage the hop adds, over the horizon
};

struct HandoverGraph {
    UeId ue_id = 0;
    Horizon horizon;
    // vertices[0] is the source placeholder; the rest are clipped windows
    // ordered by (start, end, satellite_id).
    std::vector<CoverageWindow> vertices;
    std::vector<HgmEdge> edges;
    std::vector<std::vector<std::size_t>> out_edges;  // per vertex, indices into edges

    std::size_t vertex_count() const { return vertices.size(); }
    bool is_sink(std::size_t v) const;
};

struct HgmOptions {
    double delta_min_s = kDefaultDeltaMinS;
    double lead_s = 0.0;  // preparation lead added to the overlap start
};

// Throws ErrorKind::NoInitialCoverage when no window contains horizon.start_s.
HandoverGraph build_hgm(std::span<const CoverageWindow> windows, const UeState& ue, Horizon horizon,
                        const HoMetricWeights& weights, const CapabilityFn& capability,
                        const HgmOptions& options = {});

// Adds an edge; used by tests and tools that assemble graphs by hand.
void add_edge(HandoverGraph& g, const HgmEdge& e);

struct HoHop {
    SatelliteId satellite_id = 0;
    double switch_time_s = 0.0;
    std::size_t vertex = 0;
};

struct HoPath {
    UeId ue_id = 0;
    std::vector<HoHop> sequence;
    double cumulative_benefit = 0.0;

    int handovers() const { return sequence.empty() ? 0 : static_cast<int>(sequence.size()) - 1; }
    // Satellite serving at t: the last hop switched at or before t.
    std::optional<SatelliteId> serving_at(double t_s) const;
    // Coverage end of the final window.
    double end_s = 0.0;
};

class CoverageGapError : public Error {
public:
    CoverageGapError(double first_uncovered_s, const std::string& what)
        : Error(ErrorKind::CoverageGap, what), first_uncovered_s_(first_uncovered_s) {}
    double first_uncovered_s() const noexcept { return first_uncovered_s_; }

private:
    double first_uncovered_s_;
};

// Max cumulative weight from the source to a sink. Ties: fewer handovers, then
// lexicographically smaller satellite sequence.
HoPath best_path(const HandoverGraph& g);
HoPath best_path(const HandoverGraph& g, std::span<const char> removed);

// The k best source-to-sink paths under the best_path ordering.
std::vector<HoPath> top_k_paths(const HandoverGraph& g, std::size_t k);

// Two paths sharing no vertex except the source. Throws ErrorKind::DualInfeasible.
std::pair<HoPath, HoPath> best_dual_paths(const HandoverGraph& g, std::size_t top_k = kDualTopK);

// Strict "a is preferred to b" under the best_path ordering.
bool path_better(const HoPath& a, const HoPath& b);

// ============================================================
// Conditional handover protocol
// ============================================================

enum class HoPhase { Connected, Preparing, Ready, Executing };

enum class SignalKind { SequenceDistribution, HoRequest, HoAck, HoCommand, HoComplete };

const char* to_string(SignalKind kind);

struct SignalingMessage {
    double time_s = 0.0;
    SignalKind kind = SignalKind::HoRequest;
    UeId ue_id = 0;
    SatelliteId from_sat = 0;
    SatelliteId to_sat = 0;
};

struct ProtocolTiming {
    double guard_s = kDefaultGuardS;
    double execution_time_s = kDefaultExecutionTimeS;
};

struct HoProtocolState {
    UeId ue_id = 0;
    int link_id = 0;
    HoPhase phase = HoPhase::Connected;
    std::optional<SatelliteId> target;
    double planned_exec_time_s = 0.0;

    SatelliteId serving = 0;
    std::size_t next_hop = 1;
    double phase_since_s = 0.0;
    double last_step_s = -1e300;
    bool sequence_shared = false;
};

HoProtocolState initial_protocol_state(const HoPath& path, int link_id = 0);

// Advances through every transition due by t. Throws ErrorKind::Ordering when
// t precedes the previous call.
std::pair<HoProtocolState, std::vector<SignalingMessage>> ho_protocol_step(
    HoProtocolState state, double t_s, const HoPath& path, double rtt_s, const ProtocolTiming& timing = {});

double round_trip_time_s(double slant_range_km);

struct HoLogEntry {
    double time_s = 0.0;
    SatelliteId from_sat = 0;
    SatelliteId to_sat = 0;
};

// Handovers returning to a satellite that served within the preceding window.
int detect_ping_pong(std::span<const HoLogEntry> log, double window_s = kDefaultPingPongWindowS);

}  // namespace caas::handover
