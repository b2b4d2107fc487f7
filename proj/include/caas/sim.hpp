#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string_view>
#include <vector>

#include "caas/metrics.hpp"

namespace caas::sim {

using constellation::GroundPoint;

// Independent deterministic stream per (seed, name).
std::mt19937_64 rng_stream(std::uint64_t seed, std::string_view name);

struct UeProfile {
    GroundPoint position;
    control::UeRequirement requirement;
    int default_shell = 0;
    std::optional<SatelliteId> default_satellite;  // none when the shell has no covering satellite at t0
};

// UE i has id i.
std::vector<UeProfile> populate_ues(const Scenario& scenario);

struct AllocationRecord {
    double t = 0.0;
    int region_id = 0;
    SatelliteId satellite_id = 0;
    UeId ue_id = 0;
    double power_w = 0.0;
};

struct RunOptions {
    bool record_allocations = false;
    bool record_csi = false;
};

struct RunResult {
    MetricsReport report;
    EventLog log;
    std::vector<AllocationRecord> allocations;
    std::vector<channel::CsiSample> csi;
    // Largest per-satellite allocated power over budget ratio seen; <= 1 when conserved.
    double max_budget_ratio = 0.0;
};

RunResult run(const Scenario& scenario, Strategy strategy, const RunOptions& options = {});

struct SweepCell {
    int ue_count = 0;
    std::uint64_t seed = 0;
    Strategy strategy = Strategy::Caas;
    MetricsReport report;
};

struct SweepRow {
    int ue_count = 0;
    Strategy strategy = Strategy::Caas;
    double atr_mean_bps = 0.0;
    double atr_std = 0.0;
    double ho_per_ue_mean = 0.0;
    double ho_per_ue_std = 0.0;
    double pingpong_mean = 0.0;
    double signaling_mean = 0.0;
};

struct SweepResult {
    std::vector<SweepCell> cells;  // ordered by (ue_count, seed, strategy)
    std::vector<SweepRow> rows;    // ordered by (ue_count, strategy: caas first)
};

struct UeGraph {
    std::vector<UeProfile> ues;
    handover::HandoverGraph graph;
    std::optional<handover::HoPath> path;  // none when coverage has a gap
    std::string note;
};

// HGM over every coverage window of one UE across the scenario horizon, with
// capability at the full satellite budget. Throws ErrorKind::Lookup for an
// unknown UE and ErrorKind::NoInitialCoverage when nothing covers t = 0.
UeGraph ue_graph(const Scenario& scenario, UeId ue);

// Seeds replace scenario.seed. Cells run in parallel; results are order-independent.
SweepResult sweep(const Scenario& scenario_template, std::span<const int> ue_counts,
                  std::span<const std::uint64_t> seeds);

}  // namespace caas::sim
