#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "caas/beamforming.hpp"
#include "caas/control.hpp"
#include "caas/handover.hpp"

namespace caas {

enum class Strategy { Caas, Standalone };
enum class Predictor { Attention, Ephemeris };

const char* to_string(Strategy s);
Strategy parse_strategy(const std::string& s);

struct HandoverKnobs {
    handover::HoMetricWeights weights;
    double delta_min_s = handover::kDefaultDeltaMinS;
    double guard_s = handover::kDefaultGuardS;
    double execution_time_s = handover::kDefaultExecutionTimeS;
    double pingpong_window_s = handover::kDefaultPingPongWindowS;
    double hysteresis_db = 3.0;
    int time_to_trigger_steps = 2;
};

struct ControlKnobs {
    int max_ues_per_region = control::kDefaultMaxUesPerRegion;
    int max_depth = control::kDefaultMaxDepth;
    control::ScOptions sc;
};

struct PredictionKnobs {
    Predictor predictor = Predictor::Attention;
    std::size_t history_capacity = prediction::kDefaultHistoryCapacity;
    double tau_s = prediction::kDefaultTemperatureS;
};

struct Scenario {
    std::string name = "scenario";
    std::vector<constellation::OrbitalShell> shells;
    control::Area area;
    int ue_count = 0;
    double demand_mean_bps = 20e6;
    double demand_unit_bps = 1e6;  // demand = Poisson(mean / unit) * unit
    double duration_s = 600.0;
    double time_step_s = 1.0;
    double mask_deg = constellation::kDefaultMaskDeg;
    channel::LinkParams link;
    std::uint64_t seed = 1;

    HandoverKnobs handover;
    ControlKnobs control;
    PredictionKnobs prediction;
    beamforming::AllocationOptions power;

    // Throws ErrorKind::InvalidSpec naming the offending field.
    void validate() const;
};

// JSON scenario file with units in key names. Unknown keys, missing required
// keys and out-of-range values throw ErrorKind::Parse naming the key path.
Scenario parse_scenario(const std::string& path);
Scenario parse_scenario_text(const std::string& text);

}  // namespace caas
